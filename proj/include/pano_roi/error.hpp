#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pano_roi {

// Error classes surfaced by the library. The CLI maps each kind to its own
// exit code.
enum class ErrorKind {
  domain,                   // argument outside the mathematical domain
  contract,                 // caller broke a precondition
  degenerate_input,         // e.g. an all-zero saliency map
  insufficient_candidates,  // fewer proposals than requested RoIs
  io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain error";
    case ErrorKind::contract: return "contract error";
    case ErrorKind::degenerate_input: return "degenerate input";
    case ErrorKind::insufficient_candidates: return "insufficient candidates";
    case ErrorKind::io: return "i/o error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace pano_roi
