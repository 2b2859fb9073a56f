#pragma once

#include <cstdint>
#include <string>

#include "pano_roi/geometry.hpp"
#include "pano_roi/raster.hpp"
#include "pano_roi/rng.hpp"
#include "pano_roi/saliency.hpp"

namespace pano_roi {

enum class RotationMode {
  spherical,   // all three axes
  horizontal,  // gravity axis only
};

// Reproducibility record for one augmented copy.
struct AugmentationRecord {
  std::string source_id;
  RotationAngles angles;
  std::uint64_t seed = 0;
  Interpolation interpolation = Interpolation::bilinear;
};

// Three independent uniform draws: theta in [-pi, pi], phi in [-pi/2, pi/2],
// psi in [-pi, pi]. Horizontal mode leaves phi = psi = 0.
inline RotationAngles sample_rotation(Rng& rng, RotationMode mode = RotationMode::spherical) {
  RotationAngles a;
  a.theta = uniform_real(rng, -kPi, kPi);
  if (mode == RotationMode::spherical) {
    a.phi = uniform_real(rng, -kPi / 2, kPi / 2);
    a.psi = uniform_real(rng, -kPi, kPi);
  }
  return a;
}

// Angles for copy `source_id` under `master_seed`; independent of the order
// in which a batch is processed.
inline AugmentationRecord plan_rotation(const std::string& source_id, std::uint64_t master_seed,
                                        RotationMode mode = RotationMode::spherical,
                                        Interpolation interp = Interpolation::bilinear) {
  AugmentationRecord rec;
  rec.source_id = source_id;
  rec.seed = derive_seed(master_seed, source_id);
  Rng rng(rec.seed);
  rec.angles = sample_rotation(rng, mode);
  rec.interpolation = interp;
  return rec;
}

// Resamples `src` as seen after rotating the sphere by `rotation`: every
// output pixel pulls from R^T applied to its own direction.
template <typename T>
Raster<T> rotate_erp(const Raster<T>& src, const Mat3& rotation,
                     Interpolation mode = Interpolation::bilinear) {
  const ImageDims dims = src.dims();
  const Mat3 inverse = rotation.transpose();
  Raster<T> out(dims, src.channels());
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      const Vec3 dir = inverse * to_unit_vector(erp_to_sphere({double(x), double(y)}, dims));
      const PixelCoord p = sphere_to_erp(from_unit_vector(dir), dims);
      for (int c = 0; c < src.channels(); ++c) {
        out(x, y, c) = static_cast<T>(sample(src, p.x, p.y, c, mode));
      }
    }
  }
  return out;
}

template <typename T>
Raster<T> rotate_erp(const Raster<T>& src, const RotationAngles& angles,
                     Interpolation mode = Interpolation::bilinear) {
  return rotate_erp(src, compose_rotation(angles), mode);
}

// A rotated map is no longer exactly sum-normalized, so the flag is dropped.
inline SaliencyMap rotate_erp(const SaliencyMap& src, const RotationAngles& angles,
                              Interpolation mode = Interpolation::bilinear) {
  return SaliencyMap(rotate_erp(src.values, compose_rotation(angles), mode));
}

struct AugmentedPair {
  ErpImage image;
  SaliencyMap saliency;
  AugmentationRecord record;
};

// Rotates an image and its saliency (or gaze) map by the same angles.
inline AugmentedPair augment_pair(const ErpImage& img, const SaliencyMap& sal,
                                  const AugmentationRecord& record) {
  if (img.dims() != sal.dims()) {
    fail(ErrorKind::contract, "augment_pair: image and saliency dimensions differ");
  }
  const Mat3 r = compose_rotation(record.angles);
  return {rotate_erp(img, r, record.interpolation),
          SaliencyMap(rotate_erp(sal.values, r, record.interpolation)), record};
}

inline AugmentedPair augment_pair(const ErpImage& img, const SaliencyMap& sal,
                                  const RotationAngles& angles,
                                  Interpolation mode = Interpolation::bilinear) {
  AugmentationRecord rec;
  rec.angles = angles;
  rec.interpolation = mode;
  return augment_pair(img, sal, rec);
}

}  // namespace pano_roi
