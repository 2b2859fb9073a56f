#pragma once

// Equirectangular <-> sphere conversions, spherical rotations, and the
// tangent-plane (gnomonic) projection used for perspective crops.
//
// Conventions:
//   * pixel (i, j) has its center at continuous coordinate (i, j); the
//     left edge of the image is x = -0.5;
//   * longitude grows to the right and spans [-pi, pi), latitude is +pi/2 at
//     the top row;
//   * the unit vector of (lon, lat) is (cos lat sin lon, sin lat, cos lat cos lon),
//     i.e. y points up (gravity axis), x is the grazing axis and z looks at
//     longitude 0.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pano_roi/box.hpp"
#include "pano_roi/raster.hpp"

namespace pano_roi {

inline constexpr double kPi = std::numbers::pi;

struct SphereCoord {
  double longitude = 0.0;  // [-pi, pi)
  double latitude = 0.0;   // [-pi/2, pi/2]
};

struct PixelCoord {
  double x = 0.0;
  double y = 0.0;
};

// theta about the gravity axis, phi about the grazing axis, psi about the
// axis perpendicular to both.
struct RotationAngles {
  double theta = 0.0;  // [-pi, pi]
  double phi = 0.0;    // [-pi/2, pi/2]
  double psi = 0.0;    // [-pi, pi]

  constexpr bool operator==(const RotationAngles&) const = default;
};

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline double wrap_longitude(double lon) noexcept {
  double w = std::fmod(lon + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  w -= kPi;
  // fmod can land exactly on +pi after rounding
  return w >= kPi ? -kPi : w;
}

inline SphereCoord erp_to_sphere(PixelCoord px, ImageDims dims) {
  if (!(px.x >= 0.0 && px.x < dims.width && px.y >= 0.0 && px.y < dims.height)) {
    fail(ErrorKind::domain, "erp_to_sphere: pixel outside the image");
  }
  return {((px.x + 0.5) / dims.width - 0.5) * 2.0 * kPi,
          (0.5 - (px.y + 0.5) / dims.height) * kPi};
}

inline PixelCoord sphere_to_erp(SphereCoord c, ImageDims dims) noexcept {
  const double lon = wrap_longitude(c.longitude);
  return {(lon / (2.0 * kPi) + 0.5) * dims.width - 0.5,
          (0.5 - c.latitude / kPi) * dims.height - 0.5};
}

inline Vec3 to_unit_vector(SphereCoord c) noexcept {
  const double cl = std::cos(c.latitude);
  return {cl * std::sin(c.longitude), std::sin(c.latitude), cl * std::cos(c.longitude)};
}

inline SphereCoord from_unit_vector(const Vec3& v) noexcept {
  const double horizontal = std::hypot(v.x(), v.z());
  if (horizontal == 0.0) {
    return {0.0, v.y() >= 0.0 ? kPi / 2 : -kPi / 2};
  }
  return {wrap_longitude(std::atan2(v.x(), v.z())), std::atan2(v.y(), horizontal)};
}

inline Mat3 rotation_about_gravity(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitY()).toRotationMatrix();
}
inline Mat3 rotation_about_grazing(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitX()).toRotationMatrix();
}
inline Mat3 rotation_about_perpendicular(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
}

// R = R_gravity(theta) * R_grazing(phi) * R_perp(psi), acting on column
// vectors. This order is part of the augmentation record format.
inline Mat3 compose_rotation(const RotationAngles& a) {
  return rotation_about_gravity(a.theta) * rotation_about_grazing(a.phi) *
         rotation_about_perpendicular(a.psi);
}

// Latitude-dependent area weight cos(lat) of a pixel row.
inline double row_weight(int row, int height) noexcept {
  return std::cos((0.5 - (row + 0.5) / height) * kPi);
}

inline Raster<double> latitude_weights(ImageDims dims) {
  Raster<double> w(dims, 1);
  for (int y = 0; y < dims.height; ++y) {
    // cos is even, so compute from |lat| to keep the two hemispheres bitwise equal
    const int mirrored = std::min(y, dims.height - 1 - y);
    const double weight = row_weight(mirrored, dims.height);
    auto r = w.row(y);
    std::fill(r.begin(), r.end(), weight);
  }
  return w;
}

struct GnomonicDims {
  double plane_height = 0.0;  // physical tangent-plane extent
  double plane_width = 0.0;
  int height = 1;  // output raster size in pixels
  int width = 1;
};

// Pixels per unit tangent-plane length that match the ERP angular
// resolution at the tangent point.
inline double default_pixel_density(ImageDims dims, double radius = 1.0) {
  return dims.width / (2.0 * kPi * radius);
}

inline GnomonicDims gnomonic_dims(const RegionBox& box, ImageDims dims, double radius,
                                  double pixel_density) {
  check_box(box, dims);
  if (!(radius > 0.0) || !(pixel_density > 0.0)) {
    fail(ErrorKind::domain, "gnomonic_dims: radius and pixel density must be positive");
  }
  const double half_fov_v = static_cast<double>(box.h) / dims.height * (kPi / 2);
  const double half_fov_h = static_cast<double>(box.w) / dims.width * kPi;
  if (half_fov_v >= kPi / 2 || half_fov_h >= kPi / 2) {
    fail(ErrorKind::domain, "gnomonic_dims: field of view must be below 180 degrees");
  }
  GnomonicDims g;
  g.plane_height = 2.0 * radius * std::tan(half_fov_v);
  g.plane_width = 2.0 * radius * std::tan(half_fov_h);
  g.height = std::max(1, static_cast<int>(std::lround(g.plane_height * pixel_density)));
  g.width = std::max(1, static_cast<int>(std::lround(g.plane_width * pixel_density)));
  return g;
}

inline GnomonicDims gnomonic_dims(const RegionBox& box, ImageDims dims) {
  return gnomonic_dims(box, dims, 1.0, default_pixel_density(dims));
}

inline SphereCoord box_center(const RegionBox& box, ImageDims dims) {
  return erp_to_sphere({box.center_x() - 0.5, box.center_y() - 0.5}, dims);
}

// Perspective view of `box` on the tangent plane touching the unit sphere at
// the box center. `out` must have the aspect ratio of the tangent plane up to
// the rounding of both of its sides.
template <typename T>
Raster<T> gnomonic_project(const Raster<T>& img, const RegionBox& box, ImageDims out,
                           Interpolation mode = Interpolation::bilinear) {
  const GnomonicDims plane = gnomonic_dims(box, img.dims(), 1.0, 1.0);
  if (out.width < 1 || out.height < 1) {
    fail(ErrorKind::contract, "gnomonic_project: empty output");
  }
  const double ratio = plane.plane_width / plane.plane_height;
  const double expected_width = out.height * ratio;
  if (std::abs(out.width - expected_width) > 0.5 + 0.5 * ratio + 1e-9 * expected_width) {
    fail(ErrorKind::contract, "gnomonic_project: output aspect ratio does not match the RoI");
  }

  const SphereCoord c = box_center(box, img.dims());
  const Vec3 forward = to_unit_vector(c);
  const Vec3 right(std::cos(c.longitude), 0.0, -std::sin(c.longitude));
  const Vec3 up = forward.cross(right);  // (-sin lat sin lon, cos lat, -sin lat cos lon)

  Raster<T> result(out, img.channels());
  for (int v = 0; v < out.height; ++v) {
    const double py = (0.5 - (v + 0.5) / out.height) * plane.plane_height;
    for (int u = 0; u < out.width; ++u) {
      const double px = ((u + 0.5) / out.width - 0.5) * plane.plane_width;
      const Vec3 dir = (forward + px * right + py * up).normalized();
      const PixelCoord src = sphere_to_erp(from_unit_vector(dir), img.dims());
      for (int ch = 0; ch < img.channels(); ++ch) {
        result(u, v, ch) = static_cast<T>(sample(img, src.x, src.y, ch, mode));
      }
    }
  }
  return result;
}

template <typename T>
Raster<T> gnomonic_project(const Raster<T>& img, const RegionBox& box) {
  const GnomonicDims g = gnomonic_dims(box, img.dims());
  return gnomonic_project(img, box, ImageDims{g.width, g.height});
}

}  // namespace pano_roi
