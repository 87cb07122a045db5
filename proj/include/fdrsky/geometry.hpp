#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fdrsky/image.hpp"

namespace fdrsky {

inline constexpr double kPi = std::numbers::pi;

// World frame: +z zenith, +y north, +x east. Azimuth is measured
// clockwise from north when looking down the zenith axis.
struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) {
  double n = norm(a);
  if (n == 0.0) throw std::invalid_argument("cannot normalize zero vector");
  return {a.x / n, a.y / n, a.z / n};
}

inline Vec3 direction_from_angles(double theta, double phi) {
  double s = std::sin(theta);
  return {s * std::sin(phi), s * std::cos(phi), std::cos(theta)};
}

// Unit direction at the center of pixel (x, y); nullopt outside the
// format's domain. LatLong row 0 is the zenith; SkyLatLong is the upper
// half of LatLong re-aspected to 4:1; SkyAngular is equidistant
// (theta = r * pi/2) with image-up as north.
inline std::optional<Vec3> pixel_direction(EnvFormat f, int w, int h, int x, int y) {
  switch (f) {
    case EnvFormat::LatLong: {
      double theta = (y + 0.5) / h * kPi;
      double phi = (x + 0.5) / w * 2.0 * kPi;
      return direction_from_angles(theta, phi);
    }
    case EnvFormat::SkyLatLong: {
      double theta = (y + 0.5) / h * 0.5 * kPi;
      double phi = (x + 0.5) / w * 2.0 * kPi;
      return direction_from_angles(theta, phi);
    }
    case EnvFormat::SkyAngular: {
      double u = (x + 0.5 - 0.5 * w) / (0.5 * w);
      double v = (y + 0.5 - 0.5 * h) / (0.5 * h);
      double r = std::hypot(u, v);
      if (r > 1.0) return std::nullopt;
      double theta = r * 0.5 * kPi;
      double phi = std::atan2(u, -v);
      return direction_from_angles(theta, phi);
    }
  }
  return std::nullopt;
}

struct PixelCoord {
  double x = 0.0;  // continuous coords where (0, 0) is the center of pixel (0, 0)
  double y = 0.0;
  bool covered = false;  // direction lies inside the format's domain
};

inline PixelCoord direction_to_pixel(EnvFormat f, int w, int h, const Vec3& dir) {
  double theta = std::acos(std::clamp(dir.z, -1.0, 1.0));
  double phi = std::atan2(dir.x, dir.y);
  if (phi < 0.0) phi += 2.0 * kPi;
  switch (f) {
    case EnvFormat::LatLong:
      return {phi / (2.0 * kPi) * w - 0.5, theta / kPi * h - 0.5, true};
    case EnvFormat::SkyLatLong: {
      bool covered = dir.z >= -1e-12;
      return {phi / (2.0 * kPi) * w - 0.5, theta / (0.5 * kPi) * h - 0.5, covered};
    }
    case EnvFormat::SkyAngular: {
      bool covered = dir.z >= -1e-12;
      double r = theta / (0.5 * kPi);
      double sp = std::sin(phi), cp = std::cos(phi);
      double u = r * sp;
      double v = -r * cp;
      return {u * 0.5 * w + 0.5 * w - 0.5, v * 0.5 * h + 0.5 * h - 0.5, covered};
    }
  }
  return {};
}

// Per-pixel solid angles in steradians; 0 on border pixels. Totals
// approach 4*pi for LatLong and 2*pi for the hemisphere formats.
struct SolidAngleMap {
  int width = 0;
  int height = 0;
  std::vector<double> omega;

  double at(int x, int y) const { return omega[static_cast<size_t>(y) * width + x]; }
  double& at(int x, int y) { return omega[static_cast<size_t>(y) * width + x]; }

  double sum() const {
    double total = 0.0;
    for (double w : omega) total += w;
    return total;
  }

  double max() const {
    double m = 0.0;
    for (double w : omega) m = std::max(m, w);
    return m;
  }
};

inline SolidAngleMap solid_angles(EnvFormat f, int w, int h) {
  require_dimensions(f, w, h);
  SolidAngleMap map;
  map.width = w;
  map.height = h;
  map.omega.assign(static_cast<size_t>(w) * h, 0.0);
  switch (f) {
    case EnvFormat::LatLong:
    case EnvFormat::SkyLatLong: {
      double theta_span = f == EnvFormat::LatLong ? kPi : 0.5 * kPi;
      double dtheta = theta_span / h;
      double dphi = 2.0 * kPi / w;
      for (int y = 0; y < h; ++y) {
        double band = std::sin((y + 0.5) * dtheta) * dtheta * dphi;
        for (int x = 0; x < w; ++x) map.at(x, y) = band;
      }
      break;
    }
    case EnvFormat::SkyAngular: {
      // sin(theta) * (pi/2) / r per unit disk area, theta = r * pi/2;
      // the r -> 0 limit is (pi/2)^2.
      double cell = (2.0 / w) * (2.0 / h);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          double u = (x + 0.5 - 0.5 * w) / (0.5 * w);
          double v = (y + 0.5 - 0.5 * h) / (0.5 * h);
          double r = std::hypot(u, v);
          if (r > 1.0) continue;
          double jac = r < 1e-12 ? (0.5 * kPi) * (0.5 * kPi)
                                 : std::sin(r * 0.5 * kPi) * (0.5 * kPi) / r;
          map.at(x, y) = jac * cell;
        }
      }
      break;
    }
  }
  return map;
}

// Solid-angle-weighted luminance total. Accumulates in 64-bit, fixed
// row-major order, so the result is independent of thread count.
inline double integrated_illumination(const RadianceImage& img, const SolidAngleMap& omega,
                                      const Mask* mask = nullptr) {
  if (omega.width != img.width || omega.height != img.height) {
    throw std::invalid_argument("integrated_illumination: solid-angle map size mismatch");
  }
  if (mask && (mask->width != img.width || mask->height != img.height)) {
    throw std::invalid_argument("integrated_illumination: mask size mismatch");
  }
  double total = 0.0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (!img.is_valid(x, y)) continue;
      if (mask && !mask->at(x, y)) continue;
      total += omega.at(x, y) * luminance_at(img, x, y);
    }
  }
  return total;
}

// Zeroes everything outside the skydome domain and marks it invalid.
// Idempotent; full-sphere LatLong images come back untouched.
inline RadianceImage zero_border(const RadianceImage& img) {
  RadianceImage out = img;
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      bool keep = out.is_valid(x, y) && !format_border(out.format, out.width, out.height, x, y);
      if (!keep) {
        float* p = out.px(x, y);
        p[0] = p[1] = p[2] = 0.f;
        out.set_valid(x, y, false);
      }
    }
  }
  return out;
}

}  // namespace fdrsky
