#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fdrsky/distance.hpp"
#include "fdrsky/geometry.hpp"
#include "fdrsky/image.hpp"
#include "fdrsky/noise.hpp"
#include "fdrsky/solar.hpp"

namespace fdrsky {

struct LabelConfig {
  int erosion_kernel = 15;        // circular brush diameter in pixels, odd, >= 1
  double cloud_tau = 0.30;        // blue-red ratio threshold, in (-1, 1)
  double sun_diameter_deg = 5.0;  // masked solar region, disk plus corona
  uint64_t perlin_seed = 0;
  double perlin_frequency = 1.0 / 64.0;  // cycles per pixel
  int perlin_octaves = 3;
  double perlin_persistence = 0.5;

  void validate() const {
    if (erosion_kernel < 1 || erosion_kernel % 2 == 0)
      throw std::invalid_argument("erosion kernel must be odd and >= 1");
    if (!(cloud_tau > -1.0 && cloud_tau < 1.0))
      throw std::invalid_argument("cloud threshold must lie in (-1, 1)");
    if (!(sun_diameter_deg > 0.0))
      throw std::invalid_argument("sun diameter must be > 0");
    if (perlin_octaves < 1) throw std::invalid_argument("perlin octaves must be >= 1");
  }
};

// Optional refinement of an ephemeris position toward the observed solar
// centroid: the luminance-weighted mean direction over pixels within
// max_deviation_deg of the prediction. Falls back to the input when the
// search cone is empty or dark.
inline SunPosition snap_to_centroid(const SunPosition& sun, const RadianceImage& img,
                                    double max_deviation_deg = 2.0) {
  double cos_limit = std::cos(max_deviation_deg * kPi / 180.0);
  Vec3 acc{0.0, 0.0, 0.0};
  double weight = 0.0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (!img.is_valid(x, y)) continue;
      auto dir = pixel_direction(img.format, img.width, img.height, x, y);
      if (!dir || dot(*dir, sun.direction) < cos_limit) continue;
      double lum = luminance_at(img, x, y);
      acc.x += lum * dir->x;
      acc.y += lum * dir->y;
      acc.z += lum * dir->z;
      weight += lum;
    }
  }
  if (weight <= 0.0 || norm(acc) == 0.0) return sun;
  Vec3 dir = normalized(acc);
  SunPosition out;
  out.direction = dir;
  out.elevation_deg = std::asin(std::clamp(dir.z, -1.0, 1.0)) * 180.0 / kPi;
  out.azimuth_deg = std::atan2(dir.x, dir.y) * 180.0 / kPi;
  if (out.azimuth_deg < 0.0) out.azimuth_deg += 360.0;
  return out;
}

// Pixels whose direction lies within diameter/2 of the sun direction.
inline Mask sun_mask(const SunPosition& sun, EnvFormat format, int w, int h,
                     double diameter_deg) {
  if (!(diameter_deg > 0.0)) throw std::invalid_argument("sun diameter must be > 0");
  require_dimensions(format, w, h);
  double cos_limit = std::cos(0.5 * diameter_deg * kPi / 180.0);
  Mask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto dir = pixel_direction(format, w, h, x, y);
      if (dir && dot(*dir, sun.direction) >= cos_limit) m.set(x, y, true);
    }
  }
  return m;
}

// Blue-red colour ratio (B - R) / (B + R) per pixel, in [-1, 1]; zero
// where B + R vanishes. Meant for tonemapped input: clear sky reads near
// +1, clouds near 0.
inline GrayscaleImage cloud_ratio(const RadianceImage& img) {
  GrayscaleImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const float* p = img.px(x, y);
      double r = p[0], b = p[2];
      double denom = b + r;
      out.at(x, y) = denom == 0.0 ? 0.f : static_cast<float>((b - r) / denom);
    }
  }
  return out;
}

// The ratio is calibrated against mu-law-log2 compressed values; other
// spaces work but shift the threshold.
inline bool cloud_ratio_input_recommended(const RadianceImage& img) {
  return img.compressed() && img.compression->kind == ToneKind::MuLawLog2;
}

namespace detail {

// border_value: what lies outside the raster. Dilation always uses false;
// speckle-removing erosion pads with true so the image edge is not eaten,
// the hand-drawn brush pads with false so edges erode like any boundary.
inline Mask morph(const Mask& m, bool dilate_pass, const std::vector<std::pair<int, int>>& se,
                  bool border_value) {
  Mask out(m.width, m.height);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      bool hit = !dilate_pass;  // erosion: all; dilation: any
      for (auto [dx, dy] : se) {
        int nx = x + dx, ny = y + dy;
        bool inside = nx >= 0 && nx < m.width && ny >= 0 && ny < m.height;
        bool v = inside ? m.at(nx, ny) : border_value;
        if (dilate_pass) {
          if (v) { hit = true; break; }
        } else if (!v) {
          hit = false;
          break;
        }
      }
      out.set(x, y, hit);
    }
  }
  return out;
}

inline std::vector<std::pair<int, int>> square3() {
  std::vector<std::pair<int, int>> se;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) se.emplace_back(dx, dy);
  return se;
}

inline std::vector<std::pair<int, int>> disc(int diameter) {
  int r = (diameter - 1) / 2;
  std::vector<std::pair<int, int>> se;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      if (dx * dx + dy * dy <= r * r) se.emplace_back(dx, dy);
  return se;
}

}  // namespace detail

inline Mask erode(const Mask& m, const std::vector<std::pair<int, int>>& se,
                  bool border_value = true) {
  return detail::morph(m, false, se, border_value);
}
inline Mask dilate(const Mask& m, const std::vector<std::pair<int, int>>& se) {
  return detail::morph(m, true, se, false);
}
inline Mask morph_open3(const Mask& m) {
  auto se = detail::square3();
  return dilate(erode(m, se), se);
}
inline Mask morph_close3(const Mask& m) {
  auto se = detail::square3();
  return erode(dilate(m, se), se);
}

// Erosion by a circular brush of the given diameter; 1 is the identity.
// The raster edge erodes like any other boundary.
inline Mask erode_disc(const Mask& m, int diameter) {
  if (diameter < 1 || diameter % 2 == 0)
    throw std::invalid_argument("erosion brush diameter must be odd and >= 1");
  if (diameter == 1) return m;
  return erode(m, detail::disc(diameter), false);
}

// Threshold + 3x3 open/close gives the "crude" mask; the circular brush
// then erodes it toward a hand-drawn sketch.
inline Mask cloud_mask(const GrayscaleImage& ratio, const LabelConfig& cfg,
                       const Mask& sky_valid) {
  cfg.validate();
  if (ratio.width != sky_valid.width || ratio.height != sky_valid.height)
    throw std::invalid_argument("cloud_mask: ratio/valid size mismatch");
  Mask candidate(ratio.width, ratio.height);
  for (int y = 0; y < ratio.height; ++y)
    for (int x = 0; x < ratio.width; ++x)
      candidate.set(x, y, sky_valid.at(x, y) && ratio.at(x, y) < cfg.cloud_tau);
  Mask crude = morph_close3(morph_open3(candidate));
  return erode_disc(crude, cfg.erosion_kernel);
}

// Class masks before precedence resolution; sun and cloud may overlap.
// Compositing order is border > sun > cloud > skydome.
struct SegmentationMaps {
  Mask sun, cloud, skydome, border;

  int width() const { return border.width; }
  int height() const { return border.height; }
};

inline SegmentationMaps segment(const RadianceImage& compressed, const SunPosition& sun,
                                const LabelConfig& cfg) {
  cfg.validate();
  int w = compressed.width, h = compressed.height;
  SegmentationMaps maps;
  maps.border = Mask(w, h);
  Mask sky_valid(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool v = compressed.is_valid(x, y);
      maps.border.set(x, y, !v);
      sky_valid.set(x, y, v);
    }
  }
  maps.sun = sun_mask(sun, compressed.format, w, h, cfg.sun_diameter_deg);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (!sky_valid.at(x, y)) maps.sun.set(x, y, false);
  maps.cloud = cloud_mask(cloud_ratio(compressed), cfg, sky_valid);
  maps.skydome = Mask(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      maps.skydome.set(x, y,
                       sky_valid.at(x, y) && !maps.sun.at(x, y) && !maps.cloud.at(x, y));
  return maps;
}

// 1-channel class codes: 0 border, 1 skydome, 2 cloud, 3 sun.
struct DiscreteLabel {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> codes;

  uint8_t at(int x, int y) const { return codes[static_cast<size_t>(y) * width + x]; }
};

inline DiscreteLabel discrete_label(const SegmentationMaps& maps) {
  int w = maps.width(), h = maps.height();
  auto same = [&](const Mask& m) { return m.width == w && m.height == h; };
  if (!same(maps.sun) || !same(maps.cloud) || !same(maps.skydome) || !same(maps.border))
    throw std::invalid_argument("discrete_label: mask dimension mismatch");
  DiscreteLabel label;
  label.width = w;
  label.height = h;
  label.codes.assign(static_cast<size_t>(w) * h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      uint8_t code = 1;
      if (maps.border.at(x, y)) code = 0;
      else if (maps.sun.at(x, y)) code = 3;
      else if (maps.cloud.at(x, y)) code = 2;
      label.codes[static_cast<size_t>(y) * w + x] = code;
    }
  }
  return label;
}

// Channel 0: cosine similarity to the sun inside the sun mask.
// Channel 1: solid angle normalized by its maximum, over skydome+cloud.
// Channel 2: cloud distance field in [0, 1] modulated by Perlin noise
//            remapped to [0.5, 1]. Deterministic for a fixed seed.
struct ContinuousLabel {
  int width = 0;
  int height = 0;
  std::vector<float> ch;  // 3 channels interleaved

  const float* at(int x, int y) const {
    return ch.data() + 3 * (static_cast<size_t>(y) * width + x);
  }
};

inline ContinuousLabel continuous_label(const SegmentationMaps& maps, EnvFormat format,
                                        const SunPosition& sun, const SolidAngleMap& omega,
                                        const LabelConfig& cfg) {
  cfg.validate();
  DiscreteLabel resolved = discrete_label(maps);  // reuses the dimension checks
  int w = maps.width(), h = maps.height();
  if (omega.width != w || omega.height != h)
    throw std::invalid_argument("continuous_label: solid-angle map size mismatch");

  ContinuousLabel label;
  label.width = w;
  label.height = h;
  label.ch.assign(static_cast<size_t>(w) * h * 3, 0.f);

  double omega_max = omega.max();
  GrayscaleImage dist = distance_field(maps.cloud);
  float dist_max = 0.f;
  for (float d : dist.v)
    if (std::isfinite(d)) dist_max = std::max(dist_max, d);

  PerlinNoise2D perlin(cfg.perlin_seed);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float* px = label.ch.data() + 3 * (static_cast<size_t>(y) * w + x);
      uint8_t code = resolved.at(x, y);
      if (code == 3) {
        auto dir = pixel_direction(format, w, h, x, y);
        if (dir) px[0] = static_cast<float>(std::max(0.0, dot(*dir, sun.direction)));
      }
      if (code == 1 || code == 2) {
        px[1] = omega_max > 0.0 ? static_cast<float>(omega.at(x, y) / omega_max) : 0.f;
      }
      if (code == 2) {
        double d = dist.at(x, y);
        double field = dist_max > 0.f && std::isfinite(d) ? d / dist_max : 1.0;
        double n = perlin.fbm(x * cfg.perlin_frequency, y * cfg.perlin_frequency,
                              cfg.perlin_octaves, cfg.perlin_persistence);
        double mod = std::clamp(0.75 + 0.25 * n, 0.5, 1.0);
        px[2] = static_cast<float>(field * mod);
      }
    }
  }
  return label;
}

}  // namespace fdrsky
