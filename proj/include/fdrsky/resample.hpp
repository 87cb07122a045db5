#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fdrsky/geometry.hpp"
#include "fdrsky/image.hpp"
#include "fdrsky/parallel.hpp"

namespace fdrsky {

// Area and MaxPool are restricted to exact power-of-two downsampling.
// Bilinear samples on half-pixel centers; LinearSpline interpolates the
// grid-node lattice (corner-aligned), matching spline resamplers.
enum class InterpMethod { Nearest, Bilinear, LinearSpline, Area, MaxPool };

inline std::string to_string(InterpMethod m) {
  switch (m) {
    case InterpMethod::Nearest: return "nearest";
    case InterpMethod::Bilinear: return "bilinear";
    case InterpMethod::LinearSpline: return "linear-spline";
    case InterpMethod::Area: return "area";
    case InterpMethod::MaxPool: return "max-pool";
  }
  return "unknown";
}

inline InterpMethod interp_from_string(const std::string& s) {
  if (s == "nearest") return InterpMethod::Nearest;
  if (s == "bilinear") return InterpMethod::Bilinear;
  if (s == "linear-spline" || s == "linear_spline" || s == "spline")
    return InterpMethod::LinearSpline;
  if (s == "area") return InterpMethod::Area;
  if (s == "max-pool" || s == "max_pool" || s == "maxpool") return InterpMethod::MaxPool;
  throw std::invalid_argument("unknown interpolation method: " + s);
}

namespace detail {

inline bool wraps_horizontally(EnvFormat f) { return f != EnvFormat::SkyAngular; }

inline int wrap_or_clamp_x(int x, int w, bool wrap) {
  if (wrap) {
    x %= w;
    return x < 0 ? x + w : x;
  }
  return std::clamp(x, 0, w - 1);
}

// (sx, sy) are continuous pixel-center coordinates in the source. Border
// taps are dropped and the remaining weights renormalized, so sampling
// never dilutes values with border zeros; a constant map stays constant.
inline void sample_rgb(const RadianceImage& src, double sx, double sy, InterpMethod m,
                       float* out) {
  bool wrap = wraps_horizontally(src.format);
  int w = src.width, h = src.height;
  int x0 = static_cast<int>(std::floor(sx));
  int y0 = static_cast<int>(std::floor(sy));
  double fx = sx - x0;
  double fy = sy - y0;
  int xa = wrap_or_clamp_x(x0, w, wrap);
  int xb = wrap_or_clamp_x(x0 + 1, w, wrap);
  int ya = std::clamp(y0, 0, h - 1);
  int yb = std::clamp(y0 + 1, 0, h - 1);
  struct Tap {
    int x, y;
    double weight;
  };
  Tap taps[4] = {{xa, ya, (1 - fx) * (1 - fy)},
                 {xb, ya, fx * (1 - fy)},
                 {xa, yb, (1 - fx) * fy},
                 {xb, yb, fx * fy}};
  if (m == InterpMethod::Nearest) {
    // nearest valid tap, by weight
    const Tap* best = nullptr;
    for (const Tap& t : taps)
      if (src.is_valid(t.x, t.y) && (!best || t.weight > best->weight)) best = &t;
    if (!best) {
      int x = wrap_or_clamp_x(static_cast<int>(std::lround(sx)), w, wrap);
      int y = std::clamp(static_cast<int>(std::lround(sy)), 0, h - 1);
      const float* p = src.px(x, y);
      out[0] = p[0];
      out[1] = p[1];
      out[2] = p[2];
      return;
    }
    const float* p = src.px(best->x, best->y);
    out[0] = p[0];
    out[1] = p[1];
    out[2] = p[2];
    return;
  }
  double acc[3] = {0.0, 0.0, 0.0};
  double total = 0.0;
  for (const Tap& t : taps) {
    if (!src.is_valid(t.x, t.y) || t.weight == 0.0) continue;
    const float* p = src.px(t.x, t.y);
    acc[0] += t.weight * p[0];
    acc[1] += t.weight * p[1];
    acc[2] += t.weight * p[2];
    total += t.weight;
  }
  if (total <= 0.0) {
    // every tap sits on border: fall back to the plain weighted mix
    for (const Tap& t : taps) {
      const float* p = src.px(t.x, t.y);
      acc[0] += t.weight * p[0];
      acc[1] += t.weight * p[1];
      acc[2] += t.weight * p[2];
    }
    total = 1.0;
  }
  out[0] = static_cast<float>(acc[0] / total);
  out[1] = static_cast<float>(acc[1] / total);
  out[2] = static_cast<float>(acc[2] / total);
}

inline bool sample_valid(const RadianceImage& src, double sx, double sy) {
  bool wrap = wraps_horizontally(src.format);
  int x = wrap_or_clamp_x(static_cast<int>(std::lround(sx)), src.width, wrap);
  int y = std::clamp(static_cast<int>(std::lround(sy)), 0, src.height - 1);
  return src.is_valid(x, y);
}

inline int exact_pow2_factor(int src, int dst) {
  if (dst <= 0 || src % dst != 0) return 0;
  int f = src / dst;
  return (f & (f - 1)) == 0 ? f : 0;
}

}  // namespace detail

inline RadianceImage resize(const RadianceImage& img, int target_w, int target_h,
                            InterpMethod method) {
  require_dimensions(img.format, target_w, target_h);
  if (target_w == img.width && target_h == img.height) return img;

  RadianceImage out;
  out.width = target_w;
  out.height = target_h;
  out.format = img.format;
  out.compression = img.compression;
  out.pixels.assign(static_cast<size_t>(target_w) * target_h * 3, 0.f);
  out.valid.assign(static_cast<size_t>(target_w) * target_h, 0);

  if (method == InterpMethod::Area || method == InterpMethod::MaxPool) {
    int fx = detail::exact_pow2_factor(img.width, target_w);
    int fy = detail::exact_pow2_factor(img.height, target_h);
    if (fx == 0 || fy == 0 || fx != fy) {
      throw std::invalid_argument(to_string(method) +
                                  " resize requires an exact power-of-two downsampling factor");
    }
    int f = fx;
    parallel_rows(target_h, [&](int y) {
      for (int x = 0; x < target_w; ++x) {
        float* dst = out.px(x, y);
        if (method == InterpMethod::Area) {
          // average over valid source pixels so border zeros never create
          // values below the image minimum
          double acc[3] = {0.0, 0.0, 0.0};
          int n = 0;
          for (int j = 0; j < f; ++j)
            for (int i = 0; i < f; ++i) {
              if (!img.is_valid(x * f + i, y * f + j)) continue;
              const float* p = img.px(x * f + i, y * f + j);
              acc[0] += p[0];
              acc[1] += p[1];
              acc[2] += p[2];
              ++n;
            }
          double inv = n > 0 ? 1.0 / n : 0.0;
          dst[0] = static_cast<float>(acc[0] * inv);
          dst[1] = static_cast<float>(acc[1] * inv);
          dst[2] = static_cast<float>(acc[2] * inv);
        } else {
          float m[3] = {0.f, 0.f, 0.f};
          for (int j = 0; j < f; ++j)
            for (int i = 0; i < f; ++i) {
              const float* p = img.px(x * f + i, y * f + j);
              m[0] = std::max(m[0], p[0]);
              m[1] = std::max(m[1], p[1]);
              m[2] = std::max(m[2], p[2]);
            }
          dst[0] = m[0];
          dst[1] = m[1];
          dst[2] = m[2];
        }
        // validity follows the nearest source pixel, as for other methods
        int sx = std::min(img.width - 1, x * f + f / 2);
        int sy = std::min(img.height - 1, y * f + f / 2);
        out.set_valid(x, y, img.is_valid(sx, sy));
      }
    });
    return out;
  }

  bool corner_aligned = method == InterpMethod::LinearSpline;
  double sx_scale, sy_scale;
  if (corner_aligned) {
    sx_scale = target_w > 1 ? static_cast<double>(img.width - 1) / (target_w - 1) : 0.0;
    sy_scale = target_h > 1 ? static_cast<double>(img.height - 1) / (target_h - 1) : 0.0;
  } else {
    sx_scale = static_cast<double>(img.width) / target_w;
    sy_scale = static_cast<double>(img.height) / target_h;
  }
  parallel_rows(target_h, [&](int y) {
    for (int x = 0; x < target_w; ++x) {
      double sx = corner_aligned ? x * sx_scale : (x + 0.5) * sx_scale - 0.5;
      double sy = corner_aligned ? y * sy_scale : (y + 0.5) * sy_scale - 0.5;
      detail::sample_rgb(img, sx, sy, method, out.px(x, y));
      out.set_valid(x, y, detail::sample_valid(img, sx, sy));
    }
  });
  return out;
}

// Inverse-mapped format conversion: every target pixel looks up its unit
// direction and samples the source there. Target border pixels and
// directions outside the source's domain come back zeroed and invalid.
// Refuses tonemapped inputs; compressed-space conversion distorts
// radiance and must be requested explicitly via strip_compression_tag.
inline RadianceImage convert_format(const RadianceImage& img, EnvFormat target,
                                    InterpMethod method, int target_height = 0) {
  if (img.compressed()) {
    throw std::invalid_argument("convert_format: image is tonemapped (" +
                                img.compression->describe() +
                                "); convert in linear space");
  }
  if (method == InterpMethod::Area || method == InterpMethod::MaxPool) {
    throw std::invalid_argument("convert_format: " + to_string(method) +
                                " is a downsampling filter, not a sampler");
  }
  int th = target_height > 0 ? target_height : img.height;
  int tw = 0;
  switch (target) {
    case EnvFormat::LatLong: tw = 2 * th; break;
    case EnvFormat::SkyLatLong: tw = 4 * th; break;
    case EnvFormat::SkyAngular: tw = th; break;
  }
  RadianceImage out = make_image(target, tw, th);
  parallel_rows(th, [&](int y) {
    for (int x = 0; x < tw; ++x) {
      auto dir = pixel_direction(target, tw, th, x, y);
      if (!dir) {
        out.set_valid(x, y, false);
        continue;
      }
      PixelCoord pc = direction_to_pixel(img.format, img.width, img.height, *dir);
      if (!pc.covered) {
        out.set_valid(x, y, false);
        continue;
      }
      detail::sample_rgb(img, pc.x, pc.y, method, out.px(x, y));
      out.set_valid(x, y, true);
    }
  });
  return out;
}

// Lossless pixel permutations on square rasters.
inline RadianceImage rot90(const RadianceImage& img, int quarter_turns) {
  if (img.width != img.height) {
    throw std::invalid_argument("rot90: requires a square raster");
  }
  int q = ((quarter_turns % 4) + 4) % 4;
  if (q == 0) return img;
  RadianceImage out = img;
  int n = img.width;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      // clockwise quarter turns
      int sx = x, sy = y;
      for (int i = 0; i < q; ++i) {
        int tx = sy;
        int ty = n - 1 - sx;
        sx = tx;
        sy = ty;
      }
      const float* p = img.px(sx, sy);
      float* o = out.px(x, y);
      o[0] = p[0];
      o[1] = p[1];
      o[2] = p[2];
      out.set_valid(x, y, img.is_valid(sx, sy));
    }
  }
  return out;
}

inline RadianceImage hflip(const RadianceImage& img) {
  RadianceImage out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const float* p = img.px(img.width - 1 - x, y);
      float* o = out.px(x, y);
      o[0] = p[0];
      o[1] = p[1];
      o[2] = p[2];
      out.set_valid(x, y, img.is_valid(img.width - 1 - x, y));
    }
  }
  return out;
}

// Arbitrary-angle rotation around the zenith of a SkyAngular map,
// clockwise in degrees. Quarter turns take the exact permutation path.
inline RadianceImage rotate_zenith(const RadianceImage& img, double angle_deg,
                                   InterpMethod method = InterpMethod::LinearSpline) {
  if (img.format != EnvFormat::SkyAngular) {
    throw std::invalid_argument("rotate_zenith: requires SkyAngular format");
  }
  double turns = angle_deg / 90.0;
  if (std::abs(turns - std::round(turns)) < 1e-12) {
    return rot90(img, static_cast<int>(std::llround(turns)));
  }
  double a = angle_deg * kPi / 180.0;
  double ca = std::cos(a), sa = std::sin(a);
  RadianceImage out = make_image(img.format, img.width, img.height);
  out.compression = img.compression;
  double cx = 0.5 * img.width - 0.5;
  double cy = 0.5 * img.height - 0.5;
  parallel_rows(img.height, [&](int y) {
    for (int x = 0; x < img.width; ++x) {
      if (!out.is_valid(x, y)) continue;
      // inverse of a clockwise content rotation, matching rot90
      double dx = x - cx, dy = y - cy;
      double sx = cx + ca * dx + sa * dy;
      double sy = cy - sa * dx + ca * dy;
      detail::sample_rgb(img, sx, sy, method, out.px(x, y));
    }
  });
  return zero_border(out);
}

}  // namespace fdrsky
