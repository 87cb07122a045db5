#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdrsky/parallel.hpp"
#include "fdrsky/tonemap.hpp"

namespace fdrsky {

// Panorama parameterizations. LatLong spans the full sphere (width = 2h),
// SkyLatLong the upper hemisphere (width = 4h), SkyAngular the upper
// hemisphere as an equidistant fisheye disk on a square raster.
enum class EnvFormat { LatLong, SkyLatLong, SkyAngular };

inline std::string to_string(EnvFormat f) {
  switch (f) {
    case EnvFormat::LatLong: return "latlong";
    case EnvFormat::SkyLatLong: return "skylatlong";
    case EnvFormat::SkyAngular: return "skyangular";
  }
  return "unknown";
}

inline EnvFormat env_format_from_string(const std::string& s) {
  if (s == "latlong") return EnvFormat::LatLong;
  if (s == "skylatlong" || s == "sky-latlong") return EnvFormat::SkyLatLong;
  if (s == "skyangular" || s == "sky-angular") return EnvFormat::SkyAngular;
  throw std::invalid_argument("unknown environment-map format: " + s);
}

inline bool dimensions_match(EnvFormat f, int w, int h) {
  if (w <= 0 || h <= 0) return false;
  switch (f) {
    case EnvFormat::LatLong: return w == 2 * h;
    case EnvFormat::SkyLatLong: return w == 4 * h;
    case EnvFormat::SkyAngular: return w == h;
  }
  return false;
}

inline void require_dimensions(EnvFormat f, int w, int h) {
  if (!dimensions_match(f, w, h)) {
    throw std::invalid_argument("dimensions " + std::to_string(w) + "x" +
                                std::to_string(h) + " violate the aspect of " +
                                to_string(f));
  }
}

// True for raster positions outside the format's image of the sphere.
// Only SkyAngular has such pixels: centers beyond the unit disk.
inline bool format_border(EnvFormat f, int w, int h, int x, int y) {
  if (f != EnvFormat::SkyAngular) return false;
  double u = (x + 0.5 - 0.5 * w) / (0.5 * w);
  double v = (y + 0.5 - 0.5 * h) / (0.5 * h);
  return u * u + v * v > 1.0;
}

struct Mask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> on;

  Mask() = default;
  Mask(int w, int h, bool fill = false)
      : width(w), height(h), on(static_cast<size_t>(w) * h, fill ? 1 : 0) {}

  bool at(int x, int y) const { return on[static_cast<size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { on[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
  size_t count() const {
    size_t n = 0;
    for (uint8_t v : on) n += v != 0;
    return n;
  }
  bool empty_mask() const { return count() == 0; }
};

struct GrayscaleImage {
  int width = 0;
  int height = 0;
  std::vector<float> v;

  GrayscaleImage() = default;
  GrayscaleImage(int w, int h, float fill = 0.f)
      : width(w), height(h), v(static_cast<size_t>(w) * h, fill) {}

  float at(int x, int y) const { return v[static_cast<size_t>(y) * width + x]; }
  float& at(int x, int y) { return v[static_cast<size_t>(y) * width + x]; }
};

// Linear RGB radiance raster in relative radiometric units. Row 0 is the
// top of the image (zenith row for LatLong/SkyLatLong). `valid` is false
// on border pixels; `compression` is engaged while the stored values are
// in a tonemapped space rather than linear radiance.
struct RadianceImage {
  int width = 0;
  int height = 0;
  EnvFormat format = EnvFormat::SkyAngular;
  std::vector<float> pixels;    // 3 channels, interleaved, row-major
  std::vector<uint8_t> valid;   // 1 per pixel, 0 = border
  std::optional<ToneMapOp> compression;

  size_t pixel_count() const { return static_cast<size_t>(width) * height; }
  float* px(int x, int y) { return pixels.data() + 3 * (static_cast<size_t>(y) * width + x); }
  const float* px(int x, int y) const {
    return pixels.data() + 3 * (static_cast<size_t>(y) * width + x);
  }
  bool is_valid(int x, int y) const {
    return valid[static_cast<size_t>(y) * width + x] != 0;
  }
  void set_valid(int x, int y, bool v) {
    valid[static_cast<size_t>(y) * width + x] = v ? 1 : 0;
  }
  bool compressed() const { return compression.has_value(); }

  Mask valid_mask() const {
    Mask m(width, height);
    m.on = valid;
    return m;
  }
};

inline RadianceImage make_image(EnvFormat f, int w, int h) {
  require_dimensions(f, w, h);
  RadianceImage img;
  img.width = w;
  img.height = h;
  img.format = f;
  img.pixels.assign(static_cast<size_t>(w) * h * 3, 0.f);
  img.valid.assign(static_cast<size_t>(w) * h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (format_border(f, w, h, x, y)) img.set_valid(x, y, false);
  return img;
}

// Ingest path for decoded files and external buffers. Radiance is
// non-negative; values in (-1e-6, 0) are treated as codec rounding and
// clamped, anything lower is rejected.
inline RadianceImage make_radiance(EnvFormat f, int w, int h, std::span<const float> data) {
  RadianceImage img = make_image(f, w, h);
  if (data.size() != img.pixels.size()) {
    throw std::invalid_argument("pixel buffer size does not match dimensions");
  }
  for (size_t i = 0; i < data.size(); ++i) {
    float v = data[i];
    if (v < 0.f) {
      if (v <= -1e-6f) {
        throw std::invalid_argument("negative radiance " + std::to_string(v) +
                                    " at sample " + std::to_string(i));
      }
      v = 0.f;
    }
    img.pixels[i] = v;
  }
  return img;
}

// BT.709 luma weights on linear RGB.
inline double luminance_at(const RadianceImage& img, int x, int y) {
  const float* p = img.px(x, y);
  return 0.2126 * p[0] + 0.7152 * p[1] + 0.0722 * p[2];
}

inline GrayscaleImage luminance(const RadianceImage& img) {
  GrayscaleImage out(img.width, img.height);
  parallel_rows(img.height, [&](int y) {
    for (int x = 0; x < img.width; ++x)
      out.at(x, y) = static_cast<float>(luminance_at(img, x, y));
  });
  return out;
}

// Captured exposure range in f-stops: log2(Ymax - Ymin + 1) over valid
// pixels. Border zeros never participate in the minimum.
inline double exposure_value(const RadianceImage& img) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (!img.is_valid(x, y)) continue;
      double v = luminance_at(img, x, y);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi >= lo)) throw std::runtime_error("exposure_value: no valid pixels");
  return std::log2(hi - lo + 1.0);
}

inline RadianceImage tonemap(const RadianceImage& img, const ToneMapOp& op) {
  if (img.compressed()) {
    throw std::invalid_argument("tonemap: image is already in " +
                                img.compression->describe() + " space");
  }
  for (float v : img.pixels) {
    if (v < 0.f) throw std::invalid_argument("tonemap: negative input " + std::to_string(v));
  }
  RadianceImage out = img;
  parallel_rows(img.height, [&](int y) {
    float* row = out.px(0, y);
    for (int i = 0; i < img.width * 3; ++i)
      row[i] = static_cast<float>(op.forward(row[i]));
  });
  out.compression = op;
  return out;
}

inline RadianceImage untonemap(const RadianceImage& img, const ToneMapOp& op) {
  RadianceImage out = img;
  for (int y = 0; y < img.height; ++y) {
    float* row = out.px(0, y);
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double v = row[3 * x + c];
        if (!op.invertible(v)) {
          throw std::domain_error("untonemap: value " + std::to_string(v) +
                                  " at pixel (" + std::to_string(x) + "," +
                                  std::to_string(y) + ") channel " + std::to_string(c) +
                                  " outside range of " + op.describe());
        }
        row[3 * x + c] = static_cast<float>(op.inverse(v));
      }
    }
  }
  out.compression.reset();
  return out;
}

inline RadianceImage untonemap(const RadianceImage& img) {
  if (!img.compressed()) throw std::invalid_argument("untonemap: image is not compressed");
  return untonemap(img, *img.compression);
}

// Escape hatches for studies that deliberately treat compressed values as
// if they were linear (and vice versa).
inline RadianceImage strip_compression_tag(RadianceImage img) {
  img.compression.reset();
  return img;
}

inline RadianceImage tag_compression(RadianceImage img, const ToneMapOp& op) {
  img.compression = op;
  return img;
}

}  // namespace fdrsky
