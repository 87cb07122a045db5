#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdrsky/image.hpp"
#include "fdrsky/io/pfm.hpp"

namespace fdrsky::io {

// Radiance RGBE (.hdr): shared-exponent 8-bit mantissas, adaptive
// run-length encoded scanlines. Reader accepts new-style RLE, old-style
// repeat runs, and flat scanlines; writer emits new-style RLE.

namespace detail {

inline void rgbe_to_float(const uint8_t rgbe[4], float* rgb) {
  if (rgbe[3] == 0) {
    rgb[0] = rgb[1] = rgb[2] = 0.f;
    return;
  }
  float f = std::ldexp(1.f, static_cast<int>(rgbe[3]) - (128 + 8));
  rgb[0] = rgbe[0] * f;
  rgb[1] = rgbe[1] * f;
  rgb[2] = rgbe[2] * f;
}

inline void float_to_rgbe(const float* rgb, uint8_t rgbe[4]) {
  float v = std::max(rgb[0], std::max(rgb[1], rgb[2]));
  if (v < 1e-32f) {
    rgbe[0] = rgbe[1] = rgbe[2] = rgbe[3] = 0;
    return;
  }
  int e;
  float m = std::frexp(v, &e);
  float scale = m * 256.f / v;
  rgbe[0] = static_cast<uint8_t>(rgb[0] * scale);
  rgbe[1] = static_cast<uint8_t>(rgb[1] * scale);
  rgbe[2] = static_cast<uint8_t>(rgb[2] * scale);
  rgbe[3] = static_cast<uint8_t>(e + 128);
}

}  // namespace detail

inline RadianceImage read_hdr(const std::filesystem::path& path,
                              std::optional<EnvFormat> format = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string where = path.string();

  std::string line;
  if (!std::getline(in, line) || (line.rfind("#?", 0) != 0))
    throw std::runtime_error(where + ": missing Radiance header");
  bool format_ok = false;
  while (std::getline(in, line)) {
    if (line.empty()) break;
    if (line.rfind("FORMAT=", 0) == 0) {
      if (line != "FORMAT=32-bit_rle_rgbe")
        throw std::runtime_error(where + ": unsupported FORMAT " + line);
      format_ok = true;
    }
  }
  if (!format_ok) throw std::runtime_error(where + ": missing FORMAT line");
  if (!std::getline(in, line)) throw std::runtime_error(where + ": missing resolution line");
  int w = 0, h = 0;
  if (std::sscanf(line.c_str(), "-Y %d +X %d", &h, &w) != 2 || w <= 0 || h <= 0)
    throw std::runtime_error(where + ": unsupported resolution line '" + line + "'");

  std::vector<float> pixels(static_cast<size_t>(w) * h * 3);
  std::vector<uint8_t> rgbe_row(static_cast<size_t>(w) * 4);

  for (int y = 0; y < h; ++y) {
    uint8_t head[4];
    in.read(reinterpret_cast<char*>(head), 4);
    if (!in) throw std::runtime_error(where + ": truncated scanline header");
    bool new_rle = head[0] == 2 && head[1] == 2 && ((head[2] << 8) | head[3]) == w && w >= 8 &&
                   w < 32768;
    if (new_rle) {
      // four separate component streams, run/dump packets
      for (int c = 0; c < 4; ++c) {
        int x = 0;
        while (x < w) {
          uint8_t code = static_cast<uint8_t>(in.get());
          if (!in) throw std::runtime_error(where + ": truncated RLE stream");
          if (code > 128) {
            int count = code - 128;
            uint8_t value = static_cast<uint8_t>(in.get());
            if (x + count > w) throw std::runtime_error(where + ": RLE run overflow");
            for (int i = 0; i < count; ++i) rgbe_row[4 * static_cast<size_t>(x + i) + c] = value;
            x += count;
          } else {
            int count = code;
            if (count == 0 || x + count > w)
              throw std::runtime_error(where + ": RLE dump overflow");
            for (int i = 0; i < count; ++i)
              rgbe_row[4 * static_cast<size_t>(x + i) + c] = static_cast<uint8_t>(in.get());
            x += count;
          }
        }
      }
    } else {
      // head already holds the first pixel of a flat/old-style scanline
      if (head[0] == 1 && head[1] == 1 && head[2] == 1)
        throw std::runtime_error(where + ": repeat marker opens a scanline");
      for (int c = 0; c < 4; ++c) rgbe_row[c] = head[c];
      int x = 1;
      int shift = 0;
      while (x < w) {
        uint8_t px[4];
        in.read(reinterpret_cast<char*>(px), 4);
        if (!in) throw std::runtime_error(where + ": truncated scanline");
        if (px[0] == 1 && px[1] == 1 && px[2] == 1) {
          int count = px[3] << shift;
          if (count <= 0 || x + count > w)
            throw std::runtime_error(where + ": corrupt old-style RLE");
          for (int i = 0; i < count; ++i)
            for (int c = 0; c < 4; ++c)
              rgbe_row[4 * static_cast<size_t>(x + i) + c] = rgbe_row[4 * (x - 1) + c];
          x += count;
          shift += 8;
        } else {
          for (int c = 0; c < 4; ++c) rgbe_row[4 * static_cast<size_t>(x) + c] = px[c];
          ++x;
          shift = 0;
        }
      }
    }
    for (int x = 0; x < w; ++x)
      detail::rgbe_to_float(&rgbe_row[4 * static_cast<size_t>(x)],
                            &pixels[3 * (static_cast<size_t>(y) * w + x)]);
  }

  EnvFormat f = format ? *format : infer_format(w, h);
  return make_radiance(f, w, h, pixels);
}

// New-style RLE writer; requires 8 <= width < 32768.
inline void write_hdr(const std::filesystem::path& path, const RadianceImage& img) {
  if (img.width < 8 || img.width >= 32768)
    throw std::invalid_argument("write_hdr: width must be in [8, 32768)");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y " << img.height << " +X " << img.width
      << "\n";

  std::vector<uint8_t> rgbe_row(static_cast<size_t>(img.width) * 4);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      detail::float_to_rgbe(img.px(x, y), &rgbe_row[4 * static_cast<size_t>(x)]);
    uint8_t head[4] = {2, 2, static_cast<uint8_t>(img.width >> 8),
                       static_cast<uint8_t>(img.width & 0xff)};
    out.write(reinterpret_cast<const char*>(head), 4);
    for (int c = 0; c < 4; ++c) {
      int x = 0;
      while (x < img.width) {
        // find a run of at least 4 identical bytes
        int run_start = x;
        int run_len = 0;
        while (run_start < img.width) {
          run_len = 1;
          uint8_t v = rgbe_row[4 * static_cast<size_t>(run_start) + c];
          while (run_start + run_len < img.width && run_len < 127 &&
                 rgbe_row[4 * static_cast<size_t>(run_start + run_len) + c] == v)
            ++run_len;
          if (run_len >= 4) break;
          run_start += run_len;
        }
        if (run_start >= img.width || run_len < 4) run_start = img.width;
        // dump literals up to the run
        int lit = run_start - x;
        while (lit > 0) {
          int n = std::min(lit, 128);
          out.put(static_cast<char>(n));
          for (int i = 0; i < n; ++i)
            out.put(static_cast<char>(rgbe_row[4 * static_cast<size_t>(x + i) + c]));
          x += n;
          lit -= n;
        }
        if (run_start < img.width) {
          out.put(static_cast<char>(128 + run_len));
          out.put(static_cast<char>(rgbe_row[4 * static_cast<size_t>(run_start) + c]));
          x = run_start + run_len;
        }
      }
    }
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace fdrsky::io
