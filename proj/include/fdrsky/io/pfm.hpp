#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdrsky/image.hpp"

namespace fdrsky::io {

// Portable FloatMap. Header is exactly "PF\n<w> <h>\n<scale>\n" ("Pf" for
// one channel); a negative scale marks little-endian data; pixel rows are
// stored bottom-to-top. The scale magnitude is not applied to samples.

namespace detail {

inline void swap32(std::span<float> data) {
  for (float& f : data) {
    uint32_t u;
    std::memcpy(&u, &f, 4);
    u = __builtin_bswap32(u);
    std::memcpy(&f, &u, 4);
  }
}

struct PfmRaw {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;  // top row first after ingest
};

inline PfmRaw read_pfm_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  auto next_token = [&in, &path]() {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error("truncated PFM header in " + path.string());
    return tok;
  };

  std::string magic = next_token();
  int channels;
  if (magic == "PF") channels = 3;
  else if (magic == "Pf") channels = 1;
  else throw std::runtime_error(path.string() + ": not a PFM file (magic " + magic + ")");

  PfmRaw raw;
  raw.channels = channels;
  raw.width = std::stoi(next_token());
  raw.height = std::stoi(next_token());
  double scale = std::stod(next_token());
  if (raw.width <= 0 || raw.height <= 0)
    throw std::runtime_error(path.string() + ": bad PFM dimensions");
  in.get();  // single whitespace byte terminating the header

  size_t count = static_cast<size_t>(raw.width) * raw.height * channels;
  raw.data.resize(count);
  std::vector<float> row(static_cast<size_t>(raw.width) * channels);
  // stored bottom-to-top
  for (int y = raw.height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
    if (!in) throw std::runtime_error(path.string() + ": truncated PFM pixel data");
    if (scale > 0.0) swap32(row);  // big-endian source
    std::memcpy(raw.data.data() + static_cast<size_t>(y) * row.size(), row.data(),
                row.size() * 4);
  }
  return raw;
}

inline void write_pfm_raw(const std::filesystem::path& path, int width, int height,
                          int channels, const float* data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << (channels == 3 ? "PF" : "Pf") << "\n" << width << " " << height << "\n-1\n";
  size_t row_floats = static_cast<size_t>(width) * channels;
  std::vector<float> row(row_floats);
  for (int y = height - 1; y >= 0; --y) {
    std::memcpy(row.data(), data + static_cast<size_t>(y) * row_floats, row_floats * 4);
    if constexpr (std::endian::native == std::endian::big) swap32(row);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row_floats * 4));
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace detail

inline EnvFormat infer_format(int w, int h) {
  if (w == 2 * h) return EnvFormat::LatLong;
  if (w == 4 * h) return EnvFormat::SkyLatLong;
  if (w == h) return EnvFormat::SkyAngular;
  throw std::runtime_error("cannot infer environment-map format from " + std::to_string(w) +
                           "x" + std::to_string(h) + "; pass one explicitly");
}

inline RadianceImage read_pfm(const std::filesystem::path& path,
                              std::optional<EnvFormat> format = std::nullopt) {
  detail::PfmRaw raw = detail::read_pfm_raw(path);
  if (raw.channels != 3)
    throw std::runtime_error(path.string() + ": expected a 3-channel PFM");
  EnvFormat f = format ? *format : infer_format(raw.width, raw.height);
  return make_radiance(f, raw.width, raw.height, raw.data);
}

inline GrayscaleImage read_pfm_gray(const std::filesystem::path& path) {
  detail::PfmRaw raw = detail::read_pfm_raw(path);
  if (raw.channels != 1)
    throw std::runtime_error(path.string() + ": expected a 1-channel PFM");
  GrayscaleImage img(raw.width, raw.height);
  img.v = std::move(raw.data);
  return img;
}

inline void write_pfm(const std::filesystem::path& path, const RadianceImage& img) {
  detail::write_pfm_raw(path, img.width, img.height, 3, img.pixels.data());
}

inline void write_pfm(const std::filesystem::path& path, const GrayscaleImage& img) {
  detail::write_pfm_raw(path, img.width, img.height, 1, img.v.data());
}

}  // namespace fdrsky::io
