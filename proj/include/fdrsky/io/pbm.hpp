#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdrsky/image.hpp"

namespace fdrsky::io {

// Binary PBM (P4), MSB first, 1 = mask on.
inline void write_pbm(const std::filesystem::path& path, const Mask& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P4\n" << mask.width << " " << mask.height << "\n";
  int row_bytes = (mask.width + 7) / 8;
  std::vector<uint8_t> row(static_cast<size_t>(row_bytes));
  for (int y = 0; y < mask.height; ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) row[x / 8] |= static_cast<uint8_t>(0x80 >> (x % 8));
    out.write(reinterpret_cast<const char*>(row.data()), row_bytes);
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

inline Mask read_pbm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0;
  in >> magic >> w >> h;
  if (magic != "P4" || w <= 0 || h <= 0)
    throw std::runtime_error(path.string() + ": not a binary PBM");
  in.get();
  Mask mask(w, h);
  int row_bytes = (w + 7) / 8;
  std::vector<uint8_t> row(static_cast<size_t>(row_bytes));
  for (int y = 0; y < h; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), row_bytes);
    if (!in) throw std::runtime_error(path.string() + ": truncated PBM data");
    for (int x = 0; x < w; ++x) mask.set(x, y, (row[x / 8] >> (7 - x % 8)) & 1);
  }
  return mask;
}

}  // namespace fdrsky::io
