#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "fdrsky/image.hpp"

namespace fdrsky {

namespace detail {

// Felzenszwalb-Huttenlocher 1-D squared distance transform by lower
// envelope of parabolas. Exact, O(n).
inline void dt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                  std::vector<double>& z, int n) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      int p = v[k];
      s = ((f[q] + q * static_cast<double>(q)) - (f[p] + p * static_cast<double>(p))) /
          (2.0 * q - 2.0 * p);
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = q - static_cast<double>(v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

// Exact Euclidean distance from every mask pixel to the nearest pixel
// center outside the mask; 0 on outside pixels. A mask with no outside
// pixels yields +inf entries. Uses a large finite sentinel internally so
// the parabola intersections stay NaN-free.
inline GrayscaleImage distance_field(const Mask& mask) {
  constexpr double kBig = 1e18;
  int w = mask.width, h = mask.height;
  GrayscaleImage out(w, h);
  if (w == 0 || h == 0) return out;

  std::vector<double> grid(static_cast<size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      grid[static_cast<size_t>(y) * w + x] = mask.at(x, y) ? kBig : 0.0;

  int n = std::max(w, h);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);

  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = grid[static_cast<size_t>(y) * w + x];
    detail::dt_1d(f, d, v, z, h);
    for (int y = 0; y < h; ++y) grid[static_cast<size_t>(y) * w + x] = d[y];
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = grid[static_cast<size_t>(y) * w + x];
    detail::dt_1d(f, d, v, z, w);
    for (int x = 0; x < w; ++x) grid[static_cast<size_t>(y) * w + x] = d[x];
  }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double d2 = grid[static_cast<size_t>(y) * w + x];
      out.at(x, y) = d2 >= kBig * 0.5 ? std::numeric_limits<float>::infinity()
                                      : static_cast<float>(std::sqrt(d2));
    }
  }
  return out;
}

}  // namespace fdrsky
