#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

namespace fdrsky {

// 2-D gradient (Perlin) noise. The permutation table is derived from the
// seed with an explicit Fisher-Yates pass over mt19937_64 output, so the
// field is bit-identical across platforms and standard libraries.
class PerlinNoise2D {
 public:
  explicit PerlinNoise2D(uint64_t seed) {
    for (int i = 0; i < 256; ++i) perm_[i] = static_cast<uint8_t>(i);
    std::mt19937_64 rng(seed);
    for (int i = 255; i > 0; --i) {
      uint64_t j = rng() % static_cast<uint64_t>(i + 1);
      std::swap(perm_[i], perm_[j]);
    }
    for (int i = 0; i < 256; ++i) perm_[256 + i] = perm_[i];
  }

  // Single octave, range within [-1, 1].
  double noise(double x, double y) const {
    int xi = fast_floor(x);
    int yi = fast_floor(y);
    double xf = x - xi;
    double yf = y - yi;
    int x0 = xi & 255, y0 = yi & 255;

    double u = fade(xf);
    double v = fade(yf);

    double n00 = grad(hash(x0, y0), xf, yf);
    double n10 = grad(hash(x0 + 1, y0), xf - 1.0, yf);
    double n01 = grad(hash(x0, y0 + 1), xf, yf - 1.0);
    double n11 = grad(hash(x0 + 1, y0 + 1), xf - 1.0, yf - 1.0);

    double nx0 = n00 + u * (n10 - n00);
    double nx1 = n01 + u * (n11 - n01);
    return nx0 + v * (nx1 - nx0);
  }

  // Octave sum with the given persistence, normalized back to ~[-1, 1].
  double fbm(double x, double y, int octaves, double persistence) const {
    double total = 0.0, amplitude = 1.0, frequency = 1.0, weight = 0.0;
    for (int o = 0; o < octaves; ++o) {
      total += amplitude * noise(x * frequency, y * frequency);
      weight += amplitude;
      amplitude *= persistence;
      frequency *= 2.0;
    }
    return weight > 0.0 ? total / weight : 0.0;
  }

 private:
  static int fast_floor(double t) {
    int i = static_cast<int>(t);
    return t < i ? i - 1 : i;
  }

  static double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

  int hash(int x, int y) const { return perm_[perm_[x & 255] + (y & 255)]; }

  static double grad(int h, double x, double y) {
    switch (h & 7) {
      case 0: return x + y;
      case 1: return x - y;
      case 2: return -x + y;
      case 3: return -x - y;
      case 4: return x;
      case 5: return -x;
      case 6: return y;
      default: return -y;
    }
  }

  std::array<uint8_t, 512> perm_{};
};

}  // namespace fdrsky
