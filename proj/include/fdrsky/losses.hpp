#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdrsky/image.hpp"
#include "fdrsky/metrics.hpp"

namespace fdrsky {

// Base metric restricted to the masked pixels. An empty mask signals a
// degenerate class (e.g. a sunless frame) and is an error.
inline double selective_loss(const std::string& base, const RadianceImage& real,
                             const RadianceImage& fake, const Mask& mask) {
  if (mask.empty_mask()) throw std::invalid_argument("selective_loss: empty mask");
  if (base == "l1") return mae(real, fake, &mask);
  if (base == "l2") return mse(real, fake, &mask);
  throw std::invalid_argument("selective_loss: unsupported base metric " + base);
}

// Generator hinge: mean ReLU(delta - p) over the batch.
inline double hinge_g(std::span<const double> preds, double delta) {
  if (preds.empty()) throw std::invalid_argument("hinge_g: empty batch");
  double acc = 0.0;
  for (double p : preds) acc += std::max(0.0, delta - p);
  return acc / static_cast<double>(preds.size());
}

// Discriminator hinge: (mean ReLU(delta - p_real) + mean ReLU(delta + p_fake)) / 2.
inline double hinge_d(std::span<const double> real_preds, std::span<const double> fake_preds,
                      double delta) {
  if (real_preds.empty() || fake_preds.empty())
    throw std::invalid_argument("hinge_d: empty batch");
  double lr = 0.0, lf = 0.0;
  for (double p : real_preds) lr += std::max(0.0, delta - p);
  for (double p : fake_preds) lf += std::max(0.0, delta + p);
  lr /= static_cast<double>(real_preds.size());
  lf /= static_cast<double>(fake_preds.size());
  return 0.5 * (lr + lf);
}

// Variance of the per-sample log ratio: mean(d^2) - mean(d)^2 with
// d = ln x - ln y. Exactly zero (up to rounding) when y = c * x.
inline double scale_invariant_loss(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("scale_invariant_loss: size mismatch");
  if (x.empty()) throw std::invalid_argument("scale_invariant_loss: empty input");
  double sum = 0.0, sum_sq = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("scale_invariant_loss: values must be strictly positive");
    double d = std::log(x[i]) - std::log(y[i]);
    sum += d;
    sum_sq += d * d;
  }
  double n = static_cast<double>(x.size());
  double mean = sum / n;
  return sum_sq / n - mean * mean;
}

inline double scale_invariant_loss(const RadianceImage& x, const RadianceImage& y) {
  if (x.width != y.width || x.height != y.height)
    throw std::invalid_argument("scale_invariant_loss: image dimensions differ");
  std::vector<double> xs, ys;
  xs.reserve(x.pixel_count() * 3);
  ys.reserve(y.pixel_count() * 3);
  for (int j = 0; j < x.height; ++j) {
    for (int i = 0; i < x.width; ++i) {
      if (!x.is_valid(i, j) || !y.is_valid(i, j)) continue;
      const float* px = x.px(i, j);
      const float* py = y.px(i, j);
      for (int c = 0; c < 3; ++c) {
        xs.push_back(px[c]);
        ys.push_back(py[c]);
      }
    }
  }
  return scale_invariant_loss(std::span<const double>(xs), std::span<const double>(ys));
}

struct BoostParams {
  double rho = 4.0;
  double theta = 0.83;  // in [0, 1]
  double gamma = 1.0;
  double beta = 0.7;
  std::optional<double> max_mean_override;

  static BoostParams defaults() { return {}; }
  static BoostParams ldr_preset() { return {8.0, 0.83, 0.5, 0.2, 8.0}; }

  void validate() const {
    if (!(theta >= 0.0 && theta <= 1.0))
      throw std::invalid_argument("boost: theta must lie in [0, 1]");
  }
};

// Batch expansion toward full dynamic range:
//   M_i  = clip01(mean_i / max_j(mean_j) - theta)     (per-image scalar)
//   I'_i = I_i + I_i * M_i * rho
//   out  = exp((I' - mean(I')) * gamma - beta)         (per channel)
// Means are valid-pixel luminance means; mean(I') is taken over the whole
// batch. The denominator max is replaced by max_mean_override when set.
inline std::vector<RadianceImage> parametric_boost(const std::vector<RadianceImage>& batch,
                                                   const BoostParams& params) {
  params.validate();
  if (batch.empty()) throw std::invalid_argument("parametric_boost: empty batch");

  auto mean_luma = [](const RadianceImage& img) {
    double acc = 0.0;
    size_t n = 0;
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        if (!img.is_valid(x, y)) continue;
        acc += luminance_at(img, x, y);
        ++n;
      }
    if (n == 0) throw std::invalid_argument("parametric_boost: image with no valid pixels");
    return acc / static_cast<double>(n);
  };

  std::vector<double> means(batch.size());
  double max_mean = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < batch.size(); ++i) {
    means[i] = mean_luma(batch[i]);
    if (!std::isfinite(means[i]))
      throw std::invalid_argument("parametric_boost: non-finite image mean");
    max_mean = std::max(max_mean, means[i]);
  }
  if (params.max_mean_override) max_mean = *params.max_mean_override;
  if (max_mean == 0.0) throw std::invalid_argument("parametric_boost: zero mean denominator");

  std::vector<RadianceImage> boosted = batch;
  std::vector<double> gains(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    double m = std::clamp(means[i] / max_mean - params.theta, 0.0, 1.0);
    gains[i] = 1.0 + m * params.rho;
    for (float& v : boosted[i].pixels) v = static_cast<float>(v * gains[i]);
  }

  // batch-wide mean luminance of the gained images; per-image sums are
  // combined in value order so the result is independent of batch order
  std::vector<double> image_sums(boosted.size(), 0.0);
  size_t primed_n = 0;
  for (size_t i = 0; i < boosted.size(); ++i) {
    const auto& img = boosted[i];
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        if (!img.is_valid(x, y)) continue;
        image_sums[i] += luminance_at(img, x, y);
        ++primed_n;
      }
  }
  std::sort(image_sums.begin(), image_sums.end());
  double primed_mean = 0.0;
  for (double s : image_sums) primed_mean += s;
  primed_mean /= static_cast<double>(primed_n);

  for (auto& img : boosted) {
    for (float& v : img.pixels)
      v = static_cast<float>(std::exp((v - primed_mean) * params.gamma - params.beta));
    img.compression.reset();
  }
  return boosted;
}

}  // namespace fdrsky
