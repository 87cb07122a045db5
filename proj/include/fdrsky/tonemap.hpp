#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdrsky {

// Invertible intensity compression curves. Every variant is a strict
// monotone bijection on [0, inf) — strictly decreasing for Inverted,
// strictly increasing otherwise. All evaluation is in 64-bit regardless
// of image storage precision.
enum class ToneKind {
  Identity,
  Gamma,       // I^(1/gamma)
  LogN,        // log_n(I + 1)
  MuLaw,       // ln(1 + mu*I) / ln(1 + mu)
  MuLawLog2,   // log2(mu-law + 1)
  NaturalLog,  // (ln(I + eps) + beta) * alpha
  Inverted,    // 1 / (1 + I + offset)
};

struct ToneMapOp {
  ToneKind kind = ToneKind::Identity;
  double gamma = 2.2;
  double log_base = 2.0;
  double mu = 5000.0;
  double alpha = 0.22;
  double beta = 2.5;
  double epsilon = 1e-3;
  double offset = 0.01;

  static ToneMapOp identity() { return {}; }

  static ToneMapOp power_law(double g) {
    if (!(g > 0.0)) throw std::invalid_argument("tonemap: gamma must be > 0");
    ToneMapOp op;
    op.kind = ToneKind::Gamma;
    op.gamma = g;
    return op;
  }

  static ToneMapOp log_n(double base) {
    if (!(base > 1.0)) throw std::invalid_argument("tonemap: log base must be > 1");
    ToneMapOp op;
    op.kind = ToneKind::LogN;
    op.log_base = base;
    return op;
  }

  static ToneMapOp mu_law(double mu_value) {
    if (!(mu_value > 0.0)) throw std::invalid_argument("tonemap: mu must be > 0");
    ToneMapOp op;
    op.kind = ToneKind::MuLaw;
    op.mu = mu_value;
    return op;
  }

  static ToneMapOp mu_law_log2(double mu_value) {
    if (!(mu_value > 0.0)) throw std::invalid_argument("tonemap: mu must be > 0");
    ToneMapOp op;
    op.kind = ToneKind::MuLawLog2;
    op.mu = mu_value;
    return op;
  }

  static ToneMapOp natural_log(double a = 0.22, double b = 2.5, double eps = 1e-3) {
    if (!(a > 0.0) || !(eps > 0.0))
      throw std::invalid_argument("tonemap: natural-log needs alpha > 0 and eps > 0");
    ToneMapOp op;
    op.kind = ToneKind::NaturalLog;
    op.alpha = a;
    op.beta = b;
    op.epsilon = eps;
    return op;
  }

  static ToneMapOp inverted(double off = 0.01) {
    if (!(off >= 0.0)) throw std::invalid_argument("tonemap: offset must be >= 0");
    ToneMapOp op;
    op.kind = ToneKind::Inverted;
    op.offset = off;
    return op;
  }

  bool increasing() const { return kind != ToneKind::Inverted; }

  double forward(double x) const {
    switch (kind) {
      case ToneKind::Identity:
        return x;
      case ToneKind::Gamma:
        return std::pow(x, 1.0 / gamma);
      case ToneKind::LogN:
        return std::log1p(x) / std::log(log_base);
      case ToneKind::MuLaw:
        return std::log1p(mu * x) / std::log1p(mu);
      case ToneKind::MuLawLog2:
        return std::log2(std::log1p(mu * x) / std::log1p(mu) + 1.0);
      case ToneKind::NaturalLog:
        return (std::log(x + epsilon) + beta) * alpha;
      case ToneKind::Inverted:
        return 1.0 / (1.0 + x + offset);
    }
    return x;
  }

  // Whether y lies in the image of [0, inf) under forward().
  bool invertible(double y) const {
    switch (kind) {
      case ToneKind::Identity:
      case ToneKind::Gamma:
      case ToneKind::LogN:
      case ToneKind::MuLaw:
      case ToneKind::MuLawLog2:
        return y >= 0.0;
      case ToneKind::NaturalLog:
        return y >= (std::log(epsilon) + beta) * alpha;
      case ToneKind::Inverted:
        return y > 0.0 && y <= 1.0 / (1.0 + offset);
    }
    return false;
  }

  double inverse(double y) const {
    if (!invertible(y)) {
      throw std::domain_error("tonemap: value " + std::to_string(y) +
                              " outside invertible range of " + name());
    }
    double x = 0.0;
    switch (kind) {
      case ToneKind::Identity:
        x = y;
        break;
      case ToneKind::Gamma:
        x = std::pow(y, gamma);
        break;
      case ToneKind::LogN:
        x = std::expm1(y * std::log(log_base));
        break;
      case ToneKind::MuLaw:
        x = std::expm1(y * std::log1p(mu)) / mu;
        break;
      case ToneKind::MuLawLog2:
        x = std::expm1(std::expm1(y * std::log(2.0)) * std::log1p(mu)) / mu;
        break;
      case ToneKind::NaturalLog:
        x = std::exp(y / alpha - beta) - epsilon;
        break;
      case ToneKind::Inverted:
        x = 1.0 / y - (1.0 + offset);
        break;
    }
    // Round-trips of 0 may land a few ulps below zero.
    if (x < 0.0) x = 0.0;
    return x;
  }

  std::string name() const {
    switch (kind) {
      case ToneKind::Identity: return "identity";
      case ToneKind::Gamma: return "gamma";
      case ToneKind::LogN: return "logn";
      case ToneKind::MuLaw: return "mulaw";
      case ToneKind::MuLawLog2: return "mulawlog2";
      case ToneKind::NaturalLog: return "naturallog";
      case ToneKind::Inverted: return "inverted";
    }
    return "unknown";
  }

  std::string describe() const {
    switch (kind) {
      case ToneKind::Identity: return "identity";
      case ToneKind::Gamma: return "gamma(" + std::to_string(gamma) + ")";
      case ToneKind::LogN: return "logn(" + std::to_string(log_base) + ")";
      case ToneKind::MuLaw: return "mulaw(" + std::to_string(mu) + ")";
      case ToneKind::MuLawLog2: return "mulawlog2(" + std::to_string(mu) + ")";
      case ToneKind::NaturalLog:
        return "naturallog(" + std::to_string(alpha) + "," + std::to_string(beta) +
               "," + std::to_string(epsilon) + ")";
      case ToneKind::Inverted: return "inverted(" + std::to_string(offset) + ")";
    }
    return "unknown";
  }
};

inline bool operator==(const ToneMapOp& a, const ToneMapOp& b) {
  return a.kind == b.kind && a.gamma == b.gamma && a.log_base == b.log_base &&
         a.mu == b.mu && a.alpha == b.alpha && a.beta == b.beta &&
         a.epsilon == b.epsilon && a.offset == b.offset;
}

struct ProfilePoint {
  double intensity = 0.0;
  double delta = 0.0;  // uncompressed-space error for the fixed compressed-space error
};

// For each intensity I, the linear-space error produced by a fixed error
// delta in compressed space: |I - inverse(forward(I) - delta)|. When the
// perturbed value leaves the invertible range, the recovered intensity
// saturates at zero and the error is reported as I itself.
inline std::vector<ProfilePoint> nonlinearity_profile(const ToneMapOp& op, double delta,
                                                      const std::vector<double>& intensities) {
  if (!(delta > 0.0)) throw std::invalid_argument("nonlinearity_profile: delta must be > 0");
  std::vector<ProfilePoint> out;
  out.reserve(intensities.size());
  for (double intensity : intensities) {
    double perturbed = op.forward(intensity) - delta;
    double err = op.invertible(perturbed)
                     ? std::abs(intensity - op.inverse(perturbed))
                     : intensity;
    out.push_back({intensity, err});
  }
  return out;
}

// Affine shift between [0,1]-centered compressed space and [-1,1]. Never
// clips; out-of-range values pass through shifted.
inline double shift_to_signed(double y) { return 2.0 * y - 1.0; }
inline double shift_from_signed(double y) { return (y + 1.0) * 0.5; }

}  // namespace fdrsky
