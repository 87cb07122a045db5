#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdrsky/geometry.hpp"
#include "fdrsky/image.hpp"

namespace fdrsky {

namespace detail {

inline void require_same_size(const RadianceImage& a, const RadianceImage& b,
                              const char* what) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument(std::string(what) + ": image dimensions differ");
}

// Pixels participating in pixelwise statistics: valid in both images and
// selected by the mask when one is given.
inline bool stat_pixel(const RadianceImage& a, const RadianceImage& b, const Mask* mask,
                       int x, int y) {
  if (!a.is_valid(x, y) || !b.is_valid(x, y)) return false;
  return !mask || mask->at(x, y);
}

}  // namespace detail

inline double mae(const RadianceImage& a, const RadianceImage& b, const Mask* mask = nullptr) {
  detail::require_same_size(a, b, "mae");
  double acc = 0.0;
  size_t n = 0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (!detail::stat_pixel(a, b, mask, x, y)) continue;
      const float* pa = a.px(x, y);
      const float* pb = b.px(x, y);
      for (int c = 0; c < 3; ++c) acc += std::abs(static_cast<double>(pa[c]) - pb[c]);
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("mae: empty mask");
  return acc / (3.0 * n);
}

inline double mse(const RadianceImage& a, const RadianceImage& b, const Mask* mask = nullptr) {
  detail::require_same_size(a, b, "mse");
  double acc = 0.0;
  size_t n = 0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (!detail::stat_pixel(a, b, mask, x, y)) continue;
      const float* pa = a.px(x, y);
      const float* pb = b.px(x, y);
      for (int c = 0; c < 3; ++c) {
        double d = static_cast<double>(pa[c]) - pb[c];
        acc += d * d;
      }
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("mse: empty mask");
  return acc / (3.0 * n);
}

// Raw channel range of the reference image over its valid pixels; the
// default data range for PSNR.
inline double data_range_channels(const RadianceImage& a) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (!a.is_valid(x, y)) continue;
      const float* p = a.px(x, y);
      for (int c = 0; c < 3; ++c) {
        lo = std::min(lo, static_cast<double>(p[c]));
        hi = std::max(hi, static_cast<double>(p[c]));
      }
    }
  }
  return hi > lo ? hi - lo : 0.0;
}

inline double data_range_luminance(const RadianceImage& a) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (!a.is_valid(x, y)) continue;
      double v = luminance_at(a, x, y);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return hi > lo ? hi - lo : 0.0;
}

// 10 * log_base(R^2 / MSE); +inf when the images agree exactly.
inline double psnr(const RadianceImage& a, const RadianceImage& b, double base,
                   double data_range, const Mask* mask = nullptr) {
  if (!(data_range > 0.0)) throw std::invalid_argument("psnr: data range must be > 0");
  if (!(base > 1.0)) throw std::invalid_argument("psnr: log base must be > 1");
  double m = mse(a, b, mask);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log(data_range * data_range / m) / std::log(base);
}

namespace detail {

inline std::vector<double> gaussian_kernel_11() {
  std::vector<double> k(11);
  double sigma = 1.5, sum = 0.0;
  for (int i = 0; i < 11; ++i) {
    double d = i - 5.0;
    k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

struct LumaGrid {
  int w = 0, h = 0;
  std::vector<double> v;
  double at(int x, int y) const { return v[static_cast<size_t>(y) * w + x]; }
};

inline LumaGrid luma_grid(const RadianceImage& img) {
  LumaGrid g;
  g.w = img.width;
  g.h = img.height;
  g.v.resize(static_cast<size_t>(g.w) * g.h);
  for (int y = 0; y < g.h; ++y)
    for (int x = 0; x < g.w; ++x) g.v[static_cast<size_t>(y) * g.w + x] = luminance_at(img, x, y);
  return g;
}

// Separable Gaussian filter, valid region only (output is (w-10)x(h-10)).
inline LumaGrid gauss_valid(const LumaGrid& g, const std::vector<double>& k) {
  LumaGrid tmp;
  tmp.w = g.w - 10;
  tmp.h = g.h;
  tmp.v.resize(static_cast<size_t>(tmp.w) * tmp.h);
  for (int y = 0; y < g.h; ++y) {
    for (int x = 0; x < tmp.w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < 11; ++i) acc += k[i] * g.at(x + i, y);
      tmp.v[static_cast<size_t>(y) * tmp.w + x] = acc;
    }
  }
  LumaGrid out;
  out.w = tmp.w;
  out.h = g.h - 10;
  out.v.resize(static_cast<size_t>(out.w) * out.h);
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < 11; ++i) acc += k[i] * tmp.at(x, y + i);
      out.v[static_cast<size_t>(y) * out.w + x] = acc;
    }
  }
  return out;
}

inline LumaGrid grid_mul(const LumaGrid& a, const LumaGrid& b) {
  LumaGrid out = a;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] *= b.v[i];
  return out;
}

inline LumaGrid half_scale(const LumaGrid& g) {
  LumaGrid out;
  out.w = g.w / 2;
  out.h = g.h / 2;
  out.v.resize(static_cast<size_t>(out.w) * out.h);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x)
      out.v[static_cast<size_t>(y) * out.w + x] =
          0.25 * (g.at(2 * x, 2 * y) + g.at(2 * x + 1, 2 * y) + g.at(2 * x, 2 * y + 1) +
                  g.at(2 * x + 1, 2 * y + 1));
  return out;
}

struct SsimTerms {
  double ssim = 0.0;  // mean of luminance * contrast-structure
  double cs = 0.0;    // mean contrast-structure term alone
};

inline SsimTerms ssim_terms(const LumaGrid& x, const LumaGrid& y, double data_range) {
  if (x.w < 11 || x.h < 11)
    throw std::invalid_argument("ssim: images must be at least 11x11");
  double c1 = (0.01 * data_range) * (0.01 * data_range);
  double c2 = (0.03 * data_range) * (0.03 * data_range);
  auto k = gaussian_kernel_11();
  LumaGrid mx = gauss_valid(x, k);
  LumaGrid my = gauss_valid(y, k);
  LumaGrid mxx = gauss_valid(grid_mul(x, x), k);
  LumaGrid myy = gauss_valid(grid_mul(y, y), k);
  LumaGrid mxy = gauss_valid(grid_mul(x, y), k);
  double ssim_acc = 0.0, cs_acc = 0.0;
  for (size_t i = 0; i < mx.v.size(); ++i) {
    double mux = mx.v[i], muy = my.v[i];
    double sxx = mxx.v[i] - mux * mux;
    double syy = myy.v[i] - muy * muy;
    double sxy = mxy.v[i] - mux * muy;
    double lum = (2.0 * mux * muy + c1) / (mux * mux + muy * muy + c1);
    double cs = (2.0 * sxy + c2) / (sxx + syy + c2);
    ssim_acc += lum * cs;
    cs_acc += cs;
  }
  double n = static_cast<double>(mx.v.size());
  return {ssim_acc / n, cs_acc / n};
}

}  // namespace detail

// Structural similarity on BT.709 luminance, 11x11 Gaussian window,
// K1 = 0.01, K2 = 0.03. data_range <= 0 selects the reference's range.
inline double ssim(const RadianceImage& a, const RadianceImage& b, double data_range = 0.0) {
  detail::require_same_size(a, b, "ssim");
  if (data_range <= 0.0) data_range = data_range_luminance(a);
  if (data_range <= 0.0) data_range = 1.0;
  return detail::ssim_terms(detail::luma_grid(a), detail::luma_grid(b), data_range).ssim;
}

// Canonical five-scale multi-scale SSIM.
inline double ms_ssim(const RadianceImage& a, const RadianceImage& b, double data_range = 0.0) {
  detail::require_same_size(a, b, "ms_ssim");
  static const double weights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  if (a.width < 176 || a.height < 176)
    throw std::invalid_argument("ms_ssim: images must be at least 176x176 for 5 scales");
  if (data_range <= 0.0) data_range = data_range_luminance(a);
  if (data_range <= 0.0) data_range = 1.0;
  detail::LumaGrid x = detail::luma_grid(a);
  detail::LumaGrid y = detail::luma_grid(b);
  double result = 1.0;
  for (int s = 0; s < 5; ++s) {
    auto terms = detail::ssim_terms(x, y, data_range);
    double factor = s == 4 ? terms.ssim : terms.cs;
    factor = std::max(factor, 0.0);
    result *= std::pow(factor, weights[s]);
    if (s < 4) {
      x = detail::half_scale(x);
      y = detail::half_scale(y);
    }
  }
  return result;
}

// Wasserstein-1 distance between the luminance sample distributions:
// mean absolute difference of the sorted samples.
inline double emd(const RadianceImage& a, const RadianceImage& b) {
  detail::require_same_size(a, b, "emd");
  std::vector<double> sa, sb;
  sa.reserve(a.pixel_count());
  sb.reserve(b.pixel_count());
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (!a.is_valid(x, y) || !b.is_valid(x, y)) continue;
      sa.push_back(luminance_at(a, x, y));
      sb.push_back(luminance_at(b, x, y));
    }
  }
  if (sa.empty()) return 0.0;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double acc = 0.0;
  for (size_t i = 0; i < sa.size(); ++i) acc += std::abs(sa[i] - sb[i]);
  return acc / static_cast<double>(sa.size());
}

// Exposure-range distance in linear intensity: |2^a - 2^b|.
inline double ev_distance(double ev_a, double ev_b) {
  if (ev_a < 0.0 || ev_b < 0.0) throw std::invalid_argument("ev_distance: EVs must be >= 0");
  return std::abs(std::exp2(ev_a) - std::exp2(ev_b));
}

inline double ii_distance(double ii_a, double ii_b) { return std::abs(ii_a - ii_b); }

struct ClipSpec {
  double ev_threshold = 0.0;                    // f-stops
  const RadianceImage* equalize_target = nullptr;  // nullptr = no equalization
};

// Saturates luminance at 2^t - 1 by scaling all channels of offending
// pixels (chromaticity preserved). With an equalization target, the
// result is globally rescaled so its integrated illumination matches the
// target's.
inline RadianceImage clip_exposure(const RadianceImage& img, const ClipSpec& spec,
                                   const SolidAngleMap& omega) {
  if (!(spec.ev_threshold >= 0.0))
    throw std::invalid_argument("clip_exposure: threshold must be >= 0");
  if (img.compressed())
    throw std::invalid_argument("clip_exposure: operates on linear radiance");
  double limit = std::exp2(spec.ev_threshold) - 1.0;
  RadianceImage out = img;
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      if (!out.is_valid(x, y)) continue;
      double lum = luminance_at(out, x, y);
      if (lum > limit) {
        double s = limit / lum;
        float* p = out.px(x, y);
        p[0] = static_cast<float>(p[0] * s);
        p[1] = static_cast<float>(p[1] * s);
        p[2] = static_cast<float>(p[2] * s);
      }
    }
  }
  if (spec.equalize_target) {
    double target = integrated_illumination(*spec.equalize_target, omega);
    double current = integrated_illumination(out, omega);
    if (current <= 0.0 && target != 0.0)
      throw std::invalid_argument("clip_exposure: cannot equalize a zero-energy image");
    double s = current > 0.0 ? target / current : 1.0;
    for (float& v : out.pixels) v = static_cast<float>(v * s);
  }
  return out;
}

struct ExposureMatch {
  double alpha = 1.0;
  RadianceImage scaled;
};

// Global rescale of `fake` so its mean valid-pixel luminance matches
// `real`'s.
inline ExposureMatch match_exposure(const RadianceImage& real, const RadianceImage& fake) {
  auto mean_luma = [](const RadianceImage& img) {
    double acc = 0.0;
    size_t n = 0;
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        if (!img.is_valid(x, y)) continue;
        acc += luminance_at(img, x, y);
        ++n;
      }
    if (n == 0) throw std::invalid_argument("match_exposure: no valid pixels");
    return acc / static_cast<double>(n);
  };
  double mr = mean_luma(real);
  double mf = mean_luma(fake);
  if (!(mf > 0.0) || !std::isfinite(mf))
    throw std::invalid_argument("match_exposure: degenerate fake image (mean luminance <= 0)");
  ExposureMatch result;
  result.alpha = mr / mf;
  result.scaled = fake;
  for (float& v : result.scaled.pixels) v = static_cast<float>(v * result.alpha);
  return result;
}

// Display-referred comparison space: gamma 2.2 then clip to [0, 1].
inline RadianceImage to_cldr(const RadianceImage& img) {
  if (img.compressed()) throw std::invalid_argument("to_cldr: expects linear input");
  RadianceImage out = img;
  double inv_gamma = 1.0 / 2.2;
  for (float& v : out.pixels)
    v = static_cast<float>(std::clamp(std::pow(static_cast<double>(v), inv_gamma), 0.0, 1.0));
  out.compression = ToneMapOp::power_law(2.2);
  return out;
}

// PSNR reference range per space: cLDR is display-referred with a fixed
// unit range; elsewhere the reference image's own range, guarded against
// degenerate constant images.
inline double psnr_reference_range(const RadianceImage& reference, const std::string& space) {
  if (space == "cldr") return 1.0;
  double r = data_range_channels(reference);
  return r > 0.0 ? r : 1.0;
}

inline const std::vector<std::string>& known_metric_ids() {
  static const std::vector<std::string> ids = {"l1",     "l2",  "psnr2", "psnr10",
                                               "ssim",   "msssim", "emd", "ev", "ii"};
  return ids;
}

// One row of paired-image metrics. Comparative metrics are evaluated in
// the requested spaces; exposure range and integrated illumination are
// HDR-space quantities and are reported for both images.
inline std::map<std::string, double> metric_report(
    const RadianceImage& real, const RadianceImage& fake,
    const std::vector<std::string>& metric_ids, const std::vector<std::string>& spaces,
    const SolidAngleMap& omega, const Mask* mask = nullptr) {
  detail::require_same_size(real, fake, "metric_report");
  std::map<std::string, double> out;
  for (const auto& space : spaces) {
    const RadianceImage* a = &real;
    const RadianceImage* b = &fake;
    RadianceImage ta, tb;
    if (space == "cldr") {
      ta = to_cldr(real);
      tb = to_cldr(fake);
      a = &ta;
      b = &tb;
    } else if (space == "ldr") {
      ToneMapOp op = ToneMapOp::power_law(2.2);
      ta = tonemap(real, op);
      tb = tonemap(fake, op);
      a = &ta;
      b = &tb;
    } else if (space != "hdr") {
      throw std::invalid_argument("metric_report: unknown space " + space);
    }
    for (const auto& id : metric_ids) {
      if (id == "ev" || id == "ii") continue;  // HDR-only, handled below
      std::string key = id + "_" + space;
      if (id == "l1") out[key] = mae(*a, *b, mask);
      else if (id == "l2") out[key] = mse(*a, *b, mask);
      else if (id == "psnr2") out[key] = psnr(*a, *b, 2.0, psnr_reference_range(*a, space), mask);
      else if (id == "psnr10")
        out[key] = psnr(*a, *b, 10.0, psnr_reference_range(*a, space), mask);
      else if (id == "ssim") out[key] = ssim(*a, *b);
      else if (id == "msssim") out[key] = ms_ssim(*a, *b);
      else if (id == "emd") out[key] = emd(*a, *b);
      else throw std::invalid_argument("metric_report: unknown metric " + id);
    }
  }
  for (const auto& id : metric_ids) {
    if (id == "ev") {
      out["ev_real"] = exposure_value(real);
      out["ev_fake"] = exposure_value(fake);
    } else if (id == "ii") {
      out["ii_real"] = integrated_illumination(real, omega);
      out["ii_fake"] = integrated_illumination(fake, omega);
    }
  }
  return out;
}

// Per-key mean over a set of per-pair reports; infinities (exact matches
// under PSNR) stay infinite.
inline std::map<std::string, double> aggregate_mean(
    const std::vector<std::map<std::string, double>>& reports) {
  std::map<std::string, double> sums;
  std::map<std::string, size_t> counts;
  for (const auto& report : reports) {
    for (const auto& [key, value] : report) {
      sums[key] += value;
      counts[key] += 1;
    }
  }
  for (auto& [key, value] : sums) value /= static_cast<double>(counts[key]);
  return sums;
}

struct SweepRow {
  double threshold = 0.0;
  std::vector<double> values;  // aligned with SweepTable::columns
};

struct SweepTable {
  std::vector<std::string> columns;  // excluding the leading threshold column
  std::vector<SweepRow> rows;
};

// Clips the image at each threshold (equalizing illumination back to the
// original), then evaluates every selected metric against the original in
// HDR and gamma-cLDR space. Thresholds must be sorted descending.
inline SweepTable sensitivity_sweep(const RadianceImage& img,
                                    const std::vector<double>& thresholds,
                                    const std::vector<std::string>& metric_ids,
                                    const SolidAngleMap& omega) {
  for (size_t i = 1; i < thresholds.size(); ++i)
    if (thresholds[i] >= thresholds[i - 1])
      throw std::invalid_argument("sensitivity_sweep: thresholds must be sorted descending");

  SweepTable table;
  for (const auto& id : metric_ids) {
    if (id == "ev") {
      table.columns.push_back("ev_hdr");
      table.columns.push_back("ev_dist_hdr");
    } else if (id == "ii") {
      table.columns.push_back("ii_hdr");
      table.columns.push_back("ii_dist_hdr");
    } else {
      table.columns.push_back(id + "_hdr");
      table.columns.push_back(id + "_cldr");
    }
  }

  double ev_orig = exposure_value(img);
  double ii_orig = integrated_illumination(img, omega);
  RadianceImage cldr_orig = to_cldr(img);

  for (double t : thresholds) {
    RadianceImage clipped = clip_exposure(img, {t, &img}, omega);
    RadianceImage cldr_clipped = to_cldr(clipped);
    SweepRow row;
    row.threshold = t;
    for (const auto& id : metric_ids) {
      if (id == "ev") {
        double ev_c = exposure_value(clipped);
        row.values.push_back(ev_c);
        row.values.push_back(ev_distance(ev_orig, ev_c));
      } else if (id == "ii") {
        double ii_c = integrated_illumination(clipped, omega);
        row.values.push_back(ii_c);
        row.values.push_back(ii_distance(ii_orig, ii_c));
      } else {
        auto eval = [&](const RadianceImage& a, const RadianceImage& b, const std::string& space) {
          if (id == "l1") return mae(a, b);
          if (id == "l2") return mse(a, b);
          if (id == "psnr2") return psnr(a, b, 2.0, psnr_reference_range(a, space));
          if (id == "psnr10") return psnr(a, b, 10.0, psnr_reference_range(a, space));
          if (id == "ssim") return ssim(a, b);
          if (id == "msssim") return ms_ssim(a, b);
          if (id == "emd") return emd(a, b);
          throw std::invalid_argument("sensitivity_sweep: unknown metric " + id);
        };
        row.values.push_back(eval(img, clipped, "hdr"));
        row.values.push_back(eval(cldr_orig, cldr_clipped, "cldr"));
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace fdrsky
