// fdrsky: command-line toolkit for full-dynamic-range skydome maps.
// Subcommands wrap the library one-to-one; identical invocations on
// identical inputs produce byte-identical outputs regardless of --threads.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdrsky/fdrsky.hpp"
#include "fdrsky/serialize.hpp"

namespace {

using namespace fdrsky;

std::optional<EnvFormat> parse_format_flag(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return env_format_from_string(s);
}

RadianceImage load_image(const std::string& path, const std::string& format_flag) {
  return load_radiance(path, parse_format_flag(format_flag));
}

void save_image(const std::string& path, const RadianceImage& img) {
  if (path == "-")
    throw std::runtime_error("image outputs need a file path; '-' is reserved for reports");
  auto lower = path;
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower.size() >= 4 && lower.substr(lower.size() - 4) == ".hdr") io::write_hdr(path, img);
  else io::write_pfm(path, img);
}

// "-o -" sends the report to stdout.
void emit_text(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

struct ToneFlags {
  std::string op = "mulawlog2";
  double gamma = 2.2;
  double base = 2.0;
  double mu = 5000.0;
  double alpha = 0.22;
  double beta = 2.5;
  double epsilon = 1e-3;
  double offset = 0.01;

  void attach(CLI::App* cmd) {
    cmd->add_option("--op", op,
                    "operator: identity|gamma|logn|mulaw|mulawlog2|naturallog|inverted")
        ->capture_default_str();
    cmd->add_option("--gamma", gamma, "gamma exponent")->capture_default_str();
    cmd->add_option("--base", base, "logarithm base for logn")->capture_default_str();
    cmd->add_option("--mu", mu, "mu for mulaw/mulawlog2")->capture_default_str();
    cmd->add_option("--alpha", alpha, "naturallog scale")->capture_default_str();
    cmd->add_option("--beta", beta, "naturallog offset")->capture_default_str();
    cmd->add_option("--epsilon", epsilon, "naturallog epsilon")->capture_default_str();
    cmd->add_option("--offset", offset, "inverted offset")->capture_default_str();
  }

  ToneMapOp resolve() const {
    if (op == "identity") return ToneMapOp::identity();
    if (op == "gamma") return ToneMapOp::power_law(gamma);
    if (op == "logn") return ToneMapOp::log_n(base);
    if (op == "mulaw") return ToneMapOp::mu_law(mu);
    if (op == "mulawlog2") return ToneMapOp::mu_law_log2(mu);
    if (op == "naturallog") return ToneMapOp::natural_log(alpha, beta, epsilon);
    if (op == "inverted") return ToneMapOp::inverted(offset);
    throw CLI::ValidationError("--op", "unknown operator " + op);
  }
};

struct SunFlags {
  std::string timestamp;
  double latitude = 46.78;
  double longitude = -71.27;
  double sun_elevation = std::numeric_limits<double>::quiet_NaN();
  double sun_azimuth = std::numeric_limits<double>::quiet_NaN();
  bool snap = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--timestamp", timestamp, "capture time, UTC (YYYYMMDD_HHMMSS or ISO)");
    cmd->add_option("--latitude", latitude, "site latitude, degrees")->capture_default_str();
    cmd->add_option("--longitude", longitude, "site longitude, degrees")->capture_default_str();
    cmd->add_option("--sun-elevation", sun_elevation, "explicit sun elevation, degrees");
    cmd->add_option("--sun-azimuth", sun_azimuth, "explicit sun azimuth, degrees");
    cmd->add_flag("--snap-to-centroid", snap,
                  "refine the position toward the observed solar centroid (within 2 deg)");
  }

  SunPosition resolve(const RadianceImage* img = nullptr) const {
    SunPosition sun;
    if (!std::isnan(sun_elevation) && !std::isnan(sun_azimuth)) {
      sun = sun_from_angles(sun_elevation, sun_azimuth);
    } else {
      if (timestamp.empty())
        throw CLI::ValidationError("--timestamp",
                                   "need --timestamp or --sun-elevation/--sun-azimuth");
      sun = solar_position(parse_timestamp(timestamp), latitude, longitude);
    }
    if (snap && img) sun = snap_to_centroid(sun, *img);
    return sun;
  }
};

struct LabelFlags {
  LabelConfig cfg;
  bool seed_given = false;

  void attach(CLI::App* cmd, bool require_seed) {
    cmd->add_option("--kernel", cfg.erosion_kernel, "erosion brush diameter (odd)")
        ->capture_default_str();
    cmd->add_option("--tau", cfg.cloud_tau, "cloud ratio threshold")->capture_default_str();
    cmd->add_option("--sun-diameter", cfg.sun_diameter_deg, "sun mask diameter, degrees")
        ->capture_default_str();
    auto* seed = cmd->add_option("--seed", cfg.perlin_seed, "noise seed (recorded in output)");
    if (require_seed) seed->required();
    cmd->add_option("--perlin-frequency", cfg.perlin_frequency, "noise frequency, 1/px")
        ->capture_default_str();
    cmd->add_option("--perlin-octaves", cfg.perlin_octaves, "noise octaves")
        ->capture_default_str();
    cmd->add_option("--perlin-persistence", cfg.perlin_persistence, "octave falloff")
        ->capture_default_str();
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(std::stod(item));
  return out;
}

// Tonemap the input for colour-ratio segmentation, warning when the space
// is not the recommended one.
RadianceImage segmentation_space(const RadianceImage& img, const ToneFlags& tone,
                                 bool assume_compressed) {
  if (assume_compressed) {
    RadianceImage tagged = tag_compression(img, tone.resolve());
    if (!cloud_ratio_input_recommended(tagged))
      std::cerr << "warning: cloud ratio calibrated for mulawlog2 input; got "
                << tagged.compression->describe() << "\n";
    return tagged;
  }
  ToneMapOp op = tone.resolve();
  RadianceImage compressed = tonemap(img, op);
  if (!cloud_ratio_input_recommended(compressed))
    std::cerr << "warning: cloud ratio calibrated for mulawlog2 input; got " << op.describe()
              << "\n";
  return compressed;
}

int edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
  for (size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i)
    for (size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {
      "info",        "convert",       "resize",       "tonemap",
      "untonemap",   "segment",       "label",        "metrics",
      "sensitivity", "clip",          "boost",        "match-exposure",
      "dataset-scan", "dataset-split", "dataset-report", "mean-skydome"};
  return names;
}

std::string records_csv(const std::vector<SampleRecord>& records) {
  std::ostringstream out;
  std::vector<std::vector<std::string>> rows;
  for (const auto& rec : records) {
    char ts[32];
    std::snprintf(ts, sizeof(ts), "%04d%02d%02d_%02d%02d%02d", rec.timestamp.year,
                  rec.timestamp.month, rec.timestamp.day, rec.timestamp.hour,
                  rec.timestamp.minute, static_cast<int>(rec.timestamp.second));
    rows.push_back({rec.path.string(), ts, rec.ev ? format_float(*rec.ev) : "",
                    rec.ii ? format_float(*rec.ii) : "",
                    rec.excluded ? rec.exclusion_reason : ""});
  }
  write_csv(out, {"path", "timestamp", "ev", "ii", "excluded"}, rows);
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-dynamic-range skydome environment-map toolkit"};
  app.require_subcommand(1);
  // applied while parsing, ahead of any subcommand callback
  app.add_option_function<int>(
      "--threads", [](int n) { set_thread_cap(n); },
      "worker thread cap (0 = auto, FDRSKY_THREADS)");

  if (argc >= 2 && argv[1][0] != '-') {
    const auto& names = subcommand_names();
    if (std::find(names.begin(), names.end(), argv[1]) == names.end()) {
      std::string arg = argv[1];
      std::string best = names.front();
      int best_d = edit_distance(arg, best);
      for (const auto& n : names) {
        int d = edit_distance(arg, n);
        if (d < best_d) {
          best_d = d;
          best = n;
        }
      }
      std::cerr << "error: unknown subcommand '" << arg << "'";
      if (best_d <= 3) std::cerr << "; did you mean '" << best << "'?";
      std::cerr << "\n";
      return 1;
    }
  }

  // ---- info ----
  auto* cmd_info = app.add_subcommand("info", "print format, dimensions, EV and illumination");
  std::string info_in, info_format;
  cmd_info->add_option("input", info_in, "image file (.pfm/.hdr)")->required();
  cmd_info->add_option("--format", info_format, "override format inference");
  cmd_info->callback([&] {
    RadianceImage img = load_image(info_in, info_format);
    SolidAngleMap omega = solid_angles(img.format, img.width, img.height);
    size_t valid = 0;
    for (uint8_t v : img.valid) valid += v != 0;
    std::cout << "format=" << to_string(img.format) << "\n"
              << "width=" << img.width << "\n"
              << "height=" << img.height << "\n"
              << "valid_pixels=" << valid << "\n"
              << "ev=" << format_float(exposure_value(img)) << "\n"
              << "ii=" << format_float(integrated_illumination(img, omega)) << "\n";
  });

  // ---- convert ----
  auto* cmd_convert = app.add_subcommand("convert", "re-project between map formats");
  std::string cv_in, cv_out, cv_to, cv_method = "linear-spline", cv_format;
  int cv_size = 0;
  cmd_convert->add_option("input", cv_in)->required();
  cmd_convert->add_option("-o,--output", cv_out)->required();
  cmd_convert->add_option("--to", cv_to, "latlong|skylatlong|skyangular")->required();
  cmd_convert->add_option("--size", cv_size, "target height (default: source height)");
  cmd_convert->add_option("--method", cv_method, "nearest|bilinear|linear-spline")
      ->capture_default_str();
  cmd_convert->add_option("--format", cv_format, "override source format inference");
  cmd_convert->callback([&] {
    RadianceImage img = load_image(cv_in, cv_format);
    RadianceImage out = convert_format(img, env_format_from_string(cv_to),
                                       interp_from_string(cv_method), cv_size);
    save_image(cv_out, out);
  });

  // ---- resize ----
  auto* cmd_resize = app.add_subcommand("resize", "rescale a map");
  std::string rs_in, rs_out, rs_method = "linear-spline", rs_format;
  int rs_w = 0, rs_h = 0;
  cmd_resize->add_option("input", rs_in)->required();
  cmd_resize->add_option("-o,--output", rs_out)->required();
  cmd_resize->add_option("--width", rs_w)->required();
  cmd_resize->add_option("--height", rs_h)->required();
  cmd_resize->add_option("--method", rs_method, "nearest|bilinear|linear-spline|area|max-pool")
      ->capture_default_str();
  cmd_resize->add_option("--format", rs_format, "override format inference");
  cmd_resize->callback([&] {
    RadianceImage img = load_image(rs_in, rs_format);
    save_image(rs_out, resize(img, rs_w, rs_h, interp_from_string(rs_method)));
  });

  // ---- tonemap ----
  auto* cmd_tonemap = app.add_subcommand("tonemap", "compress radiance, or emit the "
                                                    "error-nonlinearity profile");
  std::string tm_in, tm_out, tm_format, tm_intensities;
  bool tm_profile = false;
  double tm_delta = 0.01;
  ToneFlags tm_flags;
  cmd_tonemap->add_option("input", tm_in, "image file (omit with --profile)");
  cmd_tonemap->add_option("-o,--output", tm_out)->required();
  cmd_tonemap->add_option("--format", tm_format, "override format inference");
  tm_flags.attach(cmd_tonemap);
  cmd_tonemap->add_flag("--profile", tm_profile,
                        "write CSV of (intensity, delta) instead of an image");
  cmd_tonemap->add_option("--delta", tm_delta, "compressed-space error for --profile")
      ->capture_default_str();
  cmd_tonemap->add_option("--intensities", tm_intensities,
                          "comma-separated intensities for --profile "
                          "(default: log-spaced in [0, 2^22])");
  cmd_tonemap->callback([&] {
    ToneMapOp op = tm_flags.resolve();
    if (tm_profile) {
      std::vector<double> intensities;
      if (!tm_intensities.empty()) {
        intensities = split_doubles(tm_intensities);
      } else {
        intensities.push_back(0.0);
        for (int i = 0; i <= 440; ++i) intensities.push_back(std::pow(2.0, i * 0.05));
      }
      auto profile = nonlinearity_profile(op, tm_delta, intensities);
      std::vector<std::vector<std::string>> rows;
      for (const auto& p : profile)
        rows.push_back({format_float(p.intensity), format_float(p.delta)});
      std::ostringstream csv;
      write_csv(csv, {"intensity", "delta"}, rows);
      emit_text(tm_out, csv.str());
      return;
    }
    if (tm_in.empty()) throw CLI::ValidationError("input", "input image required");
    save_image(tm_out, tonemap(load_image(tm_in, tm_format), op));
  });

  // ---- untonemap ----
  auto* cmd_untonemap = app.add_subcommand("untonemap", "invert a tonemapped image");
  std::string utm_in, utm_out, utm_format;
  ToneFlags utm_flags;
  cmd_untonemap->add_option("input", utm_in)->required();
  cmd_untonemap->add_option("-o,--output", utm_out)->required();
  cmd_untonemap->add_option("--format", utm_format, "override format inference");
  utm_flags.attach(cmd_untonemap);
  cmd_untonemap->callback([&] {
    RadianceImage img = load_image(utm_in, utm_format);
    save_image(utm_out, untonemap(img, utm_flags.resolve()));
  });

  // ---- segment ----
  auto* cmd_segment = app.add_subcommand("segment", "sun/cloud/skydome/border masks");
  std::string sg_in, sg_prefix, sg_format;
  bool sg_assume_compressed = false;
  ToneFlags sg_tone;
  SunFlags sg_sun;
  LabelFlags sg_label;
  cmd_segment->add_option("input", sg_in)->required();
  cmd_segment->add_option("-o,--out-prefix", sg_prefix, "masks written as <prefix><class>.pbm")
      ->required();
  cmd_segment->add_option("--format", sg_format, "override format inference");
  cmd_segment->add_flag("--assume-compressed", sg_assume_compressed,
                        "input already tonemapped with --op");
  sg_tone.attach(cmd_segment);
  sg_sun.attach(cmd_segment);
  sg_label.attach(cmd_segment, false);
  cmd_segment->callback([&] {
    RadianceImage img = load_image(sg_in, sg_format);
    RadianceImage compressed = segmentation_space(img, sg_tone, sg_assume_compressed);
    SegmentationMaps maps = segment(compressed, sg_sun.resolve(&img), sg_label.cfg);
    io::write_pbm(sg_prefix + "sun.pbm", maps.sun);
    io::write_pbm(sg_prefix + "cloud.pbm", maps.cloud);
    io::write_pbm(sg_prefix + "skydome.pbm", maps.skydome);
    io::write_pbm(sg_prefix + "border.pbm", maps.border);
  });

  // ---- label ----
  auto* cmd_label = app.add_subcommand("label", "discrete or continuous training labels");
  std::string lb_in, lb_out, lb_format, lb_type = "discrete", lb_config_out;
  bool lb_assume_compressed = false;
  ToneFlags lb_tone;
  SunFlags lb_sun;
  LabelFlags lb_label;
  cmd_label->add_option("input", lb_in)->required();
  cmd_label->add_option("-o,--output", lb_out, "PFM label output")->required();
  cmd_label->add_option("--type", lb_type, "discrete|continuous")->capture_default_str();
  cmd_label->add_option("--format", lb_format, "override format inference");
  cmd_label->add_option("--config-out", lb_config_out, "write the label config as JSON");
  cmd_label->add_flag("--assume-compressed", lb_assume_compressed,
                      "input already tonemapped with --op");
  lb_tone.attach(cmd_label);
  lb_sun.attach(cmd_label);
  lb_label.attach(cmd_label, true);
  cmd_label->callback([&] {
    RadianceImage img = load_image(lb_in, lb_format);
    RadianceImage compressed = segmentation_space(img, lb_tone, lb_assume_compressed);
    SunPosition sun = lb_sun.resolve(&img);
    SegmentationMaps maps = segment(compressed, sun, lb_label.cfg);
    if (lb_type == "discrete") {
      DiscreteLabel label = discrete_label(maps);
      GrayscaleImage g(label.width, label.height);
      for (size_t i = 0; i < label.codes.size(); ++i) g.v[i] = label.codes[i];
      io::write_pfm(lb_out, g);
    } else if (lb_type == "continuous") {
      SolidAngleMap omega = solid_angles(img.format, img.width, img.height);
      ContinuousLabel label = continuous_label(maps, img.format, sun, omega, lb_label.cfg);
      RadianceImage rgb = make_image(img.format, label.width, label.height);
      rgb.pixels = label.ch;
      io::write_pfm(lb_out, rgb);
    } else {
      throw CLI::ValidationError("--type", "must be discrete or continuous");
    }
    if (!lb_config_out.empty()) {
      nlohmann::json j = label_config_to_json(lb_label.cfg);
      emit_text(lb_config_out, j.dump(2) + "\n");
    }
    std::cout << "seed=" << lb_label.cfg.perlin_seed << "\n";
  });

  // ---- metrics ----
  auto* cmd_metrics = app.add_subcommand("metrics", "paired-image comparison report");
  std::string mt_real, mt_fake, mt_out, mt_format, mt_ids = "l1,l2,psnr2,ssim,ev,ii";
  std::string mt_spaces = "hdr,cldr", mt_mask;
  bool mt_json = false;
  cmd_metrics->add_option("real", mt_real)->required();
  cmd_metrics->add_option("fake", mt_fake)->required();
  cmd_metrics->add_option("-o,--output", mt_out)->required();
  cmd_metrics->add_option("--metrics", mt_ids, "comma list: l1,l2,psnr2,psnr10,ssim,msssim,emd,ev,ii")
      ->capture_default_str();
  cmd_metrics->add_option("--spaces", mt_spaces, "comma list: hdr,cldr,ldr")
      ->capture_default_str();
  cmd_metrics->add_option("--mask", mt_mask, "PBM mask restricting pixel statistics");
  cmd_metrics->add_option("--format", mt_format, "override format inference");
  cmd_metrics->add_flag("--json", mt_json, "emit JSON instead of CSV");
  cmd_metrics->callback([&] {
    RadianceImage real = load_image(mt_real, mt_format);
    RadianceImage fake = load_image(mt_fake, mt_format);
    SolidAngleMap omega = solid_angles(real.format, real.width, real.height);
    Mask mask;
    bool use_mask = !mt_mask.empty();
    if (use_mask) mask = io::read_pbm(mt_mask);
    auto report = metric_report(real, fake, split_list(mt_ids), split_list(mt_spaces), omega,
                                use_mask ? &mask : nullptr);
    if (mt_json) {
      nlohmann::json j;
      for (const auto& [k, v] : report) {
        if (std::isinf(v)) j[k] = v > 0 ? "inf" : "-inf";
        else j[k] = v;
      }
      emit_text(mt_out, j.dump(2) + "\n");
    } else {
      std::vector<std::string> header;
      std::vector<std::string> row;
      for (const auto& [k, v] : report) {
        header.push_back(k);
        row.push_back(format_float(v));
      }
      std::ostringstream csv;
      write_csv(csv, header, {row});
      emit_text(mt_out, csv.str());
    }
  });

  // ---- sensitivity ----
  auto* cmd_sens = app.add_subcommand("sensitivity", "metric response to exposure clipping");
  std::string sv_in, sv_out, sv_format, sv_thresholds, sv_ids = "psnr2,ssim,ev,ii";
  cmd_sens->add_option("input", sv_in)->required();
  cmd_sens->add_option("-o,--output", sv_out)->required();
  cmd_sens->add_option("--thresholds", sv_thresholds, "descending EV list, e.g. 15,13,11")
      ->required();
  cmd_sens->add_option("--metrics", sv_ids)->capture_default_str();
  cmd_sens->add_option("--format", sv_format, "override format inference");
  cmd_sens->callback([&] {
    RadianceImage img = load_image(sv_in, sv_format);
    SolidAngleMap omega = solid_angles(img.format, img.width, img.height);
    SweepTable table =
        sensitivity_sweep(img, split_doubles(sv_thresholds), split_list(sv_ids), omega);
    std::ostringstream csv;
    write_sweep_csv(csv, table);
    emit_text(sv_out, csv.str());
  });

  // ---- clip ----
  auto* cmd_clip = app.add_subcommand("clip", "exposure clipping with optional equalization");
  std::string cl_in, cl_out, cl_format, cl_equalize;
  double cl_threshold = 0.0;
  cmd_clip->add_option("input", cl_in)->required();
  cmd_clip->add_option("-o,--output", cl_out)->required();
  cmd_clip->add_option("--threshold", cl_threshold, "EV threshold, f-stops")->required();
  cmd_clip->add_option("--equalize-to", cl_equalize,
                       "rescale so illumination matches this reference image");
  cmd_clip->add_option("--format", cl_format, "override format inference");
  cmd_clip->callback([&] {
    RadianceImage img = load_image(cl_in, cl_format);
    SolidAngleMap omega = solid_angles(img.format, img.width, img.height);
    std::optional<RadianceImage> target;
    if (!cl_equalize.empty()) target = load_image(cl_equalize, cl_format);
    ClipSpec spec{cl_threshold, target ? &*target : nullptr};
    save_image(cl_out, clip_exposure(img, spec, omega));
  });

  // ---- boost ----
  auto* cmd_boost = app.add_subcommand("boost", "parametric dynamic-range expansion");
  std::vector<std::string> bs_in;
  std::string bs_out, bs_format, bs_preset;
  BoostParams bs_params;
  double bs_override = std::numeric_limits<double>::quiet_NaN();
  cmd_boost->add_option("inputs", bs_in, "batch of images")->required();
  cmd_boost->add_option("-o,--output", bs_out, "output file (single input) or directory")
      ->required();
  cmd_boost->add_option("--preset", bs_preset, "paper|ldr (ldr: rho=8 gamma=0.5 beta=0.2 "
                                               "with mean denominator 8)");
  cmd_boost->add_option("--rho", bs_params.rho)->capture_default_str();
  cmd_boost->add_option("--theta", bs_params.theta)->capture_default_str();
  cmd_boost->add_option("--gamma", bs_params.gamma)->capture_default_str();
  cmd_boost->add_option("--beta", bs_params.beta)->capture_default_str();
  cmd_boost->add_option("--max-mean-override", bs_override,
                        "replace the batch max mean denominator");
  cmd_boost->add_option("--format", bs_format, "override format inference");
  cmd_boost->callback([&] {
    if (bs_preset == "paper") bs_params = BoostParams::defaults();
    else if (bs_preset == "ldr") bs_params = BoostParams::ldr_preset();
    else if (!bs_preset.empty())
      throw CLI::ValidationError("--preset", "must be paper or ldr");
    if (!std::isnan(bs_override)) bs_params.max_mean_override = bs_override;
    std::vector<RadianceImage> batch;
    for (const auto& path : bs_in) batch.push_back(load_image(path, bs_format));
    std::vector<RadianceImage> boosted = parametric_boost(batch, bs_params);
    bool single_file = bs_in.size() == 1 && bs_out.size() > 4 &&
                       (bs_out.ends_with(".pfm") || bs_out.ends_with(".hdr"));
    if (single_file) {
      save_image(bs_out, boosted[0]);
    } else {
      std::filesystem::create_directories(bs_out);
      for (size_t i = 0; i < boosted.size(); ++i) {
        std::filesystem::path in(bs_in[i]);
        save_image((std::filesystem::path(bs_out) / (in.stem().string() + "_boost.pfm"))
                       .string(),
                   boosted[i]);
      }
    }
  });

  // ---- match-exposure ----
  auto* cmd_match = app.add_subcommand("match-exposure", "rescale to a reference mean "
                                                         "luminance");
  std::string me_real, me_fake, me_out, me_format;
  cmd_match->add_option("real", me_real)->required();
  cmd_match->add_option("fake", me_fake)->required();
  cmd_match->add_option("-o,--output", me_out, "scaled fake image")->required();
  cmd_match->add_option("--format", me_format, "override format inference");
  cmd_match->callback([&] {
    RadianceImage real = load_image(me_real, me_format);
    RadianceImage fake = load_image(me_fake, me_format);
    ExposureMatch match = match_exposure(real, fake);
    save_image(me_out, match.scaled);
    std::cout << "alpha=" << format_float(match.alpha) << "\n";
  });

  // ---- dataset flags shared by the three dataset subcommands ----
  // a JSON config file supplies the defaults; flags override field by field
  struct DatasetFlags {
    DatasetConfig cfg;
    std::string config_path;
    std::string ratios;
    double min_elevation = 10.0;
    CLI::Option* opt_root = nullptr;
    CLI::Option* opt_pattern = nullptr;
    CLI::Option* opt_lat = nullptr;
    CLI::Option* opt_lon = nullptr;
    CLI::Option* opt_seed = nullptr;
    CLI::Option* opt_excl = nullptr;

    void attach(CLI::App* cmd) {
      cmd->add_option("--config", config_path,
                      "dataset config JSON (root, pattern, lat/lon, seed, ratios, "
                      "exclusion list)");
      opt_root = cmd->add_option("--root", cfg.root, "dataset directory");
      opt_pattern = cmd->add_option("--pattern", cfg.pattern, "filename timestamp pattern")
                        ->capture_default_str();
      opt_lat = cmd->add_option("--latitude", cfg.latitude)->capture_default_str();
      opt_lon = cmd->add_option("--longitude", cfg.longitude)->capture_default_str();
      opt_seed = cmd->add_option("--seed", cfg.split_seed, "split seed (recorded in output)")
                     ->capture_default_str();
      cmd->add_option("--ratios", ratios, "train,val,test ratios (default 0.78,0.11,0.11)");
      opt_excl = cmd->add_option("--exclusions", cfg.exclusion_list,
                                 "file of basenames to prune");
      cmd->add_option("--min-elevation", min_elevation,
                      "solar elevation floor for pruning, degrees")
          ->capture_default_str();
    }

    DatasetConfig resolve() const {
      DatasetConfig out = config_path.empty() ? DatasetConfig{}
                                              : load_dataset_config(config_path);
      if (opt_root->count()) out.root = cfg.root;
      if (opt_pattern->count()) out.pattern = cfg.pattern;
      if (opt_lat->count()) out.latitude = cfg.latitude;
      if (opt_lon->count()) out.longitude = cfg.longitude;
      if (opt_seed->count()) out.split_seed = cfg.split_seed;
      if (opt_excl->count()) out.exclusion_list = cfg.exclusion_list;
      if (!ratios.empty()) {
        auto parts = split_doubles(ratios);
        if (parts.size() != 3)
          throw CLI::ValidationError("--ratios", "need exactly three values");
        out.split_ratios = {parts[0], parts[1], parts[2]};
      }
      if (out.root.empty())
        throw CLI::ValidationError("--root", "need --root or a config file with one");
      return out;
    }

    static std::set<std::string> load_exclusions(const DatasetConfig& cfg) {
      std::set<std::string> names;
      if (cfg.exclusion_list.empty()) return names;
      std::ifstream in(cfg.exclusion_list);
      if (!in) throw std::runtime_error("cannot open exclusion list " +
                                        cfg.exclusion_list.string());
      std::string line;
      while (std::getline(in, line))
        if (!line.empty()) names.insert(line);
      return names;
    }
  };

  // ---- dataset-scan ----
  auto* cmd_scan = app.add_subcommand("dataset-scan", "index capture files by timestamp");
  auto ds_scan = std::make_shared<DatasetFlags>();
  std::string scan_out;
  ds_scan->attach(cmd_scan);
  cmd_scan->add_option("-o,--output", scan_out, "records CSV")->required();
  cmd_scan->callback([&, ds_scan] {
    DatasetConfig cfg = ds_scan->resolve();
    std::vector<std::string> warnings;
    auto records = scan(cfg, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    emit_text(scan_out, records_csv(records));
  });

  // ---- dataset-split ----
  auto* cmd_split = app.add_subcommand("dataset-split", "date-atomic train/val/test split");
  auto ds_split = std::make_shared<DatasetFlags>();
  std::string split_out;
  bool split_prune = false;
  ds_split->attach(cmd_split);
  cmd_split->add_flag("--prune", split_prune, "apply elevation/exclusion pruning first");
  cmd_split->add_option("-o,--output", split_out, "split JSON")->required();
  cmd_split->callback([&, ds_split] {
    DatasetConfig cfg = ds_split->resolve();
    auto records = scan(cfg);
    if (split_prune)
      records = prune(records, ds_split->min_elevation, DatasetFlags::load_exclusions(cfg));
    SplitResult result = split(records, cfg.split_seed, cfg.split_ratios);
    nlohmann::json j;
    j["seed"] = cfg.split_seed;
    auto paths = [](const std::vector<SampleRecord>& recs) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : recs) arr.push_back(r.path.string());
      return arr;
    };
    j["train"] = paths(result.train);
    j["val"] = paths(result.val);
    j["test"] = paths(result.test);
    emit_text(split_out, j.dump(2) + "\n");
  });

  // ---- dataset-report ----
  auto* cmd_report = app.add_subcommand("dataset-report", "per-sample EV/illumination stats");
  auto ds_report = std::make_shared<DatasetFlags>();
  std::string report_out, report_summary, report_cache;
  bool report_prune = false;
  ds_report->attach(cmd_report);
  cmd_report->add_flag("--prune", report_prune, "apply elevation/exclusion pruning first");
  cmd_report->add_option("-o,--output", report_out, "per-sample CSV")->required();
  cmd_report->add_option("--summary", report_summary, "summary JSON (means, day cycle)");
  cmd_report->add_option("--cache", report_cache, "stats cache file, read and updated");
  cmd_report->callback([&, ds_report] {
    DatasetConfig cfg = ds_report->resolve();
    auto records = scan(cfg);
    if (report_prune)
      records = prune(records, ds_report->min_elevation, DatasetFlags::load_exclusions(cfg));
    StatsCache cache;
    bool use_cache = !report_cache.empty();
    if (use_cache && std::filesystem::exists(report_cache))
      cache = StatsCache::load(report_cache);
    StatsReport report = stats_report(records, use_cache ? &cache : nullptr);
    if (use_cache) cache.save(report_cache);
    std::ostringstream csv;
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : report.rows) {
      char ts[32];
      std::snprintf(ts, sizeof(ts), "%04d%02d%02d_%02d%02d%02d", row.record.timestamp.year,
                    row.record.timestamp.month, row.record.timestamp.day,
                    row.record.timestamp.hour, row.record.timestamp.minute,
                    static_cast<int>(row.record.timestamp.second));
      rows.push_back({row.record.path.string(), ts,
                      row.record.ev ? format_float(*row.record.ev) : "",
                      row.record.ii ? format_float(*row.record.ii) : "",
                      row.readable ? "" : "unreadable"});
    }
    write_csv(csv, {"path", "timestamp", "ev", "ii", "flag"}, rows);
    emit_text(report_out, csv.str());
    if (!report_summary.empty()) {
      nlohmann::json j;
      j["count"] = report.rows.size();
      j["mean_ev"] = report.mean_ev;
      j["mean_ii"] = report.mean_ii;
      nlohmann::json by_hour = nlohmann::json::array();
      for (int hh = 0; hh < 24; ++hh) {
        nlohmann::json h;
        h["hour"] = hh;
        if (!std::isnan(report.hourly_mean_ev[hh])) {
          h["mean_ev"] = report.hourly_mean_ev[hh];
          h["mean_ii"] = report.hourly_mean_ii[hh];
        }
        by_hour.push_back(h);
      }
      j["day_cycle"] = by_hour;
      emit_text(report_summary, j.dump(2) + "\n");
    }
  });

  // ---- mean-skydome ----
  auto* cmd_mean = app.add_subcommand("mean-skydome", "per-pixel linear mean of a set");
  std::vector<std::string> mean_in;
  std::string mean_out, mean_format;
  cmd_mean->add_option("inputs", mean_in, "image files")->required();
  cmd_mean->add_option("-o,--output", mean_out)->required();
  cmd_mean->add_option("--format", mean_format, "override format inference");
  cmd_mean->callback([&] {
    std::vector<RadianceImage> images;
    for (const auto& path : mean_in) images.push_back(load_image(path, mean_format));
    save_image(mean_out, mean_skydome(images));
  });

  for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
