#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdrsky/geometry.hpp"
#include "fdrsky/image.hpp"
#include "fdrsky/io/hdr.hpp"
#include "fdrsky/io/pfm.hpp"
#include "fdrsky/resample.hpp"
#include "fdrsky/solar.hpp"

namespace fdrsky {

struct SampleRecord {
  std::filesystem::path path;
  UtcTime timestamp;
  double latitude = 0.0;
  double longitude = 0.0;
  std::optional<double> ev;
  std::optional<double> ii;
  bool excluded = false;
  std::string exclusion_reason;
};

struct DatasetConfig {
  std::filesystem::path root;
  std::string pattern = "YYYYMMDD_HHMMSS";  // digit positions in the filename
  double latitude = 46.78;                  // capture site
  double longitude = -71.27;
  uint64_t split_seed = 0;
  std::array<double, 3> split_ratios = {0.78, 0.11, 0.11};  // train/val/test by record count
  std::filesystem::path exclusion_list;  // optional file of basenames to drop
};

namespace detail {

// Matches the pattern template against a filename at every offset. Token
// letters (Y/M/D/H/S) must align with digits, other characters literally.
// Runs of the same letter form one field; M means month before any H run
// and minute after, so layouts like "YYYY-MM-DD_HH.MM.SS" work.
inline std::optional<UtcTime> parse_by_pattern(const std::string& name,
                                               const std::string& pattern) {
  auto is_token = [](char c) {
    return c == 'Y' || c == 'M' || c == 'D' || c == 'H' || c == 'S';
  };
  if (pattern.empty() || pattern.size() > name.size()) return std::nullopt;
  for (size_t off = 0; off + pattern.size() <= name.size(); ++off) {
    bool ok = true;
    for (size_t i = 0; i < pattern.size() && ok; ++i) {
      char p = pattern[i];
      char c = name[off + i];
      if (is_token(p)) ok = std::isdigit(static_cast<unsigned char>(c)) != 0;
      else ok = p == c;
    }
    if (!ok) continue;
    UtcTime t;
    bool seen_hour = false;
    for (size_t i = 0; i < pattern.size();) {
      char p = pattern[i];
      if (!is_token(p)) {
        ++i;
        continue;
      }
      size_t run = i;
      while (run < pattern.size() && pattern[run] == p) ++run;
      int value = 0;
      for (size_t k = i; k < run; ++k) value = value * 10 + (name[off + k] - '0');
      switch (p) {
        case 'Y': t.year = value; break;
        case 'D': t.day = value; break;
        case 'H':
          t.hour = value;
          seen_hour = true;
          break;
        case 'S': t.second = value; break;
        case 'M':
          if (seen_hour) t.minute = value;
          else t.month = value;
          break;
      }
      i = run;
    }
    try {
      validate(t);
    } catch (const std::exception&) {
      continue;
    }
    return t;
  }
  return std::nullopt;
}

inline bool is_hdr_file(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".hdr" || ext == ".pfm";
}

}  // namespace detail

// One record per readable HDR file whose name carries a timestamp.
// Misnamed files are reported through `warnings` and skipped.
inline std::vector<SampleRecord> scan(const DatasetConfig& cfg,
                                      std::vector<std::string>* warnings = nullptr) {
  if (!std::filesystem::is_directory(cfg.root))
    throw std::runtime_error("dataset root is not a readable directory: " +
                             cfg.root.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(cfg.root)) {
    if (entry.is_regular_file() && detail::is_hdr_file(entry.path()))
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<SampleRecord> records;
  for (const auto& path : files) {
    auto ts = detail::parse_by_pattern(path.filename().string(), cfg.pattern);
    if (!ts) {
      if (warnings)
        warnings->push_back("no timestamp matching " + cfg.pattern + " in " +
                            path.filename().string());
      continue;
    }
    SampleRecord rec;
    rec.path = path;
    rec.timestamp = *ts;
    rec.latitude = cfg.latitude;
    rec.longitude = cfg.longitude;
    records.push_back(std::move(rec));
  }
  return records;
}

struct SplitResult {
  std::vector<SampleRecord> train, val, test;
};

// Date-atomic split: all records of one capture date land in the same
// subset. Dates are shuffled with an explicit Fisher-Yates pass (stable
// across platforms) and assigned to the subset with the largest remaining
// quota deficit.
inline SplitResult split(const std::vector<SampleRecord>& records, uint64_t seed,
                         std::array<double, 3> ratios = {0.78, 0.11, 0.11}) {
  double ratio_sum = ratios[0] + ratios[1] + ratios[2];
  if (!(ratio_sum > 0.0)) throw std::invalid_argument("split: ratios must sum to > 0");
  std::map<int, std::vector<size_t>> by_date;
  for (size_t i = 0; i < records.size(); ++i) {
    const UtcTime& t = records[i].timestamp;
    by_date[t.year * 10000 + t.month * 100 + t.day].push_back(i);
  }
  std::vector<int> dates;
  dates.reserve(by_date.size());
  for (const auto& [date, _] : by_date) dates.push_back(date);

  std::mt19937_64 rng(seed);
  for (size_t i = dates.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng() % i);
    std::swap(dates[i - 1], dates[j]);
  }

  double total = static_cast<double>(records.size());
  std::array<double, 3> target{};
  std::array<size_t, 3> have{};
  for (int s = 0; s < 3; ++s) target[s] = total * ratios[s] / ratio_sum;

  SplitResult result;
  std::array<std::vector<SampleRecord>*, 3> outs = {&result.train, &result.val, &result.test};
  for (int date : dates) {
    int best = 0;
    double best_deficit = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < 3; ++s) {
      double deficit = target[s] - static_cast<double>(have[s]);
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = s;
      }
    }
    for (size_t idx : by_date[date]) {
      outs[best]->push_back(records[idx]);
      ++have[best];
    }
  }
  return result;
}

struct AugmentSpec {
  bool include_flips = true;
  std::vector<double> angles_deg = {0.0, 90.0, 180.0, 270.0};
  InterpMethod method = InterpMethod::LinearSpline;  // used off the 90-degree lattice
};

// Zenith-rotation/flip augmentation of a SkyAngular map. Quarter-turn
// angles are exact pixel permutations.
inline std::vector<RadianceImage> augment(const RadianceImage& img, const AugmentSpec& spec) {
  if (img.format != EnvFormat::SkyAngular)
    throw std::invalid_argument("augment: requires SkyAngular format");
  std::vector<RadianceImage> out;
  for (double angle : spec.angles_deg) {
    RadianceImage rotated = rotate_zenith(img, angle, spec.method);
    if (spec.include_flips) out.push_back(hflip(rotated));
    out.push_back(std::move(rotated));
  }
  return out;
}

// Drops records below the solar-elevation floor and records listed for
// manual exclusion, recording the reason on each.
inline std::vector<SampleRecord> prune(std::vector<SampleRecord> records,
                                       double min_solar_elevation_deg,
                                       const std::set<std::string>& manual_exclusions = {}) {
  std::vector<SampleRecord> kept;
  for (auto& rec : records) {
    if (manual_exclusions.count(rec.path.filename().string())) {
      rec.excluded = true;
      rec.exclusion_reason = "manual";
      continue;
    }
    SunPosition sun = solar_position(rec.timestamp, rec.latitude, rec.longitude);
    if (sun.elevation_deg < min_solar_elevation_deg) {
      rec.excluded = true;
      rec.exclusion_reason = "solar_elevation";
      continue;
    }
    kept.push_back(rec);
  }
  return kept;
}

inline RadianceImage load_radiance(const std::filesystem::path& path,
                                   std::optional<EnvFormat> format = std::nullopt) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".pfm") return io::read_pfm(path, format);
  if (ext == ".hdr") return io::read_hdr(path, format);
  throw std::runtime_error("unsupported image extension: " + path.string());
}

// Stats cache keyed by (path, size, mtime), with a content-hash fallback
// when only the mtime moved. Stored as a tab-separated text file.
struct StatsCache {
  struct Entry {
    uint64_t size = 0;
    int64_t mtime = 0;
    uint64_t hash = 0;
    double ev = 0.0;
    double ii = 0.0;
  };
  std::map<std::string, Entry> entries;

  static StatsCache load(const std::filesystem::path& path) {
    StatsCache cache;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      // layout: path \t size \t mtime \t hash \t ev \t ii
      std::vector<std::string> fields;
      size_t start = 0;
      for (size_t pos = line.find('\t'); pos != std::string::npos;
           pos = line.find('\t', start)) {
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
      }
      fields.push_back(line.substr(start));
      if (fields.size() != 6) continue;
      Entry e;
      e.size = std::stoull(fields[1]);
      e.mtime = std::stoll(fields[2]);
      e.hash = std::stoull(fields[3]);
      e.ev = std::stod(fields[4]);
      e.ii = std::stod(fields[5]);
      cache.entries[fields[0]] = e;
    }
    return cache;
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write stats cache " + path.string());
    out.precision(17);  // doubles must survive the round trip
    for (const auto& [key, e] : entries)
      out << key << '\t' << e.size << '\t' << e.mtime << '\t' << e.hash << '\t'
          << e.ev << '\t' << e.ii << "\n";
  }
};

namespace detail {

inline uint64_t fnv1a_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  uint64_t h = 1469598103934665603ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  return h;
}

inline int64_t mtime_ticks(const std::filesystem::path& path) {
  return std::filesystem::last_write_time(path).time_since_epoch().count();
}

}  // namespace detail

struct StatsRow {
  SampleRecord record;
  bool readable = true;
  std::string error;
};

struct StatsReport {
  std::vector<StatsRow> rows;  // sorted by timestamp
  double mean_ev = 0.0;
  double mean_ii = 0.0;
  std::array<double, 24> hourly_mean_ev{};  // day-cycle series; NaN for empty hours
  std::array<double, 24> hourly_mean_ii{};
};

// Per-sample exposure range and integrated illumination. Unreadable files
// are flagged and the run continues. With a cache, files whose size and
// mtime (or content hash) are unchanged reuse the stored values.
inline StatsReport stats_report(const std::vector<SampleRecord>& records,
                                StatsCache* cache = nullptr) {
  StatsReport report;
  std::map<std::pair<int, int>, SolidAngleMap> omega_cache;
  for (const auto& rec : records) {
    StatsRow row;
    row.record = rec;
    try {
      std::string key = rec.path.string();
      uint64_t size = std::filesystem::file_size(rec.path);
      int64_t mtime = detail::mtime_ticks(rec.path);
      StatsCache::Entry* hit = nullptr;
      if (cache) {
        auto it = cache->entries.find(key);
        if (it != cache->entries.end() && it->second.size == size) {
          if (it->second.mtime == mtime) {
            hit = &it->second;
          } else if (detail::fnv1a_file(rec.path) == it->second.hash) {
            it->second.mtime = mtime;
            hit = &it->second;
          }
        }
      }
      if (hit) {
        row.record.ev = hit->ev;
        row.record.ii = hit->ii;
      } else {
        RadianceImage img = load_radiance(rec.path);
        auto dims = std::make_pair(img.width, img.height);
        auto it = omega_cache.find(dims);
        if (it == omega_cache.end())
          it = omega_cache.emplace(dims, solid_angles(img.format, img.width, img.height))
                   .first;
        row.record.ev = exposure_value(img);
        row.record.ii = integrated_illumination(img, it->second);
        if (cache) {
          StatsCache::Entry e;
          e.size = size;
          e.mtime = mtime;
          e.hash = detail::fnv1a_file(rec.path);
          e.ev = *row.record.ev;
          e.ii = *row.record.ii;
          cache->entries[key] = e;
        }
      }
    } catch (const std::exception& e) {
      row.readable = false;
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const StatsRow& a, const StatsRow& b) {
                     return a.record.timestamp < b.record.timestamp;
                   });

  double sum_ev = 0.0, sum_ii = 0.0;
  size_t n = 0;
  std::array<double, 24> hour_ev_sum{}, hour_ii_sum{};
  std::array<size_t, 24> hour_n{};
  for (const auto& row : report.rows) {
    if (!row.readable || !row.record.ev) continue;
    sum_ev += *row.record.ev;
    sum_ii += *row.record.ii;
    ++n;
    int hour = row.record.timestamp.hour;
    hour_ev_sum[hour] += *row.record.ev;
    hour_ii_sum[hour] += *row.record.ii;
    ++hour_n[hour];
  }
  report.mean_ev = n ? sum_ev / static_cast<double>(n) : 0.0;
  report.mean_ii = n ? sum_ii / static_cast<double>(n) : 0.0;
  for (int hh = 0; hh < 24; ++hh) {
    report.hourly_mean_ev[hh] =
        hour_n[hh] ? hour_ev_sum[hh] / static_cast<double>(hour_n[hh])
                   : std::numeric_limits<double>::quiet_NaN();
    report.hourly_mean_ii[hh] =
        hour_n[hh] ? hour_ii_sum[hh] / static_cast<double>(hour_n[hh])
                   : std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

// Per-pixel arithmetic mean in linear space. Each pixel's addends are
// summed in 64-bit in value order, so the result is bit-identical under
// any permutation of the inputs.
inline RadianceImage mean_skydome(const std::vector<RadianceImage>& images) {
  if (images.empty()) throw std::invalid_argument("mean_skydome: no images");
  const RadianceImage& first = images.front();
  for (const auto& img : images) {
    if (img.width != first.width || img.height != first.height ||
        img.format != first.format)
      throw std::invalid_argument("mean_skydome: mixed resolutions or formats");
    if (img.compressed()) throw std::invalid_argument("mean_skydome: expects linear images");
  }
  RadianceImage out = first;
  double inv = 1.0 / static_cast<double>(images.size());
  std::vector<float> addends(images.size());
  for (size_t i = 0; i < out.pixels.size(); ++i) {
    for (size_t k = 0; k < images.size(); ++k) addends[k] = images[k].pixels[i];
    std::sort(addends.begin(), addends.end());
    double acc = 0.0;
    for (float v : addends) acc += v;
    out.pixels[i] = static_cast<float>(acc * inv);
  }
  return out;
}

}  // namespace fdrsky
