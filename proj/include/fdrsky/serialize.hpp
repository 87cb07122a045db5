#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "fdrsky/dataset.hpp"
#include "fdrsky/metrics.hpp"
#include "fdrsky/segmentation.hpp"

#include <json.hpp>

namespace fdrsky {

// All report floats carry 9 significant digits; infinities serialize as
// "inf"/"-inf".
inline std::string format_float(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline void write_csv(std::ostream& out, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

inline void write_sweep_csv(std::ostream& out, const SweepTable& table) {
  std::vector<std::string> header = {"threshold"};
  header.insert(header.end(), table.columns.begin(), table.columns.end());
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : table.rows) {
    std::vector<std::string> cells = {format_float(row.threshold)};
    for (double v : row.values) cells.push_back(format_float(v));
    rows.push_back(std::move(cells));
  }
  write_csv(out, header, rows);
}

inline nlohmann::json sweep_to_json(const SweepTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r;
    r["threshold"] = row.threshold;
    for (size_t i = 0; i < table.columns.size(); ++i) {
      double v = row.values[i];
      if (std::isinf(v)) r[table.columns[i]] = v > 0 ? "inf" : "-inf";
      else r[table.columns[i]] = v;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline nlohmann::json label_config_to_json(const LabelConfig& cfg) {
  return nlohmann::json{{"erosion_kernel", cfg.erosion_kernel},
                        {"cloud_tau", cfg.cloud_tau},
                        {"sun_diameter_deg", cfg.sun_diameter_deg},
                        {"perlin_seed", cfg.perlin_seed},
                        {"perlin_frequency", cfg.perlin_frequency},
                        {"perlin_octaves", cfg.perlin_octaves},
                        {"perlin_persistence", cfg.perlin_persistence}};
}

inline nlohmann::json dataset_config_to_json(const DatasetConfig& cfg) {
  return nlohmann::json{{"root", cfg.root.string()},
                        {"pattern", cfg.pattern},
                        {"latitude", cfg.latitude},
                        {"longitude", cfg.longitude},
                        {"split_seed", cfg.split_seed},
                        {"split_ratios", cfg.split_ratios},
                        {"exclusion_list", cfg.exclusion_list.string()}};
}

inline DatasetConfig dataset_config_from_json(const nlohmann::json& j) {
  DatasetConfig cfg;
  cfg.root = j.value("root", cfg.root.string());
  cfg.pattern = j.value("pattern", cfg.pattern);
  cfg.latitude = j.value("latitude", cfg.latitude);
  cfg.longitude = j.value("longitude", cfg.longitude);
  cfg.split_seed = j.value("split_seed", cfg.split_seed);
  if (j.contains("split_ratios")) {
    auto r = j.at("split_ratios");
    if (!r.is_array() || r.size() != 3)
      throw std::invalid_argument("dataset config: split_ratios must hold three values");
    for (size_t i = 0; i < 3; ++i) cfg.split_ratios[i] = r[i].get<double>();
  }
  cfg.exclusion_list = j.value("exclusion_list", cfg.exclusion_list.string());
  return cfg;
}

inline DatasetConfig load_dataset_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset config " + path.string());
  nlohmann::json j;
  in >> j;
  return dataset_config_from_json(j);
}

inline LabelConfig label_config_from_json(const nlohmann::json& j) {
  LabelConfig cfg;
  cfg.erosion_kernel = j.value("erosion_kernel", cfg.erosion_kernel);
  cfg.cloud_tau = j.value("cloud_tau", cfg.cloud_tau);
  cfg.sun_diameter_deg = j.value("sun_diameter_deg", cfg.sun_diameter_deg);
  cfg.perlin_seed = j.value("perlin_seed", cfg.perlin_seed);
  cfg.perlin_frequency = j.value("perlin_frequency", cfg.perlin_frequency);
  cfg.perlin_octaves = j.value("perlin_octaves", cfg.perlin_octaves);
  cfg.perlin_persistence = j.value("perlin_persistence", cfg.perlin_persistence);
  cfg.validate();
  return cfg;
}

}  // namespace fdrsky
