#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hysteresis.hpp"

namespace msm {

// INI-style configuration: [section] headers, key = value lines, '#' or ';'
// comments, comma-separated numeric arrays. Section and key order is
// preserved so parse -> serialize -> parse is idempotent.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config parse_file(const std::string& path);

  std::string serialize() const;

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  std::vector<double> get_doubles(const std::string& section,
                                  const std::string& key) const;

  void set(const std::string& section, const std::string& key,
           const std::string& value);

  // Directory of the file this config was parsed from; empty for in-memory
  // text. Used to resolve relative paths inside the config.
  const std::string& base_dir() const { return base_dir_; }
  std::string resolve_path(const std::string& path) const;

 private:
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
  };

  const std::string* find(const std::string& section, const std::string& key) const;

  std::vector<Section> sections_;
  std::string base_dir_;
};

// KP model parameter file: a [kp_model] section with fields
//   n, delta, w, m, gamma, rho, y0
// where the per-operator fields are comma-separated arrays of length n.
KpModel kp_model_from_config(const Config& cfg, const std::string& section = "kp_model");
void kp_model_to_config(const KpModel& model, Config* cfg,
                        const std::string& section = "kp_model");
KpModel load_kp_model(const std::string& path);
void save_kp_model(const KpModel& model, const std::string& path);

}  // namespace msm
