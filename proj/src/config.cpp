#include "config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace msm {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string strip_comment(const std::string& line) {
  // Values in this grammar are numbers, identifiers, and paths; a '#' or ';'
  // always starts a comment.
  const auto pos = line.find_first_of("#;");
  return pos == std::string::npos ? line : line.substr(0, pos);
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double parse_number(const std::string& section, const std::string& key,
                    const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (trim(value.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("[" + section + "] " + key + ": cannot parse number '" + value + "'");
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t current = static_cast<std::size_t>(-1);

  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(strip_comment(line));
    if (t.empty()) continue;

    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      const std::string name = trim(t.substr(1, t.size() - 2));
      if (name.empty())
        throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
      current = static_cast<std::size_t>(-1);
      for (std::size_t i = 0; i < cfg.sections_.size(); ++i)
        if (cfg.sections_[i].name == name) current = i;
      if (current == static_cast<std::size_t>(-1)) {
        cfg.sections_.push_back({name, {}});
        current = cfg.sections_.size() - 1;
      }
      continue;
    }

    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    if (current == static_cast<std::size_t>(-1))
      throw ConfigError("line " + std::to_string(line_no) + ": key outside any [section]");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");

    auto& entries = cfg.sections_[current].entries;
    bool replaced = false;
    for (auto& [k, v] : entries)
      if (k == key) {
        v = value;  // last assignment wins
        replaced = true;
      }
    if (!replaced) entries.emplace_back(key, value);
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  Config cfg = parse(buf.str());
  const auto slash = path.find_last_of('/');
  cfg.base_dir_ = slash == std::string::npos ? std::string(".") : path.substr(0, slash);
  return cfg;
}

std::string Config::serialize() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& sec : sections_) {
    if (!first) out << "\n";
    first = false;
    out << "[" << sec.name << "]\n";
    for (const auto& [key, value] : sec.entries) out << key << " = " << value << "\n";
  }
  return out.str();
}

const std::string* Config::find(const std::string& section, const std::string& key) const {
  for (const auto& sec : sections_) {
    if (sec.name != section) continue;
    for (const auto& [k, v] : sec.entries)
      if (k == key) return &v;
  }
  return nullptr;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  const std::string* v = find(section, key);
  if (!v) throw ConfigError("missing [" + section + "] " + key);
  return *v;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  const std::string* v = find(section, key);
  return v ? *v : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  return parse_number(section, key, get_string(section, key));
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  const std::string* v = find(section, key);
  return v ? parse_number(section, key, *v) : fallback;
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key,
                              std::uint64_t fallback) const {
  const std::string* v = find(section, key);
  if (!v) return fallback;
  try {
    return std::stoull(*v);
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": cannot parse integer '" + *v + "'");
  }
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
  const std::string* v = find(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("[" + section + "] " + key + ": cannot parse boolean '" + *v + "'");
}

std::vector<double> Config::get_doubles(const std::string& section,
                                        const std::string& key) const {
  const std::string raw = get_string(section, key);
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const std::string t = trim(field);
    if (t.empty())
      throw ConfigError("[" + section + "] " + key + ": empty array element");
    out.push_back(parse_number(section, key, t));
  }
  if (out.empty()) throw ConfigError("[" + section + "] " + key + ": empty array");
  return out;
}

void Config::set(const std::string& section, const std::string& key,
                 const std::string& value) {
  for (auto& sec : sections_) {
    if (sec.name != section) continue;
    for (auto& [k, v] : sec.entries)
      if (k == key) {
        v = value;
        return;
      }
    sec.entries.emplace_back(key, value);
    return;
  }
  sections_.push_back({section, {{key, value}}});
}

std::string Config::resolve_path(const std::string& path) const {
  if (path.empty() || path.front() == '/' || base_dir_.empty()) return path;
  return base_dir_ + "/" + path;
}

KpModel kp_model_from_config(const Config& cfg, const std::string& section) {
  const auto n_raw = cfg.get_double(section, "n");
  const auto n = static_cast<std::size_t>(n_raw);
  if (n_raw != std::floor(n_raw) || n == 0)
    throw ConfigError("[" + section + "] n must be a positive integer");

  const auto delta = cfg.get_doubles(section, "delta");
  const auto w = cfg.get_doubles(section, "w");
  const auto m = cfg.get_doubles(section, "m");
  const auto gamma = cfg.get_doubles(section, "gamma");
  const auto rho = cfg.get_doubles(section, "rho");
  std::vector<double> y0(n, 0.0);
  if (cfg.has(section, "y0")) y0 = cfg.get_doubles(section, "y0");

  for (const std::vector<double>* arr :
       {&delta, &w, &m, &gamma, &rho, static_cast<const std::vector<double>*>(&y0)})
    if (arr->size() != n)
      throw ConfigError("[" + section + "] per-operator arrays must have length n = " +
                        std::to_string(n));

  std::vector<KpOperator> ops(n);
  for (std::size_t i = 0; i < n; ++i)
    ops[i] = KpOperator{delta[i], w[i], m[i], gamma[i], 0.0};
  KpModel model(std::move(ops), rho);
  model.reset(y0);
  return model;
}

void kp_model_to_config(const KpModel& model, Config* cfg, const std::string& section) {
  auto join = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ", ";
      s += format_number(v[i]);
    }
    return s;
  };
  const auto& ops = model.operators();
  std::vector<double> delta, w, m, gamma, y0;
  for (const auto& op : ops) {
    delta.push_back(op.delta);
    w.push_back(op.w);
    m.push_back(op.m);
    gamma.push_back(op.gamma);
    y0.push_back(op.gamma * op.p);
  }
  cfg->set(section, "n", std::to_string(ops.size()));
  cfg->set(section, "delta", join(delta));
  cfg->set(section, "w", join(w));
  cfg->set(section, "m", join(m));
  cfg->set(section, "gamma", join(gamma));
  cfg->set(section, "rho", join(model.weights()));
  cfg->set(section, "y0", join(y0));
}

KpModel load_kp_model(const std::string& path) {
  return kp_model_from_config(Config::parse_file(path));
}

void save_kp_model(const KpModel& model, const std::string& path) {
  Config cfg;
  kp_model_to_config(model, &cfg);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << cfg.serialize();
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace msm
