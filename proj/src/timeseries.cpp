#include "timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "errors.hpp"

namespace msm {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

TimeSeries::TimeSeries(double sample_period) : h_(sample_period) {
  if (!(sample_period > 0.0)) throw std::invalid_argument("sample period must be > 0");
}

std::size_t TimeSeries::length() const {
  return channels_.empty() ? 0 : channels_.front().size();
}

std::vector<double>& TimeSeries::add_channel(const std::string& name) {
  if (has_channel(name)) throw std::invalid_argument("duplicate channel: " + name);
  names_.push_back(name);
  channels_.emplace_back();
  return channels_.back();
}

void TimeSeries::add_channel(const std::string& name, std::vector<double> data) {
  if (!channels_.empty() && data.size() != length())
    throw std::invalid_argument("channel length mismatch for " + name);
  add_channel(name) = std::move(data);
}

bool TimeSeries::has_channel(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<double>& TimeSeries::channel(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return channels_[i];
  throw std::invalid_argument("no such channel: " + std::string(name));
}

std::vector<double>& TimeSeries::channel(std::string_view name) {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return channels_[i];
  throw std::invalid_argument("no such channel: " + std::string(name));
}

std::vector<double> TimeSeries::time() const {
  std::vector<double> t(length());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<double>(k) * h_;
  return t;
}

void TimeSeries::check_lengths() const {
  for (const auto& ch : channels_)
    if (ch.size() != length()) throw std::invalid_argument("channel lengths differ");
}

void TimeSeries::write_csv(const std::string& path) const {
  check_lengths();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);

  for (const auto& [key, value] : metadata_) out << "# " << key << " = " << value << "\n";

  out << "time_s";
  for (const auto& name : names_) out << "," << name;
  out << "\n";

  const std::size_t n = length();
  for (std::size_t k = 0; k < n; ++k) {
    out << format_value(static_cast<double>(k) * h_);
    for (const auto& ch : channels_) out << "," << format_value(ch[k]);
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

TimeSeries TimeSeries::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);

  std::map<std::string, std::string> metadata;
  std::string line;
  std::vector<std::string> header;

  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto eq = t.find('=');
      if (eq != std::string::npos)
        metadata[trim(t.substr(1, eq - 1))] = trim(t.substr(eq + 1));
      continue;
    }
    // Header row.
    std::stringstream ss(t);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(trim(field));
    break;
  }
  if (header.empty() || header.front() != "time_s")
    throw ConfigError(path + ": first CSV column must be time_s");

  std::vector<std::vector<double>> cols(header.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    std::stringstream ss(t);
    std::string field;
    std::size_t idx = 0;
    while (std::getline(ss, field, ',')) {
      if (idx >= header.size())
        throw ConfigError(path + ": too many fields in a data row");
      try {
        cols[idx].push_back(std::stod(field));
      } catch (const std::exception&) {
        throw ConfigError(path + ": cannot parse number '" + trim(field) + "'");
      }
      ++idx;
    }
    if (idx != header.size()) throw ConfigError(path + ": short data row");
  }

  const std::vector<double>& t = cols.front();
  if (t.size() < 2) throw ConfigError(path + ": need at least two samples");
  const double h = t[1] - t[0];
  if (!(h > 0.0)) throw ConfigError(path + ": time column must increase");
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double expect = t[0] + static_cast<double>(k) * h;
    if (std::abs(t[k] - expect) > 1e-6 * std::max(1.0, std::abs(expect)))
      throw ConfigError(path + ": non-uniform time column");
  }

  TimeSeries ts(h);
  ts.metadata_ = std::move(metadata);
  for (std::size_t i = 1; i < header.size(); ++i)
    ts.add_channel(header[i], std::move(cols[i]));
  return ts;
}

}  // namespace msm
