#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace msm {

// Uniformly sampled named channels sharing one sample period. This is the
// universal record every batch driver consumes and produces.
//
// CSV layout: optional '# key = value' metadata lines, then a mandatory
// header row 'time_s,<channel>,...', then rows with 12 significant digits.
class TimeSeries {
 public:
  explicit TimeSeries(double sample_period);

  double sample_period() const { return h_; }
  std::size_t length() const;
  std::size_t channel_count() const { return names_.size(); }

  // The returned reference stays valid while further channels are added.
  std::vector<double>& add_channel(const std::string& name);
  void add_channel(const std::string& name, std::vector<double> data);

  bool has_channel(std::string_view name) const;
  const std::vector<double>& channel(std::string_view name) const;
  std::vector<double>& channel(std::string_view name);
  const std::string& channel_name(std::size_t idx) const { return names_[idx]; }
  const std::vector<double>& channel_at(std::size_t idx) const { return channels_[idx]; }

  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  std::vector<double> time() const;

  void write_csv(const std::string& path) const;
  static TimeSeries read_csv(const std::string& path);

 private:
  void check_lengths() const;

  double h_;
  std::vector<std::string> names_;
  std::deque<std::vector<double>> channels_;
  std::map<std::string, std::string> metadata_;
};

}  // namespace msm
