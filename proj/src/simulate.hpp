#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "compensator.hpp"
#include "config.hpp"
#include "feedback.hpp"
#include "hysteresis.hpp"
#include "lti.hpp"
#include "timeseries.hpp"

namespace msm {

struct ReferenceSpec {
  enum class Kind { step, sine, triangle, random_amplitude };
  Kind kind = Kind::step;
  double amplitude = 1.0;      // step height / sine amplitude / triangle peak
  double frequency_hz = 1.0;   // carrier frequency for random_amplitude
  double offset = 0.0;
  double amplitude_min = 0.0;  // random_amplitude draws from [amplitude_min, amplitude]
  std::uint64_t seed = 0;      // random_amplitude only
};

ReferenceSpec reference_spec_from_config(const Config& cfg, const std::string& section);

// Seeded deterministic generator; channel name "reference". The triangle
// starts at the offset, peaks at +amplitude after a quarter period and at
// -amplitude after three quarters. Random-amplitude holds a freshly drawn
// sine amplitude over each carrier period.
TimeSeries make_reference(const ReferenceSpec& spec, double duration_s,
                          double sample_rate_hz);

// Hysteresis input stage in series with the discretized linear dynamics:
//   y_h = H(clamp(i_cmd)) + disturbance,  x = G_d(kappa_tilde * y_h).
class PlantModel {
 public:
  PlantModel(KpModel hysteresis, DiscreteSystem linear, double kappa_tilde,
             double input_min = 0.0, double input_max = 5.0);

  double step(double command, double disturbance = 0.0);

  double output() const { return output_; }
  std::size_t clamped_samples() const { return clamped_; }
  const KpModel& hysteresis() const { return hysteresis_; }
  double kappa_tilde() const { return kappa_tilde_; }

  // Combined steady-state gain mapping the unity-saturated hysteresis output
  // onto the nominal 500 um stroke through the identified DC gain.
  static double default_kappa_tilde();

 private:
  KpModel hysteresis_;
  DiscreteSystem linear_;
  double kappa_tilde_;
  double input_min_;
  double input_max_;
  double output_ = 0.0;
  std::size_t clamped_ = 0;
};

enum class LoopMode { feedback_only, feedforward_only, two_dof };

LoopMode loop_mode_from_string(const std::string& name);
std::string to_string(LoopMode mode);

struct ScenarioConfig {
  LoopMode mode = LoopMode::two_dof;
  ReferenceSpec reference;
  double duration_s = 1.0;
  double sample_rate_hz = 2000.0;
  double noise_std = 8e-6;
  std::uint64_t seed = 0;

  KpModel plant_hysteresis;             // unity-range input stage
  TransferFunction plant_tf = plant_identified();
  double kappa_tilde = 0.0;             // 0: use PlantModel::default_kappa_tilde()
  double input_min = 0.0;
  double input_max = 5.0;
  double disturbance_bound = 0.0;       // uniform in [-bound, bound], seeded

  double pi_kp = 1.13e4;
  double pi_ki = 3.06e5;
  std::optional<PiLimits> pi_limits;

  double ff_gain = 2000.0;              // in normalized hysteresis output units
  std::optional<KpModel> ff_model;      // defaults to a copy of plant_hysteresis

  double filter_cutoff_hz = 10.0;
};

ScenarioConfig scenario_from_config(const Config& cfg);

// Runs the selected loop topology at a single rate. Sample ordering: read
// sensor (previous plant output + noise), filter, error, PI, compensator,
// sum, plant. The measurement filter is mirrored onto the reference before
// the error junction (e = F(y*) - F(y_meas)); filtering the measurement
// alone makes the feedback fight an accurate feedforward through the
// filter's phase lag. The feedforward branch consumes the raw reference
// scaled into normalized hysteresis output units.
//
// Channels: reference, plant_output, measured_output, filtered_output,
// u_ff, u_fb, plant_input, error (as consumed by the PI).
TimeSeries run_scenario(const ScenarioConfig& cfg);

// y* - plant_output RMS over t >= from_time_s.
double rms_tracking_error(const TimeSeries& run, double from_time_s);
// max - min of plant_output over t >= from_time_s. For step scenarios a
// from_time_s of a few linear settling times isolates the hunting around the
// reference from the common rise transient.
double fluctuation_band(const TimeSeries& run, double from_time_s);

}  // namespace msm
