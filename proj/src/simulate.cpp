#include "simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "errors.hpp"
#include "rng.hpp"

namespace msm {

ReferenceSpec reference_spec_from_config(const Config& cfg, const std::string& section) {
  ReferenceSpec spec;
  const std::string kind = cfg.get_string(section, "type");
  if (kind == "step")
    spec.kind = ReferenceSpec::Kind::step;
  else if (kind == "sine")
    spec.kind = ReferenceSpec::Kind::sine;
  else if (kind == "triangle")
    spec.kind = ReferenceSpec::Kind::triangle;
  else if (kind == "random-amplitude")
    spec.kind = ReferenceSpec::Kind::random_amplitude;
  else
    throw ConfigError("[" + section + "] type: unknown reference kind '" + kind + "'");

  spec.amplitude = cfg.get_double(section, "amplitude");
  spec.frequency_hz = cfg.get_double(section, "frequency_hz", 1.0);
  spec.offset = cfg.get_double(section, "offset", 0.0);
  spec.amplitude_min = cfg.get_double(section, "amplitude_min", 0.0);
  spec.seed = cfg.get_u64(section, "seed", 0);
  if (spec.kind != ReferenceSpec::Kind::step && !(spec.frequency_hz > 0.0))
    throw ConfigError("[" + section + "] frequency_hz must be > 0");
  return spec;
}

TimeSeries make_reference(const ReferenceSpec& spec, double duration_s,
                          double sample_rate_hz) {
  if (!(duration_s > 0.0) || !(sample_rate_hz > 0.0))
    throw std::invalid_argument("reference: duration and sample rate must be > 0");
  const double h = 1.0 / sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  if (n == 0) throw std::invalid_argument("reference: empty signal");

  TimeSeries ts(h);
  std::vector<double>& ref = ts.add_channel("reference");
  ref.resize(n);

  switch (spec.kind) {
    case ReferenceSpec::Kind::step:
      for (std::size_t k = 0; k < n; ++k) ref[k] = spec.offset + spec.amplitude;
      break;
    case ReferenceSpec::Kind::sine:
      for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * h;
        ref[k] = spec.offset +
                 spec.amplitude * std::sin(2.0 * std::numbers::pi * spec.frequency_hz * t);
      }
      break;
    case ReferenceSpec::Kind::triangle: {
      const double period = 1.0 / spec.frequency_hz;
      for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * h;
        double phase = std::fmod(t, period) / period;  // [0, 1)
        double unit;
        if (phase < 0.25)
          unit = 4.0 * phase;
        else if (phase < 0.75)
          unit = 2.0 - 4.0 * phase;
        else
          unit = -4.0 + 4.0 * phase;
        ref[k] = spec.offset + spec.amplitude * unit;
      }
      break;
    }
    case ReferenceSpec::Kind::random_amplitude: {
      Rng rng(spec.seed);
      const double period = 1.0 / spec.frequency_hz;
      double current = rng.uniform(spec.amplitude_min, spec.amplitude);
      std::size_t current_period = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * h;
        const auto idx = static_cast<std::size_t>(std::floor(t / period));
        while (current_period < idx) {
          current = rng.uniform(spec.amplitude_min, spec.amplitude);
          ++current_period;
        }
        ref[k] = spec.offset +
                 current * std::sin(2.0 * std::numbers::pi * spec.frequency_hz * t);
      }
      break;
    }
  }
  return ts;
}

PlantModel::PlantModel(KpModel hysteresis, DiscreteSystem linear, double kappa_tilde,
                       double input_min, double input_max)
    : hysteresis_(std::move(hysteresis)),
      linear_(std::move(linear)),
      kappa_tilde_(kappa_tilde),
      input_min_(input_min),
      input_max_(input_max) {
  if (!(input_min < input_max)) throw std::invalid_argument("plant input range is empty");
  if (!(kappa_tilde > 0.0)) throw std::invalid_argument("kappa_tilde must be > 0");
}

double PlantModel::step(double command, double disturbance) {
  const double clamped = std::clamp(command, input_min_, input_max_);
  if (clamped != command) ++clamped_;
  const double y_h = hysteresis_.apply(clamped) + disturbance;
  output_ = linear_.step(kappa_tilde_ * y_h);
  return output_;
}

double PlantModel::default_kappa_tilde() {
  // 500 um full stroke divided by the identified DC gain.
  return 500e-6 / plant_identified().dc_gain();
}

LoopMode loop_mode_from_string(const std::string& name) {
  if (name == "feedback-only") return LoopMode::feedback_only;
  if (name == "feedforward-only") return LoopMode::feedforward_only;
  if (name == "two-dof") return LoopMode::two_dof;
  throw ConfigError("unknown loop mode '" + name + "'");
}

std::string to_string(LoopMode mode) {
  switch (mode) {
    case LoopMode::feedback_only: return "feedback-only";
    case LoopMode::feedforward_only: return "feedforward-only";
    case LoopMode::two_dof: return "two-dof";
  }
  return "?";
}

ScenarioConfig scenario_from_config(const Config& cfg) {
  ScenarioConfig sc;
  sc.mode = loop_mode_from_string(cfg.get_string("run", "mode", "two-dof"));
  sc.duration_s = cfg.get_double("run", "duration_s");
  sc.sample_rate_hz = cfg.get_double("run", "sample_rate_hz", 2000.0);
  sc.seed = cfg.get_u64("run", "seed", 0);
  sc.reference = reference_spec_from_config(cfg, "reference");

  if (cfg.has("plant", "kp_file")) {
    sc.plant_hysteresis = load_kp_model(cfg.resolve_path(cfg.get_string("plant", "kp_file")));
  } else {
    sc.plant_hysteresis = kp_model_from_config(cfg, "kp_model");
  }
  if (cfg.has("plant", "num")) {
    sc.plant_tf = TransferFunction(cfg.get_doubles("plant", "num"),
                                   cfg.get_doubles("plant", "den"),
                                   cfg.get_double("plant", "delay", 0.0));
  } else {
    sc.plant_tf = plant_identified();
  }
  sc.kappa_tilde = cfg.get_double("plant", "kappa_tilde", 0.0);
  sc.input_min = cfg.get_double("plant", "input_min", 0.0);
  sc.input_max = cfg.get_double("plant", "input_max", 5.0);
  sc.disturbance_bound = cfg.get_double("plant", "disturbance_bound", 0.0);

  sc.pi_kp = cfg.get_double("controller", "kp", 1.13e4);
  sc.pi_ki = cfg.get_double("controller", "ki", 3.06e5);
  if (cfg.has("controller", "u_min") || cfg.has("controller", "u_max")) {
    PiLimits lim{};
    lim.lo = cfg.get_double("controller", "u_min");
    lim.hi = cfg.get_double("controller", "u_max");
    lim.anti_windup = cfg.get_bool("controller", "anti_windup", true);
    sc.pi_limits = lim;
  }

  sc.ff_gain = cfg.get_double("compensator", "gain", 2000.0);
  if (cfg.has("compensator", "kp_file")) {
    // mismatched internal model for feedforward robustness studies
    sc.ff_model = load_kp_model(cfg.resolve_path(cfg.get_string("compensator", "kp_file")));
  }
  sc.filter_cutoff_hz = cfg.get_double("filter", "cutoff_hz", 10.0);
  sc.noise_std = cfg.get_double("noise", "std", 8e-6);
  return sc;
}

TimeSeries run_scenario(const ScenarioConfig& cfg) {
  if (!(cfg.duration_s > 0.0)) throw ConfigError("scenario: duration_s must be > 0");
  if (!(cfg.sample_rate_hz > 0.0)) throw ConfigError("scenario: sample_rate_hz must be > 0");
  if (!(cfg.noise_std >= 0.0)) throw ConfigError("scenario: noise std must be >= 0");
  if (cfg.plant_hysteresis.size() == 0)
    throw ConfigError("scenario: plant hysteresis model not configured");

  const double h = 1.0 / cfg.sample_rate_hz;
  const TimeSeries ref_ts = make_reference(cfg.reference, cfg.duration_s, cfg.sample_rate_hz);
  const std::vector<double>& ref = ref_ts.channel("reference");

  const double kappa =
      cfg.kappa_tilde > 0.0 ? cfg.kappa_tilde : PlantModel::default_kappa_tilde();
  PlantModel plant(cfg.plant_hysteresis, discretize(cfg.plant_tf, h), kappa,
                   cfg.input_min, cfg.input_max);
  DiscreteSystem filter = discretize(lowpass_filter(cfg.filter_cutoff_hz), h);
  DiscreteSystem ref_filter = filter;  // identical filter on the reference side
  PiController pi(cfg.pi_kp, cfg.pi_ki, h, cfg.pi_limits);

  // Feedforward branch: the internal model is the normalized hysteresis, so
  // the reference enters divided by the steady-state displacement scale.
  KpModel ff_model = cfg.ff_model ? *cfg.ff_model : cfg.plant_hysteresis;
  const double ff_scale = kappa * cfg.plant_tf.dc_gain();
  Compensator comp(std::move(ff_model), cfg.ff_gain,
                   CompensatorLimits{cfg.input_min, cfg.input_max});
  comp.reset(0.0, 0.0);

  // Independent seeded streams for sensor noise and disturbance.
  Rng noise_rng(cfg.seed);
  Rng dist_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  TimeSeries out(h);
  auto& c_ref = out.add_channel("reference");
  auto& c_y = out.add_channel("plant_output");
  auto& c_meas = out.add_channel("measured_output");
  auto& c_filt = out.add_channel("filtered_output");
  auto& c_uff = out.add_channel("u_ff");
  auto& c_ufb = out.add_channel("u_fb");
  auto& c_u = out.add_channel("plant_input");
  auto& c_err = out.add_channel("error");
  const std::size_t n = ref.size();
  for (auto* ch : {&c_ref, &c_y, &c_meas, &c_filt, &c_uff, &c_ufb, &c_u, &c_err})
    ch->reserve(n);

  double y_prev = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double y_meas = y_prev + (cfg.noise_std > 0.0 ? noise_rng.gaussian(cfg.noise_std) : 0.0);
    const double y_filt = filter.step(y_meas);
    const double e = ref_filter.step(ref[k]) - y_filt;
    const double u_fb = (cfg.mode != LoopMode::feedforward_only) ? pi.step(e) : 0.0;
    const double u_ff =
        (cfg.mode != LoopMode::feedback_only) ? comp.step(ref[k] / ff_scale, h) : 0.0;
    const double u = u_ff + u_fb;
    const double dist =
        cfg.disturbance_bound > 0.0
            ? dist_rng.uniform(-cfg.disturbance_bound, cfg.disturbance_bound)
            : 0.0;
    y_prev = plant.step(u, dist);

    c_ref.push_back(ref[k]);
    c_y.push_back(y_prev);
    c_meas.push_back(y_meas);
    c_filt.push_back(y_filt);
    c_uff.push_back(u_ff);
    c_ufb.push_back(u_fb);
    c_u.push_back(u);
    c_err.push_back(e);
  }

  out.metadata()["mode"] = to_string(cfg.mode);
  out.metadata()["seed"] = std::to_string(cfg.seed);
  out.metadata()["kappa_tilde"] = std::to_string(kappa);
  out.metadata()["input_clamped_samples"] = std::to_string(plant.clamped_samples());
  return out;
}

double rms_tracking_error(const TimeSeries& run, double from_time_s) {
  const auto& ref = run.channel("reference");
  const auto& y = run.channel("plant_output");
  const auto start = static_cast<std::size_t>(
      std::max(0.0, std::ceil(from_time_s / run.sample_period())));
  if (start >= ref.size()) throw std::invalid_argument("rms window beyond the run");
  double acc = 0.0;
  for (std::size_t k = start; k < ref.size(); ++k) {
    const double e = ref[k] - y[k];
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(ref.size() - start));
}

double fluctuation_band(const TimeSeries& run, double from_time_s) {
  const auto& y = run.channel("plant_output");
  const auto start = static_cast<std::size_t>(
      std::max(0.0, std::ceil(from_time_s / run.sample_period())));
  if (start >= y.size()) throw std::invalid_argument("band window beyond the run");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t k = start; k < y.size(); ++k) {
    lo = std::min(lo, y[k]);
    hi = std::max(hi, y[k]);
  }
  return hi - lo;
}

}  // namespace msm
