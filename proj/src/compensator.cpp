#include "compensator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace msm {

Compensator::Compensator(KpModel internal_model, double gain,
                         std::optional<CompensatorLimits> limits)
    : model_(std::move(internal_model)), gain_(gain), limits_(limits) {
  if (!(gain > 0.0)) throw std::invalid_argument("compensator gain must be > 0");
  if (limits_ && !(limits_->lo < limits_->hi))
    throw std::invalid_argument("compensator limits: lo must be < hi");
}

double Compensator::step(double reference, double dt) {
  if (!std::isfinite(reference)) throw std::invalid_argument("non-finite reference");
  if (!(dt > 0.0)) throw std::invalid_argument("sample period must be > 0");
  const double y_hat = model_.apply(u_);
  u_ += dt * gain_ * (reference - y_hat);
  if (limits_) u_ = std::clamp(u_, limits_->lo, limits_->hi);
  return u_;
}

void Compensator::reset(double y0, double u0) {
  if (!std::isfinite(y0) || !std::isfinite(u0))
    throw std::invalid_argument("non-finite compensator reset values");
  model_.reset(y0);
  u_ = u0;
}

double Compensator::stable_gain_limit(const KpModel& model, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample period must be > 0");
  return 2.0 / (dt * model.max_total_slope());
}

CompensationRun run_compensation(const KpModel& model, double gain,
                                 const TimeSeries& reference,
                                 const std::string& reference_channel,
                                 std::optional<CompensatorLimits> limits,
                                 double progress_window_s, double progress_tol_rel) {
  const std::vector<double>& ref = reference.channel(reference_channel);
  const double h = reference.sample_period();

  Compensator comp(model, gain, limits);
  comp.reset(0.0, 0.0);

  CompensationRun run{TimeSeries(h), false};
  auto& y_star = run.series.add_channel("y_star");
  auto& u_out = run.series.add_channel("u");
  auto& y_hat = run.series.add_channel("y_hat");
  y_star.reserve(ref.size());
  u_out.reserve(ref.size());
  y_hat.reserve(ref.size());

  double ref_lo = std::numeric_limits<double>::infinity();
  double ref_hi = -std::numeric_limits<double>::infinity();
  for (double r : ref) {
    ref_lo = std::min(ref_lo, r);
    ref_hi = std::max(ref_hi, r);
  }
  const double scale = std::max({ref_hi - ref_lo, std::abs(ref_hi), std::abs(ref_lo)});
  const double tol = progress_tol_rel * std::max(scale, 1e-12);
  const std::size_t window =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(progress_window_s / h)));

  double window_best = std::numeric_limits<double>::infinity();
  double prev_best = std::numeric_limits<double>::infinity();
  std::size_t in_window = 0;

  for (std::size_t k = 0; k < ref.size(); ++k) {
    const double u = comp.step(ref[k], h);
    const double err = std::abs(ref[k] - comp.model_output());
    y_star.push_back(ref[k]);
    u_out.push_back(u);
    y_hat.push_back(comp.model_output());

    window_best = std::min(window_best, err);
    if (++in_window == window) {
      if (window_best > tol && window_best >= prev_best) run.no_progress = true;
      prev_best = window_best;
      window_best = std::numeric_limits<double>::infinity();
      in_window = 0;
    }
  }

  run.series.metadata()["gain"] = std::to_string(gain);
  run.series.metadata()["no_progress"] = run.no_progress ? "true" : "false";
  return run;
}

}  // namespace msm
