#pragma once

#include <optional>
#include <string>

#include "hysteresis.hpp"
#include "timeseries.hpp"

namespace msm {

struct CompensatorLimits {
  double lo;
  double hi;
};

// Inversion-free feedforward compensator: an integrator in closed loop with
// a private copy of the hysteresis model,
//
//   u <- u + h * g * (y_star - H(u)),
//
// with H evaluated at the pre-update u (explicit Euler). The running input u
// approximates the inverse image of the reference under H. With the
// instantaneous total slope gamma_tot of H, the discrete loop is stable iff
// h * g * gamma_tot < 2.
class Compensator {
 public:
  Compensator(KpModel internal_model, double gain,
              std::optional<CompensatorLimits> limits = std::nullopt);

  // Advances one sample and returns the updated u.
  double step(double reference, double dt);

  // Resets the internal model to y0 (per operator) and the output to u0.
  void reset(double y0, double u0);

  double input() const { return u_; }
  // Internal model output at the last evaluated u.
  double model_output() const { return model_.output(); }
  const KpModel& model() const { return model_; }
  double gain() const { return gain_; }

  // Largest loop gain with a stable Euler update at sample period dt,
  // evaluated at the model's worst-case total slope.
  static double stable_gain_limit(const KpModel& model, double dt);

 private:
  KpModel model_;
  double gain_;
  double u_ = 0.0;
  std::optional<CompensatorLimits> limits_;
};

struct CompensationRun {
  TimeSeries series;        // channels: y_star, u, y_hat
  bool no_progress = false; // latched by the reachability monitor
};

// Batch driver. The no-progress monitor flags references that stay farther
// than progress_tol_rel * (reference range) from the model output without
// improvement over a full window; such references are unreachable for the
// integrator loop (typically beyond the model's saturation bound).
CompensationRun run_compensation(const KpModel& model, double gain,
                                 const TimeSeries& reference,
                                 const std::string& reference_channel = "reference",
                                 std::optional<CompensatorLimits> limits = std::nullopt,
                                 double progress_window_s = 0.5,
                                 double progress_tol_rel = 0.02);

}  // namespace msm
