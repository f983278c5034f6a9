#pragma once

#include <optional>
#include <vector>

#include "lti.hpp"

namespace msm {

struct PiLimits {
  double lo;
  double hi;
  bool anti_windup = true;  // conditional integration while clamped
};

// Discrete PI with forward-Euler integration:
//   integ <- integ + h e,  u = kp e + ki integ  (then clamped).
// With anti-windup the integrator is frozen whenever the clamp is active in
// the direction of the error.
class PiController {
 public:
  PiController(double kp, double ki, double sample_period,
               std::optional<PiLimits> limits = std::nullopt);

  double step(double error);
  void reset();

  double kp() const { return kp_; }
  double ki() const { return ki_; }
  double integrator() const { return integ_; }
  double sample_period() const { return h_; }

 private:
  double kp_;
  double ki_;
  double h_;
  double integ_ = 0.0;
  std::optional<PiLimits> limits_;
};

struct MarginReport {
  double phase_margin_deg = 0.0;
  double gain_margin_db = 0.0;        // +inf when phase never crosses -180 deg in band
  double gain_crossover_rad_s = 0.0;
  double phase_crossover_rad_s = 0.0; // NaN when none
};

// L(s) = C(s) G(s) F(s) with C(s) = (kp s + ki)/s; delays add.
TransferFunction open_loop(double kp, double ki, const TransferFunction& plant,
                           const TransferFunction& filter);

// Margins over the scan band [1e-1, 1e5] rad/s. The rational phase is
// unwrapped along the band and the delay term enters analytically; margins
// are reported at the lowest gain crossover. Throws NumericalError when |L|
// never crosses unity in the band.
MarginReport stability_margins(const TransferFunction& loop);

struct ShapePoint {
  double kp;
  double ki;
  double phase_margin_deg;
  double gain_crossover_rad_s;
};

// Sweeps the gain grid and returns the Pareto front of
// (gain crossover = bandwidth, phase margin), sorted by crossover.
// Grid points whose loop has no crossover in band are skipped.
std::vector<ShapePoint> shape_grid(const TransferFunction& plant,
                                   const TransferFunction& filter,
                                   const std::vector<double>& kp_grid,
                                   const std::vector<double>& ki_grid);

}  // namespace msm
