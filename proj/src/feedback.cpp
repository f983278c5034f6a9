#include "feedback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "errors.hpp"

namespace msm {

PiController::PiController(double kp, double ki, double sample_period,
                           std::optional<PiLimits> limits)
    : kp_(kp), ki_(ki), h_(sample_period), limits_(limits) {
  if (!(kp > 0.0) || !(ki > 0.0)) throw std::invalid_argument("PI gains must be > 0");
  if (!(sample_period > 0.0)) throw std::invalid_argument("sample period must be > 0");
  if (limits_ && !(limits_->lo < limits_->hi))
    throw std::invalid_argument("PI limits: lo must be < hi");
}

double PiController::step(double error) {
  if (!std::isfinite(error)) throw std::invalid_argument("non-finite error sample");
  const double integ_next = integ_ + h_ * error;
  const double raw = kp_ * error + ki_ * integ_next;
  if (!limits_) {
    integ_ = integ_next;
    return raw;
  }
  const double clamped = std::clamp(raw, limits_->lo, limits_->hi);
  const bool pushing_out = (raw > limits_->hi && error > 0.0) ||
                           (raw < limits_->lo && error < 0.0);
  if (!(limits_->anti_windup && clamped != raw && pushing_out)) integ_ = integ_next;
  return clamped;
}

void PiController::reset() { integ_ = 0.0; }

TransferFunction open_loop(double kp, double ki, const TransferFunction& plant,
                           const TransferFunction& filter) {
  return pi_transfer(kp, ki).series(plant).series(filter);
}

namespace {

constexpr double kBandLo = 1e-1;
constexpr double kBandHi = 1e5;
constexpr int kGridPerDecade = 240;

double principal(double phase) {
  while (phase > std::numbers::pi) phase -= 2.0 * std::numbers::pi;
  while (phase <= -std::numbers::pi) phase += 2.0 * std::numbers::pi;
  return phase;
}

struct PhaseGrid {
  std::vector<double> omega;
  std::vector<double> mag;        // |L(j w)| (the delay does not change it)
  std::vector<double> phase_rat;  // unwrapped rational phase, radians
};

PhaseGrid scan(const TransferFunction& loop) {
  PhaseGrid g;
  const int decades = static_cast<int>(std::round(std::log10(kBandHi / kBandLo)));
  const int n = decades * kGridPerDecade + 1;
  g.omega.resize(n);
  g.mag.resize(n);
  g.phase_rat.resize(n);
  double prev = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = kBandLo * std::pow(10.0, static_cast<double>(i) / kGridPerDecade);
    const std::complex<double> v = loop.at(std::complex<double>(0.0, w));
    g.omega[i] = w;
    g.mag[i] = std::abs(v);
    const double raw = std::arg(v);
    if (i == 0) {
      g.phase_rat[i] = raw;
    } else {
      g.phase_rat[i] = prev + principal(raw - prev);
    }
    prev = g.phase_rat[i];
  }
  return g;
}

// Unwrapped rational phase at an arbitrary w, anchored to grid index i
// (requires omega[i] <= w <= omega[i+1] so the increment stays below pi).
double phase_rat_at(const TransferFunction& loop, const PhaseGrid& g, std::size_t i,
                    double w) {
  const double raw = std::arg(loop.at(std::complex<double>(0.0, w)));
  return g.phase_rat[i] +
         principal(raw - principal(g.phase_rat[i]));
}

double total_phase(const TransferFunction& loop, const PhaseGrid& g, std::size_t i,
                   double w) {
  return phase_rat_at(loop, g, i, w) - w * loop.delay();
}

}  // namespace

MarginReport stability_margins(const TransferFunction& loop) {
  const PhaseGrid g = scan(loop);
  const std::size_t n = g.omega.size();

  // Lowest gain crossover of |L| - 1.
  double w_gc = -1.0;
  std::size_t gc_anchor = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double f0 = g.mag[i] - 1.0;
    const double f1 = g.mag[i + 1] - 1.0;
    if (f0 == 0.0) {
      w_gc = g.omega[i];
      gc_anchor = i;
      break;
    }
    if (f0 * f1 < 0.0) {
      double lo = g.omega[i], hi = g.omega[i + 1];
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = std::abs(loop.at(std::complex<double>(0.0, mid))) - 1.0;
        if ((fm > 0.0) == (f0 > 0.0))
          lo = mid;
        else
          hi = mid;
        if (hi - lo <= 1e-13 * hi) break;
      }
      w_gc = 0.5 * (lo + hi);
      gc_anchor = i;
      break;
    }
  }
  if (w_gc < 0.0)
    throw NumericalError("no gain crossover in band [1e-1, 1e5] rad/s");

  MarginReport report;
  report.gain_crossover_rad_s = w_gc;
  const double phase_gc = total_phase(loop, g, gc_anchor, w_gc);
  report.phase_margin_deg = 180.0 + phase_gc * 180.0 / std::numbers::pi;

  // First phase crossover of the unwrapped phase through -180 deg.
  report.gain_margin_db = std::numeric_limits<double>::infinity();
  report.phase_crossover_rad_s = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double p0 = g.phase_rat[i] - g.omega[i] * loop.delay() + std::numbers::pi;
    const double p1 = g.phase_rat[i + 1] - g.omega[i + 1] * loop.delay() + std::numbers::pi;
    if (p0 == 0.0 || p0 * p1 < 0.0) {
      double lo = g.omega[i], hi = g.omega[i + 1];
      if (p0 != 0.0) {
        for (int it = 0; it < 100; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double pm = total_phase(loop, g, i, mid) + std::numbers::pi;
          if ((pm > 0.0) == (p0 > 0.0))
            lo = mid;
          else
            hi = mid;
          if (hi - lo <= 1e-13 * hi) break;
        }
      } else {
        hi = lo;
      }
      const double w_pc = 0.5 * (lo + hi);
      report.phase_crossover_rad_s = w_pc;
      const double mag = std::abs(loop.at(std::complex<double>(0.0, w_pc)));
      report.gain_margin_db = -20.0 * std::log10(mag);
      break;
    }
  }
  return report;
}

std::vector<ShapePoint> shape_grid(const TransferFunction& plant,
                                   const TransferFunction& filter,
                                   const std::vector<double>& kp_grid,
                                   const std::vector<double>& ki_grid) {
  std::vector<ShapePoint> points;
  for (double kp : kp_grid) {
    for (double ki : ki_grid) {
      try {
        const MarginReport r = stability_margins(open_loop(kp, ki, plant, filter));
        points.push_back({kp, ki, r.phase_margin_deg, r.gain_crossover_rad_s});
      } catch (const NumericalError&) {
        // no crossover in band: not a usable design point
      }
    }
  }
  std::sort(points.begin(), points.end(), [](const ShapePoint& a, const ShapePoint& b) {
    if (a.gain_crossover_rad_s != b.gain_crossover_rad_s)
      return a.gain_crossover_rad_s > b.gain_crossover_rad_s;
    return a.phase_margin_deg > b.phase_margin_deg;
  });
  std::vector<ShapePoint> front;
  double best_pm = -std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    if (p.phase_margin_deg > best_pm) {
      front.push_back(p);
      best_pm = p.phase_margin_deg;
    }
  }
  std::reverse(front.begin(), front.end());
  return front;
}

}  // namespace msm
