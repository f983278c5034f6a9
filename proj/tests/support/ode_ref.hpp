#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "lti.hpp"

// Adaptive Dormand-Prince RK45 reference for continuous LTI simulation.
// Integrates x' = A x + B u with u held constant over each sample interval
// (the hold makes the per-interval dynamics smooth), sampling y = C x + D u
// at the interval boundaries. The pure delay is applied as an integer input
// shift by the caller's sample count.
namespace ode_ref {

inline std::vector<double> deriv(const msm::StateSpace& ss, const std::vector<double>& x,
                                 double u) {
  std::vector<double> dx = msm::mat_vec(ss.a, x);
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += ss.b[i] * u;
  return dx;
}

inline void rk45_interval(const msm::StateSpace& ss, std::vector<double>& x, double u,
                          double span, double tol) {
  static const double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static const double a[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static const double b5[7] = {35.0 / 384,      0.0,  500.0 / 1113, 125.0 / 192,
                               -2187.0 / 6784, 11.0 / 84, 0.0};
  static const double b4[7] = {5179.0 / 57600,  0.0,         7571.0 / 16695, 393.0 / 640,
                               -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
  (void)c;  // autonomous system

  double t = 0.0;
  double h = span;
  const std::size_t n = x.size();
  while (t < span) {
    h = std::min(h, span - t);
    std::vector<std::vector<double>> k(7);
    for (int stage = 0; stage < 7; ++stage) {
      std::vector<double> xs = x;
      for (int j = 0; j < stage; ++j)
        for (std::size_t i = 0; i < n; ++i) xs[i] += h * a[stage][j] * k[j][i];
      k[stage] = deriv(ss, xs, u);
    }
    std::vector<double> x5 = x, x4 = x;
    for (int stage = 0; stage < 7; ++stage)
      for (std::size_t i = 0; i < n; ++i) {
        x5[i] += h * b5[stage] * k[stage][i];
        x4[i] += h * b4[stage] * k[stage][i];
      }
    double err = 0.0;
    double scale = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      err = std::max(err, std::abs(x5[i] - x4[i]));
      scale = std::max(scale, std::abs(x5[i]));
    }
    if (err <= tol * scale || h <= span * 1e-12) {
      t += h;
      x = std::move(x5);
      h *= 2.0;
    } else {
      h *= 0.5;
    }
  }
}

// Sampled outputs of the delayed continuous system for a piecewise-constant
// input sequence (one value per sample period).
inline std::vector<double> simulate(const msm::TransferFunction& tf,
                                    const std::vector<double>& u, double h,
                                    double tol = 1e-11) {
  const msm::StateSpace ss = msm::to_state_space(tf);
  const auto delay_samples =
      static_cast<std::size_t>(std::llround(tf.delay() / h));

  std::vector<double> x(ss.b.size(), 0.0);
  std::vector<double> y(u.size(), 0.0);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double ud = k >= delay_samples ? u[k - delay_samples] : 0.0;
    double out = ss.d * ud;
    for (std::size_t i = 0; i < x.size(); ++i) out += ss.c[i] * x[i];
    y[k] = out;
    if (!x.empty()) rk45_interval(ss, x, ud, h, tol);
  }
  return y;
}

}  // namespace ode_ref
