#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "linalg.hpp"

namespace msm {

// Proper rational transfer function in s plus a pure input delay.
// Coefficients are stored in descending powers of s with a nonzero leading
// denominator coefficient.
class TransferFunction {
 public:
  TransferFunction(std::vector<double> num, std::vector<double> den,
                   double delay = 0.0);

  const std::vector<double>& num() const { return num_; }
  const std::vector<double>& den() const { return den_; }
  double delay() const { return delay_; }

  double dc_gain() const;

  // Rational part only, no delay.
  std::complex<double> at(std::complex<double> s) const;
  // Full response at s = j*omega including the delay term.
  std::complex<double> response(double omega) const;

  // Product of the rational parts; delays add.
  TransferFunction series(const TransferFunction& other) const;

 private:
  std::vector<double> num_;
  std::vector<double> den_;
  double delay_ = 0.0;
};

// G(s) = 45.57 e^{-0.002 s} / (s^2 + 737.9 s + 5.439e5), the identified
// actuator dynamics from command current to displacement.
TransferFunction plant_identified();

// F(s) = 1 / (mu s + 1)^2 with mu = 1 / (2 pi cutoff_hz).
TransferFunction lowpass_filter(double cutoff_hz);

// C(s) = (kp s + ki) / s.
TransferFunction pi_transfer(double kp, double ki);

std::vector<std::complex<double>> freq_response(const TransferFunction& tf,
                                                const std::vector<double>& omegas);

// Continuous controllable-canonical realization: x' = a x + b u, y = c x + d u.
struct StateSpace {
  Matrix a;
  std::vector<double> b;
  std::vector<double> c;
  double d = 0.0;
};

StateSpace to_state_space(const TransferFunction& tf);

// Exact zero-order-hold discretization; the delay is realized as a ring
// buffer of delay/h samples and must divide the sample period to within
// 1e-9 relative.
class DiscreteSystem {
 public:
  DiscreteSystem(const TransferFunction& tf, double sample_period);

  // Pushes u through the delay line, emits y[k] = c x[k] + d u[k-nd],
  // then advances the state.
  double step(double u);
  void reset();

  double sample_period() const { return h_; }
  std::size_t state_dimension() const { return x_.size(); }
  std::size_t delay_samples() const { return delay_line_.size(); }
  double feedthrough() const { return d_; }

 private:
  Matrix ad_;
  std::vector<double> bd_;
  std::vector<double> c_;
  double d_ = 0.0;
  double h_ = 0.0;
  std::vector<double> x_;
  std::vector<double> delay_line_;
  std::size_t delay_pos_ = 0;
};

inline DiscreteSystem discretize(const TransferFunction& tf, double sample_period) {
  return DiscreteSystem(tf, sample_period);
}

// Roots of a x^2 + b x + c (a != 0).
std::pair<std::complex<double>, std::complex<double>> quadratic_roots(double a, double b,
                                                                      double c);

}  // namespace msm
