#include "lti.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "errors.hpp"

namespace msm {

namespace {

std::vector<double> trim_leading_zeros(std::vector<double> c) {
  std::size_t first = 0;
  while (first + 1 < c.size() && c[first] == 0.0) ++first;
  c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(first));
  return c;
}

std::complex<double> polyval(const std::vector<double>& coeffs, std::complex<double> s) {
  std::complex<double> acc = 0.0;
  for (double c : coeffs) acc = acc * s + c;
  return acc;
}

std::vector<double> conv(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

}  // namespace

TransferFunction::TransferFunction(std::vector<double> num, std::vector<double> den,
                                   double delay)
    : num_(trim_leading_zeros(std::move(num))),
      den_(trim_leading_zeros(std::move(den))),
      delay_(delay) {
  if (den_.empty() || den_.front() == 0.0)
    throw std::invalid_argument("transfer function: zero leading denominator coefficient");
  if (num_.empty()) num_ = {0.0};
  if (num_.size() > den_.size())
    throw std::invalid_argument("transfer function: improper (numerator degree exceeds denominator)");
  if (!(delay_ >= 0.0)) throw std::invalid_argument("transfer function: negative delay");
}

double TransferFunction::dc_gain() const { return num_.back() / den_.back(); }

std::complex<double> TransferFunction::at(std::complex<double> s) const {
  return polyval(num_, s) / polyval(den_, s);
}

std::complex<double> TransferFunction::response(double omega) const {
  const std::complex<double> jw(0.0, omega);
  return at(jw) * std::exp(std::complex<double>(0.0, -omega * delay_));
}

TransferFunction TransferFunction::series(const TransferFunction& other) const {
  return TransferFunction(conv(num_, other.num_), conv(den_, other.den_),
                          delay_ + other.delay_);
}

TransferFunction plant_identified() {
  return TransferFunction({45.57}, {1.0, 737.9, 5.439e5}, 0.002);
}

TransferFunction lowpass_filter(double cutoff_hz) {
  if (!(cutoff_hz > 0.0)) throw std::invalid_argument("low-pass cutoff must be > 0");
  const double mu = 1.0 / (2.0 * std::numbers::pi * cutoff_hz);
  return TransferFunction({1.0}, {mu * mu, 2.0 * mu, 1.0}, 0.0);
}

TransferFunction pi_transfer(double kp, double ki) {
  if (!(kp > 0.0) || !(ki > 0.0)) throw std::invalid_argument("PI gains must be > 0");
  return TransferFunction({kp, ki}, {1.0, 0.0}, 0.0);
}

std::vector<std::complex<double>> freq_response(const TransferFunction& tf,
                                                const std::vector<double>& omegas) {
  std::vector<std::complex<double>> out;
  out.reserve(omegas.size());
  for (double w : omegas) out.push_back(tf.response(w));
  return out;
}

StateSpace to_state_space(const TransferFunction& tf) {
  const std::vector<double>& den = tf.den();
  const std::size_t n = den.size() - 1;

  // Monic denominator and numerator padded to full length.
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = den[i + 1] / den[0];
  std::vector<double> b(n + 1, 0.0);
  const std::vector<double>& num = tf.num();
  for (std::size_t i = 0; i < num.size(); ++i)
    b[n + 1 - num.size() + i] = num[i] / den[0];

  StateSpace ss;
  ss.d = b[0];
  ss.a = Matrix(n, n);
  ss.b.assign(n, 0.0);
  ss.c.assign(n, 0.0);
  if (n == 0) return ss;

  for (std::size_t j = 0; j < n; ++j) ss.a(0, j) = -a[j];
  for (std::size_t i = 1; i < n; ++i) ss.a(i, i - 1) = 1.0;
  ss.b[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) ss.c[i] = b[i + 1] - a[i] * b[0];
  return ss;
}

DiscreteSystem::DiscreteSystem(const TransferFunction& tf, double sample_period)
    : h_(sample_period) {
  if (!(sample_period > 0.0)) throw std::invalid_argument("sample period must be > 0");

  const double ratio = tf.delay() / sample_period;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, std::abs(ratio))) {
    std::ostringstream msg;
    msg << "delay " << tf.delay() << " s is not an integer number of sample periods ("
        << ratio << " samples at h = " << sample_period << " s)";
    throw std::invalid_argument(msg.str());
  }
  delay_line_.assign(static_cast<std::size_t>(rounded), 0.0);

  StateSpace ss = to_state_space(tf);
  const std::size_t n = ss.b.size();
  c_ = ss.c;
  d_ = ss.d;
  x_.assign(n, 0.0);
  bd_.assign(n, 0.0);
  if (n == 0) {
    ad_ = Matrix(0, 0);
    return;
  }

  // Exact ZOH: exp([A B; 0 0] h) = [Ad Bd; 0 I].
  Matrix aug(n + 1, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = ss.a(i, j) * h_;
    aug(i, n) = ss.b[i] * h_;
  }
  Matrix ex = expm(aug);
  ad_ = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) ad_(i, j) = ex(i, j);
    bd_[i] = ex(i, n);
  }
}

double DiscreteSystem::step(double u) {
  double ud = u;
  if (!delay_line_.empty()) {
    ud = delay_line_[delay_pos_];
    delay_line_[delay_pos_] = u;
    delay_pos_ = (delay_pos_ + 1) % delay_line_.size();
  }

  double y = d_ * ud;
  for (std::size_t i = 0; i < x_.size(); ++i) y += c_[i] * x_[i];

  if (!x_.empty()) {
    std::vector<double> xn = mat_vec(ad_, x_);
    for (std::size_t i = 0; i < x_.size(); ++i) xn[i] += bd_[i] * ud;
    x_ = std::move(xn);
  }
  return y;
}

void DiscreteSystem::reset() {
  std::fill(x_.begin(), x_.end(), 0.0);
  std::fill(delay_line_.begin(), delay_line_.end(), 0.0);
  delay_pos_ = 0;
}

std::pair<std::complex<double>, std::complex<double>> quadratic_roots(double a, double b,
                                                                      double c) {
  if (a == 0.0) throw std::invalid_argument("quadratic_roots: leading coefficient is zero");
  const std::complex<double> disc = std::sqrt(std::complex<double>(b * b - 4.0 * a * c, 0.0));
  return {(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)};
}

}  // namespace msm
