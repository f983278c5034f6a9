#include "hysteresis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "errors.hpp"

namespace msm {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << "non-finite " << what;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

double KpOperator::apply(double u) {
  require_finite(u, "input");
  const double v = u + delta;
  const double r = 0.5 * w;
  p = std::max(v - r, std::min(v + r, p));
  p = std::clamp(p, -m, m);
  return gamma * p;
}

void KpOperator::reset(double y0) {
  require_finite(y0, "initial output");
  p = std::clamp(y0 / gamma, -m, m);
}

void KpOperator::validate() const {
  if (!(w >= 0.0)) throw ConfigError("KP operator: slot width w must be >= 0");
  if (!(m > 0.0)) throw ConfigError("KP operator: saturation magnitude m must be > 0");
  if (!(gamma > 0.0)) throw ConfigError("KP operator: slope gain gamma must be > 0");
  if (!std::isfinite(delta)) throw ConfigError("KP operator: non-finite shift delta");
}

ZeroCrossing play_to_zero_crossing(double delta, double w) {
  return {-delta + 0.5 * w, -delta - 0.5 * w};
}

void zero_crossing_to_play(double alpha, double beta, double* delta, double* w) {
  if (!(alpha >= beta)) throw std::invalid_argument("zero-crossing transform requires alpha >= beta");
  *delta = -0.5 * (alpha + beta);
  *w = alpha - beta;
}

KpModel::KpModel(std::vector<KpOperator> operators, std::vector<double> weights)
    : ops_(std::move(operators)), weights_(std::move(weights)) {
  if (ops_.empty()) throw ConfigError("KP model: at least one operator required");
  if (ops_.size() != weights_.size())
    throw ConfigError("KP model: operator and weight counts differ");
  for (const auto& op : ops_) op.validate();
  for (double rho : weights_)
    if (!(rho > 0.0)) throw ConfigError("KP model: weights must be strictly positive");
  recompute_output();
}

double KpModel::apply(double u) {
  require_finite(u, "input");
  if (applied_) {
    if (u > last_input_)
      direction_ = Direction::ascending;
    else if (u < last_input_)
      direction_ = Direction::descending;
  }
  applied_ = true;
  last_input_ = u;
  double y = 0.0;
  for (std::size_t n = 0; n < ops_.size(); ++n) y += weights_[n] * ops_[n].apply(u);
  last_output_ = y;
  return y;
}

TangentInfo KpModel::tangent(Direction dir) const {
  TangentInfo info;
  for (std::size_t n = 0; n < ops_.size(); ++n) {
    const KpOperator& op = ops_[n];
    const double v = last_input_ + op.delta;
    const double r = 0.5 * op.w;
    const double edge = (dir == Direction::ascending) ? v - r : v + r;
    if (op.p == edge && std::abs(op.p) < op.m)
      info.gain += weights_[n] * op.gamma;
  }
  info.bias = last_output_ - info.gain * last_input_;
  return info;
}

void KpModel::reset(double y0) {
  for (auto& op : ops_) op.reset(y0);
  applied_ = false;
  last_input_ = 0.0;
  direction_ = Direction::ascending;
  recompute_output();
}

void KpModel::reset(const std::vector<double>& y0) {
  if (y0.size() != ops_.size())
    throw std::invalid_argument("KP model reset: y0 length must match operator count");
  for (std::size_t n = 0; n < ops_.size(); ++n) ops_[n].reset(y0[n]);
  applied_ = false;
  last_input_ = 0.0;
  direction_ = Direction::ascending;
  recompute_output();
}

double KpModel::output_bound() const {
  double b = 0.0;
  for (std::size_t n = 0; n < ops_.size(); ++n)
    b += weights_[n] * ops_[n].gamma * ops_[n].m;
  return b;
}

double KpModel::max_total_slope() const {
  double s = 0.0;
  for (std::size_t n = 0; n < ops_.size(); ++n) s += weights_[n] * ops_[n].gamma;
  return s;
}

void KpModel::scale_weights(double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("weight scale factor must be > 0");
  for (double& rho : weights_) rho *= factor;
  recompute_output();
}

void KpModel::recompute_output() {
  double y = 0.0;
  for (std::size_t n = 0; n < ops_.size(); ++n)
    y += weights_[n] * ops_[n].gamma * ops_[n].p;
  last_output_ = y;
}

}  // namespace msm
