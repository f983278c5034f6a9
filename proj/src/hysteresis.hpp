#pragma once

#include <cstddef>
#include <vector>

namespace msm {

// One elementary hysteresis operator: a play (backlash) element with the
// input shifted by delta, the memory state saturated at +/-m, and the output
// scaled by gamma. The slot width w is the full width; the half width w/2
// enters the update, which keeps the zero-crossing transform below exact.
struct KpOperator {
  double delta = 0.0;   // input shift
  double w = 0.0;       // play slot width, >= 0
  double m = 1.0;       // saturation magnitude, > 0
  double gamma = 1.0;   // slope gain, > 0
  double p = 0.0;       // play memory state, kept in [-m, m]

  // Advances the memory with input u and returns gamma * p.
  //   v = u + delta, r = w/2
  //   p <- clamp(max(v - r, min(v + r, p)), -m, m)
  double apply(double u);

  // Re-seats the memory so the operator currently outputs y0, clamped into
  // the saturation bounds: p = clamp(y0 / gamma, -m, m).
  void reset(double y0);

  void validate() const;
};

// Zero-crossing parametrization (alpha >= beta) of the same operator.
struct ZeroCrossing {
  double alpha = 0.0;
  double beta = 0.0;
};

ZeroCrossing play_to_zero_crossing(double delta, double w);
// Requires alpha >= beta: delta = -(alpha + beta)/2, w = alpha - beta.
void zero_crossing_to_play(double alpha, double beta, double* delta, double* w);

enum class Direction : int { ascending = +1, descending = -1 };

// Local linearization of the model at its current state: y = gain*u + bias
// holds exactly for the last applied input.
struct TangentInfo {
  double gain = 0.0;
  double bias = 0.0;
};

// Finite weighted superposition of KP operators. The output is the plain
// weighted sum of the operator outputs, no normalization. Stateful:
// apply() advances every operator's memory.
class KpModel {
 public:
  KpModel() = default;
  KpModel(std::vector<KpOperator> operators, std::vector<double> weights);

  std::size_t size() const { return ops_.size(); }

  // Applies u to every operator in order and returns sum rho_n * output_n.
  double apply(double u);

  // Output at the last applied input (initial-state output before the first
  // apply).
  double output() const { return last_output_; }
  double last_input() const { return last_input_; }

  // Tangent for a continuation of the last movement direction; before any
  // movement the direction defaults to ascending. An operator contributes
  // rho*gamma when its play state is pinned to the slot edge that moves in
  // the queried direction and it is strictly inside the saturation bounds.
  TangentInfo tangent() const { return tangent(direction_); }
  TangentInfo tangent(Direction dir) const;

  // Per-operator reset; y0 is each operator's initial output.
  void reset(double y0 = 0.0);
  void reset(const std::vector<double>& y0);

  // sum rho_n * gamma_n * m_n: the model output lies in [-bound, bound].
  double output_bound() const;
  // sum rho_n * gamma_n: the largest possible instantaneous slope.
  double max_total_slope() const;

  void scale_weights(double factor);

  const std::vector<KpOperator>& operators() const { return ops_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  void recompute_output();

  std::vector<KpOperator> ops_;
  std::vector<double> weights_;
  double last_input_ = 0.0;
  double last_output_ = 0.0;
  Direction direction_ = Direction::ascending;
  bool applied_ = false;
};

}  // namespace msm
