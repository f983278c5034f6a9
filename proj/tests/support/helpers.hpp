#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hysteresis.hpp"

namespace helpers {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

// Random model with operators centered in [-2, 2]; saturation either binding
// or far away depending on allow_saturation.
inline msm::KpModel random_model(std::mt19937_64& rng, std::size_t n,
                                 bool allow_saturation = true) {
  std::vector<msm::KpOperator> ops(n);
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    ops[i].delta = uniform(rng, -2.0, 2.0);
    ops[i].w = uniform(rng, 0.0, 2.0);
    ops[i].m = allow_saturation ? uniform(rng, 0.3, 2.0) : 100.0;
    ops[i].gamma = uniform(rng, 0.2, 2.0);
    weights[i] = uniform(rng, 0.1, 2.0);
  }
  return msm::KpModel(std::move(ops), std::move(weights));
}

inline std::vector<double> random_walk(std::mt19937_64& rng, std::size_t steps,
                                       double lo, double hi) {
  std::vector<double> u(steps);
  double v = uniform(rng, lo, hi);
  for (std::size_t k = 0; k < steps; ++k) {
    v += uniform(rng, -0.8, 0.8);
    v = std::min(hi, std::max(lo, v));
    u[k] = v;
  }
  return u;
}

inline double shoelace_area(const std::vector<double>& x, const std::vector<double>& y) {
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    area += 0.5 * (x[i] * y[i + 1] - x[i + 1] * y[i]);
  // closing segment
  const std::size_t last = x.size() - 1;
  area += 0.5 * (x[last] * y[0] - x[0] * y[last]);
  return area;
}

}  // namespace helpers
