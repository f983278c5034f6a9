#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace msm {

// Seeded noise source. Box-Muller on top of mt19937_64 so the sample stream
// does not depend on the standard library's distribution implementation;
// scenario determinism relies on that.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gaussian(double stddev = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return spare_ * stddev;
    }
    // (0, 1] keeps the log finite.
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a) * stddev;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace msm
