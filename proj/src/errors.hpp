#pragma once

#include <stdexcept>
#include <string>

namespace msm {

// Malformed configuration text, inconsistent parameter sets, unreadable
// input records.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// An algorithm could not produce a result: no crossover in the scanned band,
// iteration cap reached, rank-deficient regressor, and similar.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem-level failure (file missing, not writable).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace msm
