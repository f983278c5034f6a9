#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "hysteresis.hpp"
#include "lti.hpp"

namespace msm {

struct FrfRecord {
  double frequency_hz = 0.0;
  double sample_rate_hz = 0.0;
  std::vector<double> input;
  std::vector<double> output;
};

struct FrfPoint {
  double frequency_hz = 0.0;
  std::complex<double> response;
};

// Sine-correlation estimate per record: input and output are correlated
// against e^{-j w t} over the trailing whole periods; the FRF point is the
// phasor ratio. Records shorter than min_periods periods are rejected.
std::vector<FrfPoint> estimate_frf(const std::vector<FrfRecord>& records,
                                   int min_periods = 3);

struct SosDelayFit {
  double gain = 0.0;     // b in b / (s^2 + 2 zeta wn s + wn^2)
  double omega_n = 0.0;
  double zeta = 0.0;
  double delay = 0.0;
  double residual = 0.0; // weighted rms residual
  int iterations = 0;
  TransferFunction tf() const;
};

// Weighted nonlinear least squares over (gain, wn, zeta, delay), initialized
// from the magnitude peak. Throws NumericalError with the best iterate when
// the iteration cap is reached without converging.
SosDelayFit fit_sos_delay(const std::vector<FrfPoint>& points, int max_iterations = 200);

struct KpWeightFit {
  std::vector<double> weights;
  double rms = 0.0;
};

// Nonnegative least squares for the operator weights: simulates each grid
// operator over u (from the virgin state) and solves for rho >= 0 against y.
KpWeightFit fit_kp_weights(const std::vector<double>& u, const std::vector<double>& y,
                           const std::vector<KpOperator>& grid);

struct KpShapeFitOptions {
  std::size_t n_operators = 3;
  double lowpass_cutoff_hz = 10.0;  // applied to y before fitting; 0 disables
  double sample_rate_hz = 2000.0;
  int refine_rounds = 2;
  std::size_t max_samples = 4000;   // stride decimation bound for the regressor
};

// Shape identification: a coarse grid over (beta, w, m) candidates wrapped
// around weight fits, keeping the n strongest operators and refining their
// shapes on shrinking local grids. Slope gains are fixed at unity; the
// weights carry the scale.
KpModel fit_kp_model(const std::vector<double>& u, const std::vector<double>& y,
                     const KpShapeFitOptions& options, double* rms_out = nullptr);

}  // namespace msm
