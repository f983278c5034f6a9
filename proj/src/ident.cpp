#include "ident.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "errors.hpp"
#include "linalg.hpp"

namespace msm {

std::vector<FrfPoint> estimate_frf(const std::vector<FrfRecord>& records,
                                   int min_periods) {
  std::vector<FrfPoint> points;
  points.reserve(records.size());

  for (const FrfRecord& rec : records) {
    if (!(rec.frequency_hz > 0.0) || !(rec.sample_rate_hz > 0.0))
      throw std::invalid_argument("FRF record: frequency and sample rate must be > 0");
    if (rec.input.size() != rec.output.size() || rec.input.empty())
      throw std::invalid_argument("FRF record: input/output length mismatch");

    const double samples_per_period = rec.sample_rate_hz / rec.frequency_hz;
    const double periods = static_cast<double>(rec.input.size()) / samples_per_period;
    if (periods < static_cast<double>(min_periods)) {
      std::ostringstream msg;
      msg << "FRF record at " << rec.frequency_hz << " Hz covers " << periods
          << " periods; need >= " << min_periods;
      throw NumericalError(msg.str());
    }

    // Correlate over the trailing whole periods only; the leading samples
    // absorb the transient.
    const auto whole = static_cast<std::size_t>(std::floor(periods));
    const auto window = static_cast<std::size_t>(
        std::llround(static_cast<double>(whole) * samples_per_period));
    const std::size_t start = rec.input.size() - window;

    const double w = 2.0 * std::numbers::pi * rec.frequency_hz / rec.sample_rate_hz;
    std::complex<double> u_phasor = 0.0;
    std::complex<double> y_phasor = 0.0;
    double u_scale = 0.0;
    for (std::size_t k = start; k < rec.input.size(); ++k) {
      const std::complex<double> e(std::cos(w * static_cast<double>(k)),
                                   -std::sin(w * static_cast<double>(k)));
      u_phasor += rec.input[k] * e;
      y_phasor += rec.output[k] * e;
      u_scale += std::abs(rec.input[k]);
    }
    if (std::abs(u_phasor) <= 1e-12 * std::max(u_scale, 1e-300)) {
      std::ostringstream msg;
      msg << "FRF record at " << rec.frequency_hz << " Hz: zero input phasor";
      throw NumericalError(msg.str());
    }
    points.push_back({rec.frequency_hz, y_phasor / u_phasor});
  }
  return points;
}

TransferFunction SosDelayFit::tf() const {
  return TransferFunction({gain}, {1.0, 2.0 * zeta * omega_n, omega_n * omega_n},
                          std::max(delay, 0.0));
}

namespace {

std::complex<double> sos_delay_response(double b, double wn, double zeta, double d,
                                        double w) {
  const std::complex<double> jw(0.0, w);
  const std::complex<double> den = jw * jw + 2.0 * zeta * wn * jw + wn * wn;
  return b / den * std::exp(std::complex<double>(0.0, -w * d));
}

}  // namespace

namespace {

struct LmOutcome {
  std::vector<double> theta;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Damped Gauss-Newton over normalized parameters with a per-iteration step
// cap; the cap keeps the search local so a bad early Jacobian cannot launch
// the iterate into the degenerate flat-model basin.
LmOutcome levenberg_marquardt(const std::function<std::vector<double>(const std::vector<double>&)>& residuals,
                              std::vector<double> theta, int max_iterations) {
  auto cost_of = [](const std::vector<double>& r) {
    double c = 0.0;
    for (double v : r) c += v * v;
    return c;
  };
  const std::size_t np = theta.size();

  std::vector<double> r = residuals(theta);
  double cost = cost_of(r);
  double lambda = 1e-3;
  LmOutcome out;
  int iter = 0;

  for (; iter < max_iterations; ++iter) {
    const std::size_t nr = r.size();
    Matrix jac(nr, np);
    for (std::size_t j = 0; j < np; ++j) {
      const double step = 1e-7 * std::max(std::abs(theta[j]), 1e-3);
      std::vector<double> th = theta;
      th[j] += step;
      const std::vector<double> rp = residuals(th);
      for (std::size_t i = 0; i < nr; ++i) jac(i, j) = (rp[i] - r[i]) / step;
    }

    Matrix jtj(np, np);
    std::vector<double> jtr(np, 0.0);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t a = 0; a < np; ++a) {
        jtr[a] += jac(i, a) * r[i];
        for (std::size_t b = a; b < np; ++b) jtj(a, b) += jac(i, a) * jac(i, b);
      }
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = 0; b < a; ++b) jtj(a, b) = jtj(b, a);

    bool stepped = false;
    bool small_step = false;
    for (int attempt = 0; attempt < 40 && !stepped; ++attempt) {
      Matrix damped = jtj;
      for (std::size_t a = 0; a < np; ++a)
        damped(a, a) += lambda * std::max(jtj(a, a), 1e-12);
      std::vector<double> delta;
      try {
        std::vector<double> rhs(np);
        for (std::size_t a = 0; a < np; ++a) rhs[a] = -jtr[a];
        delta = solve_linear(damped, rhs);
      } catch (const NumericalError&) {
        lambda *= 4.0;
        continue;
      }
      double max_step = 0.0;
      for (double d : delta) max_step = std::max(max_step, std::abs(d));
      if (max_step > 0.5) {
        const double shrink = 0.5 / max_step;
        for (double& d : delta) d *= shrink;
        max_step = 0.5;
      }
      std::vector<double> th = theta;
      for (std::size_t a = 0; a < np; ++a) th[a] += delta[a];
      const std::vector<double> rn = residuals(th);
      const double cn = cost_of(rn);
      if (cn < cost) {
        const double improvement = (cost - cn) / std::max(cost, 1e-300);
        theta = th;
        r = rn;
        cost = cn;
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        small_step = max_step < 1e-12 || improvement < 1e-14;
      } else {
        lambda *= 4.0;
      }
    }
    if (!stepped || small_step || cost < 1e-28) {
      out.converged = true;
      break;
    }
  }

  out.theta = std::move(theta);
  out.cost = cost;
  out.iterations = iter + 1;
  return out;
}

}  // namespace

SosDelayFit fit_sos_delay(const std::vector<FrfPoint>& points, int max_iterations) {
  if (points.size() < 6)
    throw std::invalid_argument("fit_sos_delay needs at least 6 frequency points");

  std::vector<double> omegas;
  std::vector<std::complex<double>> values;
  std::vector<double> weights;
  double peak_mag = 0.0;
  double peak_omega = 0.0;
  double max_mag = 0.0;
  for (const FrfPoint& p : points) {
    const double w = 2.0 * std::numbers::pi * p.frequency_hz;
    omegas.push_back(w);
    values.push_back(p.response);
    max_mag = std::max(max_mag, std::abs(p.response));
    if (std::abs(p.response) > peak_mag) {
      peak_mag = std::abs(p.response);
      peak_omega = w;
    }
  }
  for (const auto& v : values)
    weights.push_back(1.0 / std::max(std::abs(v), 1e-6 * max_mag));

  const double w_lo = *std::min_element(omegas.begin(), omegas.end());
  const double w_hi = *std::max_element(omegas.begin(), omegas.end());
  const std::size_t lowest =
      static_cast<std::size_t>(std::min_element(omegas.begin(), omegas.end()) -
                               omegas.begin());

  // Multi-start over the natural-frequency guess; for zeta = 0.5 the
  // magnitude peak sits at wn sqrt(1 - 2 zeta^2), hence the sqrt(2) factor.
  const double zeta0 = 0.5;
  std::vector<double> wn_candidates = {peak_omega * std::sqrt(2.0), peak_omega,
                                       2.0 * peak_omega, std::sqrt(w_lo * w_hi), w_hi};

  LmOutcome best;
  double best_scale[4] = {1.0, 1.0, 1.0, 1.0};
  for (double wn0 : wn_candidates) {
    const std::complex<double> den0(wn0 * wn0 - omegas[lowest] * omegas[lowest],
                                    2.0 * zeta0 * wn0 * omegas[lowest]);
    const double b0 = std::abs(values[lowest]) * std::abs(den0);
    const double scale[4] = {std::max(b0, 1e-300), wn0, 1.0, 1.0 / wn0};

    auto residuals = [&](const std::vector<double>& th) {
      std::vector<double> r(2 * omegas.size());
      for (std::size_t i = 0; i < omegas.size(); ++i) {
        const std::complex<double> m =
            sos_delay_response(th[0] * scale[0], th[1] * scale[1], th[2] * scale[2],
                               th[3] * scale[3], omegas[i]);
        const std::complex<double> diff = m - values[i];
        r[2 * i] = diff.real() * weights[i];
        r[2 * i + 1] = diff.imag() * weights[i];
      }
      return r;
    };
    const LmOutcome run =
        levenberg_marquardt(residuals, {1.0, 1.0, zeta0, 0.0}, max_iterations);
    if (best.theta.empty() || run.cost < best.cost) {
      best = run;
      for (int i = 0; i < 4; ++i) best_scale[i] = scale[i];
    }
  }

  SosDelayFit fit;
  fit.gain = best.theta[0] * best_scale[0];
  fit.omega_n = std::abs(best.theta[1] * best_scale[1]);
  fit.zeta = std::abs(best.theta[2] * best_scale[2]);
  fit.delay = best.theta[3] * best_scale[3];
  fit.iterations = best.iterations;
  fit.residual = std::sqrt(best.cost / (2.0 * static_cast<double>(omegas.size())));

  if (!best.converged) {
    std::ostringstream msg;
    msg << "fit_sos_delay did not converge after " << max_iterations
        << " iterations; best iterate: gain = " << fit.gain << ", omega_n = " << fit.omega_n
        << ", zeta = " << fit.zeta << ", delay = " << fit.delay
        << ", residual = " << fit.residual;
    throw NumericalError(msg.str());
  }
  return fit;
}

KpWeightFit fit_kp_weights(const std::vector<double>& u, const std::vector<double>& y,
                           const std::vector<KpOperator>& grid) {
  if (u.size() != y.size() || u.empty())
    throw std::invalid_argument("fit_kp_weights: input/output length mismatch");
  if (grid.empty()) throw std::invalid_argument("fit_kp_weights: empty operator grid");

  Matrix phi(u.size(), grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    KpOperator op = grid[j];
    for (std::size_t k = 0; k < u.size(); ++k) phi(k, j) = op.apply(u[k]);
  }

  const NnlsResult res = nnls(phi, y);
  KpWeightFit fit;
  fit.weights = res.x;
  fit.rms = res.residual_norm / std::sqrt(static_cast<double>(u.size()));
  return fit;
}

namespace {

KpOperator make_candidate(double beta, double w, double m) {
  double delta = 0.0;
  double width = 0.0;
  zero_crossing_to_play(beta + w, beta, &delta, &width);
  return KpOperator{delta, width, m, 1.0, 0.0};
}

double refit_rms(const std::vector<double>& u, const std::vector<double>& y,
                 const std::vector<KpOperator>& ops, std::vector<double>* weights) {
  try {
    const KpWeightFit fit = fit_kp_weights(u, y, ops);
    *weights = fit.weights;
    return fit.rms;
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

KpModel fit_kp_model(const std::vector<double>& u, const std::vector<double>& y,
                     const KpShapeFitOptions& options, double* rms_out) {
  if (u.size() != y.size() || u.size() < 8)
    throw std::invalid_argument("fit_kp_model: need matching input/output data");
  if (options.n_operators == 0)
    throw std::invalid_argument("fit_kp_model: n_operators must be >= 1");

  // Preprocessing: causal low pass on the output, then stride decimation.
  std::vector<double> yf = y;
  if (options.lowpass_cutoff_hz > 0.0) {
    DiscreteSystem filt(lowpass_filter(options.lowpass_cutoff_hz),
                        1.0 / options.sample_rate_hz);
    for (double& v : yf) v = filt.step(v);
  }
  const std::size_t stride = std::max<std::size_t>(1, u.size() / options.max_samples);
  std::vector<double> ud, yd;
  for (std::size_t k = 0; k < u.size(); k += stride) {
    ud.push_back(u[k]);
    yd.push_back(yf[k]);
  }

  const double u_lo = *std::min_element(ud.begin(), ud.end());
  const double u_hi = *std::max_element(ud.begin(), ud.end());
  const double span = u_hi - u_lo;
  if (!(span > 0.0)) throw NumericalError("fit_kp_model: constant input record");

  // Coarse candidate grid over (beta, w, m), unity slope gains. The
  // saturation candidates are fractions of the reachable play range
  // u_hi - alpha; anything at or above 1 never saturates on this record, so
  // only one such fraction is kept (larger values would duplicate columns).
  std::vector<KpOperator> candidates;
  for (int bi = 0; bi < 8; ++bi) {
    const double beta = u_lo + span * (0.02 + 0.70 * bi / 7.0);
    for (int wi = 0; wi < 5; ++wi) {
      const double w = span * (0.05 + 0.50 * wi / 4.0);
      const double reachable = u_hi - (beta + w);
      if (reachable <= 0.04 * span) continue;  // barely or never activates
      for (double mf : {0.30, 0.60, 0.90, 1.50}) {
        candidates.push_back(make_candidate(beta, w, mf * reachable));
      }
    }
  }

  Matrix phi(ud.size(), candidates.size());
  std::vector<double> col_norm(candidates.size(), 0.0);
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    KpOperator op = candidates[j];
    for (std::size_t k = 0; k < ud.size(); ++k) {
      phi(k, j) = op.apply(ud[k]);
      col_norm[j] += phi(k, j) * phi(k, j);
    }
    col_norm[j] = std::sqrt(col_norm[j]);
  }
  const NnlsResult coarse = nnls(phi, yd);

  // Keep the n strongest candidates by explained signal energy.
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return coarse.x[a] * col_norm[a] > coarse.x[b] * col_norm[b];
  });
  const std::size_t keep = std::min(options.n_operators, candidates.size());
  std::vector<KpOperator> ops;
  for (std::size_t j = 0; j < keep; ++j) ops.push_back(candidates[order[j]]);

  std::vector<double> weights;
  double rms = refit_rms(ud, yd, ops, &weights);

  // Alternating local refinement of each kept operator's shape.
  for (int round = 0; round < options.refine_rounds; ++round) {
    const double shrink = std::pow(0.5, round);
    const double d_beta = 0.06 * span * shrink;
    const double d_w = 0.06 * span * shrink;
    const double d_m = 0.06 * span * shrink;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      KpOperator best = ops[i];
      const ZeroCrossing zc = play_to_zero_crossing(ops[i].delta, ops[i].w);
      for (int bs = -1; bs <= 1; ++bs)
        for (int ws = -1; ws <= 1; ++ws)
          for (int ms = -1; ms <= 1; ++ms) {
            if (bs == 0 && ws == 0 && ms == 0) continue;
            const double beta = zc.beta + bs * d_beta;
            const double w = std::max(ops[i].w + ws * d_w, 0.0);
            const double m = std::max(ops[i].m + ms * d_m, 0.01 * span);
            if (beta + w >= u_hi - 0.02 * span) continue;
            std::vector<KpOperator> trial = ops;
            trial[i] = make_candidate(beta, w, m);
            std::vector<double> trial_weights;
            const double trial_rms = refit_rms(ud, yd, trial, &trial_weights);
            if (trial_rms < rms) {
              rms = trial_rms;
              best = trial[i];
              weights = trial_weights;
            }
          }
      ops[i] = best;
    }
  }

  // Strictly positive weights are a model invariant; drop dead operators.
  std::vector<KpOperator> final_ops;
  std::vector<double> final_weights;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (weights[i] > 0.0) {
      final_ops.push_back(ops[i]);
      final_weights.push_back(weights[i]);
    }
  }
  if (final_ops.empty()) throw NumericalError("fit_kp_model: all weights vanished");

  if (rms_out) *rms_out = rms;
  KpModel model(std::move(final_ops), std::move(final_weights));
  model.reset(0.0);
  return model;
}

}  // namespace msm
