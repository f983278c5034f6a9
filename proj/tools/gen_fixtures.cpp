// Regenerates the committed fixtures under data/:
//
//   synthetic_loop.csv  quasi-static target loop, analytic two-branch
//                       construction (smooth, saturating, counterclockwise,
//                       closed at both ends, output in [0, 1])
//   kp_model_n3.params  N=3 model fitted to that loop by the ident pipeline,
//                       weights renormalized so the full 0-5-0 sweep spans
//                       exactly one output unit
//   frf/freq_*.csv      steady-state sine records through the identified
//                       plant model, one file per excitation frequency
//
// The loop target is synthetic by construction; no measured data is involved.
// Usage: gen_fixtures [out_dir]

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "compensator.hpp"
#include "config.hpp"
#include "hysteresis.hpp"
#include "ident.hpp"
#include "lti.hpp"
#include "simulate.hpp"
#include "timeseries.hpp"

namespace fs = std::filesystem;
using namespace msm;

namespace {

double smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * (3.0 - 2.0 * x);
}

// Major-loop branches of the target: saturating S-curves with the descending
// branch above the ascending one, closed at (0.35, 0) and (3.7, 1).
double target_ascending(double u) { return smoothstep((u - 1.1) / 2.6); }
double target_descending(double u) { return smoothstep((u - 0.35) / 2.35); }

// Output span of the model over a full 0 -> 5 -> 0 sweep from the virgin
// state; the committed fixture is normalized to unit span so the nominal
// kappa_tilde maps the sweep to the 500 um stroke exactly.
double sweep_span(KpModel model) {
  model.reset(0.0);
  double lo = 0.0, hi = 0.0;
  for (int k = 0; k <= 10000; ++k) {
    const double u = k <= 5000 ? 5.0 * k / 5000.0 : 10.0 - 5.0 * k / 5000.0;
    const double y = model.apply(u);
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  return hi - lo;
}

void write_frf_records(const fs::path& dir) {
  fs::create_directories(dir);
  const TransferFunction plant = plant_identified();
  const double fs_hz = 2000.0;

  for (double f : {2.0, 4.0, 8.0, 10.0, 20.0, 40.0, 50.0, 80.0, 100.0, 125.0, 200.0, 250.0}) {
    const double periods = std::max(5.0, std::ceil(0.5 * f));
    const auto n = static_cast<std::size_t>(std::llround(periods * fs_hz / f));
    const std::complex<double> g = plant.response(2.0 * std::numbers::pi * f);
    const double dc = plant.dc_gain();

    TimeSeries rec(1.0 / fs_hz);
    auto& u = rec.add_channel("u");
    auto& y = rec.add_channel("y");
    u.resize(n);
    y.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) / fs_hz;
      const double phase = 2.0 * std::numbers::pi * f * t;
      u[k] = 2.5 + std::sin(phase);
      y[k] = 2.5 * dc + std::abs(g) * std::sin(phase + std::arg(g));
    }
    char name[32];
    std::snprintf(name, sizeof(name), "freq_%03dhz.csv", static_cast<int>(f));
    rec.metadata()["frequency_hz"] = std::to_string(static_cast<int>(f));
    rec.write_csv((dir / name).string());
    std::printf("wrote %s (%zu samples)\n", (dir / name).string().c_str(), n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out_dir = argc > 1 ? fs::path(argv[1]) : fs::path("data");
  fs::create_directories(out_dir);

  // Quasi-static 0 -> 5 -> 0 A half-period triangle at 0.1 Hz, 2 kHz.
  const double fs_hz = 2000.0;
  const std::size_t n = 10000;
  TimeSeries loop(1.0 / fs_hz);
  auto& u = loop.add_channel("u");
  auto& y = loop.add_channel("y");
  u.resize(n);
  y.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / fs_hz;
    const bool ascending = t < 2.5;
    u[k] = ascending ? 2.0 * t : 10.0 - 2.0 * t;  // 0..5..0 over 5 s
    y[k] = ascending ? target_ascending(u[k]) : target_descending(u[k]);
  }
  loop.metadata()["source"] = "synthetic analytic two-branch target";
  loop.metadata()["excitation"] = "triangle 5 A 0.1 Hz half period";
  loop.write_csv((out_dir / "synthetic_loop.csv").string());
  std::printf("wrote %s\n", (out_dir / "synthetic_loop.csv").string().c_str());

  KpShapeFitOptions opts;
  opts.n_operators = 3;
  opts.lowpass_cutoff_hz = 10.0;
  opts.sample_rate_hz = fs_hz;
  opts.refine_rounds = 3;
  double rms = 0.0;
  KpModel fit = fit_kp_model(u, y, opts, &rms);
  std::printf("N=3 fit rms (vs filtered target) = %.5f\n", rms);

  const double span = sweep_span(fit);
  fit.scale_weights(1.0 / span);
  fit.reset(0.0);
  std::printf("sweep span before normalization = %.6f\n", span);
  save_kp_model(fit, (out_dir / "kp_model_n3.params").string());
  std::printf("wrote %s\n", (out_dir / "kp_model_n3.params").string().c_str());
  for (std::size_t i = 0; i < fit.size(); ++i) {
    const auto& op = fit.operators()[i];
    const ZeroCrossing zc = play_to_zero_crossing(op.delta, op.w);
    std::printf("  op%zu: alpha=%.4f beta=%.4f w=%.4f m=%.4f rho=%.5f\n", i, zc.alpha,
                zc.beta, op.w, op.m, fit.weights()[i]);
  }

  // Loop statistics of the fitted model over the same sweep.
  {
    KpModel probe = fit;
    probe.reset(0.0);
    std::vector<double> yy(n);
    double lo = 0.0, hi = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      yy[k] = probe.apply(u[k]);
      lo = std::min(lo, yy[k]);
      hi = std::max(hi, yy[k]);
    }
    double area = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k)
      area += 0.5 * (u[k] * yy[k + 1] - u[k + 1] * yy[k]);
    std::printf("fitted loop: min=%.4f max=%.4f span=%.4f area=%.4f end=%.4f\n", lo, hi,
                hi - lo, area, yy.back());
  }

  // Quick tracking sanity check of the fitted model in the compensator loop
  // (0.1 Hz multi-amplitude sinusoid, gain 2000, 2 kHz).
  {
    ReferenceSpec spec;
    spec.kind = ReferenceSpec::Kind::random_amplitude;
    spec.amplitude = 0.36;
    spec.amplitude_min = 0.14;
    spec.offset = 0.45;
    spec.frequency_hz = 0.1;
    spec.seed = 7;
    const TimeSeries ref = make_reference(spec, 40.0, fs_hz);
    const CompensationRun run = run_compensation(fit, 2000.0, ref);
    const auto& ys = run.series.channel("y_star");
    const auto& yh = run.series.channel("y_hat");
    double max_err = 0.0;
    for (std::size_t k = ys.size() / 16; k < ys.size(); ++k)
      max_err = std::max(max_err, std::abs(ys[k] - yh[k]));
    std::printf("compensator max |y*-y_hat| after first quarter period: %.6f\n", max_err);
  }

  write_frf_records(out_dir / "frf");
  return 0;
}
