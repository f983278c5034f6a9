// Acceptance suite: runs every top-level criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit status is nonzero when
// any criterion fails.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "compensator.hpp"
#include "config.hpp"
#include "feedback.hpp"
#include "hysteresis.hpp"
#include "ident.hpp"
#include "lti.hpp"
#include "simulate.hpp"
#include "support/helpers.hpp"
#include "support/kp_oracle.hpp"

using namespace msm;

namespace {

const std::string kFixture = std::string(MSMCTL_DATA_DIR) + "/kp_model_n3.params";

struct Criterion {
  int number;
  std::string name;
  std::function<void(std::ostringstream&)> run;  // throws on failure
};

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

void require_runtime(double seconds, double limit) {
  std::ostringstream msg;
  msg << "runtime " << seconds << " s exceeds the " << limit << " s budget";
  require(seconds <= limit, msg.str());
}

// ---------- criterion 1: margin reproduction ----------

void criterion_margins(std::ostringstream& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const TransferFunction loop =
      open_loop(1.13e4, 3.06e5, plant_identified(), lowpass_filter(10.0));
  const MarginReport report = stability_margins(loop);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  detail << "PM = " << report.phase_margin_deg << " deg at "
         << report.gain_crossover_rad_s << " rad/s, " << elapsed << " s";
  require(report.phase_margin_deg > 60.0, "phase margin must exceed 60 deg");
  require_runtime(elapsed, 1.0);
}

// ---------- criterion 2: plant fidelity ----------

void criterion_plant(std::ostringstream& detail) {
  const TransferFunction g = plant_identified();
  const double h = 1.0 / 2000.0;
  DiscreteSystem sys = discretize(g, h);

  // analytic delayed step response of the damped second-order system
  const double wn = std::sqrt(5.439e5);
  const double zeta = 737.9 / (2.0 * wn);
  const double wd = wn * std::sqrt(1.0 - zeta * zeta);
  const double dc = g.dc_gain();
  auto analytic = [&](double t) {
    if (t < 0.002) return 0.0;
    const double tau = t - 0.002;
    const double decay = std::exp(-zeta * wn * tau);
    return dc * (1.0 - decay * (std::cos(wd * tau) + zeta * wn / wd * std::sin(wd * tau)));
  };

  double worst = 0.0;
  for (int k = 0; k < 400; ++k) {
    const double got = sys.step(1.0);
    const double want = analytic(static_cast<double>(k) * h);
    worst = std::max(worst, std::abs(got - want) / dc);
  }
  detail << "max step-response deviation " << worst << " (relative to DC)";
  require(worst < 1e-6, "ZOH step response must match the analytic response to 1e-6");

  const auto [r1, r2] = quadratic_roots(1.0, 737.9, 5.439e5);
  const double wn_hat = std::abs(r1);
  const double zeta_hat = -r1.real() / std::abs(r1);
  detail << "; wn = " << wn_hat << ", zeta = " << zeta_hat;
  require(std::abs(wn_hat - 737.0) / 737.0 < 0.01, "wn must be within 1% of 737 rad/s");
  require(std::abs(zeta_hat - 0.5) / 0.5 < 0.01, "zeta must be within 1% of 0.5");
  require(r1.real() < 0.0 && r2.real() < 0.0, "plant poles must be stable");
}

// ---------- criterion 3: compensator convergence ----------

void criterion_compensator(std::ostringstream& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const KpModel model = load_kp_model(kFixture);
  const double h = 1.0 / 2000.0;
  const double gain = 2000.0;
  const double range = 1.0;  // fixture is normalized to unit sweep span

  // piecewise-constant reachable reference: 1.5 s per segment
  const std::vector<double> levels = {0.15, 0.65, 0.35, 0.82, 0.05};
  Compensator comp(model, gain);
  comp.reset(0.0, 0.0);
  double worst_settle = 0.0;
  for (double level : levels) {
    for (int k = 0; k < 3000; ++k) comp.step(level, h);
    worst_settle = std::max(worst_settle, std::abs(level - comp.model_output()));
  }
  detail << "steady-segment error " << worst_settle;
  require(worst_settle < 1e-6 * range,
          "steady segments must settle to 1e-6 of the range");

  // 0.1 Hz multi-amplitude sinusoid
  ReferenceSpec spec;
  spec.kind = ReferenceSpec::Kind::random_amplitude;
  spec.amplitude = 0.36;
  spec.amplitude_min = 0.14;
  spec.offset = 0.45;
  spec.frequency_hz = 0.1;
  spec.seed = 7;
  const TimeSeries ref = make_reference(spec, 40.0, 2000.0);
  const CompensationRun run = run_compensation(model, gain, ref);
  const auto& y_star = run.series.channel("y_star");
  const auto& y_hat = run.series.channel("y_hat");
  const auto quarter = static_cast<std::size_t>(2.5 * 2000.0);
  double worst_track = 0.0;
  for (std::size_t k = quarter; k < y_star.size(); ++k)
    worst_track = std::max(worst_track, std::abs(y_star[k] - y_hat[k]));
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail << ", sinusoid error " << worst_track << ", " << elapsed << " s";
  require(!run.no_progress, "reachable reference must not trip the monitor");
  require(worst_track <= 0.01 * range,
          "sinusoid tracking must stay within 1% of the range");
  require_runtime(elapsed, 5.0);
}

// ---------- criterion 4: 2DOF superiority ----------

void criterion_two_dof(std::ostringstream& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig sc;
  sc.plant_hysteresis = load_kp_model(kFixture);
  sc.duration_s = 8.0;
  sc.sample_rate_hz = 2000.0;
  sc.seed = 42;
  sc.noise_std = 8e-6;
  sc.pi_kp = 1.13e4;
  sc.pi_ki = 3.06e5;
  sc.pi_limits = PiLimits{-5.0, 5.0, true};
  sc.reference.kind = ReferenceSpec::Kind::sine;
  sc.reference.amplitude = 1.8e-4;
  sc.reference.offset = 2.5e-4;
  sc.reference.frequency_hz = 1.0;

  auto rms_for = [&](LoopMode mode) {
    sc.mode = mode;
    return rms_tracking_error(run_scenario(sc), 1.0);
  };
  const double rms_two_dof = rms_for(LoopMode::two_dof);
  const double rms_fb = rms_for(LoopMode::feedback_only);
  const double rms_ff = rms_for(LoopMode::feedforward_only);
  detail << "sine RMS [m]: two-dof " << rms_two_dof << ", fb " << rms_fb << ", ff "
         << rms_ff;
  require(rms_two_dof < rms_fb, "two-dof must beat feedback-only on the sinusoid");
  require(rms_two_dof < rms_ff, "two-dof must beat feedforward-only on the sinusoid");

  // band window opens after the common linear rise (about 2x the plant
  // settling time) so the comparison sees the hunting around the reference
  sc.reference.kind = ReferenceSpec::Kind::step;
  sc.reference.amplitude = 2.5e-4;
  sc.reference.offset = 0.0;
  sc.mode = LoopMode::two_dof;
  const double band_two_dof = fluctuation_band(run_scenario(sc), 0.1);
  sc.mode = LoopMode::feedback_only;
  const double band_fb = fluctuation_band(run_scenario(sc), 0.1);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail << "; step band [m]: two-dof " << band_two_dof << ", fb " << band_fb << ", "
         << elapsed << " s";
  require(band_two_dof < band_fb,
          "two-dof steady fluctuation band must be strictly smaller");
  require_runtime(elapsed, 30.0);
}

// ---------- criterion 5: hysteresis oracle equivalence ----------

void criterion_oracle(std::ostringstream& detail) {
  std::mt19937_64 rng(101);
  const double deltas[5] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  const double widths[5] = {0.0, 0.5, 1.0, 1.5, 2.0};

  double worst = 0.0;
  std::size_t models = 0;
  for (int i = 0; i < 25; ++i) {
    for (int j = i + 1; j < 25; ++j) {
      const double d[2] = {deltas[i / 5], deltas[j / 5]};
      const double w[2] = {widths[i % 5], widths[j % 5]};
      const double m[2] = {1.0, 0.6};
      const double gamma[2] = {1.0, 0.8};
      const double rho[2] = {0.7, 1.3};

      std::vector<KpOperator> ops;
      oracle::BranchModel ref;
      for (int n = 0; n < 2; ++n) {
        ops.push_back(KpOperator{d[n], w[n], m[n], gamma[n], 0.0});
        const ZeroCrossing zc = play_to_zero_crossing(d[n], w[n]);
        ref.ops.push_back({zc.alpha, zc.beta, m[n], gamma[n], 0.0, 0.0, false});
        ref.weights.push_back(rho[n]);
      }
      KpModel model(ops, {rho[0], rho[1]});
      ++models;
      for (double u : helpers::random_walk(rng, 200, -3.0, 3.0)) {
        const double got = model.apply(u);
        const double want = ref.step(u);
        worst = std::max(worst, std::abs(got - want));
      }
    }
  }
  detail << models << " two-operator models, max |model - oracle| = " << worst;
  require(worst <= 1e-12, "model must match the branch-logic oracle to 1e-12");
}

// ---------- criterion 6: property suites ----------

void criterion_properties(std::ostringstream& detail) {
  // rate independence
  {
    std::mt19937_64 rng(201);
    for (int c = 0; c < 1000; ++c) {
      KpModel a = helpers::random_model(rng, 1 + c % 3);
      KpModel b = a;
      const std::vector<double> walk = helpers::random_walk(rng, 24, -3.0, 3.0);
      std::vector<double> ya;
      for (double u : walk) ya.push_back(a.apply(u));
      std::size_t idx = 0;
      for (double u : walk) {
        require(b.apply(u) == ya[idx], "rate independence (fresh sample)");
        for (std::uint64_t r = rng() % 3; r > 0; --r)
          require(b.apply(u) == ya[idx], "rate independence (repeated sample)");
        ++idx;
      }
    }
  }
  // return-point memory: established minor loops close exactly
  {
    std::mt19937_64 rng(202);
    for (int c = 0; c < 1000; ++c) {
      KpModel model = helpers::random_model(rng, 1 + c % 3, false);
      for (double u : helpers::random_walk(rng, 10, -3.0, 3.0)) model.apply(u);
      const double a = helpers::uniform(rng, -3.0, 3.0);
      const double b = helpers::uniform(rng, -3.0, 3.0);
      model.apply(a);
      model.apply(b);  // priming pass
      model.apply(a);
      std::vector<double> state;
      for (const auto& op : model.operators()) state.push_back(op.p);
      model.apply(b);
      model.apply(a);
      for (std::size_t n = 0; n < model.size(); ++n)
        require(model.operators()[n].p == state[n], "return-point memory");
    }
  }
  // boundedness
  {
    std::mt19937_64 rng(203);
    for (int c = 0; c < 1000; ++c) {
      KpModel model = helpers::random_model(rng, 1 + c % 4);
      const double bound = model.output_bound();
      for (double u : helpers::random_walk(rng, 24, -60.0, 60.0))
        require(std::abs(model.apply(u)) <= bound + 1e-12, "boundedness");
    }
  }
  // tangent consistency
  {
    std::mt19937_64 rng(204);
    for (int c = 0; c < 1000; ++c) {
      KpModel model = helpers::random_model(rng, 1 + c % 4);
      for (double u : helpers::random_walk(rng, 12, -3.0, 3.0)) {
        const double y = model.apply(u);
        const TangentInfo t = model.tangent();
        require(std::abs(y - (t.gain * u + t.bias)) <= 1e-12 * (1.0 + std::abs(y)),
                "tangent consistency");
      }
    }
  }
  // Euler stability boundary h*g*gamma_tot < 2
  {
    std::mt19937_64 rng(205);
    const double h = 1.0 / 2000.0;
    for (int c = 0; c < 1000; ++c) {
      const double gamma = helpers::uniform(rng, 0.2, 3.0);
      const double rho = helpers::uniform(rng, 0.3, 2.0);
      KpModel model({KpOperator{0.0, 0.0, 1e9, gamma, 0.0}}, {rho});
      const double limit = Compensator::stable_gain_limit(model, h);
      require(std::abs(limit * h * gamma * rho - 2.0) < 1e-12, "stability bound value");

      const double margin = helpers::uniform(rng, 0.05, 0.45);
      const bool unstable = (rng() & 1) != 0;
      const double gain = unstable ? limit * (1.0 + margin) : limit * (1.0 - margin);
      Compensator comp(model, gain);
      comp.reset(0.0, 0.0);
      const double target = helpers::uniform(rng, 0.2, 2.0);
      double err = target;
      for (int k = 0; k < 300; ++k) {
        comp.step(target, h);
        err = std::abs(target - comp.model_output());
      }
      if (unstable)
        require(err > target, "above the bound the loop must diverge");
      else
        require(err < 1e-6 * target, "below the bound the loop must converge");
    }
  }
  // scenario determinism and mode consistency
  {
    std::mt19937_64 rng(206);
    const KpModel fixture = load_kp_model(kFixture);
    for (int c = 0; c < 1000; ++c) {
      ScenarioConfig sc;
      sc.plant_hysteresis = fixture;
      sc.duration_s = 0.05 + 0.05 * static_cast<double>(c % 3);
      sc.sample_rate_hz = 2000.0;
      sc.seed = rng();
      sc.noise_std = 8e-6;
      sc.pi_limits = PiLimits{-5.0, 5.0, true};
      sc.mode = static_cast<LoopMode>(c % 3);
      sc.reference.kind =
          (c % 2 == 0) ? ReferenceSpec::Kind::step : ReferenceSpec::Kind::sine;
      sc.reference.amplitude = helpers::uniform(rng, 0.5e-4, 3.0e-4);
      sc.reference.offset = 1e-4;
      sc.reference.frequency_hz = 1.0;

      const TimeSeries a = run_scenario(sc);
      const TimeSeries b = run_scenario(sc);
      for (std::size_t ch = 0; ch < a.channel_count(); ++ch)
        require(a.channel_at(ch) == b.channel_at(ch), "scenario determinism");

      const auto& uff = a.channel("u_ff");
      const auto& ufb = a.channel("u_fb");
      const auto& u = a.channel("plant_input");
      for (std::size_t k = 0; k < u.size(); ++k) {
        if (sc.mode == LoopMode::feedback_only)
          require(uff[k] == 0.0, "feedback-only zeroes the feedforward branch");
        if (sc.mode == LoopMode::feedforward_only)
          require(ufb[k] == 0.0, "feedforward-only zeroes the feedback branch");
        require(u[k] == uff[k] + ufb[k], "plant input is the branch sum");
      }
    }
  }
  detail << "6 property families x 1000 randomized cases";
}

// ---------- criterion 7: identification round trip ----------

void criterion_ident(std::ostringstream& detail) {
  const auto t0 = std::chrono::steady_clock::now();

  // FRF + SOS-delay round trip on noiseless synthetic records
  const TransferFunction g = plant_identified();
  std::vector<FrfRecord> records;
  for (double f : {2.0, 4.0, 8.0, 10.0, 20.0, 40.0, 50.0, 80.0, 100.0, 125.0, 200.0, 250.0}) {
    FrfRecord rec;
    rec.frequency_hz = f;
    rec.sample_rate_hz = 2000.0;
    const auto n = static_cast<std::size_t>(std::llround(6.0 * 2000.0 / f));
    const std::complex<double> v = g.response(2.0 * std::numbers::pi * f);
    for (std::size_t k = 0; k < n; ++k) {
      const double ph = 2.0 * std::numbers::pi * f * static_cast<double>(k) / 2000.0;
      rec.input.push_back(2.5 + std::sin(ph));
      rec.output.push_back(2.5 * g.dc_gain() + std::abs(v) * std::sin(ph + std::arg(v)));
    }
    records.push_back(std::move(rec));
  }
  const SosDelayFit fit = fit_sos_delay(estimate_frf(records));
  const double err_gain = std::abs(fit.gain - 45.57) / 45.57;
  const double err_wn2 = std::abs(fit.omega_n * fit.omega_n - 5.439e5) / 5.439e5;
  const double err_2zw = std::abs(2.0 * fit.zeta * fit.omega_n - 737.9) / 737.9;
  const double err_delay = std::abs(fit.delay - 0.002) / 0.002;
  detail << "fit errors: gain " << err_gain << ", wn^2 " << err_wn2 << ", 2*zeta*wn "
         << err_2zw << ", delay " << err_delay;
  require(err_gain < 1e-3 && err_wn2 < 1e-3 && err_2zw < 1e-3 && err_delay < 1e-3,
          "all four plant parameters must be recovered within 0.1%");

  // exact weight recovery of a known 3-operator model
  const std::vector<KpOperator> truth = {KpOperator{-0.8, 1.5, 2.2, 1.0, 0.0},
                                         KpOperator{0.4, 0.0, 3.2, 1.0, 0.0},
                                         KpOperator{-2.1, 1.0, 0.6, 1.0, 0.0}};
  const std::vector<double> rho = {0.21, 0.10, 0.45};
  KpModel model(truth, rho);
  model.reset(0.0);
  std::vector<double> u(4000), y(4000);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(u.size() - 1);
    u[k] = t < 0.5 ? 10.0 * t : 10.0 * (1.0 - t);
    y[k] = model.apply(u[k]);
  }
  const KpWeightFit wfit = fit_kp_weights(u, y, truth);
  double worst_rho = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    worst_rho = std::max(worst_rho, std::abs(wfit.weights[i] - rho[i]));
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail << "; weight error " << worst_rho << ", " << elapsed << " s";
  require(worst_rho < 1e-6, "weights must be recovered within 1e-6");
  require_runtime(elapsed, 10.0);
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "margin reproduction (PM > 60 deg with the published gains)", criterion_margins},
      {2, "plant fidelity (ZOH step response, wn, zeta)", criterion_plant},
      {3, "compensator convergence on the committed fixture", criterion_compensator},
      {4, "2DOF superiority orderings (fixed seed)", criterion_two_dof},
      {5, "hysteresis branch-logic oracle equivalence", criterion_oracle},
      {6, "randomized property suites (1000 cases each)", criterion_properties},
      {7, "identification round trip", criterion_ident},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    std::ostringstream detail;
    try {
      c.run(detail);
      std::printf("PASS  %d  %s\n      %s\n", c.number, c.name.c_str(),
                  detail.str().c_str());
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL  %d  %s\n      %s%s%s\n", c.number, c.name.c_str(),
                  detail.str().c_str(), detail.str().empty() ? "" : "; ", e.what());
    }
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
