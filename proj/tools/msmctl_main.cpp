// msmctl: command-line frontend over the shared-library C API.
//
// Subcommands: hysteresis, compensate, closedloop, frf, fit, margins.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>
#include <msmctl.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct CliError {
  msm_status status;
  std::string message;
};

void check(msm_status status, const std::string& context) {
  if (status != MSM_OK) throw CliError{status, context + ": " + msm_last_error()};
}

// RAII wrappers around the opaque handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  explicit Handle(T* p) : ptr(p) {}
  ~Handle() { Free(ptr); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& other) noexcept : ptr(other.ptr) { other.ptr = nullptr; }
  Handle& operator=(Handle&& other) noexcept {
    if (this != &other) {
      Free(ptr);
      ptr = other.ptr;
      other.ptr = nullptr;
    }
    return *this;
  }
  T** out() { return &ptr; }
  operator T*() const { return ptr; }
};

using ConfigHandle = Handle<msm_config, msm_config_free>;
using ModelHandle = Handle<msm_kp_model, msm_kp_model_free>;
using SeriesHandle = Handle<msm_timeseries, msm_timeseries_free>;
using TfHandle = Handle<msm_tf, msm_tf_free>;
using FrfHandle = Handle<msm_frf, msm_frf_free>;

struct Context {
  ConfigHandle config;
  fs::path config_path;
  fs::path out_dir;
  std::string subcommand;
  bool seed_overridden = false;
  std::uint64_t seed = 0;
};

std::string get_string(const msm_config* cfg, const char* sec, const char* key,
                       const std::string& fallback = "",
                       bool required = false) {
  if (!msm_config_has(cfg, sec, key)) {
    if (required)
      throw CliError{MSM_ERR_CONFIG,
                     std::string("missing [") + sec + "] " + key + " in config"};
    return fallback;
  }
  char* raw = nullptr;
  check(msm_config_get_string(cfg, sec, key, &raw), "config read");
  std::string v = raw;
  msm_string_free(raw);
  return v;
}

double get_double(const msm_config* cfg, const char* sec, const char* key,
                  double fallback, bool required = false) {
  if (!msm_config_has(cfg, sec, key)) {
    if (required)
      throw CliError{MSM_ERR_CONFIG,
                     std::string("missing [") + sec + "] " + key + " in config"};
    return fallback;
  }
  double v = 0.0;
  check(msm_config_get_double(cfg, sec, key, &v), "config read");
  return v;
}

bool get_bool(const msm_config* cfg, const char* sec, const char* key, bool fallback) {
  const std::string v = get_string(cfg, sec, key);
  if (v.empty()) return fallback;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw CliError{MSM_ERR_CONFIG,
                 std::string("[") + sec + "] " + key + ": not a boolean: " + v};
}

std::vector<double> get_doubles(const msm_config* cfg, const char* sec, const char* key) {
  const std::string raw = get_string(cfg, sec, key, "", true);
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      out.push_back(std::stod(field));
    } catch (const std::exception&) {
      throw CliError{MSM_ERR_CONFIG,
                     std::string("[") + sec + "] " + key + ": bad number '" + field + "'"};
    }
  }
  return out;
}

fs::path resolve(const Context& ctx, const std::string& path) {
  fs::path p(path);
  return p.is_absolute() ? p : ctx.config_path.parent_path() / p;
}

void write_manifest(const Context& ctx) {
  char* echo = nullptr;
  check(msm_config_serialize(ctx.config, &echo), "config echo");
  std::ofstream out(ctx.out_dir / "manifest.txt");
  out << "tool = msmctl " << msm_version() << "\n";
  out << "subcommand = " << ctx.subcommand << "\n";
  if (ctx.seed_overridden) out << "seed_override = " << ctx.seed << "\n";
  out << "\n# config echo\n" << echo;
  msm_string_free(echo);
}

void write_series(const msm_timeseries* ts, const fs::path& path) {
  check(msm_timeseries_write_csv(ts, path.string().c_str()), "write " + path.string());
  std::cout << "wrote " << path.string() << "\n";
}

std::vector<double> channel(const msm_timeseries* ts, const char* name) {
  const double* data = nullptr;
  size_t n = 0;
  check(msm_timeseries_channel(ts, name, &data, &n), std::string("channel ") + name);
  return std::vector<double>(data, data + n);
}

void maybe_plot_script(const Context& ctx, const std::string& name,
                       const std::string& body) {
  if (!get_bool(ctx.config, "output", "plot", false)) return;
  std::ofstream out(ctx.out_dir / (name + ".gp"));
  out << "set datafile separator ','\n" << body;
  std::cout << "wrote " << (ctx.out_dir / (name + ".gp")).string() << "\n";
}

ModelHandle load_model(const Context& ctx, const char* section) {
  const std::string file = get_string(ctx.config, section, "file", "", true);
  ModelHandle model;
  check(msm_kp_model_load(resolve(ctx, file).string().c_str(), model.out()),
        "load KP model " + file);
  return model;
}

/* ---------------- subcommands ---------------- */

void run_hysteresis(Context& ctx) {
  ModelHandle model = load_model(ctx, "model");
  const double scale = get_double(ctx.config, "model", "scale", 1.0);

  SeriesHandle sweep;
  check(msm_make_reference(ctx.config, "sweep", "sweep", sweep.out()), "sweep");
  std::vector<double> u = channel(sweep, "reference");
  std::vector<double> y(u.size());
  check(msm_kp_model_reset(model, 0.0), "model reset");
  check(msm_kp_model_apply_many(model, u.data(), y.data(), u.size()), "model sweep");
  for (double& v : y) v *= scale;

  SeriesHandle loop;
  check(msm_timeseries_new(msm_timeseries_sample_period(sweep), loop.out()), "series");
  check(msm_timeseries_add_channel(loop, "u", u.data(), u.size()), "channel u");
  check(msm_timeseries_add_channel(loop, "y", y.data(), y.size()), "channel y");
  double bound = 0.0;
  check(msm_kp_model_output_bound(model, &bound), "bound");
  check(msm_timeseries_set_metadata(loop, "output_bound",
                                    std::to_string(bound * scale).c_str()),
        "metadata");
  write_series(loop, ctx.out_dir / "loop.csv");
  maybe_plot_script(ctx, "loop",
                    "plot 'loop.csv' using 2:3 with lines title 'hysteresis loop'\n");
}

void run_compensate(Context& ctx) {
  ModelHandle model = load_model(ctx, "model");
  const double gain = get_double(ctx.config, "compensator", "gain", 2000.0);
  const bool has_limits = msm_config_has(ctx.config, "compensator", "u_min") &&
                          msm_config_has(ctx.config, "compensator", "u_max");
  const double lo = get_double(ctx.config, "compensator", "u_min", 0.0);
  const double hi = get_double(ctx.config, "compensator", "u_max", 0.0);

  SeriesHandle ref;
  check(msm_make_reference(ctx.config, "reference", "run", ref.out()), "reference");
  std::vector<double> y_star = channel(ref, "reference");
  const double h = msm_timeseries_sample_period(ref);

  std::vector<double> u(y_star.size());
  std::vector<double> y_hat(y_star.size());
  int no_progress = 0;
  check(msm_compensator_run(model, gain, has_limits ? 1 : 0, lo, hi, h, y_star.data(),
                            y_star.size(), u.data(), y_hat.data(), &no_progress),
        "compensation run");

  SeriesHandle out;
  check(msm_timeseries_new(h, out.out()), "series");
  check(msm_timeseries_add_channel(out, "y_star", y_star.data(), y_star.size()), "y_star");
  check(msm_timeseries_add_channel(out, "u", u.data(), u.size()), "u");
  check(msm_timeseries_add_channel(out, "y_hat", y_hat.data(), y_hat.size()), "y_hat");
  check(msm_timeseries_set_metadata(out, "gain", std::to_string(gain).c_str()), "md");
  check(msm_timeseries_set_metadata(out, "no_progress", no_progress ? "true" : "false"),
        "md");
  write_series(out, ctx.out_dir / "compensate.csv");
  if (no_progress)
    std::cout << "warning: reference unreachable for the internal model "
                 "(no-progress monitor latched)\n";
  maybe_plot_script(ctx, "compensate",
                    "plot 'compensate.csv' using 1:2 with lines title 'y*', "
                    "'compensate.csv' using 1:4 with lines title 'y_hat'\n");
}

double series_rms_error(const msm_timeseries* ts, double from_time) {
  const std::vector<double> ref = channel(ts, "reference");
  const std::vector<double> y = channel(ts, "plant_output");
  const double h = msm_timeseries_sample_period(ts);
  const auto start = static_cast<size_t>(std::ceil(from_time / h));
  double acc = 0.0;
  for (size_t k = start; k < ref.size(); ++k) acc += (ref[k] - y[k]) * (ref[k] - y[k]);
  return std::sqrt(acc / static_cast<double>(ref.size() - start));
}

void run_closedloop(Context& ctx) {
  const std::string mode = get_string(ctx.config, "run", "mode", "two-dof");
  std::vector<std::string> modes;
  if (mode == "all")
    modes = {"feedback-only", "feedforward-only", "two-dof"};
  else
    modes = {mode};

  std::ofstream summary(ctx.out_dir / "summary.csv");
  summary << "mode,rms_error,fluctuation_band\n";

  for (const std::string& m : modes) {
    check(msm_config_set(ctx.config, "run", "mode", m.c_str()), "set mode");
    SeriesHandle run;
    check(msm_scenario_run(ctx.config, run.out()), "scenario " + m);
    write_series(run, ctx.out_dir / ("closedloop_" + m + ".csv"));

    const std::vector<double> y = channel(run, "plant_output");
    const double h = msm_timeseries_sample_period(run);
    const double duration = static_cast<double>(y.size()) * h;
    // post-rise window: skip the first 0.1 s (or a quarter of short runs)
    const auto tail = static_cast<size_t>(std::min(0.1, 0.25 * duration) / h);
    double lo = y[tail], hi = y[tail];
    for (size_t k = tail; k < y.size(); ++k) {
      lo = std::min(lo, y[k]);
      hi = std::max(hi, y[k]);
    }
    const double skip = std::min(1.0, 0.25 * duration);
    char line[160];
    std::snprintf(line, sizeof(line), "%s,%.12g,%.12g\n", m.c_str(),
                  series_rms_error(run, skip), hi - lo);
    summary << line;
  }
  std::cout << "wrote " << (ctx.out_dir / "summary.csv").string() << "\n";
  maybe_plot_script(ctx, "closedloop",
                    "plot 'closedloop_" + modes.back() +
                        ".csv' using 1:2 with lines title 'reference', "
                        "'closedloop_" +
                        modes.back() + ".csv' using 1:3 with lines title 'output'\n");
}

void run_frf(Context& ctx) {
  std::vector<fs::path> files;
  if (msm_config_has(ctx.config, "records", "files")) {
    std::stringstream ss(get_string(ctx.config, "records", "files", "", true));
    std::string f;
    while (std::getline(ss, f, ',')) {
      const auto first = f.find_first_not_of(" \t");
      const auto last = f.find_last_not_of(" \t");
      if (first != std::string::npos) files.push_back(resolve(ctx, f.substr(first, last - first + 1)));
    }
  } else {
    const std::string dir = get_string(ctx.config, "records", "dir", "", true);
    for (const auto& entry : fs::directory_iterator(resolve(ctx, dir)))
      if (entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) throw CliError{MSM_ERR_CONFIG, "no FRF record files configured"};

  FrfHandle frf;
  check(msm_frf_new(frf.out()), "frf");
  for (const fs::path& f : files) {
    SeriesHandle rec;
    check(msm_timeseries_read_csv(f.string().c_str(), rec.out()), "read " + f.string());
    const char* freq_raw = msm_timeseries_metadata(rec, "frequency_hz");
    if (!freq_raw)
      throw CliError{MSM_ERR_CONFIG, f.string() + ": missing frequency_hz metadata"};
    const double freq = std::stod(freq_raw);
    const std::vector<double> u = channel(rec, "u");
    const std::vector<double> y = channel(rec, "y");
    check(msm_frf_add_record(frf, freq, 1.0 / msm_timeseries_sample_period(rec),
                             u.data(), y.data(), u.size()),
          "add record " + f.string());
  }

  const size_t n = msm_frf_record_count(frf);
  std::vector<double> freq(n), re(n), im(n);
  check(msm_frf_estimate(frf, freq.data(), re.data(), im.data()), "FRF estimate");

  auto write_frf_csv = [](const fs::path& path, const std::vector<double>& f,
                          const std::vector<double>& real, const std::vector<double>& imag) {
    std::ofstream out(path);
    out << "omega_rad_s,magnitude,phase_deg\n";
    for (size_t i = 0; i < f.size(); ++i) {
      const double omega = 2.0 * std::numbers::pi * f[i];
      const double mag = std::hypot(real[i], imag[i]);
      const double phase = std::atan2(imag[i], real[i]) * 180.0 / std::numbers::pi;
      char line[120];
      std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g\n", omega, mag, phase);
      out << line;
    }
  };
  write_frf_csv(ctx.out_dir / "frf.csv", freq, re, im);
  std::cout << "wrote " << (ctx.out_dir / "frf.csv").string() << "\n";

  if (!get_bool(ctx.config, "fit", "enabled", true)) return;

  TfHandle tf;
  double residual = 0.0;
  check(msm_fit_sos_delay(freq.data(), re.data(), im.data(), n, tf.out(), &residual),
        "transfer-function fit");
  size_t n_num = 0, n_den = 0;
  check(msm_tf_coeff_counts(tf, &n_num, &n_den), "fit coefficients");
  std::vector<double> num(n_num), den(n_den);
  double delay = 0.0;
  check(msm_tf_coeffs(tf, num.data(), den.data(), &delay), "fit coefficients");
  const double wn = std::sqrt(den[2] / den[0]);
  const double zeta = den[1] / den[0] / (2.0 * wn);

  std::ofstream report(ctx.out_dir / "fit_report.txt");
  report << "model: b exp(-d s) / (s^2 + 2 zeta wn s + wn^2)\n";
  report << "gain_b = " << num.back() / den[0] << "\n";
  report << "omega_n_rad_s = " << wn << "\n";
  report << "zeta = " << zeta << "\n";
  report << "delay_s = " << delay << "\n";
  report << "weighted_residual = " << residual << "\n";
  std::cout << "wrote " << (ctx.out_dir / "fit_report.txt").string() << "\n";

  std::vector<double> omegas(n), fre(n), fim(n);
  for (size_t i = 0; i < n; ++i) omegas[i] = 2.0 * std::numbers::pi * freq[i];
  check(msm_tf_freq_response(tf, omegas.data(), n, fre.data(), fim.data()),
        "fit response");
  write_frf_csv(ctx.out_dir / "frf_fit.csv", freq, fre, fim);
  maybe_plot_script(ctx, "frf",
                    "set logscale xy\nplot 'frf.csv' using 1:2 with points title "
                    "'measured', 'frf_fit.csv' using 1:2 with lines title 'fit'\n");
}

void run_fit(Context& ctx) {
  const std::string file = get_string(ctx.config, "data", "file", "", true);
  SeriesHandle data;
  check(msm_timeseries_read_csv(resolve(ctx, file).string().c_str(), data.out()),
        "read " + file);
  const std::vector<double> u = channel(data, "u");
  const std::vector<double> y = channel(data, "y");
  const double fs = 1.0 / msm_timeseries_sample_period(data);
  const double lowpass = get_double(ctx.config, "fit", "lowpass_hz", 10.0);

  ModelHandle model;
  double rms = 0.0;
  if (msm_config_has(ctx.config, "grid", "delta")) {
    // Fixed operator shapes from the config; fit the weights only.
    const auto delta = get_doubles(ctx.config, "grid", "delta");
    const auto w = get_doubles(ctx.config, "grid", "w");
    const auto m = get_doubles(ctx.config, "grid", "m");
    const auto gamma = get_doubles(ctx.config, "grid", "gamma");
    if (w.size() != delta.size() || m.size() != delta.size() || gamma.size() != delta.size())
      throw CliError{MSM_ERR_CONFIG, "[grid] arrays must have equal lengths"};
    std::vector<double> rho(delta.size());
    check(msm_fit_kp_weights(u.data(), y.data(), u.size(), delta.data(), w.data(),
                             m.data(), gamma.data(), delta.size(), rho.data(), &rms),
          "weight fit");
    std::vector<double> kd, kw, km, kg, kr;
    for (size_t i = 0; i < rho.size(); ++i) {
      if (rho[i] > 0.0) {
        kd.push_back(delta[i]);
        kw.push_back(w[i]);
        km.push_back(m[i]);
        kg.push_back(gamma[i]);
        kr.push_back(rho[i]);
      }
    }
    if (kd.empty()) throw CliError{MSM_ERR_NUMERICAL, "all fitted weights are zero"};
    check(msm_kp_model_new(kd.data(), kw.data(), km.data(), kg.data(), kr.data(),
                           kd.size(), model.out()),
          "model from fit");
  } else {
    const auto n_ops = static_cast<size_t>(get_double(ctx.config, "fit", "n", 3.0));
    check(msm_fit_kp_shapes(u.data(), y.data(), u.size(), n_ops, lowpass, fs,
                            model.out(), &rms),
          "shape fit");
  }

  const fs::path params_path = ctx.out_dir / "kp_fit.params";
  check(msm_kp_model_save(model, params_path.string().c_str()), "save parameters");
  std::cout << "wrote " << params_path.string() << "\n";

  const size_t n = msm_kp_model_size(model);
  std::vector<double> delta(n), w(n), m(n), gamma(n), rho(n);
  check(msm_kp_model_params(model, delta.data(), w.data(), m.data(), gamma.data(),
                            rho.data()),
        "model parameters");
  std::ofstream report(ctx.out_dir / "fit_report.txt");
  report << "operators = " << n << "\n";
  report << "fit_rms = " << rms << "\n";
  for (size_t i = 0; i < n; ++i)
    report << "op" << i << ": delta = " << delta[i] << ", w = " << w[i]
           << ", m = " << m[i] << ", gamma = " << gamma[i] << ", rho = " << rho[i]
           << "\n";
  std::cout << "wrote " << (ctx.out_dir / "fit_report.txt").string() << "\n";
}

void run_margins(Context& ctx) {
  const double kp = get_double(ctx.config, "controller", "kp", 0.0, true);
  const double ki = get_double(ctx.config, "controller", "ki", 0.0, true);
  const double cutoff = get_double(ctx.config, "filter", "cutoff_hz", 10.0);

  TfHandle plant;
  if (msm_config_has(ctx.config, "plant", "num")) {
    const auto num = get_doubles(ctx.config, "plant", "num");
    const auto den = get_doubles(ctx.config, "plant", "den");
    const double delay = get_double(ctx.config, "plant", "delay", 0.0);
    check(msm_tf_new(num.data(), num.size(), den.data(), den.size(), delay, plant.out()),
          "plant");
  } else {
    check(msm_tf_plant_identified(plant.out()), "plant");
  }

  TfHandle ctrl, filt, cg, loop;
  check(msm_tf_pi(kp, ki, ctrl.out()), "controller");
  check(msm_tf_lowpass(cutoff, filt.out()), "filter");
  check(msm_tf_series(ctrl, plant, cg.out()), "series");
  check(msm_tf_series(cg, filt, loop.out()), "series");

  msm_margin_report report{};
  check(msm_tf_margins(loop, &report), "margins");

  std::ostringstream block;
  block << "phase_margin_deg      = " << report.phase_margin_deg << "\n";
  block << "gain_margin_db        = " << report.gain_margin_db << "\n";
  block << "gain_crossover_rad_s  = " << report.gain_crossover_rad_s << "\n";
  block << "phase_crossover_rad_s = " << report.phase_crossover_rad_s << "\n";
  std::cout << block.str();

  std::ofstream txt(ctx.out_dir / "margins.txt");
  txt << block.str();
  std::ofstream csv(ctx.out_dir / "margins.csv");
  csv << "phase_margin_deg,gain_margin_db,gain_crossover_rad_s,phase_crossover_rad_s\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g,%.12g\n", report.phase_margin_deg,
                report.gain_margin_db, report.gain_crossover_rad_s,
                report.phase_crossover_rad_s);
  csv << line;
  std::cout << "wrote " << (ctx.out_dir / "margins.csv").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hysteresis actuator control toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string format = "csv";
  std::uint64_t seed = 0;
  bool seed_set = false;

  struct Command {
    std::string name;
    std::string help;
    void (*run)(Context&);
  };
  const std::vector<Command> commands = {
      {"hysteresis", "sweep a KP model and write the input-output loop", run_hysteresis},
      {"compensate", "run the feedforward compensator over a reference", run_compensate},
      {"closedloop", "run the 2DOF loop and write per-mode records", run_closedloop},
      {"frf", "estimate an FRF from sine records and fit the plant model", run_frf},
      {"fit", "fit KP operator weights/shapes to quasi-static loop data", run_fit},
      {"margins", "phase and gain margins of L = C G F", run_margins},
  };

  for (const auto& [name, help, fn] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (default out/<subcommand>)");
    sub->add_option("--seed", seed, "override the run seed")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    sub->add_option("--format", format, "output format (csv)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (format != "csv")
      throw CliError{MSM_ERR_CONFIG, "unsupported --format '" + format + "'"};

    Context ctx;
    for (const auto& [name, help, fn] : commands)
      if (app.get_subcommand(name)->parsed()) ctx.subcommand = name;

    ctx.config_path = fs::absolute(config_path);
    check(msm_config_load(ctx.config_path.string().c_str(), ctx.config.out()),
          "load config");

    if (seed_set) {
      ctx.seed_overridden = true;
      ctx.seed = seed;
      const std::string s = std::to_string(seed);
      check(msm_config_set(ctx.config, "run", "seed", s.c_str()), "seed override");
      if (msm_config_has(ctx.config, "reference", "type"))
        check(msm_config_set(ctx.config, "reference", "seed", s.c_str()), "seed override");
      if (msm_config_has(ctx.config, "sweep", "type"))
        check(msm_config_set(ctx.config, "sweep", "seed", s.c_str()), "seed override");
    }

    ctx.out_dir = out_dir.empty() ? fs::path("out") / ctx.subcommand : fs::path(out_dir);
    fs::create_directories(ctx.out_dir);

    for (const auto& [name, help, fn] : commands)
      if (name == ctx.subcommand) fn(ctx);

    write_manifest(ctx);
    return 0;
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.status == MSM_ERR_NUMERICAL ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
