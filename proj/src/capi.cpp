#include "msmctl.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "compensator.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "feedback.hpp"
#include "hysteresis.hpp"
#include "ident.hpp"
#include "lti.hpp"
#include "simulate.hpp"
#include "timeseries.hpp"
#include "version.hpp"

struct msm_kp_model {
  msm::KpModel impl;
};
struct msm_tf {
  msm::TransferFunction impl;
};
struct msm_dss {
  msm::DiscreteSystem impl;
};
struct msm_pi {
  msm::PiController impl;
};
struct msm_compensator {
  msm::Compensator impl;
};
struct msm_timeseries {
  msm::TimeSeries impl;
};
struct msm_config {
  msm::Config impl;
};
struct msm_frf {
  std::vector<msm::FrfRecord> records;
};

namespace {

thread_local std::string g_last_error;

msm_status fail(msm_status code, const char* message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
msm_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return MSM_OK;
  } catch (const msm::ConfigError& e) {
    g_last_error = e.what();
    return MSM_ERR_CONFIG;
  } catch (const msm::NumericalError& e) {
    g_last_error = e.what();
    return MSM_ERR_NUMERICAL;
  } catch (const msm::IoError& e) {
    g_last_error = e.what();
    return MSM_ERR_IO;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return MSM_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MSM_ERR_INVALID_ARGUMENT;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* msm_version(void) { return msm::kVersion; }

const char* msm_last_error(void) { return g_last_error.c_str(); }

void msm_string_free(char* s) { std::free(s); }

/* ---------------- hysteresis ---------------- */

msm_status msm_kp_model_new(const double* delta, const double* w, const double* m,
                            const double* gamma, const double* rho, size_t n,
                            msm_kp_model** out) {
  if (!delta || !w || !m || !gamma || !rho || !out || n == 0)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_kp_model_new: null argument");
  return guarded([&] {
    std::vector<msm::KpOperator> ops(n);
    for (size_t i = 0; i < n; ++i)
      ops[i] = msm::KpOperator{delta[i], w[i], m[i], gamma[i], 0.0};
    *out = new msm_kp_model{msm::KpModel(std::move(ops),
                                         std::vector<double>(rho, rho + n))};
  });
}

msm_status msm_kp_model_load(const char* path, msm_kp_model** out) {
  if (!path || !out) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_kp_model_load: null argument");
  return guarded([&] { *out = new msm_kp_model{msm::load_kp_model(path)}; });
}

msm_status msm_kp_model_save(const msm_kp_model* model, const char* path) {
  if (!model || !path)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_kp_model_save: null argument");
  return guarded([&] { msm::save_kp_model(model->impl, path); });
}

msm_status msm_kp_model_clone(const msm_kp_model* model, msm_kp_model** out) {
  if (!model || !out)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_kp_model_clone: null argument");
  return guarded([&] { *out = new msm_kp_model{model->impl}; });
}

size_t msm_kp_model_size(const msm_kp_model* model) {
  return model ? model->impl.size() : 0;
}

msm_status msm_kp_model_params(const msm_kp_model* model, double* delta, double* w,
                               double* m, double* gamma, double* rho) {
  if (!model) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_kp_model_params: null model");
  return guarded([&] {
    const auto& ops = model->impl.operators();
    for (size_t i = 0; i < ops.size(); ++i) {
      if (delta) delta[i] = ops[i].delta;
      if (w) w[i] = ops[i].w;
      if (m) m[i] = ops[i].m;
      if (gamma) gamma[i] = ops[i].gamma;
      if (rho) rho[i] = model->impl.weights()[i];
    }
  });
}

msm_status msm_kp_model_reset(msm_kp_model* model, double y0) {
  if (!model) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_kp_model_reset: null model");
  return guarded([&] { model->impl.reset(y0); });
}

msm_status msm_kp_model_apply(msm_kp_model* model, double u, double* y) {
  if (!model || !y) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_kp_model_apply: null argument");
  return guarded([&] { *y = model->impl.apply(u); });
}

msm_status msm_kp_model_apply_many(msm_kp_model* model, const double* u, double* y,
                                   size_t n) {
  if (!model || !u || !y)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_kp_model_apply_many: null argument");
  return guarded([&] {
    for (size_t k = 0; k < n; ++k) y[k] = model->impl.apply(u[k]);
  });
}

msm_status msm_kp_model_tangent(const msm_kp_model* model, int direction, double* gain,
                                double* bias) {
  if (!model || !gain || !bias)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_kp_model_tangent: null argument");
  return guarded([&] {
    msm::TangentInfo info;
    if (direction > 0)
      info = model->impl.tangent(msm::Direction::ascending);
    else if (direction < 0)
      info = model->impl.tangent(msm::Direction::descending);
    else
      info = model->impl.tangent();
    *gain = info.gain;
    *bias = info.bias;
  });
}

msm_status msm_kp_model_output_bound(const msm_kp_model* model, double* bound) {
  if (!model || !bound)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_kp_model_output_bound: null argument");
  return guarded([&] { *bound = model->impl.output_bound(); });
}

msm_status msm_kp_model_scale_weights(msm_kp_model* model, double factor) {
  if (!model)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_kp_model_scale_weights: null model");
  return guarded([&] { model->impl.scale_weights(factor); });
}

void msm_kp_model_free(msm_kp_model* model) { delete model; }

/* ---------------- lti ---------------- */

msm_status msm_tf_new(const double* num, size_t n_num, const double* den, size_t n_den,
                      double delay, msm_tf** out) {
  if (!num || !den || !out || n_num == 0 || n_den == 0)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_tf_new: null argument");
  return guarded([&] {
    *out = new msm_tf{msm::TransferFunction(std::vector<double>(num, num + n_num),
                                            std::vector<double>(den, den + n_den),
                                            delay)};
  });
}

msm_status msm_tf_plant_identified(msm_tf** out) {
  if (!out) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_tf_plant_identified: null out");
  return guarded([&] { *out = new msm_tf{msm::plant_identified()}; });
}

msm_status msm_tf_lowpass(double cutoff_hz, msm_tf** out) {
  if (!out) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_tf_lowpass: null out");
  return guarded([&] { *out = new msm_tf{msm::lowpass_filter(cutoff_hz)}; });
}

msm_status msm_tf_pi(double kp, double ki, msm_tf** out) {
  if (!out) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_tf_pi: null out");
  return guarded([&] { *out = new msm_tf{msm::pi_transfer(kp, ki)}; });
}

msm_status msm_tf_series(const msm_tf* a, const msm_tf* b, msm_tf** out) {
  if (!a || !b || !out) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_tf_series: null argument");
  return guarded([&] { *out = new msm_tf{a->impl.series(b->impl)}; });
}

msm_status msm_tf_coeff_counts(const msm_tf* tf, size_t* n_num, size_t* n_den) {
  if (!tf || !n_num || !n_den)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_tf_coeff_counts: null argument");
  *n_num = tf->impl.num().size();
  *n_den = tf->impl.den().size();
  return MSM_OK;
}

msm_status msm_tf_coeffs(const msm_tf* tf, double* num, double* den, double* delay) {
  if (!tf) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_tf_coeffs: null tf");
  return guarded([&] {
    if (num)
      for (size_t i = 0; i < tf->impl.num().size(); ++i) num[i] = tf->impl.num()[i];
    if (den)
      for (size_t i = 0; i < tf->impl.den().size(); ++i) den[i] = tf->impl.den()[i];
    if (delay) *delay = tf->impl.delay();
  });
}

msm_status msm_tf_freq_response(const msm_tf* tf, const double* omega, size_t n,
                                double* re, double* im) {
  if (!tf || !omega || !re || !im)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_tf_freq_response: null argument");
  return guarded([&] {
    for (size_t i = 0; i < n; ++i) {
      const auto v = tf->impl.response(omega[i]);
      re[i] = v.real();
      im[i] = v.imag();
    }
  });
}

msm_status msm_tf_margins(const msm_tf* tf, msm_margin_report* out) {
  if (!tf || !out) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_tf_margins: null argument");
  return guarded([&] {
    const msm::MarginReport r = msm::stability_margins(tf->impl);
    out->phase_margin_deg = r.phase_margin_deg;
    out->gain_margin_db = r.gain_margin_db;
    out->gain_crossover_rad_s = r.gain_crossover_rad_s;
    out->phase_crossover_rad_s = r.phase_crossover_rad_s;
  });
}

msm_status msm_tf_discretize(const msm_tf* tf, double sample_period, msm_dss** out) {
  if (!tf || !out) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_tf_discretize: null argument");
  return guarded([&] { *out = new msm_dss{msm::discretize(tf->impl, sample_period)}; });
}

void msm_tf_free(msm_tf* tf) { delete tf; }

msm_status msm_dss_step(msm_dss* sys, double u, double* y) {
  if (!sys || !y) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_dss_step: null argument");
  return guarded([&] { *y = sys->impl.step(u); });
}

msm_status msm_dss_reset(msm_dss* sys) {
  if (!sys) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_dss_reset: null system");
  sys->impl.reset();
  return MSM_OK;
}

void msm_dss_free(msm_dss* sys) { delete sys; }

/* ---------------- feedback ---------------- */

msm_status msm_pi_new(double kp, double ki, double sample_period, int has_limits,
                      double lo, double hi, int anti_windup, msm_pi** out) {
  if (!out) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_pi_new: null out");
  return guarded([&] {
    std::optional<msm::PiLimits> limits;
    if (has_limits) limits = msm::PiLimits{lo, hi, anti_windup != 0};
    *out = new msm_pi{msm::PiController(kp, ki, sample_period, limits)};
  });
}

msm_status msm_pi_step(msm_pi* pi, double error, double* u) {
  if (!pi || !u) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_pi_step: null argument");
  return guarded([&] { *u = pi->impl.step(error); });
}

msm_status msm_pi_reset(msm_pi* pi) {
  if (!pi) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_pi_reset: null controller");
  pi->impl.reset();
  return MSM_OK;
}

void msm_pi_free(msm_pi* pi) { delete pi; }

/* ---------------- compensator ---------------- */

msm_status msm_compensator_new(const msm_kp_model* model, double gain, int has_limits,
                               double lo, double hi, msm_compensator** out) {
  if (!model || !out)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_compensator_new: null argument");
  return guarded([&] {
    std::optional<msm::CompensatorLimits> limits;
    if (has_limits) limits = msm::CompensatorLimits{lo, hi};
    *out = new msm_compensator{msm::Compensator(model->impl, gain, limits)};
  });
}

msm_status msm_compensator_reset(msm_compensator* comp, double y0, double u0) {
  if (!comp) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_compensator_reset: null handle");
  return guarded([&] { comp->impl.reset(y0, u0); });
}

msm_status msm_compensator_step(msm_compensator* comp, double reference, double dt,
                                double* u) {
  if (!comp || !u)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_compensator_step: null argument");
  return guarded([&] { *u = comp->impl.step(reference, dt); });
}

msm_status msm_compensator_stable_gain_limit(const msm_kp_model* model, double dt,
                                             double* limit) {
  if (!model || !limit)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_compensator_stable_gain_limit: null argument");
  return guarded([&] { *limit = msm::Compensator::stable_gain_limit(model->impl, dt); });
}

msm_status msm_compensator_run(const msm_kp_model* model, double gain, int has_limits,
                               double lo, double hi, double sample_period,
                               const double* reference, size_t n, double* u,
                               double* y_hat, int* no_progress) {
  if (!model || !reference || !u || !y_hat || n == 0)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_compensator_run: null argument");
  return guarded([&] {
    msm::TimeSeries ref(sample_period);
    ref.add_channel("reference", std::vector<double>(reference, reference + n));
    std::optional<msm::CompensatorLimits> limits;
    if (has_limits) limits = msm::CompensatorLimits{lo, hi};
    const msm::CompensationRun run =
        msm::run_compensation(model->impl, gain, ref, "reference", limits);
    const auto& uc = run.series.channel("u");
    const auto& yc = run.series.channel("y_hat");
    for (size_t k = 0; k < n; ++k) {
      u[k] = uc[k];
      y_hat[k] = yc[k];
    }
    if (no_progress) *no_progress = run.no_progress ? 1 : 0;
  });
}

void msm_compensator_free(msm_compensator* comp) { delete comp; }

/* ---------------- timeseries ---------------- */

msm_status msm_timeseries_new(double sample_period, msm_timeseries** out) {
  if (!out) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_timeseries_new: null out");
  return guarded([&] { *out = new msm_timeseries{msm::TimeSeries(sample_period)}; });
}

msm_status msm_timeseries_add_channel(msm_timeseries* ts, const char* name,
                                      const double* data, size_t n) {
  if (!ts || !name || !data)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_timeseries_add_channel: null argument");
  return guarded([&] {
    ts->impl.add_channel(name, std::vector<double>(data, data + n));
  });
}

size_t msm_timeseries_length(const msm_timeseries* ts) {
  return ts ? ts->impl.length() : 0;
}

size_t msm_timeseries_channel_count(const msm_timeseries* ts) {
  return ts ? ts->impl.channel_count() : 0;
}

double msm_timeseries_sample_period(const msm_timeseries* ts) {
  return ts ? ts->impl.sample_period() : 0.0;
}

const char* msm_timeseries_channel_name(const msm_timeseries* ts, size_t idx) {
  if (!ts || idx >= ts->impl.channel_count()) return nullptr;
  return ts->impl.channel_name(idx).c_str();
}

msm_status msm_timeseries_channel(const msm_timeseries* ts, const char* name,
                                  const double** data, size_t* n) {
  if (!ts || !name || !data || !n)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_timeseries_channel: null argument");
  return guarded([&] {
    const auto& ch = ts->impl.channel(name);
    *data = ch.data();
    *n = ch.size();
  });
}

const char* msm_timeseries_metadata(const msm_timeseries* ts, const char* key) {
  if (!ts || !key) return nullptr;
  const auto& md = ts->impl.metadata();
  const auto it = md.find(key);
  return it == md.end() ? nullptr : it->second.c_str();
}

msm_status msm_timeseries_set_metadata(msm_timeseries* ts, const char* key,
                                       const char* value) {
  if (!ts || !key || !value)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_timeseries_set_metadata: null argument");
  ts->impl.metadata()[key] = value;
  return MSM_OK;
}

msm_status msm_timeseries_write_csv(const msm_timeseries* ts, const char* path) {
  if (!ts || !path)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_timeseries_write_csv: null argument");
  return guarded([&] { ts->impl.write_csv(path); });
}

msm_status msm_timeseries_read_csv(const char* path, msm_timeseries** out) {
  if (!path || !out)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_timeseries_read_csv: null argument");
  return guarded([&] { *out = new msm_timeseries{msm::TimeSeries::read_csv(path)}; });
}

void msm_timeseries_free(msm_timeseries* ts) { delete ts; }

/* ---------------- config ---------------- */

msm_status msm_config_load(const char* path, msm_config** out) {
  if (!path || !out) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_config_load: null argument");
  return guarded([&] { *out = new msm_config{msm::Config::parse_file(path)}; });
}

msm_status msm_config_parse(const char* text, msm_config** out) {
  if (!text || !out) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_config_parse: null argument");
  return guarded([&] { *out = new msm_config{msm::Config::parse(text)}; });
}

msm_status msm_config_serialize(const msm_config* cfg, char** out) {
  if (!cfg || !out)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_config_serialize: null argument");
  return guarded([&] {
    *out = dup_string(cfg->impl.serialize());
    if (!*out) throw std::bad_alloc();
  });
}

int msm_config_has(const msm_config* cfg, const char* section, const char* key) {
  if (!cfg || !section || !key) return 0;
  return cfg->impl.has(section, key) ? 1 : 0;
}

msm_status msm_config_get_double(const msm_config* cfg, const char* section,
                                 const char* key, double* out) {
  if (!cfg || !section || !key || !out)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_config_get_double: null argument");
  return guarded([&] { *out = cfg->impl.get_double(section, key); });
}

msm_status msm_config_get_string(const msm_config* cfg, const char* section,
                                 const char* key, char** out) {
  if (!cfg || !section || !key || !out)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_config_get_string: null argument");
  return guarded([&] {
    *out = dup_string(cfg->impl.get_string(section, key));
    if (!*out) throw std::bad_alloc();
  });
}

msm_status msm_config_set(msm_config* cfg, const char* section, const char* key,
                          const char* value) {
  if (!cfg || !section || !key || !value)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_config_set: null argument");
  return guarded([&] { cfg->impl.set(section, key, value); });
}

void msm_config_free(msm_config* cfg) { delete cfg; }

/* ---------------- reference and scenario ---------------- */

msm_status msm_make_reference(const msm_config* cfg, const char* ref_section,
                              const char* run_section, msm_timeseries** out) {
  if (!cfg || !ref_section || !run_section || !out)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_make_reference: null argument");
  return guarded([&] {
    const msm::ReferenceSpec spec = msm::reference_spec_from_config(cfg->impl, ref_section);
    const std::string dur_sec =
        cfg->impl.has(ref_section, "duration_s") ? ref_section : run_section;
    const double duration = cfg->impl.get_double(dur_sec, "duration_s");
    const std::string rate_sec =
        cfg->impl.has(ref_section, "sample_rate_hz") ? ref_section : run_section;
    const double rate = cfg->impl.get_double(rate_sec, "sample_rate_hz", 2000.0);
    *out = new msm_timeseries{msm::make_reference(spec, duration, rate)};
  });
}

msm_status msm_scenario_run(const msm_config* cfg, msm_timeseries** out) {
  if (!cfg || !out) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_scenario_run: null argument");
  return guarded([&] {
    const msm::ScenarioConfig sc = msm::scenario_from_config(cfg->impl);
    *out = new msm_timeseries{msm::run_scenario(sc)};
  });
}

/* ---------------- ident ---------------- */

msm_status msm_frf_new(msm_frf** out) {
  if (!out) return fail(MSM_ERR_INVALID_ARGUMENT, "msm_frf_new: null out");
  *out = new (std::nothrow) msm_frf;
  return *out ? MSM_OK : fail(MSM_ERR_INVALID_ARGUMENT, "msm_frf_new: allocation failed");
}

msm_status msm_frf_add_record(msm_frf* frf, double frequency_hz, double sample_rate_hz,
                              const double* u, const double* y, size_t n) {
  if (!frf || !u || !y || n == 0)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_frf_add_record: null argument");
  return guarded([&] {
    msm::FrfRecord rec;
    rec.frequency_hz = frequency_hz;
    rec.sample_rate_hz = sample_rate_hz;
    rec.input.assign(u, u + n);
    rec.output.assign(y, y + n);
    frf->records.push_back(std::move(rec));
  });
}

size_t msm_frf_record_count(const msm_frf* frf) {
  return frf ? frf->records.size() : 0;
}

msm_status msm_frf_estimate(const msm_frf* frf, double* frequency_hz, double* re,
                            double* im) {
  if (!frf || !frequency_hz || !re || !im)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_frf_estimate: null argument");
  return guarded([&] {
    const auto points = msm::estimate_frf(frf->records);
    for (size_t i = 0; i < points.size(); ++i) {
      frequency_hz[i] = points[i].frequency_hz;
      re[i] = points[i].response.real();
      im[i] = points[i].response.imag();
    }
  });
}

void msm_frf_free(msm_frf* frf) { delete frf; }

msm_status msm_fit_sos_delay(const double* frequency_hz, const double* re,
                             const double* im, size_t n, msm_tf** out,
                             double* residual) {
  if (!frequency_hz || !re || !im || !out)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_fit_sos_delay: null argument");
  return guarded([&] {
    std::vector<msm::FrfPoint> points(n);
    for (size_t i = 0; i < n; ++i)
      points[i] = {frequency_hz[i], std::complex<double>(re[i], im[i])};
    const msm::SosDelayFit fit = msm::fit_sos_delay(points);
    *out = new msm_tf{fit.tf()};
    if (residual) *residual = fit.residual;
  });
}

msm_status msm_fit_kp_weights(const double* u, const double* y, size_t n,
                              const double* delta, const double* w, const double* m,
                              const double* gamma, size_t n_ops, double* rho,
                              double* rms) {
  if (!u || !y || !delta || !w || !m || !gamma || !rho || n == 0 || n_ops == 0)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_fit_kp_weights: null argument");
  return guarded([&] {
    std::vector<msm::KpOperator> grid(n_ops);
    for (size_t i = 0; i < n_ops; ++i) {
      grid[i] = msm::KpOperator{delta[i], w[i], m[i], gamma[i], 0.0};
      grid[i].validate();
    }
    const msm::KpWeightFit fit = msm::fit_kp_weights(
        std::vector<double>(u, u + n), std::vector<double>(y, y + n), grid);
    for (size_t i = 0; i < n_ops; ++i) rho[i] = fit.weights[i];
    if (rms) *rms = fit.rms;
  });
}

msm_status msm_fit_kp_shapes(const double* u, const double* y, size_t n,
                             size_t n_operators, double lowpass_cutoff_hz,
                             double sample_rate_hz, msm_kp_model** out, double* rms) {
  if (!u || !y || !out || n == 0)
    return fail(MSM_ERR_INVALID_ARGUMENT, "msm_fit_kp_shapes: null argument");
  return guarded([&] {
    msm::KpShapeFitOptions opts;
    opts.n_operators = n_operators;
    opts.lowpass_cutoff_hz = lowpass_cutoff_hz;
    opts.sample_rate_hz = sample_rate_hz;
    double fit_rms = 0.0;
    msm::KpModel model = msm::fit_kp_model(std::vector<double>(u, u + n),
                                           std::vector<double>(y, y + n), opts, &fit_rms);
    *out = new msm_kp_model{std::move(model)};
    if (rms) *rms = fit_rms;
  });
}

} /* extern "C" */
