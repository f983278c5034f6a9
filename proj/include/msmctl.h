/* msmctl: hysteresis modeling, inversion-free feedforward compensation, and
 * 2DOF position-control simulation for hysteresis-afflicted actuators.
 *
 * All functions return msm_status; MSM_OK is 0. On failure the thread-local
 * message from msm_last_error() describes what went wrong. Handles are
 * opaque; every *_new/_load function has a matching *_free. Handles are not
 * synchronized: use one handle per thread, or external locking.
 */
#ifndef MSMCTL_H
#define MSMCTL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MSMCTL_API __declspec(dllexport)
#else
#define MSMCTL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum msm_status {
  MSM_OK = 0,
  MSM_ERR_INVALID_ARGUMENT = 1,
  MSM_ERR_CONFIG = 2,
  MSM_ERR_NUMERICAL = 3,
  MSM_ERR_IO = 4
} msm_status;

MSMCTL_API const char* msm_version(void);
/* Message for the last failed call on this thread; "" when none. */
MSMCTL_API const char* msm_last_error(void);
MSMCTL_API void msm_string_free(char* s);

typedef struct msm_kp_model msm_kp_model;
typedef struct msm_tf msm_tf;
typedef struct msm_dss msm_dss;
typedef struct msm_pi msm_pi;
typedef struct msm_compensator msm_compensator;
typedef struct msm_timeseries msm_timeseries;
typedef struct msm_config msm_config;
typedef struct msm_frf msm_frf;

/* ---------------- hysteresis: KP operator superposition ---------------- */

/* n operators with per-operator shift delta, slot width w >= 0, saturation
 * magnitude m > 0, slope gain gamma > 0, and strictly positive weights rho. */
MSMCTL_API msm_status msm_kp_model_new(const double* delta, const double* w,
                                       const double* m, const double* gamma,
                                       const double* rho, size_t n,
                                       msm_kp_model** out);
MSMCTL_API msm_status msm_kp_model_load(const char* path, msm_kp_model** out);
MSMCTL_API msm_status msm_kp_model_save(const msm_kp_model* model, const char* path);
MSMCTL_API msm_status msm_kp_model_clone(const msm_kp_model* model, msm_kp_model** out);
MSMCTL_API size_t msm_kp_model_size(const msm_kp_model* model);
MSMCTL_API msm_status msm_kp_model_params(const msm_kp_model* model, double* delta,
                                          double* w, double* m, double* gamma,
                                          double* rho);
/* Per-operator reset: each operator re-seats its memory to output y0. */
MSMCTL_API msm_status msm_kp_model_reset(msm_kp_model* model, double y0);
MSMCTL_API msm_status msm_kp_model_apply(msm_kp_model* model, double u, double* y);
MSMCTL_API msm_status msm_kp_model_apply_many(msm_kp_model* model, const double* u,
                                              double* y, size_t n);
/* direction: +1 ascending, -1 descending, 0 = continue the last movement. */
MSMCTL_API msm_status msm_kp_model_tangent(const msm_kp_model* model, int direction,
                                           double* gain, double* bias);
MSMCTL_API msm_status msm_kp_model_output_bound(const msm_kp_model* model, double* bound);
MSMCTL_API msm_status msm_kp_model_scale_weights(msm_kp_model* model, double factor);
MSMCTL_API void msm_kp_model_free(msm_kp_model* model);

/* ---------------- lti: transfer functions and discretization ----------- */

/* Coefficients in descending powers of s; delay in seconds (>= 0). */
MSMCTL_API msm_status msm_tf_new(const double* num, size_t n_num, const double* den,
                                 size_t n_den, double delay, msm_tf** out);
/* The identified actuator plant 45.57 e^{-0.002 s}/(s^2 + 737.9 s + 5.439e5). */
MSMCTL_API msm_status msm_tf_plant_identified(msm_tf** out);
/* Second-order low pass (mu s + 1)^-2 with mu = 1/(2 pi cutoff_hz). */
MSMCTL_API msm_status msm_tf_lowpass(double cutoff_hz, msm_tf** out);
/* PI transfer (kp s + ki)/s. */
MSMCTL_API msm_status msm_tf_pi(double kp, double ki, msm_tf** out);
MSMCTL_API msm_status msm_tf_series(const msm_tf* a, const msm_tf* b, msm_tf** out);
MSMCTL_API msm_status msm_tf_coeff_counts(const msm_tf* tf, size_t* n_num, size_t* n_den);
MSMCTL_API msm_status msm_tf_coeffs(const msm_tf* tf, double* num, double* den,
                                    double* delay);
MSMCTL_API msm_status msm_tf_freq_response(const msm_tf* tf, const double* omega,
                                           size_t n, double* re, double* im);

typedef struct msm_margin_report {
  double phase_margin_deg;
  double gain_margin_db;        /* +inf when the phase stays above -180 deg */
  double gain_crossover_rad_s;
  double phase_crossover_rad_s; /* NaN when none */
} msm_margin_report;

/* Margins over [1e-1, 1e5] rad/s; delay phase included. Fails with
 * MSM_ERR_NUMERICAL when |L| never crosses unity in the band. */
MSMCTL_API msm_status msm_tf_margins(const msm_tf* tf, msm_margin_report* out);

/* Exact zero-order-hold discretization; delay must be an integer number of
 * sample periods. */
MSMCTL_API msm_status msm_tf_discretize(const msm_tf* tf, double sample_period,
                                        msm_dss** out);
MSMCTL_API void msm_tf_free(msm_tf* tf);

MSMCTL_API msm_status msm_dss_step(msm_dss* sys, double u, double* y);
MSMCTL_API msm_status msm_dss_reset(msm_dss* sys);
MSMCTL_API void msm_dss_free(msm_dss* sys);

/* ---------------- feedback: discrete PI ---------------- */

MSMCTL_API msm_status msm_pi_new(double kp, double ki, double sample_period,
                                 int has_limits, double lo, double hi,
                                 int anti_windup, msm_pi** out);
MSMCTL_API msm_status msm_pi_step(msm_pi* pi, double error, double* u);
MSMCTL_API msm_status msm_pi_reset(msm_pi* pi);
MSMCTL_API void msm_pi_free(msm_pi* pi);

/* ---------------- compensator: inversion-free feedforward -------------- */

/* The compensator owns a private copy of the model. */
MSMCTL_API msm_status msm_compensator_new(const msm_kp_model* model, double gain,
                                          int has_limits, double lo, double hi,
                                          msm_compensator** out);
MSMCTL_API msm_status msm_compensator_reset(msm_compensator* comp, double y0, double u0);
MSMCTL_API msm_status msm_compensator_step(msm_compensator* comp, double reference,
                                           double dt, double* u);
/* Largest loop gain with a stable Euler update: 2 / (dt * total slope). */
MSMCTL_API msm_status msm_compensator_stable_gain_limit(const msm_kp_model* model,
                                                        double dt, double* limit);
/* Batch driver from the virgin state. u and y_hat must hold n values;
 * no_progress latches when the reference stops approaching the model output
 * (unreachable reference). */
MSMCTL_API msm_status msm_compensator_run(const msm_kp_model* model, double gain,
                                          int has_limits, double lo, double hi,
                                          double sample_period, const double* reference,
                                          size_t n, double* u, double* y_hat,
                                          int* no_progress);
MSMCTL_API void msm_compensator_free(msm_compensator* comp);

/* ---------------- timeseries ---------------- */

MSMCTL_API msm_status msm_timeseries_new(double sample_period, msm_timeseries** out);
MSMCTL_API msm_status msm_timeseries_add_channel(msm_timeseries* ts, const char* name,
                                                 const double* data, size_t n);
MSMCTL_API size_t msm_timeseries_length(const msm_timeseries* ts);
MSMCTL_API size_t msm_timeseries_channel_count(const msm_timeseries* ts);
MSMCTL_API double msm_timeseries_sample_period(const msm_timeseries* ts);
/* NULL when idx is out of range. */
MSMCTL_API const char* msm_timeseries_channel_name(const msm_timeseries* ts, size_t idx);
/* Borrowed pointer, valid until the series is modified or freed. */
MSMCTL_API msm_status msm_timeseries_channel(const msm_timeseries* ts, const char* name,
                                             const double** data, size_t* n);
/* NULL when the key is missing. */
MSMCTL_API const char* msm_timeseries_metadata(const msm_timeseries* ts, const char* key);
MSMCTL_API msm_status msm_timeseries_set_metadata(msm_timeseries* ts, const char* key,
                                                  const char* value);
MSMCTL_API msm_status msm_timeseries_write_csv(const msm_timeseries* ts, const char* path);
MSMCTL_API msm_status msm_timeseries_read_csv(const char* path, msm_timeseries** out);
MSMCTL_API void msm_timeseries_free(msm_timeseries* ts);

/* ---------------- config ---------------- */

MSMCTL_API msm_status msm_config_load(const char* path, msm_config** out);
MSMCTL_API msm_status msm_config_parse(const char* text, msm_config** out);
/* Canonical text form; free with msm_string_free. */
MSMCTL_API msm_status msm_config_serialize(const msm_config* cfg, char** out);
MSMCTL_API int msm_config_has(const msm_config* cfg, const char* section, const char* key);
MSMCTL_API msm_status msm_config_get_double(const msm_config* cfg, const char* section,
                                            const char* key, double* out);
MSMCTL_API msm_status msm_config_get_string(const msm_config* cfg, const char* section,
                                            const char* key, char** out);
MSMCTL_API msm_status msm_config_set(msm_config* cfg, const char* section,
                                     const char* key, const char* value);
MSMCTL_API void msm_config_free(msm_config* cfg);

/* ---------------- reference generation and closed-loop scenarios ------- */

/* Builds the reference named by ref_section ([type, amplitude, frequency_hz,
 * offset, ...]); duration_s/sample_rate_hz are taken from ref_section when
 * present, else from run_section. */
MSMCTL_API msm_status msm_make_reference(const msm_config* cfg, const char* ref_section,
                                         const char* run_section, msm_timeseries** out);

/* Runs the [run]/[reference]/[plant]/[controller]/[compensator]/[filter]/
 * [noise] scenario described by cfg and returns the channel record. */
MSMCTL_API msm_status msm_scenario_run(const msm_config* cfg, msm_timeseries** out);

/* ---------------- ident ---------------- */

MSMCTL_API msm_status msm_frf_new(msm_frf** out);
MSMCTL_API msm_status msm_frf_add_record(msm_frf* frf, double frequency_hz,
                                         double sample_rate_hz, const double* u,
                                         const double* y, size_t n);
MSMCTL_API size_t msm_frf_record_count(const msm_frf* frf);
/* Arrays must hold record_count() entries. */
MSMCTL_API msm_status msm_frf_estimate(const msm_frf* frf, double* frequency_hz,
                                       double* re, double* im);
MSMCTL_API void msm_frf_free(msm_frf* frf);

/* Fits b e^{-ds} / (s^2 + 2 zeta wn s + wn^2) to FRF points by weighted
 * nonlinear least squares. */
MSMCTL_API msm_status msm_fit_sos_delay(const double* frequency_hz, const double* re,
                                        const double* im, size_t n, msm_tf** out,
                                        double* residual);

/* Nonnegative weight fit over fixed operator shapes. rho must hold n_ops. */
MSMCTL_API msm_status msm_fit_kp_weights(const double* u, const double* y, size_t n,
                                         const double* delta, const double* w,
                                         const double* m, const double* gamma,
                                         size_t n_ops, double* rho, double* rms);

/* Shape search wrapped around weight fits; lowpass_cutoff_hz = 0 disables
 * the output prefilter. */
MSMCTL_API msm_status msm_fit_kp_shapes(const double* u, const double* y, size_t n,
                                        size_t n_operators, double lowpass_cutoff_hz,
                                        double sample_rate_hz, msm_kp_model** out,
                                        double* rms);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MSMCTL_H */
