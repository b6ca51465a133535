#ifndef QPSJ_QPSJ_H
#define QPSJ_QPSJ_H

/* C interface to the qpsj simulator.
 *
 * Quantities use the internal scaled units: mV, uA, kOhm, ps, fF, nH, aC, zJ.
 * Functions return a qpsj_status; on failure qpsj_last_error() describes the
 * problem for the calling thread. Handles are opaque and owned by the caller. */

#include <stddef.h>

#if defined(_WIN32)
#define QPSJ_API __declspec(dllexport)
#else
#define QPSJ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qpsj_status {
  QPSJ_OK = 0,
  QPSJ_ERR_ARGUMENT = 1,
  QPSJ_ERR_PARSE = 2,
  QPSJ_ERR_ELABORATE = 3,
  QPSJ_ERR_CONVERGENCE = 4,
  QPSJ_ERR_IO = 5,
  QPSJ_ERR_NOT_FOUND = 6,
  QPSJ_ERR_INTERNAL = 7
} qpsj_status;

typedef struct qpsj_circuit qpsj_circuit;
typedef struct qpsj_waveforms qpsj_waveforms;
typedef struct qpsj_spikes qpsj_spikes;

typedef enum qpsj_method { QPSJ_TRAPEZOIDAL = 0, QPSJ_BACKWARD_EULER = 1 } qpsj_method;

typedef struct qpsj_solver_config {
  double reltol;
  double abstol_v; /* mV */
  double abstol_i; /* uA */
  int max_newton_iters;
  double gmin;
  qpsj_method method;
  int max_halvings;
  double max_internal_step; /* ps, 0 = output step */
} qpsj_solver_config;

typedef struct qpsj_detector_config {
  double threshold_fraction;
  double min_separation; /* ps */
  double baseline;
  double min_height;
} qpsj_detector_config;

typedef struct qpsj_pulse_event {
  double t_peak, charge, width, t_start, t_end;
} qpsj_pulse_event;

QPSJ_API const char* qpsj_version(void);
QPSJ_API const char* qpsj_last_error(void);
QPSJ_API const char* qpsj_status_string(qpsj_status s);

QPSJ_API void qpsj_solver_defaults(qpsj_solver_config* cfg);
QPSJ_API void qpsj_detector_defaults(qpsj_detector_config* cfg);

/* Circuits */
QPSJ_API qpsj_status qpsj_circuit_parse(const char* text, qpsj_circuit** out);
QPSJ_API qpsj_status qpsj_circuit_load(const char* path, qpsj_circuit** out);
QPSJ_API void qpsj_circuit_free(qpsj_circuit* c);
QPSJ_API size_t qpsj_circuit_node_count(const qpsj_circuit* c);
QPSJ_API size_t qpsj_circuit_device_count(const qpsj_circuit* c);
/* Copies the normalized netlist text into buf (NUL-terminated, truncated to
 * cap). *needed receives the full length including the terminator. */
QPSJ_API qpsj_status qpsj_circuit_write(const qpsj_circuit* c, char* buf, size_t cap, size_t* needed);

/* Transient analysis; tstep/tstop <= 0 keep the netlist's .tran values and
 * cfg may be NULL for defaults. */
QPSJ_API qpsj_status qpsj_simulate(const qpsj_circuit* c, const qpsj_solver_config* cfg,
                                   double tstep, double tstop, qpsj_waveforms** out);

QPSJ_API void qpsj_waveforms_free(qpsj_waveforms* w);
QPSJ_API size_t qpsj_waveforms_samples(const qpsj_waveforms* w);
QPSJ_API size_t qpsj_waveforms_channels(const qpsj_waveforms* w);
QPSJ_API const char* qpsj_waveforms_channel_name(const qpsj_waveforms* w, size_t idx);
QPSJ_API const double* qpsj_waveforms_time(const qpsj_waveforms* w);
/* NULL when the channel does not exist. */
QPSJ_API const double* qpsj_waveforms_channel(const qpsj_waveforms* w, const char* name);
QPSJ_API qpsj_status qpsj_waveforms_export_csv(const qpsj_waveforms* w, const char* path);

/* Pulse detection */
QPSJ_API qpsj_status qpsj_detect_pulses(const qpsj_waveforms* w, const char* channel,
                                        const qpsj_detector_config* cfg, qpsj_spikes** out);
QPSJ_API void qpsj_spikes_free(qpsj_spikes* s);
QPSJ_API size_t qpsj_spikes_count(const qpsj_spikes* s);
QPSJ_API qpsj_status qpsj_spikes_event(const qpsj_spikes* s, size_t idx, qpsj_pulse_event* out);
QPSJ_API qpsj_status qpsj_spikes_export_csv(const qpsj_spikes* s, const char* path);

/* Physics helpers */
QPSJ_API double qpsj_two_e(void);
QPSJ_API double qpsj_phi0(void);
QPSJ_API double qpsj_switching_energy(double vc);
QPSJ_API double qpsj_neuron_firing_energy(int n_threshold, double vc);
QPSJ_API qpsj_status qpsj_damping_parameter(double vc, double l, double r, double* out);

/* Commands; return process exit codes (0 ok, 2 input error, 3 convergence
 * failure) and print to stdout / stderr. out_dir may be NULL for the default. */
QPSJ_API int qpsj_cmd_sim(const char* netlist, double tstep, double tstop, const char* out_dir,
                          const qpsj_solver_config* cfg, int plot);
QPSJ_API int qpsj_cmd_figure(const char* id, const char* out_dir);
/* values: "1,2,5" or "start:stop:step", SI units with suffixes. */
QPSJ_API int qpsj_cmd_sweep(const char* templ, const char* param, const char* values,
                            const char* out_dir, int threads);
/* Space-separated list of recognized figure ids. */
QPSJ_API const char* qpsj_figure_ids(void);

#ifdef __cplusplus
}
#endif

#endif
