#include "qpsj/qpsj.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "qpsj/analysis.hpp"
#include "qpsj/engine.hpp"
#include "qpsj/error.hpp"
#include "qpsj/harness.hpp"
#include "qpsj/netlist.hpp"
#include "qpsj/units.hpp"

struct qpsj_circuit {
  qpsj::NetlistAst ast;
  qpsj::Circuit circuit;
};

struct qpsj_waveforms {
  qpsj::WaveformSet w;
};

struct qpsj_spikes {
  qpsj::SpikeTrain train;
};

namespace {

thread_local std::string g_last_error;

qpsj_status fail(qpsj_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Maps in-flight exceptions onto status codes.
qpsj_status translate() {
  try {
    throw;
  } catch (const qpsj::ParseError& e) {
    return fail(QPSJ_ERR_PARSE, e.what());
  } catch (const qpsj::ElaborationError& e) {
    return fail(QPSJ_ERR_ELABORATE, e.what());
  } catch (const qpsj::ConvergenceError& e) {
    return fail(QPSJ_ERR_CONVERGENCE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(QPSJ_ERR_INTERNAL, "out of memory");
  } catch (const std::invalid_argument& e) {
    return fail(QPSJ_ERR_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(QPSJ_ERR_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(QPSJ_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(QPSJ_ERR_INTERNAL, "unknown error");
  }
}

qpsj::SolverConfig to_cpp(const qpsj_solver_config& c) {
  qpsj::SolverConfig s;
  s.reltol = c.reltol;
  s.abstol_v = c.abstol_v;
  s.abstol_i = c.abstol_i;
  s.max_newton_iters = c.max_newton_iters;
  s.gmin = c.gmin;
  s.method = c.method == QPSJ_BACKWARD_EULER ? qpsj::IntegrationMethod::BackwardEuler
                                             : qpsj::IntegrationMethod::Trapezoidal;
  s.max_halvings = c.max_halvings;
  s.max_internal_step = c.max_internal_step;
  return s;
}

template <class F>
int run_command(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return qpsj::kExitInput;
  }
}

}  // namespace

extern "C" {

const char* qpsj_version(void) { return "1.0.0"; }

const char* qpsj_last_error(void) { return g_last_error.c_str(); }

const char* qpsj_status_string(qpsj_status s) {
  switch (s) {
    case QPSJ_OK: return "ok";
    case QPSJ_ERR_ARGUMENT: return "invalid argument";
    case QPSJ_ERR_PARSE: return "parse error";
    case QPSJ_ERR_ELABORATE: return "elaboration error";
    case QPSJ_ERR_CONVERGENCE: return "convergence failure";
    case QPSJ_ERR_IO: return "i/o error";
    case QPSJ_ERR_NOT_FOUND: return "not found";
    case QPSJ_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void qpsj_solver_defaults(qpsj_solver_config* cfg) {
  if (!cfg) return;
  const qpsj::SolverConfig d;
  cfg->reltol = d.reltol;
  cfg->abstol_v = d.abstol_v;
  cfg->abstol_i = d.abstol_i;
  cfg->max_newton_iters = d.max_newton_iters;
  cfg->gmin = d.gmin;
  cfg->method = QPSJ_TRAPEZOIDAL;
  cfg->max_halvings = d.max_halvings;
  cfg->max_internal_step = d.max_internal_step;
}

void qpsj_detector_defaults(qpsj_detector_config* cfg) {
  if (!cfg) return;
  const qpsj::DetectorConfig d;
  cfg->threshold_fraction = d.threshold_fraction;
  cfg->min_separation = d.min_separation;
  cfg->baseline = d.baseline;
  cfg->min_height = d.min_height;
}

qpsj_status qpsj_circuit_parse(const char* text, qpsj_circuit** out) {
  if (!text || !out) return fail(QPSJ_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  try {
    auto c = std::make_unique<qpsj_circuit>();
    c->ast = qpsj::parse_netlist(text);
    c->circuit = qpsj::elaborate(c->ast);
    *out = c.release();
    return QPSJ_OK;
  } catch (...) {
    return translate();
  }
}

qpsj_status qpsj_circuit_load(const char* path, qpsj_circuit** out) {
  if (!path || !out) return fail(QPSJ_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  std::ifstream f(path, std::ios::binary);
  if (!f) return fail(QPSJ_ERR_IO, std::string("cannot open ") + path);
  std::ostringstream s;
  s << f.rdbuf();
  return qpsj_circuit_parse(s.str().c_str(), out);
}

void qpsj_circuit_free(qpsj_circuit* c) { delete c; }

size_t qpsj_circuit_node_count(const qpsj_circuit* c) {
  return c ? static_cast<size_t>(c->circuit.node_count) : 0;
}

size_t qpsj_circuit_device_count(const qpsj_circuit* c) { return c ? c->circuit.devices.size() : 0; }

qpsj_status qpsj_circuit_write(const qpsj_circuit* c, char* buf, size_t cap, size_t* needed) {
  if (!c) return fail(QPSJ_ERR_ARGUMENT, "null circuit");
  try {
    const std::string text = qpsj::write_netlist(c->ast);
    if (needed) *needed = text.size() + 1;
    if (buf && cap > 0) {
      const size_t n = std::min(cap - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
    return QPSJ_OK;
  } catch (...) {
    return translate();
  }
}

qpsj_status qpsj_simulate(const qpsj_circuit* c, const qpsj_solver_config* cfg, double tstep,
                          double tstop, qpsj_waveforms** out) {
  if (!c || !out) return fail(QPSJ_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  try {
    const qpsj::SolverConfig sc = cfg ? to_cpp(*cfg) : qpsj::SolverConfig{};
    sc.validate();
    const double h = tstep > 0.0 ? tstep : c->circuit.tran.tstep;
    const double stop = tstop > 0.0 ? tstop : c->circuit.tran.tstop;
    auto w = std::make_unique<qpsj_waveforms>();
    w->w = qpsj::tran(c->circuit, h, stop, sc, nullptr, c->circuit.tran.tstart);
    *out = w.release();
    return QPSJ_OK;
  } catch (...) {
    return translate();
  }
}

void qpsj_waveforms_free(qpsj_waveforms* w) { delete w; }

size_t qpsj_waveforms_samples(const qpsj_waveforms* w) { return w ? w->w.size() : 0; }

size_t qpsj_waveforms_channels(const qpsj_waveforms* w) { return w ? w->w.names.size() : 0; }

const char* qpsj_waveforms_channel_name(const qpsj_waveforms* w, size_t idx) {
  if (!w || idx >= w->w.names.size()) return nullptr;
  return w->w.names[idx].c_str();
}

const double* qpsj_waveforms_time(const qpsj_waveforms* w) { return w ? w->w.time.data() : nullptr; }

const double* qpsj_waveforms_channel(const qpsj_waveforms* w, const char* name) {
  if (!w || !name || !w->w.has(name)) return nullptr;
  return w->w.channel(name).data();
}

qpsj_status qpsj_waveforms_export_csv(const qpsj_waveforms* w, const char* path) {
  if (!w || !path) return fail(QPSJ_ERR_ARGUMENT, "null argument");
  try {
    qpsj::export_csv(w->w, std::filesystem::path(path));
    return QPSJ_OK;
  } catch (...) {
    const qpsj_status s = translate();
    return s == QPSJ_ERR_INTERNAL ? QPSJ_ERR_IO : s;
  }
}

qpsj_status qpsj_detect_pulses(const qpsj_waveforms* w, const char* channel,
                               const qpsj_detector_config* cfg, qpsj_spikes** out) {
  if (!w || !channel || !out) return fail(QPSJ_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  if (!w->w.has(channel)) return fail(QPSJ_ERR_NOT_FOUND, std::string("no channel ") + channel);
  try {
    qpsj::DetectorConfig d;
    if (cfg) {
      d.threshold_fraction = cfg->threshold_fraction;
      d.min_separation = cfg->min_separation;
      d.baseline = cfg->baseline;
      d.min_height = cfg->min_height;
    }
    auto s = std::make_unique<qpsj_spikes>();
    s->train = qpsj::detect_pulses(w->w, channel, d);
    *out = s.release();
    return QPSJ_OK;
  } catch (...) {
    return translate();
  }
}

void qpsj_spikes_free(qpsj_spikes* s) { delete s; }

size_t qpsj_spikes_count(const qpsj_spikes* s) { return s ? s->train.size() : 0; }

qpsj_status qpsj_spikes_event(const qpsj_spikes* s, size_t idx, qpsj_pulse_event* out) {
  if (!s || !out) return fail(QPSJ_ERR_ARGUMENT, "null argument");
  if (idx >= s->train.size()) return fail(QPSJ_ERR_ARGUMENT, "event index out of range");
  const auto& e = s->train.events[idx];
  *out = {e.t_peak, e.charge, e.width, e.t_start, e.t_end};
  return QPSJ_OK;
}

qpsj_status qpsj_spikes_export_csv(const qpsj_spikes* s, const char* path) {
  if (!s || !path) return fail(QPSJ_ERR_ARGUMENT, "null argument");
  try {
    qpsj::export_csv(s->train, std::filesystem::path(path));
    return QPSJ_OK;
  } catch (...) {
    const qpsj_status st = translate();
    return st == QPSJ_ERR_INTERNAL ? QPSJ_ERR_IO : st;
  }
}

double qpsj_two_e(void) { return qpsj::kTwoE; }

double qpsj_phi0(void) { return qpsj::kPhi0; }

double qpsj_switching_energy(double vc) { return qpsj::switching_energy(vc); }

double qpsj_neuron_firing_energy(int n_threshold, double vc) {
  return qpsj::neuron_firing_energy(n_threshold, vc);
}

qpsj_status qpsj_damping_parameter(double vc, double l, double r, double* out) {
  if (!out) return fail(QPSJ_ERR_ARGUMENT, "null argument");
  try {
    *out = qpsj::damping_parameter(vc, l, r);
    return QPSJ_OK;
  } catch (...) {
    return translate();
  }
}

int qpsj_cmd_sim(const char* netlist, double tstep, double tstop, const char* out_dir,
                 const qpsj_solver_config* cfg, int plot) {
  return run_command([&] {
    if (!netlist) throw std::invalid_argument("no netlist given");
    qpsj::SimOptions o;
    o.netlist = netlist;
    o.tstep = tstep;
    o.tstop = tstop;
    if (out_dir) o.out_dir = out_dir;
    if (cfg) o.solver = to_cpp(*cfg);
    o.plot = plot != 0;
    return qpsj::cmd_sim(o, std::cout, std::cerr);
  });
}

int qpsj_cmd_figure(const char* id, const char* out_dir) {
  return run_command([&] {
    if (!id) throw std::invalid_argument("no figure id given");
    return qpsj::cmd_figure(id, out_dir ? out_dir : "", std::cout, std::cerr);
  });
}

int qpsj_cmd_sweep(const char* templ, const char* param, const char* values, const char* out_dir,
                   int threads) {
  return run_command([&] {
    if (!templ || !param || !values) throw std::invalid_argument("sweep needs template, param and values");
    qpsj::SweepOptions o;
    o.templ = templ;
    o.param = param;
    o.values = qpsj::parse_value_list(values);
    if (out_dir) o.out_dir = out_dir;
    o.threads = threads;
    return qpsj::cmd_sweep(o, std::cout, std::cerr);
  });
}

const char* qpsj_figure_ids(void) {
  static const std::string ids = [] {
    std::string s;
    for (const auto& id : qpsj::figure_ids()) s += (s.empty() ? "" : " ") + id;
    return s;
  }();
  return ids.c_str();
}

}  // extern "C"
