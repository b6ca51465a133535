#include "qpsj/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "qpsj/error.hpp"
#include "qpsj/units.hpp"

namespace qpsj {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + p.string());
}

ordered_json solver_json(const SolverConfig& c) {
  return {{"reltol", c.reltol},
          {"abstol_v_mV", c.abstol_v},
          {"abstol_i_uA", c.abstol_i},
          {"max_newton_iters", c.max_newton_iters},
          {"gmin", c.gmin},
          {"method", c.method == IntegrationMethod::Trapezoidal ? "trapezoidal" : "backward-euler"},
          {"max_halvings", c.max_halvings},
          {"max_internal_step_ps", c.max_internal_step}};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// Every current channel gets its own spike train.
std::vector<SpikeTrain> detect_all(const WaveformSet& w, const DetectorConfig& cfg) {
  std::vector<SpikeTrain> out;
  for (const auto& name : w.names) {
    if (name.rfind("i(", 0) == 0) out.push_back(detect_pulses(w, name, cfg));
  }
  return out;
}

void export_spikes(const std::vector<SpikeTrain>& trains, const fs::path& path) {
  std::ostringstream s;
  s << "channel,t_peak,charge,width,t_start,t_end\n";
  for (const auto& t : trains) {
    std::ostringstream one;
    export_csv(t, one);
    const std::string body = one.str();
    s << body.substr(body.find('\n') + 1);
  }
  write_file(path, s.str());
}

}  // namespace

fs::path default_out_dir() {
  if (const char* env = std::getenv("QPSJ_OUT_DIR"); env && *env) return env;
  return "qpsj_out";
}

long pulses_before(const SourceWaveform& src, double t) { return src.edges_before(t); }

DetectorConfig neuron_output_detector() {
  DetectorConfig c;
  c.min_height = 0.05;
  return c;
}

DetectorConfig neuron_input_detector() {
  DetectorConfig c;
  c.min_separation = 10.0;
  c.min_height = 0.005;
  return c;
}

DetectorConfig synapse_detector() {
  DetectorConfig c;
  c.min_height = 0.05;
  return c;
}

DetectorConfig multistate_detector() {
  DetectorConfig c;
  c.min_separation = 40.0;
  c.min_height = 0.05;
  return c;
}

ScenarioMetrics measure(const WaveformSet& w, const std::string& channel, const DetectorConfig& cfg,
                        long input_pulses) {
  ScenarioMetrics m;
  m.input_pulses = input_pulses;
  const SpikeTrain train = detect_pulses(w, channel, cfg);
  m.events = static_cast<long>(train.size());
  for (const auto& ev : train.events) {
    const double r = ev.charge / kTwoE;
    const long mult = std::lround(r);
    m.quanta += mult;
    m.event_charges.push_back(r);
    if (mult > 0) m.worst_residual = std::max(m.worst_residual, std::abs(r - mult) / mult);
  }
  return m;
}

// ------------------------------------------------------------------ sim

int cmd_sim(const SimOptions& opt, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  Circuit c;
  std::string text;
  try {
    text = read_file(opt.netlist);
    c = elaborate(parse_netlist(text));
    if (opt.tstep > 0.0) c.tran.tstep = opt.tstep;
    if (opt.tstop > 0.0) c.tran.tstop = opt.tstop;
    if (!(c.tran.tstep > 0.0 && c.tran.tstop > c.tran.tstep)) {
      throw std::invalid_argument("require 0 < tstep < tstop");
    }
    opt.solver.validate();
  } catch (const ParseError& e) {
    err << opt.netlist.string() << ": " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << opt.netlist.string() << ": " << e.what() << '\n';
    return kExitInput;
  }

  WaveformSet w;
  TranStats stats;
  try {
    w = tran(c, c.tran.tstep, c.tran.tstop, opt.solver, &stats, c.tran.tstart);
  } catch (const ConvergenceError& e) {
    err << "convergence failure: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const std::exception& e) {
    err << "simulation failed: " << e.what() << '\n';
    return kExitConvergence;
  }

  try {
    const fs::path dir = opt.out_dir.empty() ? default_out_dir() : opt.out_dir;
    fs::create_directories(dir);
    export_csv(w, dir / "waveforms.csv");
    const auto trains = detect_all(w, DetectorConfig{});
    export_spikes(trains, dir / "spikes.csv");
    std::vector<std::string> outputs{"waveforms.csv", "spikes.csv"};
    if (opt.plot) {
      write_file(dir / "waveforms.gp", plot_script(w, "waveforms.csv"));
      outputs.push_back("waveforms.gp");
    }
    outputs.push_back("manifest.json");
    ordered_json m;
    m["tool"] = "qpsjsim";
    m["version"] = kVersion;
    m["command"] = "sim";
    m["arguments"] = {{"netlist", opt.netlist.string()},
                      {"tstep_ps", c.tran.tstep},
                      {"tstop_ps", c.tran.tstop},
                      {"plot", opt.plot}};
    m["netlist"] = text;
    m["solver"] = solver_json(opt.solver);
    m["outputs"] = outputs;
    m["deterministic"] = true;
    m["stats"] = {{"accepted_steps", stats.accepted_steps},
                  {"newton_iterations", stats.newton_iterations},
                  {"halvings", stats.halvings},
                  {"frozen_start", stats.frozen_start}};
    m["wall_time_s"] = seconds_since(t0);
    write_file(dir / "manifest.json", m.dump(2) + "\n");
    out << "wrote " << w.size() << " samples x " << w.names.size() << " channels to "
        << dir.string() << '\n';
    for (const auto& t : trains) {
      if (!t.events.empty()) out << "  " << t.channel << ": " << t.size() << " pulses\n";
    }
  } catch (const std::exception& e) {
    err << "output failed: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}

// --------------------------------------------------------------- figures

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig2",  "fig4a", "fig4b", "fig6a", "fig6b",
                                            "fig6c", "fig6d", "fig6",  "fig8",  "fig9"};
  return ids;
}

namespace {

struct Run {
  NetlistAst ast;
  Circuit circuit;
  WaveformSet w;
};

Run simulate(NetlistAst ast) {
  Run r;
  r.ast = std::move(ast);
  r.circuit = elaborate(r.ast);
  r.w = tran(r.circuit);
  return r;
}

void save_run(const Run& r, const fs::path& dir, const std::vector<SpikeTrain>& trains) {
  fs::create_directories(dir);
  write_file(dir / "netlist.cir", write_netlist(r.ast));
  export_csv(r.w, dir / "waveforms.csv");
  export_spikes(trains, dir / "spikes.csv");
  write_file(dir / "waveforms.gp", plot_script(r.w, "waveforms.csv"));
}

const SourceWaveform& source_of(const Circuit& c, const std::string& name) {
  return c.devices.at(static_cast<std::size_t>(c.device_index(name))).source();
}

// Quanta per input pulse of the multi-state synapse in state k.
double multistate_quanta(int state, const fs::path& dir, FigureReport& rep, const std::string& tag) {
  SynapseMultiParams p;
  p.state = state;
  const Run r = simulate(build_multistate_synapse(p));
  const long pulses = pulses_before(source_of(r.circuit, "vin"), r.circuit.tran.tstop);
  const auto m = measure(r.w, kSynapseOutput, multistate_detector(), pulses);
  save_run(r, dir, {detect_pulses(r.w, kSynapseOutput, multistate_detector())});
  const double per = static_cast<double>(m.quanta) / static_cast<double>(pulses);
  rep.summary.push_back(tag + ": Ic(J2) = " + fixed(p.ic_j2_states[state] * 1e6, 0) + " uA -> " +
                        std::to_string(m.quanta) + " quanta over " + std::to_string(pulses) +
                        " inputs (" + fixed(per, 2) + " per input)");
  rep.metrics[tag + ".quanta_per_input"] = per;
  return per;
}

FigureReport figure_network(const std::string& id, const fs::path& dir,
                            std::vector<std::vector<int>> weights) {
  FigureReport rep;
  rep.id = id;
  NetworkSpec spec;
  spec.weights = std::move(weights);
  spec.input_periods = {100e-12, 80e-12, 120e-12};
  spec.tstop = 2400e-12;
  const Run r = simulate(build_network(spec));
  std::vector<long> pulses(spec.n_inputs);
  for (int i = 0; i < spec.n_inputs; ++i) {
    pulses[i] = pulses_before(source_of(r.circuit, "vin_" + std::to_string(i + 1)), r.circuit.tran.tstop);
  }
  std::vector<SpikeTrain> trains;
  rep.passed = true;
  for (int o = 0; o < spec.n_outputs; ++o) {
    long delivered = 0;
    std::string row;
    for (int i = 0; i < spec.n_inputs; ++i) {
      if (spec.weights[o][i]) delivered += pulses[i];
      row += (i ? " " : "") + std::to_string(spec.weights[o][i]);
    }
    const long expected = delivered / spec.neuron.n_threshold;
    const std::string ch = network_output_channel(o + 1);
    const auto m = measure(r.w, ch, neuron_output_detector(), delivered);
    trains.push_back(detect_pulses(r.w, ch, neuron_output_detector()));
    const bool ok = std::abs(m.events - expected) <= 1;
    rep.passed = rep.passed && ok;
    rep.summary.push_back("neuron " + std::to_string(o + 1) + " weights [" + row + "]: " +
                          std::to_string(delivered) + " weighted input pulses -> " +
                          std::to_string(m.events) + " firings (expected " +
                          std::to_string(expected) + ")" + (ok ? "" : "  MISMATCH"));
    rep.metrics["neuron" + std::to_string(o + 1) + ".firings"] = static_cast<double>(m.events);
    rep.metrics["neuron" + std::to_string(o + 1) + ".expected"] = static_cast<double>(expected);
  }
  save_run(r, dir, trains);
  return rep;
}

}  // namespace

FigureReport run_figure(const std::string& id, const fs::path& out_dir) {
  const fs::path dir = out_dir / id;
  FigureReport rep;
  rep.id = id;
  if (id == "fig2") {
    NeuronParams p;
    p.tstop = 2600e-12;
    const Run r = simulate(build_neuron(p));
    const long pulses = pulses_before(source_of(r.circuit, "vin"), r.circuit.tran.tstop);
    const auto out = measure(r.w, kNeuronOutput, neuron_output_detector(), pulses);
    const auto in = measure(r.w, "i(q0)", neuron_input_detector(), pulses);
    save_run(r, dir, {detect_pulses(r.w, kNeuronOutput, neuron_output_detector()),
                      detect_pulses(r.w, "i(q0)", neuron_input_detector())});
    const long expected = pulses / p.n_threshold;
    bool charge_ok = !out.event_charges.empty();
    for (double q : out.event_charges) {
      charge_ok = charge_ok && std::abs(q - p.n_threshold) <= 0.01 * p.n_threshold;
    }
    rep.passed = out.events == expected && charge_ok && in.quanta == pulses;
    rep.summary.push_back("input pulses: " + std::to_string(pulses) + ", each moving " +
                          fixed(in.event_charges.empty() ? 0.0 : in.event_charges.front(), 4) +
                          " x 2e through Q0");
    rep.summary.push_back("firings: " + std::to_string(out.events) + " (expected " +
                          std::to_string(expected) + ")");
    for (std::size_t k = 0; k < out.event_charges.size(); ++k) {
      rep.summary.push_back("  firing " + std::to_string(k + 1) + ": " +
                            fixed(out.event_charges[k], 4) + " x 2e");
    }
    if (rep.passed) {
      rep.summary.push_back("fires every " + std::to_string(p.n_threshold) + "th input; " +
                            std::to_string(2 * p.n_threshold) + "e per firing");
    }
    rep.metrics = {{"input_pulses", static_cast<double>(pulses)},
                   {"firings", static_cast<double>(out.events)},
                   {"worst_firing_residual", out.worst_residual}};
  } else if (id == "fig4a" || id == "fig4b") {
    SynapseBinaryParams p;
    p.state = id == "fig4a" ? 0 : 1;
    const Run r = simulate(build_binary_synapse(p));
    const long pulses = pulses_before(source_of(r.circuit, "vin"), r.circuit.tran.tstop);
    const auto m = measure(r.w, kSynapseOutput, synapse_detector(), pulses);
    save_run(r, dir, {detect_pulses(r.w, kSynapseOutput, synapse_detector())});
    const long expected = p.state == 0 ? pulses : 0;
    rep.passed = m.events == expected && m.quanta == expected && m.worst_residual < 0.01;
    rep.summary.push_back("Ic(J1) = " + fixed(p.ic_states[p.state] * 1e6, 0) + " uA, " +
                          std::to_string(pulses) + " input pulses");
    rep.summary.push_back(std::to_string(m.events) + " output pulses" +
                          (p.state == 0 ? " (weight 1)" : " (weight 0)"));
    if (m.events > 0) {
      rep.summary.push_back("worst charge deviation from 2e: " + fixed(100.0 * m.worst_residual, 3) + "%");
    }
    rep.metrics = {{"input_pulses", static_cast<double>(pulses)},
                   {"output_pulses", static_cast<double>(m.events)}};
  } else if (id.size() == 5 && id.rfind("fig6", 0) == 0 && id[4] >= 'a' && id[4] <= 'd') {
    const int state = id[4] - 'a';
    const double per = multistate_quanta(state, dir, rep, id);
    rep.passed = state == 3 ? per == 0.0 : true;
  } else if (id == "fig6") {
    std::vector<double> per;
    for (int s = 0; s < 4; ++s) {
      const std::string tag = std::string("fig6") + static_cast<char>('a' + s);
      per.push_back(multistate_quanta(s, dir / tag, rep, tag));
    }
    bool strict = true;
    for (std::size_t k = 1; k < per.size(); ++k) {
      if (per[k - 1] > 0.0 ? !(per[k] < per[k - 1]) : per[k] != 0.0) strict = false;
    }
    rep.passed = strict && per.back() == 0.0;
    rep.summary.push_back(rep.passed ? "pulse counts decrease monotonically with Ic(J2), reaching 0"
                                     : "pulse counts NOT monotone in Ic(J2)");
  } else if (id == "fig8") {
    rep = figure_network(id, dir, {{1, 1, 1}, {0, 1, 1}});
  } else if (id == "fig9") {
    rep = figure_network(id, dir, {{1, 0, 1}, {0, 0, 1}});
  } else {
    throw std::invalid_argument("unknown figure id '" + id + "'");
  }
  fs::create_directories(dir);
  std::string text;
  for (const auto& line : rep.summary) text += line + "\n";
  text += std::string("result: ") + (rep.passed ? "PASS" : "FAIL") + "\n";
  write_file(dir / "summary.txt", text);
  return rep;
}

int cmd_figure(const std::string& id, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  const auto& ids = figure_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
    err << "unknown figure id '" << id << "'; expected one of:";
    for (const auto& k : ids) err << ' ' << k;
    err << '\n';
    return kExitInput;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = out_dir.empty() ? default_out_dir() : out_dir;
  FigureReport rep;
  try {
    rep = run_figure(id, dir);
  } catch (const ConvergenceError& e) {
    err << "convergence failure: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const std::exception& e) {
    err << id << ": " << e.what() << '\n';
    return kExitInput;
  }
  out << id << '\n';
  for (const auto& line : rep.summary) out << "  " << line << '\n';
  out << "  result: " << (rep.passed ? "PASS" : "FAIL") << '\n';

  ordered_json m;
  m["tool"] = "qpsjsim";
  m["version"] = kVersion;
  m["command"] = "figure";
  m["arguments"] = {{"id", id}, {"out", dir.string()}};
  m["solver"] = solver_json(SolverConfig{});
  m["metrics"] = rep.metrics;
  m["passed"] = rep.passed;
  m["deterministic"] = true;
  m["wall_time_s"] = seconds_since(t0);
  try {
    write_file(dir / id / "manifest.json", m.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- sweeps

std::vector<double> parse_value_list(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream s(spec);
    std::string tok;
    while (std::getline(s, tok, ':')) parts.push_back(parse_value(tok));
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
      throw std::invalid_argument("range must be start:stop:step with step > 0 and stop >= start");
    }
    const long n = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    if (n > 100000) throw std::invalid_argument("range has too many points");
    for (long k = 0; k <= n; ++k) out.push_back(parts[0] + static_cast<double>(k) * parts[2]);
  } else {
    std::stringstream s(spec);
    std::string tok;
    while (std::getline(s, tok, ',')) out.push_back(parse_value(tok));
  }
  if (out.empty()) throw std::invalid_argument("empty value list");
  return out;
}

namespace {

SweepRow sweep_point(const SweepOptions& opt, double value) {
  SweepRow row;
  row.value = value;
  try {
    if (opt.templ == "neuron" && opt.param == "n") {
      NeuronParams p;
      const double rounded = std::round(value);
      if (rounded != value || value < 1) throw std::invalid_argument("n must be a positive integer");
      p.n_threshold = static_cast<int>(value);
      p.tstop = p.input.delay + p.input.period * (2 * p.n_threshold + 1) + 100e-12;
      const Run r = simulate(build_neuron(p));
      const long pulses = pulses_before(source_of(r.circuit, "vin"), r.circuit.tran.tstop);
      const SpikeTrain t = detect_pulses(r.w, kNeuronOutput, neuron_output_detector());
      row.metrics["input_pulses"] = static_cast<double>(pulses);
      row.metrics["firings"] = static_cast<double>(t.size());
      row.metrics["input_period_ps"] = p.input.period * scale::second;
      if (t.size() >= 2) {
        row.metrics["firing_period_ps"] =
            (t.events.back().t_peak - t.events.front().t_peak) / static_cast<double>(t.size() - 1);
      }
    } else if (opt.templ == "binary" && opt.param == "ic") {
      SynapseBinaryParams p;
      p.ic_states = {value, value + 100e-6};
      p.state = 0;
      const Run r = simulate(build_binary_synapse(p));
      const long pulses = pulses_before(source_of(r.circuit, "vin"), r.circuit.tran.tstop);
      const auto m = measure(r.w, kSynapseOutput, synapse_detector(), pulses);
      row.metrics["input_pulses"] = static_cast<double>(pulses);
      row.metrics["output_pulses"] = static_cast<double>(m.events);
      row.metrics["pulses_per_input"] = static_cast<double>(m.events) / static_cast<double>(pulses);
    } else if (opt.templ == "multistate" && opt.param == "ic_j2") {
      SynapseMultiParams p;
      p.ic_j2_states = {value};
      p.state = 0;
      const Run r = simulate(build_multistate_synapse(p));
      const long pulses = pulses_before(source_of(r.circuit, "vin"), r.circuit.tran.tstop);
      const auto m = measure(r.w, kSynapseOutput, multistate_detector(), pulses);
      row.metrics["input_pulses"] = static_cast<double>(pulses);
      row.metrics["quanta"] = static_cast<double>(m.quanta);
      row.metrics["quanta_per_input"] = static_cast<double>(m.quanta) / static_cast<double>(pulses);
    } else if (opt.templ == "damping" && opt.param == "l") {
      constexpr double kVc = 0.7, kR = 10.0;  // mV, kOhm
      row.metrics["vc_mV"] = kVc;
      row.metrics["r_kohm"] = kR;
      row.metrics["beta_l"] = damping_parameter(kVc, value * scale::henry, kR);
    } else {
      throw std::invalid_argument("unsupported sweep " + opt.templ + "/" + opt.param);
    }
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepOptions& opt) {
  std::vector<SweepRow> rows(opt.values.size());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n = std::min<unsigned>(opt.threads > 0 ? static_cast<unsigned>(opt.threads) : hw,
                                        static_cast<unsigned>(std::max<std::size_t>(1, rows.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < rows.size();) rows[k] = sweep_point(opt, opt.values[k]);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
  static const std::set<std::pair<std::string, std::string>> known{
      {"neuron", "n"}, {"binary", "ic"}, {"multistate", "ic_j2"}, {"damping", "l"}};
  if (!known.count({opt.templ, opt.param})) {
    err << "unsupported sweep '" << opt.templ << "' / '" << opt.param
        << "'; expected neuron/n, binary/ic, multistate/ic_j2 or damping/l\n";
    return kExitInput;
  }
  if (opt.values.empty()) {
    err << "sweep needs at least one value\n";
    return kExitInput;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_sweep(opt);

  std::set<std::string> keys;
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.metrics) keys.insert(k);
  }
  std::ostringstream csv;
  csv << "template,param,value,status";
  for (const auto& k : keys) csv << ',' << csv_field(k);
  csv << ",error\n";
  for (const auto& r : rows) {
    csv << opt.templ << ',' << opt.param << ',' << format_double(r.value) << ','
        << (r.ok ? "ok" : "failed");
    for (const auto& k : keys) {
      csv << ',';
      if (auto it = r.metrics.find(k); it != r.metrics.end()) csv << format_double(it->second);
    }
    csv << ',' << csv_field(r.error) << '\n';
  }
  const fs::path dir = opt.out_dir.empty() ? default_out_dir() : opt.out_dir;
  try {
    fs::create_directories(dir);
    write_file(dir / "sweep.csv", csv.str());
    ordered_json m;
    m["tool"] = "qpsjsim";
    m["version"] = kVersion;
    m["command"] = "sweep";
    m["arguments"] = {{"template", opt.templ}, {"param", opt.param}, {"values", opt.values},
                      {"threads", opt.threads}};
    m["solver"] = solver_json(SolverConfig{});
    m["outputs"] = {"sweep.csv", "manifest.json"};
    m["deterministic"] = true;
    m["wall_time_s"] = seconds_since(t0);
    write_file(dir / "manifest.json", m.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitInput;
  }
  out << csv.str();
  long failed = 0;
  for (const auto& r : rows) failed += r.ok ? 0 : 1;
  if (failed) err << failed << " of " << rows.size() << " sweep points failed\n";
  return kExitOk;
}

}  // namespace qpsj
