#include "qpsj/templates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qpsj/units.hpp"

namespace qpsj {

namespace {

DeviceCard linear(DeviceKind kind, std::string name, std::string a, std::string b, double value) {
  DeviceCard c;
  c.kind = kind;
  c.name = std::move(name);
  c.nodes = {std::move(a), std::move(b)};
  c.params["value"] = value;
  return c;
}

DeviceCard dc_source(DeviceKind kind, std::string name, std::string a, std::string b, double v) {
  DeviceCard c;
  c.kind = kind;
  c.name = std::move(name);
  c.nodes = {std::move(a), std::move(b)};
  c.source.dc = v;
  return c;
}

DeviceCard pulse_source(std::string name, std::string a, std::string b, const PulseTrain& p,
                        double amplitude, double period) {
  DeviceCard c;
  c.kind = DeviceKind::VSource;
  c.name = std::move(name);
  c.nodes = {std::move(a), std::move(b)};
  c.source.pulse = true;
  c.source.args = {0.0, amplitude, p.delay, p.rise, p.rise, p.width, period};
  return c;
}

DeviceCard qpsj(std::string name, std::string a, std::string b, double vc, double rn, double ls) {
  DeviceCard c;
  c.kind = DeviceKind::Qpsj;
  c.name = std::move(name);
  c.nodes = {std::move(a), std::move(b)};
  c.params = {{"vc", vc}, {"rn", rn}, {"ls", ls}};
  return c;
}

DeviceCard jj(std::string name, std::string a, std::string b, double ic, double rn, double cj) {
  DeviceCard c;
  c.kind = DeviceKind::Jj;
  c.name = std::move(name);
  c.nodes = {std::move(a), std::move(b)};
  c.params = {{"ic", ic}, {"rn", rn}, {"cj", cj}};
  return c;
}

DeviceCard mjj(std::string name, std::string a, std::string b, const std::vector<double>& states,
               int state, double rn, double cj) {
  DeviceCard c;
  c.kind = DeviceKind::Mjj;
  c.name = std::move(name);
  c.nodes = {std::move(a), std::move(b)};
  c.states = states;
  c.params = {{"state", static_cast<double>(state)}, {"rn", rn}, {"cj", cj}};
  return c;
}

void check(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void validate_pulse(const PulseTrain& p) {
  check(p.amplitude >= 0.0, "input amplitude must be non-negative");
  check(p.delay >= 0.0 && p.rise > 0.0 && p.width > 0.0, "input pulse timing must be positive");
  check(p.period > 2.0 * p.rise + p.width, "input period must exceed the pulse length");
}

void add_tran(NetlistAst& ast, double tstep, double tstop) {
  check(tstep > 0.0 && tstop > tstep, "require 0 < tstep < tstop");
  ast.tran = TranDirective{tstep, tstop, 0.0, 0};
  ast.has_end = true;
}

// Charge on the asin branch of a blockaded junction at voltage v.
double blockade_charge(double v, double vc) {
  return si::two_e / (2.0 * std::numbers::pi) * std::asin(std::clamp(v / vc, -1.0, 1.0));
}

// Storage node, hold network and the N parallel output junctions of one
// neuron. Node names get `suffix`.
void add_neuron_core(NetlistAst& ast, const NeuronParams& p, const std::string& suffix, int inputs) {
  const std::string n1 = "n1" + suffix, n2 = "n2" + suffix, hold = "hold" + suffix;
  const double c = p.c_store > 0.0 ? p.c_store : storage_capacitance(p, inputs);
  ast.cards.push_back(linear(DeviceKind::Capacitor, "cstore" + suffix, n1, "0", c));
  ast.cards.push_back(linear(DeviceKind::Resistor, "rb" + suffix, n1, hold, p.rb));
  ast.cards.push_back(dc_source(DeviceKind::VSource, "vb" + suffix, hold, "0", p.vb));
  for (int k = 1; k <= p.n_threshold; ++k) {
    ast.cards.push_back(qpsj("qn" + std::to_string(k) + suffix, n1, n2, p.vc, p.rn_parallel, p.ls));
  }
  ast.cards.push_back(dc_source(DeviceKind::VSource, "vout" + suffix, n2, "0", p.vb - p.v_rest));
}

void add_binary_synapse(NetlistAst& ast, const SynapseBinaryParams& p, const std::string& in,
                        const std::string& out, const std::string& suffix, int state) {
  const std::string mid = "s" + suffix, a = "a" + suffix;
  ast.cards.push_back(linear(DeviceKind::Resistor, "r1" + suffix, in, mid, p.r1));
  ast.cards.push_back(linear(DeviceKind::Inductor, "l1" + suffix, mid, a, p.l1));
  ast.cards.push_back(mjj("j1" + suffix, a, "0", p.ic_states, state, p.rn_j1, p.cj_j1));
  ast.cards.push_back(dc_source(DeviceKind::ISource, "ib" + suffix, "0", a, p.ib));
  ast.cards.push_back(qpsj("q1" + suffix, a, out, p.vc, p.rn_q1, p.ls_q1));
}

}  // namespace

void NeuronParams::validate() const {
  check(n_threshold >= 1, "n_threshold must be >= 1");
  check(vc > 0.0 && rn_q0 > 0.0 && rn_parallel > 0.0 && rb > 0.0, "neuron parameters must be positive");
  check(ls >= 0.0, "ls must be non-negative");
  check(c_store >= 0.0, "c_store must be non-negative");
  check(v_rest > 0.0 && v_rest < vc, "v_rest must lie in (0, vc)");
  check(std::abs(vb) < vc, "|vb| must be below vc");
  check(tstep > 0.0 && tstop > tstep, "require 0 < tstep < tstop");
  validate_pulse(input);
}

double storage_capacitance(const NeuronParams& p, int inputs) {
  // The last input quantum only needs to carry the parallel junctions most
  // of the way to their switching point.
  constexpr double kFireFraction = 0.95;
  constexpr double kMinStored = 0.25;
  const double swing = p.vc - p.v_rest;
  const double n = p.n_threshold;
  const double junction_charge = n * (blockade_charge(p.vc, p.vc) - blockade_charge(p.v_rest, p.vc));
  const double input_giveback =
      inputs * (blockade_charge(-p.vb - swing, p.vc) - blockade_charge(-p.vb, p.vc));
  const double need = (n - kFireFraction) * si::two_e - junction_charge + input_giveback;
  return std::max(need, kMinStored * si::two_e) / swing;
}

void SynapseBinaryParams::validate() const {
  check(ic_states.size() == 2 && ic_states[0] > 0.0 && ic_states[0] < ic_states[1],
        "binary synapse needs two states, low < high");
  check(state == 0 || state == 1, "binary synapse state must be 0 or 1");
  check(ib > 0.0 && vc > 0.0 && r1 > 0.0 && l1 > 0.0 && rn_j1 > 0.0 && rn_q1 > 0.0,
        "synapse parameters must be positive");
  check(cj_j1 >= 0.0 && ls_q1 >= 0.0, "cj and ls must be non-negative");
  check(std::abs(vb_out) < vc, "|vb_out| must be below vc");
  validate_pulse(input);
}

void SynapseMultiParams::validate() const {
  check(!ic_j2_states.empty(), "multi-state synapse needs states");
  for (std::size_t k = 0; k < ic_j2_states.size(); ++k) {
    check(ic_j2_states[k] > 0.0, "state currents must be positive");
    check(k == 0 || ic_j2_states[k] > ic_j2_states[k - 1], "state currents must be increasing");
  }
  check(state >= 0 && state < static_cast<int>(ic_j2_states.size()), "state out of range");
  check(ic_j1 > 0.0 && ib > 0.0 && vc > 0.0 && r1 > 0.0 && l2 > 0.0 && rn_j1 > 0.0 && rn_j2 > 0.0 && rn_q1 > 0.0,
        "synapse parameters must be positive");
  check(cj >= 0.0 && ls_q1 >= 0.0, "cj and ls must be non-negative");
  check(std::abs(vb_out) < vc, "|vb_out| must be below vc");
  validate_pulse(input);
}

void NetworkSpec::validate() const {
  check(n_inputs >= 1 && n_outputs >= 1, "network needs at least one input and output");
  check(static_cast<int>(weights.size()) == n_outputs, "weights must have n_outputs rows");
  for (const auto& row : weights) {
    check(static_cast<int>(row.size()) == n_inputs, "each weight row must have n_inputs entries");
    for (int w : row) check(w == 0 || w == 1, "weights must be 0 or 1");
  }
  check(static_cast<int>(input_periods.size()) == n_inputs, "need one input period per input");
  for (double per : input_periods) check(per > 0.0, "input periods must be positive");
  neuron.validate();
  synapse.validate();
}

NetlistAst build_neuron(const NeuronParams& p) {
  p.validate();
  NetlistAst ast;
  ast.title = "neuron n=" + std::to_string(p.n_threshold);
  ast.cards.push_back(pulse_source("vin", "in", "0", p.input, p.input.amplitude, p.input.period));
  ast.cards.push_back(qpsj("q0", "in", "n1", p.vc, p.rn_q0, p.ls));
  add_neuron_core(ast, p, "", 1);
  ast.saves = {{Probe::Kind::Voltage, "in"}, {Probe::Kind::Voltage, "n1"},
               {Probe::Kind::Current, "q0"}, {Probe::Kind::Current, "qn1"},
               {Probe::Kind::Current, "vout"}};
  add_tran(ast, p.tstep, p.tstop);
  return ast;
}

NetlistAst build_binary_synapse(const SynapseBinaryParams& p) {
  p.validate();
  NetlistAst ast;
  ast.title = "binary synapse state=" + std::to_string(p.state);
  ast.cards.push_back(pulse_source("vin", "in", "0", p.input, p.input.amplitude, p.input.period));
  add_binary_synapse(ast, p, "in", "out", "", p.state);
  ast.cards.push_back(dc_source(DeviceKind::VSource, "vout", "out", "0", p.vb_out));
  ast.saves = {{Probe::Kind::Voltage, "in"}, {Probe::Kind::Voltage, "a"},
               {Probe::Kind::Current, "j1"}, {Probe::Kind::Current, "q1"}};
  add_tran(ast, p.tstep, p.tstop);
  return ast;
}

NetlistAst build_multistate_synapse(const SynapseMultiParams& p) {
  p.validate();
  NetlistAst ast;
  ast.title = "multi-state synapse state=" + std::to_string(p.state);
  ast.cards.push_back(pulse_source("vin", "in", "0", p.input, p.input.amplitude, p.input.period));
  ast.cards.push_back(linear(DeviceKind::Resistor, "r1", "in", "a", p.r1));
  ast.cards.push_back(jj("j1", "a", "0", p.ic_j1, p.rn_j1, p.cj));
  ast.cards.push_back(dc_source(DeviceKind::ISource, "ib", "0", "a", p.ib));
  ast.cards.push_back(linear(DeviceKind::Inductor, "l2", "a", "b", p.l2));
  ast.cards.push_back(mjj("j2", "b", "0", p.ic_j2_states, p.state, p.rn_j2, p.cj));
  ast.cards.push_back(qpsj("q1", "b", "out", p.vc, p.rn_q1, p.ls_q1));
  ast.cards.push_back(dc_source(DeviceKind::VSource, "vout", "out", "0", p.vb_out));
  ast.saves = {{Probe::Kind::Voltage, "in"}, {Probe::Kind::Voltage, "a"},
               {Probe::Kind::Voltage, "b"}, {Probe::Kind::Current, "l2"},
               {Probe::Kind::Current, "q1"}};
  add_tran(ast, p.tstep, p.tstop);
  return ast;
}

std::string network_output_channel(int output) { return "i(vout_" + std::to_string(output) + ")"; }

NetlistAst build_network(const NetworkSpec& spec) {
  spec.validate();
  NetlistAst ast;
  ast.title = "network " + std::to_string(spec.n_inputs) + "x" + std::to_string(spec.n_outputs);
  NeuronParams neuron = spec.neuron;
  for (int i = 1; i <= spec.n_inputs; ++i) {
    const std::string in = "in_" + std::to_string(i);
    ast.cards.push_back(pulse_source("vin_" + std::to_string(i), in, "0", spec.synapse.input,
                                     spec.synapse.input.amplitude, spec.input_periods[i - 1]));
  }
  for (int o = 1; o <= spec.n_outputs; ++o) {
    const std::string suffix = "_" + std::to_string(o);
    // Synapses into one neuron each act as one blockaded input junction on
    // its storage node.
    neuron.vb = spec.synapse.vb_out;
    add_neuron_core(ast, neuron, suffix, spec.n_inputs);
    for (int i = 1; i <= spec.n_inputs; ++i) {
      const int w = spec.weights[o - 1][i - 1];
      add_binary_synapse(ast, spec.synapse, "in_" + std::to_string(i), "n1" + suffix,
                         "_" + std::to_string(i) + std::to_string(o), w == 1 ? 0 : 1);
    }
    ast.saves.push_back({Probe::Kind::Voltage, "n1" + suffix});
    ast.saves.push_back({Probe::Kind::Current, "vout" + suffix});
  }
  for (int i = 1; i <= spec.n_inputs; ++i) {
    for (int o = 1; o <= spec.n_outputs; ++o) {
      ast.saves.push_back({Probe::Kind::Current, "q1_" + std::to_string(i) + std::to_string(o)});
    }
  }
  add_tran(ast, spec.tstep, spec.tstop);
  return ast;
}

}  // namespace qpsj
