#pragma once

// Builders for the neuron, synapse and network circuits. All parameters are
// SI; outputs are netlist ASTs ready for elaborate() or write_netlist().

#include <string>
#include <vector>

#include "qpsj/netlist.hpp"

namespace qpsj {

// Input pulse train shared by the templates.
struct PulseTrain {
  double amplitude = 0.8e-3;
  double delay = 10e-12;
  double rise = 0.5e-12;
  double width = 3e-12;
  double period = 120e-12;
};

struct NeuronParams {
  int n_threshold = 10;
  double vc = 0.7e-3;
  // Node 1 is held at vb through rb; the Q0 input junction therefore rests
  // at -vb and the parallel junctions at v_rest.
  double vb = -0.2e-3;
  double rb = 10e6;
  double rn_q0 = 10e3;
  double rn_parallel = 15e3;
  double ls = 0.1e-9;
  double v_rest = 0.67e-3;
  double c_store = 0.0;  // 0 selects storage_capacitance()
  PulseTrain input{};
  double tstep = 0.1e-12;
  double tstop = 1500e-12;

  void validate() const;
};

// Capacitance at which the N-th input quantum pushes the parallel junctions
// over vc, given `inputs` blockaded input junctions each resting at -vb.
double storage_capacitance(const NeuronParams& p, int inputs = 1);

struct SynapseBinaryParams {
  std::vector<double> ic_states{200e-6, 300e-6};
  int state = 0;
  double ib = 140e-6;
  double vc = 0.7e-3;
  double r1 = 10.0;
  double l1 = 10e-12;
  double rn_j1 = 3.0;
  double cj_j1 = 0.1e-12;
  double rn_q1 = 7.5e3;
  double ls_q1 = 0.1e-9;
  double vb_out = -0.3e-3;  // output node bias
  PulseTrain input{1.4e-3, 10e-12, 0.5e-12, 5e-12, 120e-12};
  double tstep = 0.05e-12;
  double tstop = 1250e-12;

  void validate() const;
};

struct SynapseMultiParams {
  double ic_j1 = 200e-6;
  double ib = 160e-6;
  double vc = 0.7e-3;
  std::vector<double> ic_j2_states{10e-6, 50e-6, 350e-6, 400e-6};
  int state = 0;
  double r1 = 5.0;
  double l2 = 10e-12;
  double rn_j1 = 3.0;
  double rn_j2 = 6.0;
  double cj = 0.1e-12;
  double rn_q1 = 3e3;
  double ls_q1 = 0.1e-9;
  double vb_out = -0.4e-3;
  PulseTrain input{1.4e-3, 10e-12, 0.5e-12, 20e-12, 120e-12};
  double tstep = 0.05e-12;
  double tstop = 460e-12;

  void validate() const;
};

struct NetworkSpec {
  int n_inputs = 3;
  int n_outputs = 2;
  std::vector<std::vector<int>> weights;  // n_outputs x n_inputs, 0/1
  std::vector<double> input_periods;      // one per input
  NeuronParams neuron{};
  SynapseBinaryParams synapse{};
  double tstep = 0.05e-12;
  double tstop = 2500e-12;

  void validate() const;
};

NetlistAst build_neuron(const NeuronParams& p);
NetlistAst build_binary_synapse(const SynapseBinaryParams& p);
NetlistAst build_multistate_synapse(const SynapseMultiParams& p);
NetlistAst build_network(const NetworkSpec& spec);

// Channel carrying a template's output current.
inline constexpr const char* kNeuronOutput = "i(vout)";
inline constexpr const char* kSynapseOutput = "i(q1)";
std::string network_output_channel(int output);  // i(vout<k>), 1-based

}  // namespace qpsj
