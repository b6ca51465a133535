#pragma once

// Modified nodal analysis: operating point and fixed-grid transient.

#include <string>
#include <string_view>
#include <vector>

#include "qpsj/devices.hpp"
#include "qpsj/netlist.hpp"

namespace qpsj {

struct SolverConfig {
  double reltol = 1e-3;
  double abstol_v = 1e-6;  // mV
  double abstol_i = 1e-6;  // uA
  int max_newton_iters = 50;
  double gmin = 1e-9;  // 1/kOhm, across every junction
  IntegrationMethod method = IntegrationMethod::Trapezoidal;
  int max_halvings = 8;
  // Upper bound on the internal step in ps; 0 means the output step.
  double max_internal_step = 0.0;

  void validate() const;
};

// Circuit state at one instant.
struct Solution {
  std::vector<double> node_voltages;    // indexed by node, [0] = 0
  std::vector<double> device_currents;  // n+ -> n- through the device
  std::vector<DeviceState> states;      // per device
  // True when no static junction equilibrium existed and junction states
  // were held at their initial values instead.
  bool frozen_junctions = false;
};

// Uniformly sampled waveforms. Voltages in mV, currents in uA, time in ps.
struct WaveformSet {
  std::vector<double> time;
  std::vector<std::string> names;
  std::vector<std::vector<double>> channels;

  std::size_t size() const { return time.size(); }
  bool has(std::string_view name) const;
  const std::vector<double>& channel(std::string_view name) const;
  void add(std::string name, std::vector<double> samples);
};

Solution dc_operating_point(const Circuit& circuit, const SolverConfig& cfg = {});

// Operating point with every junction held at its initial charge / phase.
Solution initial_state(const Circuit& circuit, const SolverConfig& cfg = {});

struct TranStats {
  long accepted_steps = 0;
  long newton_iterations = 0;
  long halvings = 0;
  bool frozen_start = false;
};

// Transient on the grid k*tstep, k = 0.. while t <= tstop, reporting samples
// with t >= tstart. Starts from dc_operating_point, or from initial_state
// when the circuit has no static equilibrium.
WaveformSet tran(const Circuit& circuit, double tstep, double tstop, const SolverConfig& cfg = {},
                 TranStats* stats = nullptr, double tstart = 0.0);

// Runs the circuit's own .tran settings.
WaveformSet tran(const Circuit& circuit, const SolverConfig& cfg = {}, TranStats* stats = nullptr);

}  // namespace qpsj
