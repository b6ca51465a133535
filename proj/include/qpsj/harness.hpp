#pragma once

// Reproducible runs: netlist simulation, named figure scenarios and
// parameter sweeps, each writing CSV outputs plus a JSON manifest.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qpsj/analysis.hpp"
#include "qpsj/engine.hpp"
#include "qpsj/templates.hpp"

namespace qpsj {

enum ExitCode : int { kExitOk = 0, kExitInput = 2, kExitConvergence = 3 };

// Default output directory: $QPSJ_OUT_DIR, else ./qpsj_out.
std::filesystem::path default_out_dir();

struct SimOptions {
  std::filesystem::path netlist;
  double tstep = 0.0;  // ps; 0 keeps the netlist's .tran value
  double tstop = 0.0;
  std::filesystem::path out_dir;
  SolverConfig solver{};
  bool plot = false;
};

int cmd_sim(const SimOptions& opt, std::ostream& out, std::ostream& err);

// Counts and charges extracted from one scenario run.
struct ScenarioMetrics {
  long input_pulses = 0;
  long events = 0;           // detected output events
  long quanta = 0;           // sum of rounded per-event charge multiples
  double worst_residual = 0.0;
  std::vector<double> event_charges;  // in units of 2e
};

struct FigureReport {
  std::string id;
  bool passed = false;
  std::vector<std::string> summary;
  std::map<std::string, double> metrics;
};

const std::vector<std::string>& figure_ids();
FigureReport run_figure(const std::string& id, const std::filesystem::path& out_dir);
int cmd_figure(const std::string& id, const std::filesystem::path& out_dir, std::ostream& out,
               std::ostream& err);

struct SweepOptions {
  std::string templ;  // neuron | binary | multistate | damping
  std::string param;  // n | ic | ic_j2 | l
  std::vector<double> values;
  std::filesystem::path out_dir;
  int threads = 0;  // 0 = hardware concurrency
};

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  std::string error;
  std::map<std::string, double> metrics;
};

std::vector<SweepRow> run_sweep(const SweepOptions& opt);
int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err);

// "1,2,5" or "start:stop:step" (inclusive of stop within rounding).
std::vector<double> parse_value_list(const std::string& spec);

// Detection settings used for template output channels.
DetectorConfig neuron_output_detector();
DetectorConfig neuron_input_detector();
DetectorConfig synapse_detector();
DetectorConfig multistate_detector();

ScenarioMetrics measure(const WaveformSet& w, const std::string& channel, const DetectorConfig& cfg,
                        long input_pulses);

// Rising input edges that started at or before t (ps) for a pulse source.
long pulses_before(const SourceWaveform& src, double t);

}  // namespace qpsj
