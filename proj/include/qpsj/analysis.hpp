#pragma once

// Pulse detection, charge quantization, energy bookkeeping and CSV export.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qpsj/engine.hpp"

namespace qpsj {

struct PulseEvent {
  double t_peak = 0.0;   // ps
  double charge = 0.0;   // aC, integral over the event window
  double width = 0.0;    // ps spent above threshold
  double t_start = 0.0;  // window bounds, ps
  double t_end = 0.0;
};

struct SpikeTrain {
  std::string channel;
  std::vector<PulseEvent> events;

  std::size_t size() const { return events.size(); }
};

struct DetectorConfig {
  double threshold_fraction = 0.5;  // of the channel maximum above baseline
  double min_separation = 1.0;      // ps
  double baseline = 0.0;
  // Absolute floor on the threshold height above baseline, so a channel
  // carrying only small displacement currents yields no events.
  double min_height = 0.0;

  void validate() const;
};

// Events start at upward threshold crossings and end when the signal falls
// below half the threshold height. Each event's integration window runs
// forward until the signal has decayed to 1e-4 of the peak and stopped
// falling (or reaches the lowest sample before the next event), and backward
// while the signal stays above
// baseline (within 1e-4 of the peak), but never into the previous window.
// Slow precursor currents thus count toward the event they precede.
SpikeTrain detect_pulses(const std::vector<double>& time, const std::vector<double>& samples,
                         const DetectorConfig& cfg = {}, std::string channel = {});
SpikeTrain detect_pulses(const WaveformSet& w, const std::string& channel,
                         const DetectorConfig& cfg = {});

// Charge outside every event window.
double baseline_charge(const std::vector<double>& time, const std::vector<double>& samples,
                       const SpikeTrain& train, double baseline = 0.0);

// Trapezoidal integral of samples over time.
double integrate(const std::vector<double>& time, const std::vector<double>& samples);

struct QuantumCheck {
  long multiple = 0;
  double residual = 0.0;  // charge/2e - multiple
  bool quantized = false;
};

inline constexpr double kQuantumTolerance = 0.05;

std::vector<QuantumCheck> pulse_charge_quantum_check(const SpikeTrain& train);

// Energies in zJ; vc in mV, ic in uA.
double switching_energy(double vc);
double neuron_firing_energy(int n_threshold, double vc);
double jj_switching_energy(double ic);

// Events per nanosecond (GHz) over a window given in ps.
double firing_rate(const SpikeTrain& train, double window);

void export_csv(const WaveformSet& w, std::ostream& out);
void export_csv(const SpikeTrain& train, std::ostream& out);
void export_csv(const WaveformSet& w, const std::filesystem::path& path);
void export_csv(const SpikeTrain& train, const std::filesystem::path& path);
WaveformSet import_waveforms_csv(std::istream& in);
WaveformSet import_waveforms_csv(const std::filesystem::path& path);

// Gnuplot script plotting every channel of a waveform CSV against time.
std::string plot_script(const WaveformSet& w, const std::string& csv_name);

// RFC 4180 field quoting.
std::string csv_field(const std::string& s);
std::vector<std::string> split_csv_line(const std::string& line);
std::string format_double(double v);

}  // namespace qpsj
