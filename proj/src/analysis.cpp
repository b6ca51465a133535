#include "qpsj/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qpsj/units.hpp"

namespace qpsj {

void DetectorConfig::validate() const {
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0)) {
    throw std::invalid_argument("threshold_fraction must lie in (0, 1)");
  }
  if (!(min_separation > 0.0)) throw std::invalid_argument("min_separation must be positive");
  if (!std::isfinite(baseline)) throw std::invalid_argument("baseline must be finite");
  if (!(min_height >= 0.0)) throw std::invalid_argument("min_height must be non-negative");
}

double integrate(const std::vector<double>& time, const std::vector<double>& samples) {
  double sum = 0.0;
  for (std::size_t k = 1; k < samples.size(); ++k) {
    sum += 0.5 * (time[k] - time[k - 1]) * (samples[k] + samples[k - 1]);
  }
  return sum;
}

namespace {

struct Core {
  std::size_t first, last, peak;
};

double window_charge(const std::vector<double>& t, const std::vector<double>& s, std::size_t a,
                     std::size_t b, double baseline) {
  double sum = 0.0;
  for (std::size_t k = a + 1; k <= b; ++k) {
    sum += 0.5 * (t[k] - t[k - 1]) * (s[k] + s[k - 1] - 2.0 * baseline);
  }
  return sum;
}

}  // namespace

SpikeTrain detect_pulses(const std::vector<double>& time, const std::vector<double>& s,
                         const DetectorConfig& cfg, std::string channel) {
  cfg.validate();
  if (s.empty()) throw std::invalid_argument("detect_pulses: empty channel");
  if (time.size() != s.size()) throw std::invalid_argument("detect_pulses: time/sample length mismatch");
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!std::isfinite(s[k]) || !std::isfinite(time[k])) {
      throw std::invalid_argument("detect_pulses: non-finite sample");
    }
    if (k > 0 && !(time[k] > time[k - 1])) {
      throw std::invalid_argument("detect_pulses: time grid must increase");
    }
  }
  SpikeTrain train;
  train.channel = std::move(channel);
  const double peak = *std::max_element(s.begin(), s.end()) - cfg.baseline;
  if (!(peak > 0.0)) return train;

  const double height = std::max(cfg.threshold_fraction * peak, cfg.min_height);
  const double high = cfg.baseline + height;
  const double low = cfg.baseline + 0.5 * height;
  const double floor = cfg.baseline - 1e-4 * peak;
  const double quiet = cfg.baseline + 1e-4 * peak;
  const std::size_t n = s.size();

  std::vector<Core> cores;
  bool above = false;
  for (std::size_t k = 0; k < n; ++k) {
    if (!above && s[k] >= high) {
      above = true;
      cores.push_back({k, k, k});
    } else if (above) {
      if (s[k] < low) {
        above = false;
        continue;
      }
      auto& c = cores.back();
      c.last = k;
      if (s[k] > s[c.peak]) c.peak = k;
    }
  }

  std::vector<Core> merged;
  for (const auto& c : cores) {
    if (!merged.empty() && time[c.peak] - time[merged.back().peak] < cfg.min_separation) {
      auto& m = merged.back();
      m.last = c.last;
      if (s[c.peak] > s[m.peak]) m.peak = c.peak;
    } else {
      merged.push_back(c);
    }
  }

  std::vector<std::size_t> split(merged.size(), n - 1);
  for (std::size_t e = 0; e + 1 < merged.size(); ++e) {
    auto first = s.begin() + static_cast<std::ptrdiff_t>(merged[e].last);
    auto last = s.begin() + static_cast<std::ptrdiff_t>(merged[e + 1].first) + 1;
    split[e] = static_cast<std::size_t>(std::min_element(first, last) - s.begin());
  }

  std::size_t prev_end = 0;
  for (std::size_t e = 0; e < merged.size(); ++e) {
    const auto& c = merged[e];
    const std::size_t lo = e == 0 ? 0 : prev_end;
    const std::size_t hi = split[e];
    std::size_t a = c.first, b = c.last;
    while (a > lo && s[a - 1] > floor) --a;
    while (b < hi && (s[b + 1] > quiet || (s[b + 1] < s[b] && s[b + 1] > floor))) ++b;
    prev_end = b;
    PulseEvent ev;
    ev.t_peak = time[c.peak];
    ev.width = time[c.last] - time[c.first];
    ev.t_start = time[a];
    ev.t_end = time[b];
    ev.charge = window_charge(time, s, a, b, cfg.baseline);
    train.events.push_back(ev);
  }
  return train;
}

SpikeTrain detect_pulses(const WaveformSet& w, const std::string& channel,
                         const DetectorConfig& cfg) {
  return detect_pulses(w.time, w.channel(channel), cfg, channel);
}

double baseline_charge(const std::vector<double>& time, const std::vector<double>& s,
                       const SpikeTrain& train, double baseline) {
  double sum = 0.0;
  std::size_t e = 0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    while (e < train.events.size() && train.events[e].t_end <= time[k - 1]) ++e;
    const bool covered = e < train.events.size() && train.events[e].t_start <= time[k - 1] &&
                         time[k] <= train.events[e].t_end;
    if (!covered) sum += 0.5 * (time[k] - time[k - 1]) * (s[k] + s[k - 1] - 2.0 * baseline);
  }
  return sum;
}

std::vector<QuantumCheck> pulse_charge_quantum_check(const SpikeTrain& train) {
  if (train.events.empty()) throw std::invalid_argument("quantum check needs at least one event");
  std::vector<QuantumCheck> out;
  out.reserve(train.events.size());
  for (const auto& ev : train.events) {
    const double ratio = ev.charge / kTwoE;
    QuantumCheck q;
    q.multiple = std::lround(ratio);
    q.residual = ratio - static_cast<double>(q.multiple);
    q.quantized = std::abs(q.residual) < kQuantumTolerance;
    out.push_back(q);
  }
  return out;
}

double switching_energy(double vc) {
  if (vc < 0.0) throw std::invalid_argument("switching_energy: vc must be non-negative");
  return kTwoE * vc;
}

double neuron_firing_energy(int n_threshold, double vc) {
  if (n_threshold < 1) throw std::invalid_argument("n_threshold must be >= 1");
  return (n_threshold + 1) * switching_energy(vc);
}

double jj_switching_energy(double ic) {
  if (ic < 0.0) throw std::invalid_argument("jj_switching_energy: ic must be non-negative");
  return ic * kPhi0;
}

double firing_rate(const SpikeTrain& train, double window) {
  if (!(window > 0.0)) throw std::invalid_argument("firing_rate: window must be positive");
  return static_cast<double>(train.events.size()) / window * 1e3;
}

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf, end);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          fields.back() += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else if (ch != '\r') {
      fields.back() += ch;
    }
  }
  if (quoted) throw std::runtime_error("unterminated quoted CSV field");
  return fields;
}

void export_csv(const WaveformSet& w, std::ostream& out) {
  out << "time";
  for (const auto& name : w.names) out << ',' << csv_field(name);
  out << '\n';
  for (std::size_t k = 0; k < w.size(); ++k) {
    out << format_double(w.time[k]);
    for (const auto& ch : w.channels) out << ',' << format_double(ch[k]);
    out << '\n';
  }
}

void export_csv(const SpikeTrain& train, std::ostream& out) {
  out << "channel,t_peak,charge,width,t_start,t_end\n";
  for (const auto& ev : train.events) {
    out << csv_field(train.channel) << ',' << format_double(ev.t_peak) << ','
        << format_double(ev.charge) << ',' << format_double(ev.width) << ','
        << format_double(ev.t_start) << ',' << format_double(ev.t_end) << '\n';
  }
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw std::runtime_error("bad number in CSV: '" + s + "'");
  }
  return v;
}

}  // namespace

void export_csv(const WaveformSet& w, const std::filesystem::path& path) {
  auto f = open_out(path);
  export_csv(w, f);
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

void export_csv(const SpikeTrain& train, const std::filesystem::path& path) {
  auto f = open_out(path);
  export_csv(train, f);
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

WaveformSet import_waveforms_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
  auto header = split_csv_line(line);
  if (header.empty() || header[0] != "time") throw std::runtime_error("CSV must start with a time column");
  WaveformSet w;
  w.names.assign(header.begin() + 1, header.end());
  w.channels.resize(w.names.size());
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) throw std::runtime_error("ragged CSV row");
    w.time.push_back(parse_double(fields[0]));
    for (std::size_t c = 1; c < fields.size(); ++c) w.channels[c - 1].push_back(parse_double(fields[c]));
  }
  return w;
}

WaveformSet import_waveforms_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  return import_waveforms_csv(f);
}

std::string plot_script(const WaveformSet& w, const std::string& csv_name) {
  std::ostringstream out;
  out << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set xlabel 'time (ps)'\n"
      << "set multiplot layout " << std::max<std::size_t>(1, w.names.size()) << ",1\n";
  for (std::size_t c = 0; c < w.names.size(); ++c) {
    const bool current = w.names[c].rfind("i(", 0) == 0;
    out << "set ylabel '" << (current ? "uA" : "mV") << "'\n"
        << "plot '" << csv_name << "' using 1:" << c + 2 << " with lines\n";
  }
  out << "unset multiplot\n";
  return out.str();
}

}  // namespace qpsj
