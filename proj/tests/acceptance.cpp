// Runs every acceptance criterion and prints one PASS/FAIL line for each.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "qpsj/error.hpp"
#include "qpsj/harness.hpp"
#include "qpsj/reference.hpp"
#include "qpsj/units.hpp"

using namespace qpsj;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Circuit netlist(const std::string& text) { return elaborate(parse_netlist(text)); }

long pulses_of(const Circuit& c, const std::string& src) {
  return pulses_before(c.devices.at(static_cast<std::size_t>(c.device_index(src))).source(), c.tran.tstop);
}

double mean_over(const WaveformSet& w, const std::string& ch, double t0, double t1) {
  const auto& x = w.channel(ch);
  std::vector<double> t, y;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w.time[k] >= t0 && w.time[k] <= t1) {
      t.push_back(w.time[k]);
      y.push_back(x[k]);
    }
  }
  return integrate(t, y) / (t.back() - t.front());
}

// Relative deviation of an event's charge from its nearest quantum count.
double quantum_error(double charge) {
  const double r = charge / kTwoE;
  const double m = std::max(1.0, std::round(r));
  return std::abs(r - m) / m;
}

// 1. Coulomb blockade.
Outcome blockade() {
  Outcome o;
  const Circuit c = netlist(
      "blockade\nV1 a 0 dc 0.49m\nqpsj q1 a b vc=0.7m rn=10k ls=0.1n\nR1 b 0 1\n.tran 0.1p 1000p\n.save i(q1)\n.end\n");
  const auto w = tran(c);
  const double avg = mean_over(w, "i(q1)", 0.0, 1000.0);
  const double abstol = SolverConfig{}.abstol_i;
  o.require(std::abs(avg) < abstol, "mean current below abstol");
  o.note("mean i(q1) = " + fmt("%.3g", avg) + " uA over 1 ns (abstol " + fmt("%g", abstol) + ")");
  return o;
}

// 2. Every switching pulse carries an integer number of 2e within 1%.
Outcome quantization() {
  Outcome o;
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> n_pick(2, 12);
  std::uniform_real_distribution<double> period(110e-12, 150e-12);
  long checked = 0;
  double worst = 0.0;
  auto check_train = [&](const SpikeTrain& t, const std::string& label) {
    for (const auto& e : t.events) {
      const double err = quantum_error(e.charge);
      worst = std::max(worst, err);
      ++checked;
      o.require(err <= 0.01, label + " event at " + fmt("%.1f", e.t_peak) + " ps off by " + fmt("%.2f%%", 100 * err));
    }
  };
  for (int trial = 0; trial < 4; ++trial) {
    NeuronParams p;
    p.n_threshold = n_pick(rng);
    p.input.period = period(rng);
    p.tstop = p.input.delay + p.input.period * (p.n_threshold + 2);
    const auto w = tran(elaborate(build_neuron(p)));
    const std::string tag = "neuron N=" + std::to_string(p.n_threshold);
    check_train(detect_pulses(w, "i(q0)", neuron_input_detector()), tag + " q0");
    check_train(detect_pulses(w, "i(qn1)", neuron_output_detector()), tag + " qn1");
    check_train(detect_pulses(w, kNeuronOutput, neuron_output_detector()), tag + " output");
  }
  for (int trial = 0; trial < 3; ++trial) {
    SynapseBinaryParams p;
    p.input.period = period(rng);
    p.tstop = p.input.delay + 4 * p.input.period;
    const auto w = tran(elaborate(build_binary_synapse(p)));
    check_train(detect_pulses(w, kSynapseOutput, synapse_detector()), "binary synapse");
  }
  for (int s = 0; s < 2; ++s) {
    SynapseMultiParams p;
    p.state = s;
    const auto w = tran(elaborate(build_multistate_synapse(p)));
    check_train(detect_pulses(w, kSynapseOutput, multistate_detector()), "multi-state burst");
  }
  o.note(std::to_string(checked) + " pulses, worst deviation " + fmt("%.3f%%", 100 * worst));
  o.require(checked > 50, "enough pulses checked");
  return o;
}

// 3. Integrate-and-fire threshold.
Outcome neuron_threshold() {
  Outcome o;
  NeuronParams p;
  p.tstop = 2600e-12;
  const Circuit c = elaborate(build_neuron(p));
  const auto w = tran(c);
  const long pulses = pulses_of(c, "vin");
  const SpikeTrain out = detect_pulses(w, kNeuronOutput, neuron_output_detector());
  o.require(pulses >= 12, "at least 12 input periods");
  o.require(static_cast<long>(out.size()) == pulses / p.n_threshold, "firing count floor(pulses/N)");
  const double t0 = p.input.delay * 1e12, per = p.input.period * 1e12;
  for (std::size_t k = 0; k < out.size(); ++k) {
    // Firing k follows input pulse N(k+1) and precedes the next one.
    const double lo = t0 + per * static_cast<double>(p.n_threshold * (k + 1) - 1);
    o.require(out.events[k].t_peak > lo && out.events[k].t_peak < lo + per, "firing " + std::to_string(k + 1) + " timing");
    const double q = out.events[k].charge / kTwoE;
    o.require(std::abs(q - p.n_threshold) <= 0.01 * p.n_threshold, "firing charge 20e within 1%");
    o.note("firing " + std::to_string(k + 1) + " at " + fmt("%.1f", out.events[k].t_peak) + " ps carries " +
           fmt("%.3f", q) + " x 2e");
  }
  o.note(std::to_string(pulses) + " inputs -> " + std::to_string(out.size()) + " firings");
  return o;
}

// 4. Binary synapse weights.
Outcome binary_synapse() {
  Outcome o;
  for (int state : {0, 1}) {
    SynapseBinaryParams p;
    p.state = state;
    const Circuit c = elaborate(build_binary_synapse(p));
    const auto w = tran(c);
    const long pulses = pulses_of(c, "vin");
    const SpikeTrain t = detect_pulses(w, kSynapseOutput, synapse_detector());
    o.require(pulses >= 10, "at least 10 input pulses");
    if (state == 0) {
      o.require(static_cast<long>(t.size()) == pulses, "one output per input at 200 uA");
      const double t0 = p.input.delay * 1e12, per = p.input.period * 1e12;
      for (std::size_t k = 0; k < t.size(); ++k) {
        o.require(t.events[k].t_peak > t0 + per * k && t.events[k].t_peak < t0 + per * (k + 1),
                  "output " + std::to_string(k + 1) + " inside its input period");
      }
    } else {
      o.require(t.size() == 0, "no output at 300 uA");
    }
    o.note("Ic=" + fmt("%.0f", p.ic_states[state] * 1e6) + " uA: " + std::to_string(pulses) + " in -> " +
           std::to_string(t.size()) + " out");
  }
  return o;
}

// 5. Multi-state synapse ordering.
Outcome multistate() {
  Outcome o;
  SynapseMultiParams p;
  std::vector<long> counts;
  std::string line;
  for (std::size_t s = 0; s < p.ic_j2_states.size(); ++s) {
    p.state = static_cast<int>(s);
    const Circuit c = elaborate(build_multistate_synapse(p));
    const auto m = measure(tran(c), kSynapseOutput, multistate_detector(), pulses_of(c, "vin"));
    counts.push_back(m.quanta);
    line += (s ? ", " : "") + fmt("%.0f", p.ic_j2_states[s] * 1e6) + " uA: " + std::to_string(m.quanta);
  }
  for (std::size_t k = 1; k < counts.size(); ++k) {
    if (counts[k - 1] > 0) {
      o.require(counts[k] < counts[k - 1], "strictly decreasing before reaching 0");
    } else {
      o.require(counts[k] == 0, "stays at 0");
    }
  }
  o.require(counts.back() == 0, "count(400 uA) = 0");
  o.note("output quanta " + line);
  return o;
}

// 6. Network firing counts.
Outcome network() {
  Outcome o;
  for (const auto& weights : {std::vector<std::vector<int>>{{1, 1, 1}, {0, 1, 1}},
                              std::vector<std::vector<int>>{{1, 0, 1}, {0, 0, 1}}}) {
    NetworkSpec spec;
    spec.weights = weights;
    spec.input_periods = {100e-12, 80e-12, 120e-12};
    spec.tstop = 2400e-12;
    const Circuit c = elaborate(build_network(spec));
    const auto w = tran(c);
    for (int out = 0; out < spec.n_outputs; ++out) {
      long delivered = 0;
      std::string row;
      for (int i = 0; i < spec.n_inputs; ++i) {
        if (weights[out][i]) delivered += pulses_of(c, "vin_" + std::to_string(i + 1));
        row += std::to_string(weights[out][i]);
      }
      const long expected = delivered / spec.neuron.n_threshold;
      const long fired = static_cast<long>(
          detect_pulses(w, network_output_channel(out + 1), neuron_output_detector()).size());
      o.require(std::abs(fired - expected) <= 1, "neuron [" + row + "] count");
      o.note("[" + row + "] " + std::to_string(delivered) + " in -> " + std::to_string(fired) + " (floor " +
             std::to_string(expected) + ")");
    }
  }
  return o;
}

// 7. Energy accounting.
Outcome energy() {
  Outcome o;
  const double e1 = switching_energy(10.0), e11 = neuron_firing_energy(10, 10.0);
  o.require(std::abs(e1 - 3.2) <= 0.005 * 3.2, "3.2 zJ per switch");
  o.require(std::abs(e11 - 35.2) <= 0.005 * 35.2, "35.2 zJ per firing");
  o.note("switch " + fmt("%.4f", e1) + " zJ, firing " + fmt("%.3f", e11) + " zJ");
  return o;
}

// 8. Damping parameter.
Outcome damping() {
  Outcome o;
  const double pi = 3.14159265358979323846, two_e = 3.204353e-19;
  const double triples[][3] = {{0.7e-3, 10e-9, 10e3}, {1e-3, 100e-9, 10e3}, {0.5e-3, 10e-12, 5.0}};
  for (const auto& t : triples) {
    const double want = 2 * pi * t[0] * t[1] / (two_e * t[2] * t[2]);
    const double got = damping_parameter(t[0] * scale::volt, t[1] * scale::henry, t[2] * scale::ohm);
    o.require(std::abs(got - want) <= 1e-9 * want, "hand value");
    o.note(fmt("%.6g", got));
  }
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  for (int k = 0; k < 10000; ++k) {
    const double vc = u(rng), l = u(rng), r = u(rng), s = u(rng);
    const double b = damping_parameter(vc, l, r);
    if (std::abs(damping_parameter(vc, s * l, r) - s * b) > 1e-12 * s * b ||
        std::abs(damping_parameter(vc, l, s * r) * s * s - b) > 1e-12 * b) {
      o.require(false, "scaling property");
      break;
    }
  }
  o.note("10000 scaling samples");
  return o;
}

struct Periodic {
  double rate = 0.0;  // per ps, from event peaks
  double mean = 0.0;  // channel mean over whole periods
};

Periodic periodic(const WaveformSet& w, const std::string& ch, double t_settle) {
  // A running junction never returns to zero, so thresholds sit between the
  // settled minimum and the peak.
  const auto& x = w.channel(ch);
  DetectorConfig cfg;
  cfg.baseline = x.back();
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w.time[k] >= t_settle) cfg.baseline = std::min(cfg.baseline, x[k]);
  }
  const SpikeTrain t = detect_pulses(w, ch, cfg);
  std::vector<double> peaks;
  for (const auto& e : t.events) {
    if (e.t_peak >= t_settle) peaks.push_back(e.t_peak);
  }
  Periodic p;
  if (peaks.size() < 3) return p;
  p.rate = static_cast<double>(peaks.size() - 1) / (peaks.back() - peaks.front());
  p.mean = mean_over(w, ch, peaks.front(), peaks.back());
  return p;
}

double rms_fraction(const WaveformSet& a, const WaveformSet& b, const std::string& ch) {
  const auto& x = a.channel(ch);
  const auto& y = b.channel(ch);
  double se = 0.0, lo = y[0], hi = y[0];
  for (std::size_t k = 0; k < x.size(); ++k) {
    se += (x[k] - y[k]) * (x[k] - y[k]);
    lo = std::min(lo, y[k]);
    hi = std::max(hi, y[k]);
  }
  return std::sqrt(se / static_cast<double>(x.size())) / (hi - lo);
}

// 9. Engine versus the reference integrator, plus the Josephson and Bloch relations.
Outcome oracle() {
  Outcome o;
  {
    const Circuit c = netlist(
        "jj\nI1 0 a pulse(0 200u 1p 1p 1p 1n 2n)\njj j1 a 0 ic=100u rn=2 cj=0.05p\n.tran 0.05p 100p\n.save v(a)\n.end\n");
    const auto w = tran(c);
    const auto r = reference_integrate(c, c.tran.tstep, c.tran.tstop);
    const double rms = rms_fraction(w, r, "v(a)");
    o.require(rms < 0.01, "jj waveform rms");
    const Periodic p = periodic(w, "v(a)", 20.0);
    const double josephson = p.mean / kPhi0;
    o.require(p.rate > 0.0 && std::abs(p.rate - josephson) <= 0.01 * josephson, "f = V/Phi0");
    o.note("jj rms " + fmt("%.3f%%", 100 * rms) + ", f " + fmt("%.2f GHz", p.rate * 1e3) + " vs V/Phi0 " +
           fmt("%.2f GHz", josephson * 1e3));
  }
  {
    const Circuit c = netlist(
        "qpsj\nV1 a 0 pulse(0 1.4m 1p 1p 1p 10n 20n)\nqpsj q1 a 0 vc=0.7m rn=10k ls=0.1n\n.tran 0.02p 200p\n.save i(q1)\n.end\n");
    const auto w = tran(c);
    const auto r = reference_integrate(c, c.tran.tstep, c.tran.tstop);
    const double rms = rms_fraction(w, r, "i(q1)");
    o.require(rms < 0.01, "qpsj waveform rms");
    const Periodic p = periodic(w, "i(q1)", 20.0);
    const double bloch = p.mean / kTwoE;
    o.require(p.rate > 0.0 && std::abs(p.rate - bloch) <= 0.01 * bloch, "rate = I/2e");
    o.note("qpsj rms " + fmt("%.3f%%", 100 * rms) + ", rate " + fmt("%.2f GHz", p.rate * 1e3) + " vs I/2e " +
           fmt("%.2f GHz", bloch * 1e3));
  }
  return o;
}

// 10. Parser corpus and fuzzing.
Outcome parser() {
  Outcome o;
  long valid = 0, invalid = 0;
  for (const char* sub : {"valid", "invalid"}) {
    for (const auto& e : fs::directory_iterator(fs::path(QPSJ_CORPUS_DIR) / sub)) {
      std::ifstream f(e.path());
      std::stringstream ss;
      ss << f.rdbuf();
      const std::string text = ss.str();
      const std::string name = e.path().filename().string();
      if (std::string(sub) == "valid") {
        try {
          const NetlistAst ast = parse_netlist(text);
          const Circuit c = elaborate(ast);
          const std::string once = write_netlist(to_ast(c));
          const Circuit back = elaborate(parse_netlist(once));
          o.require(write_netlist(to_ast(back)) == once && back.node_names == c.node_names, name + " round trip");
          ++valid;
        } catch (const std::exception& ex) {
          o.require(false, name + ": " + ex.what());
        }
      } else {
        const auto at = text.find("* expect: ");
        const std::string expect = text.substr(at + 10, text.find('\n', at) - at - 10);
        std::string msg;
        try {
          elaborate(parse_netlist(text));
        } catch (const ParseError& ex) {
          msg = ex.what();
        } catch (const ElaborationError& ex) {
          msg = ex.what();
        }
        o.require(!msg.empty() && msg.find(expect) != std::string::npos, name + " diagnostic");
        ++invalid;
      }
    }
  }
  o.require(valid + invalid >= 20, "corpus of at least 20 netlists");

  std::mt19937 rng(99);
  std::uniform_int_distribution<int> byte(1, 255), len(0, 60), kind(0, 1);
  const std::string alphabet = "rlcviqjm0123456789.=,()+-*kmunpfgdcpulsetranvi _\t";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  long crashes = 0;
  for (int k = 0; k < 100000; ++k) {
    std::string line;
    const int n = len(rng);
    const bool raw = kind(rng) == 0;
    for (int t = 0; t < n; ++t) line += raw ? static_cast<char>(byte(rng)) : alphabet[pick(rng)];
    try {
      elaborate(parse_netlist("fuzz\n" + line + "\n.tran 1p 2p\n.end\n"));
    } catch (const ParseError& e) {
      if (e.line() < 1) ++crashes;
    } catch (const ElaborationError&) {
    } catch (...) {
      ++crashes;
    }
  }
  o.require(crashes == 0, "fuzzing without unexpected exceptions");
  o.note(std::to_string(valid) + " valid + " + std::to_string(invalid) + " invalid netlists, 100000 fuzz lines");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0 = no runtime bound
    std::function<Outcome()> run;
  };
  const Criterion all[] = {
      {1, "coulomb blockade", 1.0, blockade},
      {2, "charge quantization", 0.0, quantization},
      {3, "neuron threshold", 10.0, neuron_threshold},
      {4, "binary synapse", 10.0, binary_synapse},
      {5, "multi-state synapse", 30.0, multistate},
      {6, "3x2 network", 60.0, network},
      {7, "switching energy", 0.0, energy},
      {8, "damping parameter", 0.0, damping},
      {9, "reference integrator", 0.0, oracle},
      {10, "netlist parser", 0.0, parser},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0.0 && s > c.budget_s) {
      o.ok = false;
      o.note("over the " + fmt("%.0f s", c.budget_s) + " budget");
    }
    std::printf("%s AC%-2d %-22s %7.2fs  %s\n", o.ok ? "PASS" : "FAIL", c.id, c.name, s, o.detail.c_str());
    std::fflush(stdout);
    failed += o.ok ? 0 : 1;
  }
  std::printf("%d/10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
