#include <cmath>
#include <stdexcept>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "qpsj/analysis.hpp"
#include "qpsj/units.hpp"

using namespace qpsj;

namespace {

struct Triangle {
  double start, half_width, area;
};

// Sampled on a grid that hits every vertex, so trapezoidal integration is
// exact for the piecewise-linear signal.
std::pair<std::vector<double>, std::vector<double>> triangles(const std::vector<Triangle>& tris,
                                                              double dt, double tend) {
  std::vector<double> t, y;
  const long n = std::lround(tend / dt);
  for (long k = 0; k <= n; ++k) {
    const double x = k * dt;
    double v = 0.0;
    for (const auto& tr : tris) {
      const double peak = tr.area / tr.half_width;
      const double d = std::abs(x - (tr.start + tr.half_width));
      if (d < tr.half_width) v += peak * (1.0 - d / tr.half_width);
    }
    t.push_back(x);
    y.push_back(v);
  }
  return {t, y};
}

}  // namespace

TEST_CASE("zero waveform has no events") {
  std::vector<double> t{0, 1, 2, 3}, y(4, 0.0);
  CHECK(detect_pulses(t, y).size() == 0);
}

TEST_CASE("two triangular pulses of area 2e") {
  auto [t, y] = triangles({{10.0, 2.0, kTwoE}, {40.0, 3.0, kTwoE}}, 0.01, 100.0);
  const SpikeTrain s = detect_pulses(t, y);
  REQUIRE(s.size() == 2);
  for (const auto& e : s.events) CHECK(e.charge == doctest::Approx(kTwoE).epsilon(1e-9));
  CHECK(s.events[0].t_peak == doctest::Approx(12.0));
  CHECK(s.events[1].t_peak == doctest::Approx(43.0));
  for (const auto& q : pulse_charge_quantum_check(s)) {
    CHECK(q.multiple == 1);
    CHECK(q.quantized);
    CHECK(std::abs(q.residual) < kQuantumTolerance);
  }
}

TEST_CASE("charge additivity") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto [t, y] = triangles({{5.0, 1.0, 2 * kTwoE}, {30.0, 2.0, kTwoE}, {70.0, 1.5, 3 * kTwoE}}, 0.05, 100.0);
  for (auto& v : y) v += 1e-4 * (u(rng) - 0.5);
  const SpikeTrain s = detect_pulses(t, y);
  double sum = baseline_charge(t, y, s);
  for (const auto& e : s.events) sum += e.charge;
  CHECK(sum == doctest::Approx(integrate(t, y)).epsilon(1e-6));
}

TEST_CASE("detection is shift and scale invariant") {
  auto [t, y] = triangles({{5.0, 1.0, 2.0}, {20.0, 1.0, 1.6}, {50.0, 2.0, 3.0}}, 0.1, 80.0);
  const std::size_t base = detect_pulses(t, y).size();
  CHECK(base == 3);
  auto shifted = t;
  for (auto& x : shifted) x += 123.4;
  CHECK(detect_pulses(shifted, y).size() == base);
  for (double k : {1.5, 10.0, 1000.0}) {
    auto scaled = y;
    for (auto& v : scaled) v *= k;
    CHECK(detect_pulses(t, scaled).size() == base);
  }
}

TEST_CASE("close pulses merge and small ones are ignored") {
  auto [t, y] = triangles({{10.0, 1.0, 1.0}, {13.0, 1.0, 1.0}, {50.0, 1.0, 0.01}}, 0.01, 80.0);
  DetectorConfig cfg;
  CHECK(detect_pulses(t, y, cfg).size() == 2);
  cfg.min_separation = 5.0;
  cfg.min_height = 0.1;
  const SpikeTrain s = detect_pulses(t, y, cfg);
  REQUIRE(s.size() == 1);
  CHECK(s.events[0].charge == doctest::Approx(2.0).epsilon(1e-9));
  cfg.threshold_fraction = 1.5;
  CHECK_THROWS_AS(detect_pulses(t, y, cfg), std::invalid_argument);
}

TEST_CASE("quantum check rounding") {
  SpikeTrain s;
  s.events.push_back({0, 1.5 * kTwoE, 1, 0, 1});
  s.events.push_back({0, 10.02 * kTwoE, 1, 0, 1});
  s.events.push_back({0, 0.99 * kTwoE, 1, 0, 1});
  const auto q = pulse_charge_quantum_check(s);
  CHECK(q[0].multiple == 2);
  CHECK(q[0].residual == doctest::Approx(-0.5));
  CHECK_FALSE(q[0].quantized);
  CHECK(q[1].multiple == 10);
  CHECK(q[1].quantized);
  CHECK(q[2].multiple == 1);
  CHECK(q[2].quantized);
  CHECK_THROWS(pulse_charge_quantum_check(SpikeTrain{}));
}

TEST_CASE("energies") {
  // 2e * 10 mV in joules, scaled to zJ.
  const double oracle = 3.204353e-19 * 10e-3 * 1e21;
  CHECK(switching_energy(10.0) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(switching_energy(10.0) == doctest::Approx(3.2).epsilon(5e-3));
  CHECK(switching_energy(0.0) == 0.0);
  CHECK(switching_energy(20.0) == doctest::Approx(2 * switching_energy(10.0)));
  CHECK(neuron_firing_energy(10, 10.0) == doctest::Approx(35.2).epsilon(5e-3));
  CHECK(neuron_firing_energy(10, 10.0) == doctest::Approx(11 * oracle));
  CHECK(jj_switching_energy(100.0) == doctest::Approx(100e-6 * 2.067834e-15 * 1e21));
}

TEST_CASE("firing rate") {
  SpikeTrain s;
  for (int k = 0; k < 10; ++k) s.events.push_back({k * 100.0, 1, 1, 0, 1});
  CHECK(firing_rate(s, 1200.0) == doctest::Approx(8.3333333).epsilon(1e-6));
  CHECK(firing_rate(SpikeTrain{}, 1200.0) == 0.0);
}

TEST_CASE("csv export and round trip") {
  WaveformSet w;
  w.time = {0.0, 0.1, 0.2};
  w.add("v(a)", {0.0, 1.0 / 3.0, -2.5e-17});
  w.add("i(q1)", {1e300, 0.5, std::nextafter(1.0, 2.0)});
  std::ostringstream out;
  export_csv(w, out);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  std::istringstream in(text);
  const WaveformSet back = import_waveforms_csv(in);
  CHECK(back.names == w.names);
  CHECK(back.time == w.time);
  CHECK(back.channels == w.channels);

  std::ostringstream sp;
  export_csv(SpikeTrain{}, sp);
  CHECK(sp.str() == "channel,t_peak,charge,width,t_start,t_end\n");

  const auto dir = std::filesystem::temp_directory_path() / "qpsj_csv_test";
  std::filesystem::create_directories(dir);
  export_csv(w, dir / "w.csv");
  CHECK(import_waveforms_csv(dir / "w.csv").channels == w.channels);
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  const auto f = split_csv_line("x,\"a,b\",\"q\"\"\"");
  REQUIRE(f.size() == 3);
  CHECK(f[1] == "a,b");
  CHECK(f[2] == "q\"");
}
