#include <cmath>
#include <stdexcept>
#include <sstream>

#include "doctest.h"
#include "qpsj/engine.hpp"
#include "qpsj/error.hpp"
#include "qpsj/units.hpp"
#include "qpsj/analysis.hpp"
#include "qpsj/reference.hpp"
#include "qpsj/templates.hpp"

using namespace qpsj;

namespace {
Circuit build(const std::string& text) { return elaborate(parse_netlist(text)); }
}  // namespace

TEST_CASE("resistive divider operating point") {
  auto c = build("divider\nV1 a 0 dc 1m\nR1 a b 1k\nR2 b 0 3k\n.tran 1p 10p\n.end\n");
  auto op = dc_operating_point(c);
  CHECK(op.node_voltages[c.node_index("b")] == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(op.device_currents[c.device_index("v1")] == doctest::Approx(-0.25).epsilon(1e-9));
}

TEST_CASE("rc step response matches the exponential") {
  // 1 kOhm * 10 fF = 10 ps
  auto c = build("rc\nV1 a 0 pulse(0 1m 0 1f 1f 1n 2n)\nR1 a b 1k\nC1 b 0 10f\n.tran 0.01p 50p\n.save v(b)\n.end\n");
  SolverConfig cfg;
  auto w = tran(c, cfg);
  const auto& vb = w.channel("v(b)");
  double worst = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double t = w.time[k];
    if (t < 1.0) continue;
    worst = std::max(worst, std::abs(vb[k] - (1.0 - std::exp(-(t - 0.001) / 10.0))));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("jj biased at half critical current settles at asin(0.5)") {
  auto c = build("jj\nI1 0 1 dc 50u\njj B1 1 0 ic=100u rn=2 cj=0.5p\n.tran 0.1p 20p\n.end\n");
  auto op = dc_operating_point(c);
  CHECK_FALSE(op.frozen_junctions);
  CHECK(op.states[c.device_index("b1")].phi == doctest::Approx(std::asin(0.5)).epsilon(1e-6));
  auto w = tran(c);
  const auto& v = w.channel("v(1)");
  for (double x : v) CHECK(std::abs(x) < 1e-6);
}

TEST_CASE("qpsj below vc stays blockaded") {
  auto c = build("blockade\nV1 1 0 dc 0.5m\nR1 1 2 1k\nqpsj Q1 2 0 vc=1m rn=10k ls=1n\n.tran 0.1p 100p\n.end\n");
  TranStats st;
  auto w = tran(c, SolverConfig{}, &st);
  CHECK_FALSE(st.frozen_start);
  for (double i : w.channel("i(q1)")) CHECK(std::abs(i) < 1e-6);
}

namespace {

double rms_error_fraction(const WaveformSet& a, const WaveformSet& b, const std::string& ch) {
  const auto& x = a.channel(ch);
  const auto& y = b.channel(ch);
  REQUIRE(x.size() == y.size());
  double se = 0.0, lo = y[0], hi = y[0];
  for (std::size_t k = 0; k < x.size(); ++k) {
    se += (x[k] - y[k]) * (x[k] - y[k]);
    lo = std::min(lo, y[k]);
    hi = std::max(hi, y[k]);
  }
  return std::sqrt(se / static_cast<double>(x.size())) / (hi - lo);
}

double mean_after(const WaveformSet& w, const std::string& ch, double t0) {
  const auto& x = w.channel(ch);
  double s = 0.0;
  long n = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w.time[k] >= t0) {
      s += x[k];
      ++n;
    }
  }
  return s / static_cast<double>(n);
}

}  // namespace

TEST_CASE("rc low-pass follows the exponential within 0.5%") {
  auto c = build("rc\nV1 a 0 pulse(0 1m 0 1f 1f 1n 2n)\nR1 a b 10k\nC1 b 0 1f\n.tran 0.1p 60p\n.save v(b)\n.end\n");
  auto w = tran(c);
  const auto& vb = w.channel("v(b)");
  for (std::size_t k = 0; k < w.size(); ++k) {
    CHECK(std::abs(vb[k] - (1.0 - std::exp(-std::max(0.0, w.time[k] - 0.001) / 10.0))) < 5e-3);
  }
}

TEST_CASE("qpsj voltage-biased at 0.5 mV carries no current") {
  auto c = build("b\nV1 1 0 dc 0.5m\nqpsj Q1 1 2 vc=0.7m rn=10k ls=0.1n\nR1 2 0 1\n.tran 0.1p 1000p\n.end\n");
  auto op = dc_operating_point(c);
  CHECK(std::abs(op.device_currents[c.device_index("q1")]) < 1e-6);
  auto w = tran(c);
  for (double i : w.channel("i(q1)")) CHECK(std::abs(i) < 1e-6);
}

TEST_CASE("engine matches the reference integrator") {
  SUBCASE("jj at twice its critical current") {
    auto c = build("jj\nI1 0 a pulse(0 200u 1p 1p 1p 1n 2n)\njj j1 a 0 ic=100u rn=2 cj=0.05p\n.tran 0.05p 100p\n.save v(a)\n.end\n");
    const auto w = tran(c);
    const auto r = reference_integrate(c, c.tran.tstep, c.tran.tstop);
    CHECK(rms_error_fraction(w, r, "v(a)") < 0.01);
    CHECK(mean_after(w, "v(a)", 20.0) == doctest::Approx(mean_after(r, "v(a)", 20.0)).epsilon(0.01));
  }
  SUBCASE("qpsj at twice its critical voltage") {
    auto c = build("q\nV1 a 0 pulse(0 1.4m 1p 1p 1p 10n 20n)\nqpsj q1 a 0 vc=0.7m rn=10k ls=0.1n\n.tran 0.02p 200p\n.save i(q1)\n.end\n");
    const auto w = tran(c);
    const auto r = reference_integrate(c, c.tran.tstep, c.tran.tstop);
    CHECK(rms_error_fraction(w, r, "i(q1)") < 0.01);
    // ls -> 0 limit of the dual RSJ: mean current sqrt(Vb^2 - Vc^2) / Rn.
    const double analytic = std::sqrt(1.4 * 1.4 - 0.7 * 0.7) / 10.0;
    CHECK(mean_after(w, "i(q1)", 50.0) == doctest::Approx(analytic).epsilon(0.02));
  }
  SUBCASE("lc oscillator") {
    auto c = build("lc\nI1 0 a pulse(0 10u 1p 0.1p 0.1p 2p 0)\nL1 a 0 1n\nC1 a 0 100f\n.tran 0.01p 200p\n.save v(a)\n.end\n");
    const auto w = tran(c);
    const auto r = reference_integrate(c, c.tran.tstep, c.tran.tstop);
    CHECK(rms_error_fraction(w, r, "v(a)") < 0.01);
    // Period from upward zero crossings after the kick.
    const auto& v = w.channel("v(a)");
    std::vector<double> ups;
    for (std::size_t k = 1; k < w.size(); ++k) {
      if (w.time[k] > 10.0 && v[k - 1] < 0.0 && v[k] >= 0.0) {
        ups.push_back(w.time[k - 1] + (w.time[k] - w.time[k - 1]) * (-v[k - 1]) / (v[k] - v[k - 1]));
      }
    }
    REQUIRE(ups.size() >= 3);
    const double period = (ups.back() - ups.front()) / static_cast<double>(ups.size() - 1);
    CHECK(period == doctest::Approx(kTwoPi * std::sqrt(1.0 * 100.0)).epsilon(1e-3));
  }
}

TEST_CASE("reference integrator rejects larger circuits") {
  auto c = build("x\nV1 a 0 dc 1m\nR1 a b 1k\nC1 b 0 1f\nC2 b c 1f\nR2 c 0 1k\nC3 c 0 1f\n.tran 1p 5p\n.end\n");
  CHECK_THROWS_AS(reference_integrate(c, 1.0, 5.0), std::invalid_argument);
}

TEST_CASE("charge is conserved at the neuron storage node") {
  NeuronParams p;
  p.tstop = 1400e-12;
  auto ast = build_neuron(p);
  ast.saves.clear();
  for (const char* d : {"q0", "cstore", "rb"}) ast.saves.push_back({Probe::Kind::Current, d});
  for (int k = 1; k <= p.n_threshold; ++k) ast.saves.push_back({Probe::Kind::Current, "qn" + std::to_string(k)});
  const Circuit c = elaborate(ast);
  const auto w = tran(c);
  std::vector<double> net(w.size(), 0.0);
  for (std::size_t k = 0; k < w.size(); ++k) {
    net[k] = w.channel("i(q0)")[k] - w.channel("i(cstore)")[k] - w.channel("i(rb)")[k];
    for (int n = 1; n <= p.n_threshold; ++n) net[k] -= w.channel("i(qn" + std::to_string(n) + ")")[k];
  }
  const double abstol_i = SolverConfig{}.abstol_i;
  CHECK(std::abs(integrate(w.time, net)) < abstol_i * c.tran.tstop);
}

TEST_CASE("step halving rescues hard steps") {
  auto c = build("x\nI1 0 a pulse(0 300u 10p 0.1p 0.1p 50p 0)\njj j1 a 0 ic=100u rn=2 cj=0.1p\n.tran 1p 100p\n.save v(a)\n.end\n");
  SolverConfig tight;
  tight.max_newton_iters = 2;
  TranStats st;
  const auto w = tran(c, tight, &st);
  CHECK(st.halvings > 0);
  const auto ref = tran(c);
  CHECK(mean_after(w, "v(a)", 20.0) == doctest::Approx(mean_after(ref, "v(a)", 20.0)).epsilon(0.02));

  tight.max_halvings = 1;
  CHECK_THROWS_AS(tran(c, tight), ConvergenceError);
}

TEST_CASE("halving the output step changes samples by less than reltol of full scale") {
  const std::string body = "\nV1 a 0 pulse(0 1m 2p 1p 1p 20p 0)\nR1 a b 10k\nC1 b 0 1f\nqpsj q1 b 0 vc=0.7m rn=10k ls=0.1n\n";
  auto coarse = tran(build("c" + body + ".tran 0.1p 50p\n.save v(b)\n.end\n"));
  auto fine = tran(build("f" + body + ".tran 0.05p 50p\n.save v(b)\n.end\n"));
  const auto& a = coarse.channel("v(b)");
  const auto& b = fine.channel("v(b)");
  double hi = 0.0;
  for (double x : b) hi = std::max(hi, std::abs(x));
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    CHECK(std::abs(a[k] - b[2 * k]) < SolverConfig{}.reltol * hi);
  }
}

TEST_CASE("transient runs are deterministic") {
  SynapseBinaryParams p;
  p.tstop = 300e-12;
  const Circuit c = elaborate(build_binary_synapse(p));
  std::ostringstream a, b;
  export_csv(tran(c), a);
  export_csv(tran(c), b);
  CHECK(a.str() == b.str());
}

TEST_CASE("tstart trims reported samples") {
  auto c = build("x\nV1 a 0 dc 1m\nR1 a 0 1k\n.tran 1p 20p 10p\n.end\n");
  const auto w = tran(c);
  REQUIRE(w.size() == 11);
  CHECK(w.time.front() == doctest::Approx(10.0));
  CHECK(w.time.back() == doctest::Approx(20.0));
}

TEST_CASE("invalid solver settings are rejected") {
  auto c = build("x\nV1 a 0 dc 1m\nR1 a 0 1k\n.tran 1p 20p\n.end\n");
  SolverConfig bad;
  bad.reltol = -1.0;
  CHECK_THROWS_AS(tran(c, bad), std::invalid_argument);
  CHECK_THROWS_AS(tran(c, 0.0, 10.0), std::invalid_argument);
}
