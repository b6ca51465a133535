#include "qpsj/engine.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "qpsj/error.hpp"
#include "qpsj/units.hpp"

namespace qpsj {

void SolverConfig::validate() const {
  if (!(reltol > 0.0) || !(abstol_v > 0.0) || !(abstol_i > 0.0)) {
    throw std::invalid_argument("solver tolerances must be positive");
  }
  if (max_newton_iters < 1) throw std::invalid_argument("max_newton_iters must be >= 1");
  if (max_halvings < 1) throw std::invalid_argument("max_halvings must be >= 1");
  if (gmin < 0.0) throw std::invalid_argument("gmin must be non-negative");
  if (max_internal_step < 0.0) throw std::invalid_argument("max_internal_step must be >= 0");
}

bool WaveformSet::has(std::string_view name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<double>& WaveformSet::channel(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("no channel '" + std::string(name) + "'");
  return channels[static_cast<std::size_t>(it - names.begin())];
}

void WaveformSet::add(std::string name, std::vector<double> samples) {
  if (samples.size() != time.size()) {
    throw std::invalid_argument("channel '" + name + "' length does not match time grid");
  }
  names.push_back(std::move(name));
  channels.push_back(std::move(samples));
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Assembles residual F and Jacobian J at x.
using Assembler = std::function<void(const VectorXd& x, MatrixXd& J, VectorXd& F)>;
// Largest junction phase change (rad) implied by a Newton update.
using PhaseProbe = std::function<double(const VectorXd& dx)>;

struct NewtonResult {
  bool converged = false;
  int iterations = 0;
  VectorXd residual;
};

// Two-sided criterion: residual below abstol and update below
// reltol*|x| + abstol. Rows [0, kcl_rows) are current balances, the rest
// are voltage equations.
NewtonResult newton(VectorXd& x, const Assembler& assemble, const PhaseProbe& phase_probe,
                    int kcl_rows, const SolverConfig& cfg) {
  const auto n = x.size();
  MatrixXd J(n, n);
  VectorXd F(n);
  VectorXd last_dx = VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  NewtonResult res;
  constexpr double kMaxPhaseStep = 1.0;
  for (int it = 0; it <= cfg.max_newton_iters; ++it) {
    J.setZero();
    F.setZero();
    assemble(x, J, F);
    res.iterations = it;
    if (!F.allFinite()) break;
    bool residual_ok = true;
    for (Eigen::Index r = 0; r < n; ++r) {
      const double tol = r < kcl_rows ? cfg.abstol_i : cfg.abstol_v;
      if (std::abs(F[r]) > tol) {
        residual_ok = false;
        break;
      }
    }
    bool delta_ok = it > 0;
    for (Eigen::Index r = 0; delta_ok && r < n; ++r) {
      const double abstol = r < kcl_rows ? cfg.abstol_v : cfg.abstol_i;
      if (std::abs(last_dx[r]) > cfg.reltol * std::abs(x[r]) + abstol) delta_ok = false;
    }
    res.residual = F;
    if (residual_ok && (it == 0 || delta_ok)) {
      res.converged = true;
      return res;
    }
    if (it == cfg.max_newton_iters) break;
    Eigen::PartialPivLU<MatrixXd> lu(J);
    VectorXd dx = lu.solve(-F);
    if (!dx.allFinite()) break;
    if (phase_probe) {
      const double dphi = phase_probe(dx);
      if (dphi > kMaxPhaseStep) dx *= kMaxPhaseStep / dphi;
    }
    x += dx;
    last_dx = dx;
  }
  return res;
}

// ---------------------------------------------------------------- transient

struct TranLayout {
  int nodes = 0;
  std::vector<int> branch;  // device -> unknown index, -1 if none
  int size = 0;

  explicit TranLayout(const Circuit& c) : nodes(c.node_count) {
    size = nodes;
    branch.assign(c.devices.size(), -1);
    for (std::size_t d = 0; d < c.devices.size(); ++d) {
      const auto k = c.devices[d].kind;
      if (k == DeviceKind::VSource || k == DeviceKind::Inductor || k == DeviceKind::Qpsj) {
        branch[d] = size++;
      }
    }
  }
};

double node_v(const VectorXd& x, int node) { return node == 0 ? 0.0 : x[node - 1]; }

void stamp_conductance(MatrixXd& J, VectorXd& F, int a, int b, double g, double i) {
  if (a) {
    F[a - 1] += i;
    J(a - 1, a - 1) += g;
    if (b) J(a - 1, b - 1) -= g;
  }
  if (b) {
    F[b - 1] -= i;
    J(b - 1, b - 1) += g;
    if (a) J(b - 1, a - 1) -= g;
  }
}

void stamp_branch_kcl(MatrixXd& J, VectorXd& F, int a, int b, int k, double i) {
  if (a) {
    F[a - 1] += i;
    J(a - 1, k) += 1.0;
  }
  if (b) {
    F[b - 1] -= i;
    J(b - 1, k) -= 1.0;
  }
}

void stamp_branch_voltage(MatrixXd& J, VectorXd& F, int a, int b, int k, double va, double vb) {
  F[k] += va - vb;
  if (a) J(k, a - 1) += 1.0;
  if (b) J(k, b - 1) -= 1.0;
}

void assemble_tran(const Circuit& c, const TranLayout& L, const VectorXd& x,
                   const std::vector<DeviceState>& prev, double t, double h, IntegrationMethod m,
                   const SolverConfig& cfg, MatrixXd& J, VectorXd& F) {
  for (std::size_t d = 0; d < c.devices.size(); ++d) {
    const auto& dev = c.devices[d];
    const int a = dev.pos, b = dev.neg;
    const double va = node_v(x, a), vb = node_v(x, b);
    const int k = L.branch[d];
    switch (dev.kind) {
      case DeviceKind::Resistor: {
        const double g = resistor_conductance(dev.linear_value());
        stamp_conductance(J, F, a, b, g, g * (va - vb));
        break;
      }
      case DeviceKind::Capacitor: {
        const auto cc = capacitor_companion(dev.linear_value(), prev[d], h, m);
        stamp_conductance(J, F, a, b, cc.g, cc.g * (va - vb) - cc.hist);
        break;
      }
      case DeviceKind::ISource:
        stamp_conductance(J, F, a, b, 0.0, dev.source().value(t));
        break;
      case DeviceKind::VSource:
        stamp_branch_kcl(J, F, a, b, k, x[k]);
        stamp_branch_voltage(J, F, a, b, k, va, vb);
        F[k] -= dev.source().value(t);
        break;
      case DeviceKind::Inductor: {
        const auto lc = inductor_companion(dev.linear_value(), prev[d], h, m);
        stamp_branch_kcl(J, F, a, b, k, x[k]);
        stamp_branch_voltage(J, F, a, b, k, va, vb);
        F[k] -= lc.g * x[k] - lc.hist;
        J(k, k) -= lc.g;
        break;
      }
      case DeviceKind::Qpsj: {
        const auto qc = qpsj_companion(dev.qpsj(), prev[d], x[k], h, m);
        stamp_branch_kcl(J, F, a, b, k, x[k]);
        stamp_branch_voltage(J, F, a, b, k, va, vb);
        F[k] -= qc.voltage;
        J(k, k) -= qc.resistance;
        stamp_conductance(J, F, a, b, cfg.gmin, cfg.gmin * (va - vb));
        break;
      }
      case DeviceKind::Jj:
      case DeviceKind::Mjj: {
        const auto jc = jj_companion(dev.junction(), prev[d], va - vb, h, m);
        stamp_conductance(J, F, a, b, jc.conductance + cfg.gmin,
                          jc.current + cfg.gmin * (va - vb));
        break;
      }
    }
  }
}

std::vector<DeviceState> advance_states(const Circuit& c, const TranLayout& L, const VectorXd& x,
                                        const std::vector<DeviceState>& prev, double h,
                                        IntegrationMethod m) {
  std::vector<DeviceState> next(prev.size());
  for (std::size_t d = 0; d < c.devices.size(); ++d) {
    const auto& dev = c.devices[d];
    const double v = node_v(x, dev.pos) - node_v(x, dev.neg);
    const int k = L.branch[d];
    switch (dev.kind) {
      case DeviceKind::Capacitor:
        next[d] = capacitor_advance(dev.linear_value(), prev[d], v, h, m);
        break;
      case DeviceKind::Inductor:
        next[d] = inductor_advance(dev.linear_value(), prev[d], x[k], h, m);
        break;
      case DeviceKind::Qpsj:
        next[d] = qpsj_advance(dev.qpsj(), prev[d], x[k], h, m);
        break;
      case DeviceKind::Jj:
      case DeviceKind::Mjj:
        next[d] = jj_advance(dev.junction(), prev[d], v, h, m);
        break;
      case DeviceKind::Resistor:
        next[d].v = v;
        next[d].i = v / dev.linear_value();
        break;
      case DeviceKind::VSource:
        next[d].v = v;
        next[d].i = x[k];
        break;
      case DeviceKind::ISource:
        next[d].v = v;
        break;
    }
  }
  return next;
}

bool states_finite(const std::vector<DeviceState>& s) {
  for (const auto& d : s) {
    if (!std::isfinite(d.q) || !std::isfinite(d.phi) || !std::isfinite(d.v) ||
        !std::isfinite(d.i) || !std::isfinite(d.aux)) {
      return false;
    }
  }
  return true;
}

// ----------------------------------------------------------- operating point

struct DcLayout {
  bool frozen = false;
  int nodes = 0;
  std::vector<int> comp;       // node -> component id
  std::vector<int> vvar;       // component -> voltage unknown, -1 for ground's
  std::vector<int> pvar;       // node -> phase unknown, -1 for references
  std::vector<int> branch;     // device -> unknown (V sources, frozen QPSJs)
  int size = 0;

  bool superconducting(const DeviceInstance& d) const {
    return d.kind == DeviceKind::Inductor ||
           (!frozen && (d.kind == DeviceKind::Jj || d.kind == DeviceKind::Mjj));
  }

  DcLayout(const Circuit& c, bool frozen_junctions) : frozen(frozen_junctions), nodes(c.node_count) {
    const int total = nodes + 1;
    std::vector<int> parent(total);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int i) {
      return parent[i] == i ? i : parent[i] = find(parent[i]);
    };
    for (const auto& d : c.devices) {
      if (superconducting(d)) parent[find(d.pos)] = find(d.neg);
    }
    std::vector<int> root_to_comp(total, -1);
    comp.assign(total, -1);
    int ncomp = 0;
    for (int n = 0; n < total; ++n) {
      int r = find(n);
      if (root_to_comp[r] < 0) root_to_comp[r] = ncomp++;
      comp[n] = root_to_comp[r];
    }
    std::vector<int> comp_size(ncomp, 0), reference(ncomp, -1);
    for (int n = 0; n < total; ++n) {
      ++comp_size[comp[n]];
      if (reference[comp[n]] < 0) reference[comp[n]] = n;  // node 0 first for ground's
    }
    vvar.assign(ncomp, -1);
    for (int k = 0; k < ncomp; ++k) {
      if (k != comp[0]) vvar[k] = size++;
    }
    pvar.assign(total, -1);
    for (int n = 1; n < total; ++n) {
      if (comp_size[comp[n]] > 1 && reference[comp[n]] != n) pvar[n] = size++;
    }
    branch.assign(c.devices.size(), -1);
    for (std::size_t d = 0; d < c.devices.size(); ++d) {
      const auto k = c.devices[d].kind;
      if (k == DeviceKind::VSource || (frozen && k == DeviceKind::Qpsj)) branch[d] = size++;
    }
  }

  double voltage(const VectorXd& x, int node) const {
    const int v = vvar[comp[node]];
    return v < 0 ? 0.0 : x[v];
  }
  double phase(const VectorXd& x, int node) const {
    return pvar[node] < 0 ? 0.0 : x[pvar[node]];
  }
};

// KCL rows are the first `nodes` rows (node n -> row n-1); unknown columns
// follow the layout above.
void assemble_dc(const Circuit& c, const DcLayout& L, const VectorXd& x, double lambda,
                 const SolverConfig& cfg, MatrixXd& J, VectorXd& F) {
  const double gshunt = cfg.gmin * 1e-3;
  auto add_current = [&](int a, int b, double i) {
    if (a) F[a - 1] += i;
    if (b) F[b - 1] -= i;
  };
  auto add_dv = [&](int a, int b, double g) {  // d(current a->b)/d(Va - Vb)
    for (int node : {a, b}) {
      if (!node) continue;
      const double sign = node == a ? 1.0 : -1.0;
      const int va = L.vvar[L.comp[a]], vb = L.vvar[L.comp[b]];
      if (va >= 0) J(node - 1, va) += sign * g;
      if (vb >= 0) J(node - 1, vb) -= sign * g;
    }
  };
  auto add_dphi = [&](int a, int b, double g) {  // d(current a->b)/d(theta_a - theta_b)
    for (int node : {a, b}) {
      if (!node) continue;
      const double sign = node == a ? 1.0 : -1.0;
      if (L.pvar[a] >= 0) J(node - 1, L.pvar[a]) += sign * g;
      if (L.pvar[b] >= 0) J(node - 1, L.pvar[b]) -= sign * g;
    }
  };
  auto conductance = [&](int a, int b, double g) {
    const double v = L.voltage(x, a) - L.voltage(x, b);
    add_current(a, b, g * v);
    add_dv(a, b, g);
  };
  auto branch_row = [&](int a, int b, int k) {
    add_current(a, b, x[k]);
    if (a) J(a - 1, k) += 1.0;
    if (b) J(b - 1, k) -= 1.0;
    F[k] += L.voltage(x, a) - L.voltage(x, b);
    const int va = L.vvar[L.comp[a]], vb = L.vvar[L.comp[b]];
    if (va >= 0) J(k, va) += 1.0;
    if (vb >= 0) J(k, vb) -= 1.0;
  };

  for (int n = 1; n <= L.nodes; ++n) conductance(n, 0, gshunt);

  for (std::size_t d = 0; d < c.devices.size(); ++d) {
    const auto& dev = c.devices[d];
    const int a = dev.pos, b = dev.neg;
    switch (dev.kind) {
      case DeviceKind::Resistor:
        conductance(a, b, 1.0 / dev.linear_value());
        break;
      case DeviceKind::Capacitor:
        break;
      case DeviceKind::ISource:
        add_current(a, b, lambda * dev.source().value(0.0));
        break;
      case DeviceKind::VSource: {
        const int k = L.branch[d];
        branch_row(a, b, k);
        F[k] -= lambda * dev.source().value(0.0);
        break;
      }
      case DeviceKind::Inductor: {
        const double g = kPhi0 / (kTwoPi * dev.linear_value());
        add_current(a, b, g * (L.phase(x, a) - L.phase(x, b)));
        add_dphi(a, b, g);
        break;
      }
      case DeviceKind::Jj:
      case DeviceKind::Mjj: {
        const JjParams p = dev.junction();
        if (L.frozen) {
          add_current(a, b, p.ic * std::sin(p.phi_init));
          conductance(a, b, 1.0 / p.rn + cfg.gmin);
        } else {
          const double phi = L.phase(x, a) - L.phase(x, b);
          add_current(a, b, p.ic * std::sin(phi));
          add_dphi(a, b, p.ic * std::cos(phi));
        }
        break;
      }
      case DeviceKind::Qpsj: {
        const auto& p = dev.qpsj();
        conductance(a, b, cfg.gmin);
        if (L.frozen) {
          const int k = L.branch[d];
          branch_row(a, b, k);
          F[k] -= qpsj_voltage(p.q0, p) + p.rn * x[k];
          J(k, k) -= p.rn;
        }
        break;
      }
    }
  }
}

// Initial phase guesses propagated from junction initial phases.
void seed_phases(const Circuit& c, const DcLayout& L, VectorXd& x) {
  std::vector<double> theta(L.nodes + 1, 0.0);
  std::vector<bool> known(L.nodes + 1, false);
  for (int n = 0; n <= L.nodes; ++n) {
    if (L.pvar[n] < 0) known[n] = true;
  }
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& d : c.devices) {
      if (!L.superconducting(d)) continue;
      const double drop = d.kind == DeviceKind::Inductor ? 0.0 : d.junction().phi_init;
      if (known[d.pos] && !known[d.neg]) {
        theta[d.neg] = theta[d.pos] - drop;
        known[d.neg] = progress = true;
      } else if (known[d.neg] && !known[d.pos]) {
        theta[d.pos] = theta[d.neg] + drop;
        known[d.pos] = progress = true;
      }
    }
  }
  for (int n = 0; n <= L.nodes; ++n) {
    if (L.pvar[n] >= 0) x[L.pvar[n]] = theta[n];
  }
}

Solution dc_solve(const Circuit& c, const SolverConfig& cfg, bool frozen) {
  cfg.validate();
  const DcLayout L(c, frozen);
  VectorXd x = VectorXd::Zero(L.size);
  seed_phases(c, L, x);

  PhaseProbe probe = [&](const VectorXd& dx) {
    double m = 0.0;
    for (int n = 1; n <= L.nodes; ++n) {
      if (L.pvar[n] >= 0) m = std::max(m, std::abs(dx[L.pvar[n]]));
    }
    return m;
  };
  auto run = [&](double lambda, VectorXd& guess) {
    return newton(
        guess,
        [&](const VectorXd& xx, MatrixXd& J, VectorXd& F) {
          assemble_dc(c, L, xx, lambda, cfg, J, F);
        },
        probe, L.nodes, cfg);
  };

  VectorXd trial = x;
  NewtonResult r = run(1.0, trial);
  if (!r.converged) {
    // Source stepping from zero.
    trial = x;
    for (int s = 1; s <= 10; ++s) {
      r = run(0.1 * s, trial);
      if (!r.converged) break;
    }
    if (!r.converged) {
      std::string where = "unknown";
      if (r.residual.size() >= L.nodes && L.nodes > 0) {
        Eigen::Index worst = 0;
        r.residual.head(L.nodes).cwiseAbs().maxCoeff(&worst);
        where = c.node_names[static_cast<std::size_t>(worst) + 1];
      }
      throw ConvergenceError(-1.0, "operating point did not converge; worst residual at node '" +
                                       where + "'");
    }
  }
  x = trial;

  Solution s;
  s.frozen_junctions = frozen;
  s.node_voltages.assign(L.nodes + 1, 0.0);
  for (int n = 1; n <= L.nodes; ++n) s.node_voltages[n] = L.voltage(x, n);
  s.states.assign(c.devices.size(), {});
  s.device_currents.assign(c.devices.size(), 0.0);
  for (std::size_t d = 0; d < c.devices.size(); ++d) {
    const auto& dev = c.devices[d];
    const double v = s.node_voltages[dev.pos] - s.node_voltages[dev.neg];
    auto& st = s.states[d];
    double& i = s.device_currents[d];
    switch (dev.kind) {
      case DeviceKind::Resistor:
        i = v / dev.linear_value();
        st.v = v;
        st.i = i;
        break;
      case DeviceKind::Capacitor:
        st.v = v;
        break;
      case DeviceKind::Inductor:
        i = kPhi0 / (kTwoPi * dev.linear_value()) * (L.phase(x, dev.pos) - L.phase(x, dev.neg));
        st.i = i;
        break;
      case DeviceKind::VSource:
        i = x[L.branch[d]];
        st.v = v;
        st.i = i;
        break;
      case DeviceKind::ISource:
        i = dev.source().value(0.0);
        st.v = v;
        break;
      case DeviceKind::Jj:
      case DeviceKind::Mjj: {
        const JjParams p = dev.junction();
        if (frozen) {
          st.phi = p.phi_init;
          st.v = v;
          i = p.ic * std::sin(p.phi_init) + v / p.rn;
        } else {
          st.phi = L.phase(x, dev.pos) - L.phase(x, dev.neg);
          i = p.ic * std::sin(st.phi);
        }
        st.i = i;
        break;
      }
      case DeviceKind::Qpsj: {
        const auto& p = dev.qpsj();
        if (frozen) {
          st.q = p.q0;
          i = x[L.branch[d]];
          st.i = i;
          st.v = v;
          break;
        }
        if (std::abs(v) >= p.vc) {
          throw ConvergenceError(-1.0, "qpsj " + dev.name + " has no blockade equilibrium (|V| = " +
                                           std::to_string(std::abs(v)) + " mV >= Vc)");
        }
        // Equilibrium branch nearest the initial charge.
        const double base = kTwoE / kTwoPi * std::asin(v / p.vc);
        st.q = base + kTwoE * std::round((p.q0 - base) / kTwoE);
        st.v = v;
        break;
      }
    }
  }
  return s;
}

}  // namespace

Solution dc_operating_point(const Circuit& circuit, const SolverConfig& cfg) {
  return dc_solve(circuit, cfg, false);
}

Solution initial_state(const Circuit& circuit, const SolverConfig& cfg) {
  return dc_solve(circuit, cfg, true);
}

WaveformSet tran(const Circuit& c, double tstep, double tstop, const SolverConfig& cfg,
                 TranStats* stats, double tstart) {
  cfg.validate();
  if (!(tstep > 0.0) || !(tstop > tstep)) {
    throw std::invalid_argument("tran requires 0 < tstep < tstop");
  }
  TranStats local;
  TranStats& st = stats ? *stats : local;
  st = {};

  Solution op;
  try {
    op = dc_operating_point(c, cfg);
  } catch (const ConvergenceError&) {
    op = initial_state(c, cfg);
    st.frozen_start = true;
  }

  const TranLayout L(c);
  VectorXd x = VectorXd::Zero(L.size);
  for (int n = 1; n <= L.nodes; ++n) x[n - 1] = op.node_voltages[n];
  for (std::size_t d = 0; d < c.devices.size(); ++d) {
    if (L.branch[d] >= 0) x[L.branch[d]] = op.device_currents[d];
  }
  std::vector<DeviceState> states = op.states;

  WaveformSet w;
  std::vector<std::vector<double>> samples(c.save_list.size());
  auto record = [&](double t) {
    if (t < tstart - 1e-9 * tstep) return;
    w.time.push_back(t);
    for (std::size_t p = 0; p < c.save_list.size(); ++p) {
      const auto& probe = c.save_list[p];
      double val = 0.0;
      if (probe.probe.kind == Probe::Kind::Voltage) {
        val = node_v(x, probe.index);
      } else {
        const auto& dev = c.devices[static_cast<std::size_t>(probe.index)];
        switch (dev.kind) {
          case DeviceKind::ISource: val = dev.source().value(t); break;
          case DeviceKind::VSource:
          case DeviceKind::Inductor:
          case DeviceKind::Qpsj: val = x[L.branch[probe.index]]; break;
          default: val = states[probe.index].i; break;
        }
      }
      samples[p].push_back(val);
    }
  };
  // Time zero currents of resistors/junctions come from the operating point.
  for (std::size_t d = 0; d < c.devices.size(); ++d) states[d].i = op.device_currents[d];
  record(0.0);

  PhaseProbe probe;
  const double h_nom = cfg.max_internal_step > 0.0 ? std::min(tstep, cfg.max_internal_step) : tstep;
  const long nsteps = static_cast<long>(std::floor(tstop / tstep * (1.0 + 1e-12)));
  double t = 0.0;
  double h_cur = h_nom;
  int level = 0;
  bool first = true;

  for (long k = 1; k <= nsteps; ++k) {
    const double target = static_cast<double>(k) * tstep;
    while (t < target) {
      // Land exactly on the grid point rather than leave a sliver step.
      const bool last = t + h_cur >= target - 1e-6 * h_nom;
      const double h = last ? target - t : h_cur;
      const IntegrationMethod m =
          (first || level > 0) ? IntegrationMethod::BackwardEuler : cfg.method;
      VectorXd trial = x;
      const double tn = t + h;
      probe = [&](const VectorXd& dx) {
        double worst = 0.0;
        const double w_new = m == IntegrationMethod::Trapezoidal ? 0.5 * h : h;
        for (std::size_t d = 0; d < c.devices.size(); ++d) {
          const auto& dev = c.devices[d];
          if (dev.kind == DeviceKind::Qpsj) {
            worst = std::max(worst, std::abs(dx[L.branch[d]]) * w_new * kTwoPi / kTwoE);
          } else if (dev.kind == DeviceKind::Jj || dev.kind == DeviceKind::Mjj) {
            const double dv = (dev.pos ? dx[dev.pos - 1] : 0.0) - (dev.neg ? dx[dev.neg - 1] : 0.0);
            worst = std::max(worst, std::abs(dv) * w_new * kTwoPi / kPhi0);
          }
        }
        return worst;
      };
      NewtonResult r = newton(
          trial,
          [&](const VectorXd& xx, MatrixXd& J, VectorXd& F) {
            assemble_tran(c, L, xx, states, tn, h, m, cfg, J, F);
          },
          probe, L.nodes, cfg);
      st.newton_iterations += r.iterations;
      std::vector<DeviceState> next;
      if (r.converged) next = advance_states(c, L, trial, states, h, m);
      if (r.converged && states_finite(next)) {
        x = trial;
        states = std::move(next);
        t = last ? target : tn;
        first = false;
        ++st.accepted_steps;
        if (level > 0) {
          --level;
          h_cur = std::min(h_nom, h_cur * 2.0);
        }
      } else {
        ++level;
        ++st.halvings;
        if (level > cfg.max_halvings) {
          throw ConvergenceError(t, "transient step did not converge at t = " +
                                        std::to_string(t) + " ps after " +
                                        std::to_string(cfg.max_halvings) + " halvings");
        }
        h_cur = h * 0.5;
      }
    }
    record(target);
  }

  w.names.reserve(c.save_list.size());
  for (std::size_t p = 0; p < c.save_list.size(); ++p) {
    w.names.push_back(c.save_list[p].probe.channel_name());
    w.channels.push_back(std::move(samples[p]));
  }
  return w;
}

WaveformSet tran(const Circuit& c, const SolverConfig& cfg, TranStats* stats) {
  return tran(c, c.tran.tstep, c.tran.tstop, cfg, stats, c.tran.tstart);
}

}  // namespace qpsj

