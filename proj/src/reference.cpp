#include "qpsj/reference.hpp"

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <stdexcept>

#include "qpsj/units.hpp"

namespace qpsj {

namespace {

// How each device enters the resistive network solved at every RK stage.
enum class Role { Conductance, CurrentSource, VoltageSource, QpsjNorton };

struct StateRef {
  enum class Kind { CapVoltage, IndCurrent, Phase, JjVoltage, Charge, QpsjCurrent } kind;
  std::size_t device;
};

class Model {
 public:
  explicit Model(const Circuit& c) : c_(c) {
    slot_.assign(c.devices.size(), {-1, -1});
    vsrc_.assign(c.devices.size(), -1);
    int nv = 0;
    for (std::size_t d = 0; d < c.devices.size(); ++d) {
      const auto& dev = c.devices[d];
      switch (dev.kind) {
        case DeviceKind::Capacitor:
          slot_[d][0] = add_state(StateRef::Kind::CapVoltage, d);
          vsrc_[d] = nv++;
          break;
        case DeviceKind::Inductor:
          slot_[d][0] = add_state(StateRef::Kind::IndCurrent, d);
          break;
        case DeviceKind::VSource:
          vsrc_[d] = nv++;
          break;
        case DeviceKind::Jj:
        case DeviceKind::Mjj:
          slot_[d][0] = add_state(StateRef::Kind::Phase, d);
          if (dev.junction().cj > 0.0) {
            slot_[d][1] = add_state(StateRef::Kind::JjVoltage, d);
            vsrc_[d] = nv++;
          }
          break;
        case DeviceKind::Qpsj:
          slot_[d][0] = add_state(StateRef::Kind::Charge, d);
          if (dev.qpsj().ls > 0.0) slot_[d][1] = add_state(StateRef::Kind::QpsjCurrent, d);
          break;
        default:
          break;
      }
    }
    if (states_.size() > 2) {
      throw std::invalid_argument("reference_integrate: unsupported topology (" +
                                  std::to_string(states_.size()) + " state variables, max 2)");
    }
    n_ = c.node_count;
    size_ = n_ + nv;
  }

  std::size_t state_count() const { return states_.size(); }

  Eigen::VectorXd initial() const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(states_.size()));
    for (std::size_t k = 0; k < states_.size(); ++k) {
      const auto& dev = c_.devices[states_[k].device];
      if (states_[k].kind == StateRef::Kind::Phase) y[k] = dev.junction().phi_init;
      if (states_[k].kind == StateRef::Kind::Charge) y[k] = dev.qpsj().q0;
    }
    return y;
  }

  // Solves the resistive network with states frozen; returns node voltages
  // (index 0 = ground) and per-device branch currents.
  void solve(double t, const Eigen::VectorXd& y, std::vector<double>& v,
             std::vector<double>& i) const {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(size_, size_);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(size_);
    auto g_stamp = [&](int p, int q, double g) {
      if (p) A(p - 1, p - 1) += g;
      if (q) A(q - 1, q - 1) += g;
      if (p && q) {
        A(p - 1, q - 1) -= g;
        A(q - 1, p - 1) -= g;
      }
    };
    auto i_stamp = [&](int p, int q, double cur) {  // cur flows p -> q inside the element
      if (p) b[p - 1] -= cur;
      if (q) b[q - 1] += cur;
    };
    auto v_stamp = [&](int p, int q, int k, double volts) {
      const int row = n_ + k;
      if (p) {
        A(p - 1, row) += 1.0;
        A(row, p - 1) += 1.0;
      }
      if (q) {
        A(q - 1, row) -= 1.0;
        A(row, q - 1) -= 1.0;
      }
      b[row] = volts;
    };
    for (std::size_t d = 0; d < c_.devices.size(); ++d) {
      const auto& dev = c_.devices[d];
      const int p = dev.pos, q = dev.neg;
      switch (dev.kind) {
        case DeviceKind::Resistor:
          g_stamp(p, q, 1.0 / dev.linear_value());
          break;
        case DeviceKind::Capacitor:
          v_stamp(p, q, vsrc_[d], y[slot_[d][0]]);
          break;
        case DeviceKind::Inductor:
          i_stamp(p, q, y[slot_[d][0]]);
          break;
        case DeviceKind::VSource:
          v_stamp(p, q, vsrc_[d], dev.source().value(t));
          break;
        case DeviceKind::ISource:
          i_stamp(p, q, dev.source().value(t));
          break;
        case DeviceKind::Jj:
        case DeviceKind::Mjj: {
          const JjParams j = dev.junction();
          if (j.cj > 0.0) {
            v_stamp(p, q, vsrc_[d], y[slot_[d][1]]);
          } else {
            g_stamp(p, q, 1.0 / j.rn);
            i_stamp(p, q, j.ic * std::sin(y[slot_[d][0]]));
          }
          break;
        }
        case DeviceKind::Qpsj: {
          const auto& qp = dev.qpsj();
          if (qp.ls > 0.0) {
            i_stamp(p, q, y[slot_[d][1]]);
          } else {
            const double g = 1.0 / qp.rn;
            g_stamp(p, q, g);
            i_stamp(p, q, -g * qp.vc * std::sin(kTwoPi * y[slot_[d][0]] / kTwoE));
          }
          break;
        }
      }
    }
    const Eigen::VectorXd x = A.partialPivLu().solve(b);
    v.assign(n_ + 1, 0.0);
    for (int k = 1; k <= n_; ++k) v[k] = x[k - 1];
    i.assign(c_.devices.size(), 0.0);
    for (std::size_t d = 0; d < c_.devices.size(); ++d) {
      const auto& dev = c_.devices[d];
      const double vd = v[dev.pos] - v[dev.neg];
      switch (dev.kind) {
        case DeviceKind::Resistor: i[d] = vd / dev.linear_value(); break;
        case DeviceKind::Capacitor:
        case DeviceKind::VSource: i[d] = x[n_ + vsrc_[d]]; break;
        case DeviceKind::Inductor: i[d] = y[slot_[d][0]]; break;
        case DeviceKind::ISource: i[d] = dev.source().value(t); break;
        case DeviceKind::Jj:
        case DeviceKind::Mjj: {
          const JjParams j = dev.junction();
          i[d] = j.cj > 0.0 ? x[n_ + vsrc_[d]] : j.ic * std::sin(y[slot_[d][0]]) + vd / j.rn;
          break;
        }
        case DeviceKind::Qpsj: {
          const auto& qp = dev.qpsj();
          i[d] = qp.ls > 0.0 ? y[slot_[d][1]]
                             : (vd - qp.vc * std::sin(kTwoPi * y[slot_[d][0]] / kTwoE)) / qp.rn;
          break;
        }
      }
    }
  }

  Eigen::VectorXd derivative(double t, const Eigen::VectorXd& y) const {
    std::vector<double> v, i;
    solve(t, y, v, i);
    Eigen::VectorXd dy(y.size());
    for (std::size_t k = 0; k < states_.size(); ++k) {
      const std::size_t d = states_[k].device;
      const auto& dev = c_.devices[d];
      const double vd = v[dev.pos] - v[dev.neg];
      switch (states_[k].kind) {
        case StateRef::Kind::CapVoltage:
          dy[k] = i[d] / dev.linear_value();
          break;
        case StateRef::Kind::IndCurrent:
          dy[k] = vd / dev.linear_value();
          break;
        case StateRef::Kind::Phase:
          dy[k] = kTwoPi * vd / kPhi0;
          break;
        case StateRef::Kind::JjVoltage: {
          const JjParams j = dev.junction();
          dy[k] = (i[d] - j.ic * std::sin(y[slot_[d][0]]) - vd / j.rn) / j.cj;
          break;
        }
        case StateRef::Kind::Charge:
          dy[k] = i[d];
          break;
        case StateRef::Kind::QpsjCurrent: {
          const auto& qp = dev.qpsj();
          dy[k] = (vd - qp.vc * std::sin(kTwoPi * y[slot_[d][0]] / kTwoE) - qp.rn * i[d]) / qp.ls;
          break;
        }
      }
    }
    return dy;
  }

 private:
  int add_state(StateRef::Kind kind, std::size_t d) {
    states_.push_back({kind, d});
    return static_cast<int>(states_.size()) - 1;
  }

  const Circuit& c_;
  std::vector<StateRef> states_;
  std::vector<std::array<int, 2>> slot_;
  std::vector<int> vsrc_;
  int n_ = 0;
  int size_ = 0;
};

}  // namespace

WaveformSet reference_integrate(const Circuit& circuit, double tstep, double tstop) {
  if (!(tstep > 0.0) || !(tstop > tstep)) {
    throw std::invalid_argument("reference_integrate requires 0 < tstep < tstop");
  }
  const Model model(circuit);
  constexpr int kSub = 100;
  const double h = tstep / kSub;
  Eigen::VectorXd y = model.initial();

  WaveformSet w;
  std::vector<std::vector<double>> samples(circuit.save_list.size());
  std::vector<double> v, i;
  auto record = [&](double t) {
    model.solve(t, y, v, i);
    w.time.push_back(t);
    for (std::size_t p = 0; p < circuit.save_list.size(); ++p) {
      const auto& probe = circuit.save_list[p];
      samples[p].push_back(probe.probe.kind == Probe::Kind::Voltage
                               ? v[static_cast<std::size_t>(probe.index)]
                               : i[static_cast<std::size_t>(probe.index)]);
    }
  };
  record(0.0);
  const long nsteps = static_cast<long>(std::floor(tstop / tstep * (1.0 + 1e-12)));
  for (long k = 1; k <= nsteps; ++k) {
    const double t0 = static_cast<double>(k - 1) * tstep;
    for (int s = 0; s < kSub; ++s) {
      const double t = t0 + s * h;
      const Eigen::VectorXd k1 = model.derivative(t, y);
      const Eigen::VectorXd k2 = model.derivative(t + 0.5 * h, y + 0.5 * h * k1);
      const Eigen::VectorXd k3 = model.derivative(t + 0.5 * h, y + 0.5 * h * k2);
      const Eigen::VectorXd k4 = model.derivative(t + h, y + h * k3);
      y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!y.allFinite()) throw std::runtime_error("reference_integrate: state diverged");
    record(static_cast<double>(k) * tstep);
  }
  for (std::size_t p = 0; p < circuit.save_list.size(); ++p) {
    w.names.push_back(circuit.save_list[p].probe.channel_name());
    w.channels.push_back(std::move(samples[p]));
  }
  return w;
}

}  // namespace qpsj
