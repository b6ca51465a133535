#include "qpsj/devices.hpp"

#include <cmath>
#include <stdexcept>

namespace qpsj {

namespace {

constexpr double kChargeToAngle = kTwoPi / kTwoE;
constexpr double kFluxToAngle = kTwoPi / kPhi0;

// Weight of the new-point derivative in the integration rule.
double new_weight(double h, IntegrationMethod m) {
  return m == IntegrationMethod::Trapezoidal ? 0.5 * h : h;
}

}  // namespace

double qpsj_voltage(double q, const QpsjParams& p) {
  return p.vc * std::sin(kChargeToAngle * q);
}

double jj_current(double phi, const JjParams& p) { return p.ic * std::sin(phi); }

MjjParams mjj_set_state(const MjjParams& p, std::size_t idx) {
  if (idx >= p.states.size()) {
    throw std::out_of_range("mjj state index " + std::to_string(idx) + " out of range (" +
                            std::to_string(p.states.size()) + " states)");
  }
  MjjParams out = p;
  out.active_state = idx;
  return out;
}

double damping_parameter(double vc, double l, double r) {
  if (!(r > 0.0)) {
    throw std::invalid_argument("damping_parameter: resistance must be positive");
  }
  return kTwoPi * vc * l / (kTwoE * r * r);
}

LinearCompanion capacitor_companion(double c, const DeviceState& prev, double h,
                                    IntegrationMethod m) {
  if (m == IntegrationMethod::Trapezoidal) {
    const double g = 2.0 * c / h;
    return {g, g * prev.v + prev.i};
  }
  const double g = c / h;
  return {g, g * prev.v};
}

LinearCompanion inductor_companion(double l, const DeviceState& prev, double h,
                                   IntegrationMethod m) {
  if (m == IntegrationMethod::Trapezoidal) {
    const double r = 2.0 * l / h;
    return {r, r * prev.i + prev.v};
  }
  const double r = l / h;
  return {r, r * prev.i};
}

QpsjCompanion qpsj_companion(const QpsjParams& p, const DeviceState& prev, double i,
                             double h, IntegrationMethod m) {
  const double w = new_weight(h, m);
  const double q = m == IntegrationMethod::Trapezoidal ? prev.q + w * (i + prev.i)
                                                       : prev.q + w * i;
  const double arg = kChargeToAngle * q;
  QpsjCompanion out;
  out.charge = q;
  out.dv_dq = p.vc * kChargeToAngle * std::cos(arg);

  double vl = 0.0, rl = 0.0;
  if (p.ls > 0.0) {
    // The series inductor shares the branch history in prev.i / prev.aux.
    DeviceState lprev;
    lprev.i = prev.i;
    lprev.v = prev.aux;
    const LinearCompanion lc = inductor_companion(p.ls, lprev, h, m);
    rl = lc.g;
    vl = lc.g * i - lc.hist;
  }
  out.inductive_voltage = vl;
  out.voltage = p.vc * std::sin(arg) + p.rn * i + vl;
  out.resistance = out.dv_dq * w + p.rn + rl;
  return out;
}

JjCompanion jj_companion(const JjParams& p, const DeviceState& prev, double v, double h,
                         IntegrationMethod m) {
  const double w = new_weight(h, m);
  const double phi = m == IntegrationMethod::Trapezoidal
                         ? prev.phi + w * kFluxToAngle * (v + prev.v)
                         : prev.phi + w * kFluxToAngle * v;
  JjCompanion out;
  out.phase = phi;
  out.di_dphi = p.ic * std::cos(phi);

  double ic = 0.0, gc = 0.0;
  if (p.cj > 0.0) {
    DeviceState cprev;
    cprev.v = prev.v;
    cprev.i = prev.aux;
    const LinearCompanion cc = capacitor_companion(p.cj, cprev, h, m);
    gc = cc.g;
    ic = cc.g * v - cc.hist;
  }
  out.capacitive_current = ic;
  out.current = p.ic * std::sin(phi) + v / p.rn + ic;
  out.conductance = out.di_dphi * w * kFluxToAngle + 1.0 / p.rn + gc;
  return out;
}

DeviceState qpsj_advance(const QpsjParams& p, const DeviceState& prev, double i, double h,
                         IntegrationMethod m) {
  const QpsjCompanion c = qpsj_companion(p, prev, i, h, m);
  DeviceState s;
  s.q = c.charge;
  s.i = i;
  s.aux = c.inductive_voltage;
  s.v = c.voltage;
  return s;
}

DeviceState jj_advance(const JjParams& p, const DeviceState& prev, double v, double h,
                       IntegrationMethod m) {
  const JjCompanion c = jj_companion(p, prev, v, h, m);
  DeviceState s;
  s.phi = c.phase;
  s.v = v;
  s.aux = c.capacitive_current;
  s.i = c.current;
  return s;
}

DeviceState capacitor_advance(double c, const DeviceState& prev, double v, double h,
                              IntegrationMethod m) {
  const LinearCompanion lc = capacitor_companion(c, prev, h, m);
  DeviceState s;
  s.v = v;
  s.i = lc.g * v - lc.hist;
  return s;
}

DeviceState inductor_advance(double l, const DeviceState& prev, double i, double h,
                             IntegrationMethod m) {
  const LinearCompanion lc = inductor_companion(l, prev, h, m);
  DeviceState s;
  s.i = i;
  s.v = lc.g * i - lc.hist;
  return s;
}

double SourceWaveform::value(double t) const {
  if (shape == Shape::Dc) return dc;
  if (t < td) return v1;
  double tt = t - td;
  if (per > 0.0) tt = std::fmod(tt, per);
  if (tt < tr) return v1 + (v2 - v1) * tt / tr;
  tt -= tr;
  if (tt < pw) return v2;
  tt -= pw;
  if (tt < tf) return v2 + (v1 - v2) * tt / tf;
  return v1;
}

long SourceWaveform::edges_before(double t) const {
  if (shape == Shape::Dc || t < td) return 0;
  if (per <= 0.0) return 1;
  return static_cast<long>(std::floor((t - td) / per)) + 1;
}

}  // namespace qpsj
