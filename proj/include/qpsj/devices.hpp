#pragma once

// Device parameters, constitutive relations and companion models.
// Everything here is in the internal scaled unit system (see units.hpp).

#include <cstddef>
#include <vector>

#include "qpsj/units.hpp"

namespace qpsj {

enum class IntegrationMethod { Trapezoidal, BackwardEuler };

struct QpsjParams {
  double vc = 0.0;  // critical voltage, mV
  double rn = 0.0;  // series normal resistance, kOhm
  double ls = 0.0;  // series inductance, nH
  double q0 = 0.0;  // initial charge, aC
};

struct JjParams {
  double ic = 0.0;        // critical current, uA
  double rn = 0.0;        // shunt resistance, kOhm
  double cj = 0.0;        // junction capacitance, fF
  double phi_init = 0.0;  // initial phase, rad
};

// Magnetic JJ: an RCSJ junction whose critical current is one of a set of
// discrete, externally written states.
struct MjjParams {
  std::vector<double> states;  // uA
  std::size_t active_state = 0;
  double rn = 0.0;
  double cj = 0.0;
  double phi_init = 0.0;

  double ic() const { return states.at(active_state); }
  JjParams effective() const { return {ic(), rn, cj, phi_init}; }
};

// Pure relations.
double qpsj_voltage(double q, const QpsjParams& p);
double jj_current(double phi, const JjParams& p);
MjjParams mjj_set_state(const MjjParams& p, std::size_t idx);

// 2*pi*Vc*L / (2e*R^2). Throws std::invalid_argument for r <= 0.
double damping_parameter(double vc, double l, double r);

// Dynamic state carried by one device between accepted timesteps.
//   capacitor: v, i
//   inductor:  i, v
//   QPSJ:      q, i (= dq/dt), aux (= Ls di/dt)
//   JJ / MJJ:  phi, v, aux (= Cj dv/dt)
struct DeviceState {
  double q = 0.0;
  double phi = 0.0;
  double v = 0.0;
  double i = 0.0;
  double aux = 0.0;
};

// Linear companions: capacitor i = g*v - hist, inductor v = r*i - hist.
struct LinearCompanion {
  double g = 0.0;
  double hist = 0.0;
};

LinearCompanion capacitor_companion(double c, const DeviceState& prev, double h,
                                    IntegrationMethod m);
LinearCompanion inductor_companion(double l, const DeviceState& prev, double h,
                                   IntegrationMethod m);
inline double resistor_conductance(double r) { return 1.0 / r; }

// QPSJ branch evaluated at a trial branch current. `voltage` is the branch
// voltage the discretized element demands, `resistance` its derivative with
// respect to the current and `dv_dq` the slope of the junction term with
// respect to charge.
struct QpsjCompanion {
  double voltage = 0.0;
  double resistance = 0.0;
  double dv_dq = 0.0;
  double charge = 0.0;
  double inductive_voltage = 0.0;
};

QpsjCompanion qpsj_companion(const QpsjParams& p, const DeviceState& prev, double i,
                             double h, IntegrationMethod m);

// JJ evaluated at a trial junction voltage (dual of the QPSJ companion).
struct JjCompanion {
  double current = 0.0;
  double conductance = 0.0;
  double di_dphi = 0.0;
  double phase = 0.0;
  double capacitive_current = 0.0;
};

JjCompanion jj_companion(const JjParams& p, const DeviceState& prev, double v, double h,
                         IntegrationMethod m);

// Committed state after a step, given the converged branch variable.
DeviceState qpsj_advance(const QpsjParams& p, const DeviceState& prev, double i, double h,
                         IntegrationMethod m);
DeviceState jj_advance(const JjParams& p, const DeviceState& prev, double v, double h,
                       IntegrationMethod m);
DeviceState capacitor_advance(double c, const DeviceState& prev, double v, double h,
                              IntegrationMethod m);
DeviceState inductor_advance(double l, const DeviceState& prev, double i, double h,
                             IntegrationMethod m);

// Independent source waveform; value() is in the source's own unit.
struct SourceWaveform {
  enum class Shape { Dc, Pulse };
  Shape shape = Shape::Dc;
  double dc = 0.0;
  // pulse(v1 v2 td tr tf pw per), times in ps
  double v1 = 0.0, v2 = 0.0, td = 0.0, tr = 0.0, tf = 0.0, pw = 0.0, per = 0.0;

  double value(double t) const;
  // Number of pulse leading edges at or before t.
  long edges_before(double t) const;
};

}  // namespace qpsj
