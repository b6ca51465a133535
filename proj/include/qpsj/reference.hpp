#pragma once

// Brute-force oracle: classical fourth-order Runge-Kutta on the explicitly
// formed state equations of a small circuit, at 1/100 of the output step.
// Shares no code with the MNA engine's companion models or Newton loop.

#include "qpsj/engine.hpp"

namespace qpsj {

// Supports circuits with at most two state variables (capacitor voltages,
// inductor currents, junction phase/charge, JJ capacitor voltage, QPSJ
// series-inductor current). Integration starts from rest: reactive states
// zero, junctions at their initial phase/charge. Throws
// std::invalid_argument for unsupported topologies.
WaveformSet reference_integrate(const Circuit& circuit, double tstep, double tstop);

}  // namespace qpsj
