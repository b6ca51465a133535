#pragma once

// Netlist dialect: parsing into an AST, elaboration into a Circuit, and
// serialization back to text.
//
//   line 1 = title; `*` = comment; `+` = continuation
//   R<name> n+ n- <value> | L<name> ... | C<name> ...
//   V<name> n+ n- dc <v>  |  V<name> n+ n- pulse(<v1> <v2> <td> <tr> <tf> <pw> <per>)
//   I<name> n+ n- dc <i>  (same pulse form)
//   qpsj <name> n+ n- vc=<V> rn=<Ohm> ls=<H> [q0=<C>]
//   jj <name> n+ n- ic=<A> rn=<Ohm> cj=<F> [phi0=<rad>]
//   mjj <name> n+ n- states=<A,A,...> state=<index> rn=<Ohm> cj=<F>
//   .tran <tstep> <tstop> [tstart] ; .save v(<node>) i(<dev>) ... ; .end

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qpsj/devices.hpp"

namespace qpsj {

enum class DeviceKind { Resistor, Inductor, Capacitor, VSource, ISource, Qpsj, Jj, Mjj };

std::string_view to_string(DeviceKind k);

// SI value with optional suffix f,p,n,u,m,k,meg,g (case-insensitive).
double parse_value(std::string_view token);

struct SourceCard {
  bool pulse = false;
  double dc = 0.0;
  std::array<double, 7> args{};  // v1 v2 td tr tf pw per (SI)
};

struct DeviceCard {
  DeviceKind kind = DeviceKind::Resistor;
  std::string name;
  std::array<std::string, 2> nodes;
  // SI values. R/L/C store theirs under "value"; MJJ stores "state".
  std::map<std::string, double> params;
  std::vector<double> states;  // MJJ critical currents, A
  SourceCard source;           // V / I only
  int line = 0;
};

struct Probe {
  enum class Kind { Voltage, Current };
  Kind kind = Kind::Voltage;
  std::string target;  // node name or device name, lower-case

  std::string channel_name() const;
  bool operator==(const Probe&) const = default;
};

struct TranDirective {
  double tstep = 0.0, tstop = 0.0, tstart = 0.0;  // seconds
  int line = 0;
};

struct NetlistAst {
  std::string title;
  std::vector<DeviceCard> cards;
  std::optional<TranDirective> tran;
  std::vector<Probe> saves;
  bool has_end = false;
};

NetlistAst parse_netlist(std::string_view text);
std::string write_netlist(const NetlistAst& ast);

struct LinearParams {
  double value = 0.0;  // kOhm, nH or fF
};

struct DeviceInstance {
  DeviceKind kind = DeviceKind::Resistor;
  std::string name;  // lower-case
  int pos = 0, neg = 0;  // node indices, 0 = ground
  std::variant<LinearParams, SourceWaveform, QpsjParams, JjParams, MjjParams> params;

  double linear_value() const { return std::get<LinearParams>(params).value; }
  const SourceWaveform& source() const { return std::get<SourceWaveform>(params); }
  const QpsjParams& qpsj() const { return std::get<QpsjParams>(params); }
  // JJ parameters for both plain and magnetic junctions.
  JjParams junction() const;
  bool is_junction() const {
    return kind == DeviceKind::Qpsj || kind == DeviceKind::Jj || kind == DeviceKind::Mjj;
  }
};

struct ResolvedProbe {
  Probe probe;
  int index = 0;  // node index or device index
};

struct TranSpec {
  double tstep = 0.0, tstop = 0.0, tstart = 0.0;  // ps
};

// Elaborated, immutable circuit in internal units. Node 0 is ground;
// non-ground nodes are 1..node_count.
struct Circuit {
  std::string title;
  int node_count = 0;
  std::vector<std::string> node_names;  // index -> name, [0] = "0"
  std::vector<DeviceInstance> devices;
  std::vector<ResolvedProbe> save_list;
  TranSpec tran;

  int node_index(std::string_view name) const;      // -1 when absent
  int device_index(std::string_view name) const;    // -1 when absent
  std::vector<int> sources() const;                 // indices of V and I devices
};

Circuit elaborate(const NetlistAst& ast);

// Inverse of elaborate, up to formatting.
NetlistAst to_ast(const Circuit& c);

}  // namespace qpsj
