#include "qpsj/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

#include "qpsj/error.hpp"
#include "qpsj/units.hpp"

namespace qpsj {

std::string_view to_string(DeviceKind k) {
  switch (k) {
    case DeviceKind::Resistor: return "resistor";
    case DeviceKind::Inductor: return "inductor";
    case DeviceKind::Capacitor: return "capacitor";
    case DeviceKind::VSource: return "vsource";
    case DeviceKind::ISource: return "isource";
    case DeviceKind::Qpsj: return "qpsj";
    case DeviceKind::Jj: return "jj";
    case DeviceKind::Mjj: return "mjj";
  }
  return "?";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct LogicalLine {
  int line = 0;
  std::string text;
};

std::vector<std::string> tokenize(const std::string& text) {
  std::string spaced;
  spaced.reserve(text.size() + 16);
  for (char c : text) {
    if (c == '(' || c == ')' || c == '=') {
      spaced += ' ';
      spaced += c;
      spaced += ' ';
    } else if (std::iscntrl(static_cast<unsigned char>(c))) {
      spaced += ' ';
    } else {
      spaced += c;
    }
  }
  std::vector<std::string> toks;
  std::istringstream in(spaced);
  std::string t;
  while (in >> t) toks.push_back(lower(t));
  return toks;
}

double value_at(const std::string& tok, int line) {
  try {
    return parse_value(tok);
  } catch (const ParseError& e) {
    throw ParseError(line, e.what());
  }
}

class CardParser {
 public:
  CardParser(std::vector<std::string> toks, int line) : toks_(std::move(toks)), line_(line) {}

  bool done() const { return pos_ >= toks_.size(); }
  const std::string& peek() const {
    if (done()) fail("unexpected end of line");
    return toks_[pos_];
  }
  std::string next(const char* what) {
    if (done()) fail(std::string("missing ") + what);
    return toks_[pos_++];
  }
  void expect(const char* tok) {
    std::string t = next(tok);
    if (t != tok) fail("expected '" + std::string(tok) + "', found '" + t + "'");
  }
  double number(const char* what) { return value_at(next(what), line_); }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, msg); }
  int line() const { return line_; }

 private:
  std::vector<std::string> toks_;
  std::size_t pos_ = 0;
  int line_;
};

SourceCard parse_source(CardParser& p) {
  SourceCard s;
  std::string form = p.next("source value ('dc' or 'pulse')");
  if (form == "dc") {
    s.dc = p.number("dc value");
  } else if (form == "pulse") {
    s.pulse = true;
    p.expect("(");
    for (double& a : s.args) a = p.number("pulse argument");
    p.expect(")");
  } else {
    p.fail("expected 'dc' or 'pulse', found '" + form + "'");
  }
  return s;
}

void parse_keyword_params(CardParser& p, DeviceCard& card,
                          const std::vector<std::string>& required,
                          const std::vector<std::string>& optional) {
  std::set<std::string> seen;
  while (!p.done()) {
    std::string key = p.next("parameter name");
    p.expect("=");
    std::string raw = p.next("parameter value");
    if (std::find(required.begin(), required.end(), key) == required.end() &&
        std::find(optional.begin(), optional.end(), key) == optional.end()) {
      p.fail("unknown parameter '" + key + "' for " + std::string(to_string(card.kind)));
    }
    if (!seen.insert(key).second) p.fail("duplicate parameter '" + key + "'");
    if (key == "states") {
      std::size_t start = 0;
      while (start <= raw.size()) {
        std::size_t comma = raw.find(',', start);
        std::string part = raw.substr(start, comma == std::string::npos ? std::string::npos
                                                                        : comma - start);
        if (part.empty()) p.fail("empty entry in states list");
        card.states.push_back(value_at(part, p.line()));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    } else {
      card.params[key] = value_at(raw, p.line());
    }
  }
  for (const auto& r : required) {
    if (!seen.count(r)) {
      p.fail("missing required parameter '" + r + "' for " +
             std::string(to_string(card.kind)) + " " + card.name);
    }
  }
}

// Parses one card or directive into `ast`. Returns false for `.end`.
void parse_logical(const LogicalLine& ll, NetlistAst& ast) {
  CardParser p(tokenize(ll.text), ll.line);
  if (p.done()) return;
  std::string head = p.next("card");

  if (head[0] == '.') {
    if (head == ".tran") {
      if (ast.tran) p.fail("duplicate .tran directive");
      TranDirective t;
      t.line = ll.line;
      t.tstep = p.number("tstep");
      t.tstop = p.number("tstop");
      if (!p.done()) t.tstart = p.number("tstart");
      if (!p.done()) p.fail("unexpected token '" + p.peek() + "' after .tran");
      ast.tran = t;
    } else if (head == ".save") {
      if (p.done()) p.fail(".save without probes");
      while (!p.done()) {
        std::string k = p.next("probe");
        Probe pr;
        if (k == "v") {
          pr.kind = Probe::Kind::Voltage;
        } else if (k == "i") {
          pr.kind = Probe::Kind::Current;
        } else {
          p.fail("expected v(...) or i(...), found '" + k + "'");
        }
        p.expect("(");
        pr.target = p.next("probe target");
        p.expect(")");
        ast.saves.push_back(pr);
      }
    } else if (head == ".end") {
      if (!p.done()) p.fail("unexpected token after .end");
      ast.has_end = true;
    } else {
      p.fail("unknown directive '" + head + "'");
    }
    return;
  }

  DeviceCard card;
  card.line = ll.line;
  if (head == "qpsj" || head == "jj" || head == "mjj") {
    card.kind = head == "qpsj" ? DeviceKind::Qpsj
                : head == "jj" ? DeviceKind::Jj
                               : DeviceKind::Mjj;
    card.name = p.next("device name");
  } else {
    switch (head[0]) {
      case 'r': card.kind = DeviceKind::Resistor; break;
      case 'l': card.kind = DeviceKind::Inductor; break;
      case 'c': card.kind = DeviceKind::Capacitor; break;
      case 'v': card.kind = DeviceKind::VSource; break;
      case 'i': card.kind = DeviceKind::ISource; break;
      default: p.fail("unknown device kind '" + head + "'");
    }
    card.name = head;
  }
  card.nodes[0] = p.next("node n+");
  card.nodes[1] = p.next("node n-");

  switch (card.kind) {
    case DeviceKind::Resistor:
    case DeviceKind::Inductor:
    case DeviceKind::Capacitor:
      card.params["value"] = p.number("value");
      break;
    case DeviceKind::VSource:
    case DeviceKind::ISource:
      card.source = parse_source(p);
      break;
    case DeviceKind::Qpsj:
      parse_keyword_params(p, card, {"vc", "rn", "ls"}, {"q0"});
      break;
    case DeviceKind::Jj:
      parse_keyword_params(p, card, {"ic", "rn", "cj"}, {"phi0"});
      break;
    case DeviceKind::Mjj:
      parse_keyword_params(p, card, {"states", "state", "rn", "cj"}, {});
      break;
  }
  if (!p.done()) p.fail("unexpected token '" + p.peek() + "'");

  const std::string key = card.name;
  for (const auto& other : ast.cards) {
    if (other.name == key) {
      p.fail("duplicate device name '" + card.name + "' (first defined at line " +
             std::to_string(other.line) + ")");
    }
  }
  ast.cards.push_back(std::move(card));
}

}  // namespace

double parse_value(std::string_view token) {
  std::string tok = lower(token);
  if (tok.empty()) throw ParseError(0, "empty numeric value");
  std::size_t start = 0;
  bool negative = false;
  if (tok[0] == '+' || tok[0] == '-') {
    negative = tok[0] == '-';
    start = 1;
  }
  if (start >= tok.size() ||
      !(std::isdigit(static_cast<unsigned char>(tok[start])) || tok[start] == '.')) {
    throw ParseError(0, "malformed number '" + std::string(token) + "'");
  }
  double mantissa = 0.0;
  const char* first = tok.data() + start;
  const char* last = tok.data() + tok.size();
  auto res = std::from_chars(first, last, mantissa, std::chars_format::general);
  if (res.ec != std::errc()) {
    throw ParseError(0, "malformed number '" + std::string(token) + "'");
  }
  std::string_view suffix(res.ptr, static_cast<std::size_t>(last - res.ptr));
  // Dividing by an exact power of ten keeps 200u == 200e-6.
  double mult = 1.0, div = 1.0;
  if (suffix.empty()) {
    mult = 1.0;
  } else if (suffix == "meg") {
    mult = 1e6;
  } else if (suffix.size() == 1) {
    switch (suffix[0]) {
      case 'f': div = 1e15; break;
      case 'p': div = 1e12; break;
      case 'n': div = 1e9; break;
      case 'u': div = 1e6; break;
      case 'm': div = 1e3; break;
      case 'k': mult = 1e3; break;
      case 'g': mult = 1e9; break;
      default:
        throw ParseError(0, "unknown suffix '" + std::string(suffix) + "' in '" +
                                std::string(token) + "'");
    }
  } else {
    throw ParseError(0, "unknown suffix '" + std::string(suffix) + "' in '" +
                            std::string(token) + "'");
  }
  double v = mantissa * mult / div;
  if (negative) v = -v;
  if (!std::isfinite(v)) throw ParseError(0, "non-finite value '" + std::string(token) + "'");
  return v;
}

std::string Probe::channel_name() const {
  return (kind == Kind::Voltage ? "v(" : "i(") + target + ")";
}

NetlistAst parse_netlist(std::string_view text) {
  std::vector<LogicalLine> lines;
  int lineno = 0;
  std::size_t pos = 0;
  bool first = true;
  NetlistAst ast;
  std::optional<LogicalLine> title_candidate;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                         : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    std::string s(raw);
    if (!s.empty() && s.back() == '\r') s.pop_back();
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
      first = false;
      continue;
    }
    s = s.substr(b);
    if (s[0] == '*') {
      first = false;
      continue;
    }
    if (s[0] == '+') {
      if (lines.empty()) throw ParseError(lineno, "continuation line without a preceding card");
      lines.back().text += ' ';
      lines.back().text += s.substr(1);
      continue;
    }
    if (first) title_candidate = LogicalLine{lineno, s};
    first = false;
    lines.push_back({lineno, s});
  }

  std::size_t idx = 0;
  if (title_candidate && !lines.empty() && lines[0].line == 1) {
    // Line 1 is content only when it parses as a card or directive.
    NetlistAst probe;
    try {
      parse_logical(lines[0], probe);
    } catch (const ParseError&) {
      ast.title = title_candidate->text;
      idx = 1;
    }
  }

  for (; idx < lines.size(); ++idx) {
    if (ast.has_end) throw ParseError(lines[idx].line, "content after .end");
    parse_logical(lines[idx], ast);
  }
  if (!ast.has_end) throw ParseError(lineno, "missing .end");
  return ast;
}

namespace {

std::string card_text(const DeviceCard& c) {
  std::ostringstream out;
  auto kv = [&](const char* k) {
    auto it = c.params.find(k);
    if (it != c.params.end()) out << ' ' << k << '=' << format_number(it->second);
  };
  switch (c.kind) {
    case DeviceKind::Qpsj: out << "qpsj " << c.name; break;
    case DeviceKind::Jj: out << "jj " << c.name; break;
    case DeviceKind::Mjj: out << "mjj " << c.name; break;
    default: out << c.name; break;
  }
  out << ' ' << c.nodes[0] << ' ' << c.nodes[1];
  switch (c.kind) {
    case DeviceKind::Resistor:
    case DeviceKind::Inductor:
    case DeviceKind::Capacitor:
      out << ' ' << format_number(c.params.at("value"));
      break;
    case DeviceKind::VSource:
    case DeviceKind::ISource:
      if (c.source.pulse) {
        out << " pulse(";
        for (std::size_t k = 0; k < c.source.args.size(); ++k) {
          out << (k ? " " : "") << format_number(c.source.args[k]);
        }
        out << ')';
      } else {
        out << " dc " << format_number(c.source.dc);
      }
      break;
    case DeviceKind::Qpsj:
      kv("vc"); kv("rn"); kv("ls"); kv("q0");
      break;
    case DeviceKind::Jj:
      kv("ic"); kv("rn"); kv("cj"); kv("phi0");
      break;
    case DeviceKind::Mjj:
      out << " states=";
      for (std::size_t k = 0; k < c.states.size(); ++k) {
        out << (k ? "," : "") << format_number(c.states[k]);
      }
      kv("state"); kv("rn"); kv("cj");
      break;
  }
  return out.str();
}

}  // namespace

std::string write_netlist(const NetlistAst& ast) {
  std::ostringstream out;
  out << (ast.title.empty() ? "* untitled" : ast.title) << '\n';
  for (const auto& c : ast.cards) out << card_text(c) << '\n';
  if (ast.tran) {
    out << ".tran " << format_number(ast.tran->tstep) << ' ' << format_number(ast.tran->tstop);
    if (ast.tran->tstart != 0.0) out << ' ' << format_number(ast.tran->tstart);
    out << '\n';
  }
  if (!ast.saves.empty()) {
    out << ".save";
    for (const auto& p : ast.saves) out << ' ' << p.channel_name();
    out << '\n';
  }
  out << ".end\n";
  return out.str();
}

JjParams DeviceInstance::junction() const {
  if (kind == DeviceKind::Mjj) return std::get<MjjParams>(params).effective();
  return std::get<JjParams>(params);
}

int Circuit::node_index(std::string_view name) const {
  const std::string key = lower(name);
  for (std::size_t i = 0; i < node_names.size(); ++i) {
    if (node_names[i] == key) return static_cast<int>(i);
  }
  return -1;
}

int Circuit::device_index(std::string_view name) const {
  const std::string key = lower(name);
  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (devices[i].name == key) return static_cast<int>(i);
  }
  return -1;
}

std::vector<int> Circuit::sources() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (devices[i].kind == DeviceKind::VSource || devices[i].kind == DeviceKind::ISource) {
      out.push_back(static_cast<int>(i));
    }
  }
  return out;
}

namespace {

[[noreturn]] void bad_card(const DeviceCard& c, const std::string& msg) {
  const std::string where = c.line > 0 ? "line " + std::to_string(c.line) + ": " : "";
  throw ElaborationError(where + std::string(to_string(c.kind)) + " " + c.name + ": " + msg);
}

double positive(const DeviceCard& c, const char* key, double v) {
  if (!(v > 0.0)) bad_card(c, std::string(key) + " must be positive, got " + format_number(v));
  return v;
}

double non_negative(const DeviceCard& c, const char* key, double v) {
  if (!(v >= 0.0)) bad_card(c, std::string(key) + " must be non-negative, got " + format_number(v));
  return v;
}

SourceWaveform make_source(const DeviceCard& c, double unit) {
  SourceWaveform w;
  if (!c.source.pulse) {
    w.shape = SourceWaveform::Shape::Dc;
    w.dc = c.source.dc * unit;
    return w;
  }
  const auto& a = c.source.args;
  w.shape = SourceWaveform::Shape::Pulse;
  w.v1 = a[0] * unit;
  w.v2 = a[1] * unit;
  const char* names[] = {"td", "tr", "tf", "pw", "per"};
  for (int k = 0; k < 5; ++k) non_negative(c, names[k], a[2 + k]);
  w.td = a[2] * scale::second;
  w.tr = a[3] * scale::second;
  w.tf = a[4] * scale::second;
  w.pw = a[5] * scale::second;
  w.per = a[6] * scale::second;
  return w;
}

}  // namespace

Circuit elaborate(const NetlistAst& ast) {
  if (!ast.tran) throw ElaborationError("missing .tran directive");
  Circuit c;
  c.title = ast.title;
  c.tran.tstep = ast.tran->tstep * scale::second;
  c.tran.tstop = ast.tran->tstop * scale::second;
  c.tran.tstart = ast.tran->tstart * scale::second;
  if (!(c.tran.tstep > 0.0) || !(c.tran.tstop > c.tran.tstep) || c.tran.tstart < 0.0 ||
      c.tran.tstart >= c.tran.tstop) {
    throw ElaborationError("line " + std::to_string(ast.tran->line) +
                           ": .tran requires 0 < tstep < tstop and 0 <= tstart < tstop");
  }

  std::unordered_map<std::string, int> index{{"0", 0}};
  c.node_names.push_back("0");
  std::vector<int> terminals{0};
  auto node = [&](const std::string& name) {
    auto [it, inserted] = index.emplace(name, static_cast<int>(c.node_names.size()));
    if (inserted) {
      c.node_names.push_back(name);
      terminals.push_back(0);
    }
    ++terminals[it->second];
    return it->second;
  };

  for (const auto& card : ast.cards) {
    DeviceInstance d;
    d.kind = card.kind;
    d.name = card.name;
    d.pos = node(card.nodes[0]);
    d.neg = node(card.nodes[1]);
    auto param = [&](const char* k, double def = 0.0) {
      auto it = card.params.find(k);
      return it == card.params.end() ? def : it->second;
    };
    switch (card.kind) {
      case DeviceKind::Resistor:
        d.params = LinearParams{positive(card, "resistance", param("value")) * scale::ohm};
        break;
      case DeviceKind::Inductor:
        d.params = LinearParams{positive(card, "inductance", param("value")) * scale::henry};
        break;
      case DeviceKind::Capacitor:
        d.params = LinearParams{positive(card, "capacitance", param("value")) * scale::farad};
        break;
      case DeviceKind::VSource:
        d.params = make_source(card, scale::volt);
        break;
      case DeviceKind::ISource:
        d.params = make_source(card, scale::amp);
        break;
      case DeviceKind::Qpsj: {
        QpsjParams q;
        q.vc = positive(card, "vc", param("vc")) * scale::volt;
        q.rn = positive(card, "rn", param("rn")) * scale::ohm;
        q.ls = non_negative(card, "ls", param("ls")) * scale::henry;
        q.q0 = param("q0") * scale::coulomb;
        d.params = q;
        break;
      }
      case DeviceKind::Jj: {
        JjParams j;
        j.ic = positive(card, "ic", param("ic")) * scale::amp;
        j.rn = positive(card, "rn", param("rn")) * scale::ohm;
        j.cj = non_negative(card, "cj", param("cj")) * scale::farad;
        j.phi_init = param("phi0");
        d.params = j;
        break;
      }
      case DeviceKind::Mjj: {
        MjjParams m;
        for (double s : card.states) m.states.push_back(positive(card, "states", s) * scale::amp);
        if (m.states.empty()) bad_card(card, "states list is empty");
        const double st = param("state");
        if (st < 0.0 || st != std::floor(st) || st >= static_cast<double>(m.states.size())) {
          bad_card(card, "state index " + format_number(st) + " out of range");
        }
        m.active_state = static_cast<std::size_t>(st);
        m.rn = positive(card, "rn", param("rn")) * scale::ohm;
        m.cj = non_negative(card, "cj", param("cj")) * scale::farad;
        d.params = m;
        break;
      }
    }
    c.devices.push_back(std::move(d));
  }
  c.node_count = static_cast<int>(c.node_names.size()) - 1;
  for (int n = 1; n <= c.node_count; ++n) {
    if (terminals[n] < 2) {
      throw ElaborationError("dangling node '" + c.node_names[n] +
                             "' (referenced by a single device terminal)");
    }
  }

  if (ast.saves.empty()) {
    for (int n = 1; n <= c.node_count; ++n) {
      c.save_list.push_back({{Probe::Kind::Voltage, c.node_names[n]}, n});
    }
    for (std::size_t k = 0; k < c.devices.size(); ++k) {
      c.save_list.push_back({{Probe::Kind::Current, c.devices[k].name}, static_cast<int>(k)});
    }
  } else {
    for (const auto& p : ast.saves) {
      int idx = p.kind == Probe::Kind::Voltage ? c.node_index(p.target) : c.device_index(p.target);
      if (idx < 0) {
        throw ElaborationError(".save references unknown " +
                               std::string(p.kind == Probe::Kind::Voltage ? "node" : "device") +
                               " '" + p.target + "'");
      }
      c.save_list.push_back({p, idx});
    }
  }
  return c;
}

NetlistAst to_ast(const Circuit& c) {
  NetlistAst ast;
  ast.title = c.title;
  for (const auto& d : c.devices) {
    DeviceCard card;
    card.kind = d.kind;
    card.name = d.name;
    card.nodes = {c.node_names[d.pos], c.node_names[d.neg]};
    auto source_card = [&](double unit) {
      const auto& w = d.source();
      if (w.shape == SourceWaveform::Shape::Dc) {
        card.source.dc = w.dc / unit;
      } else {
        card.source.pulse = true;
        card.source.args = {w.v1 / unit, w.v2 / unit, w.td / scale::second,
                            w.tr / scale::second, w.tf / scale::second, w.pw / scale::second,
                            w.per / scale::second};
      }
    };
    switch (d.kind) {
      case DeviceKind::Resistor: card.params["value"] = d.linear_value() / scale::ohm; break;
      case DeviceKind::Inductor: card.params["value"] = d.linear_value() / scale::henry; break;
      case DeviceKind::Capacitor: card.params["value"] = d.linear_value() / scale::farad; break;
      case DeviceKind::VSource: source_card(scale::volt); break;
      case DeviceKind::ISource: source_card(scale::amp); break;
      case DeviceKind::Qpsj: {
        const auto& q = d.qpsj();
        card.params = {{"vc", q.vc / scale::volt}, {"rn", q.rn / scale::ohm},
                       {"ls", q.ls / scale::henry}};
        if (q.q0 != 0.0) card.params["q0"] = q.q0 / scale::coulomb;
        break;
      }
      case DeviceKind::Jj: {
        const auto& j = std::get<JjParams>(d.params);
        card.params = {{"ic", j.ic / scale::amp}, {"rn", j.rn / scale::ohm},
                       {"cj", j.cj / scale::farad}};
        if (j.phi_init != 0.0) card.params["phi0"] = j.phi_init;
        break;
      }
      case DeviceKind::Mjj: {
        const auto& m = std::get<MjjParams>(d.params);
        for (double s : m.states) card.states.push_back(s / scale::amp);
        card.params = {{"state", static_cast<double>(m.active_state)},
                       {"rn", m.rn / scale::ohm},
                       {"cj", m.cj / scale::farad}};
        break;
      }
    }
    ast.cards.push_back(std::move(card));
  }
  TranDirective t;
  t.tstep = c.tran.tstep / scale::second;
  t.tstop = c.tran.tstop / scale::second;
  t.tstart = c.tran.tstart / scale::second;
  ast.tran = t;
  for (const auto& p : c.save_list) ast.saves.push_back(p.probe);
  ast.has_end = true;
  return ast;
}

}  // namespace qpsj
