#pragma once

// Built-in components: the DI primitives, event-mode views of level gates,
// the token-ring allocation item with its decomposition, and the Q-element
// and token-ring networks for the simulator.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "dicirc/composition.hpp"
#include "dicirc/error.hpp"
#include "dicirc/network.hpp"
#include "dicirc/simulator.hpp"
#include "dicirc/spec_language.hpp"
#include "dicirc/trace.hpp"

namespace dicirc {

enum class PrimitiveKind { Wire, IWire, Fork, CElement, Toggle, Merge, Sequencer };

inline const std::vector<PrimitiveKind>& all_primitive_kinds() {
  static const std::vector<PrimitiveKind> kinds = {PrimitiveKind::Wire,     PrimitiveKind::IWire,
                                                   PrimitiveKind::Fork,     PrimitiveKind::CElement,
                                                   PrimitiveKind::Toggle,   PrimitiveKind::Merge,
                                                   PrimitiveKind::Sequencer};
  return kinds;
}

inline std::string primitive_name(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::Wire: return "WIRE";
    case PrimitiveKind::IWire: return "IWIRE";
    case PrimitiveKind::Fork: return "FORK";
    case PrimitiveKind::CElement: return "C_ELEMENT";
    case PrimitiveKind::Toggle: return "TOGGLE";
    case PrimitiveKind::Merge: return "MERGE";
    case PrimitiveKind::Sequencer: return "SEQUENCER";
  }
  return "?";
}

inline PrimitiveKind primitive_from_name(std::string s) {
  for (auto& ch : s) {
    if (ch == '-') ch = '_';
    ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  }
  for (auto k : all_primitive_kinds())
    if (primitive_name(k) == s) return k;
  throw Error("unknown primitive '" + s + "'");
}

inline std::vector<Symbol> default_ports(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::Wire:
    case PrimitiveKind::IWire:
      return {"a", "b"};
    case PrimitiveKind::Sequencer:
      return {"a", "b", "n", "p", "q"};
    default:
      return {"a", "b", "c"};
  }
}

inline SpecExpr primitive_expr(PrimitiveKind k, const std::vector<Symbol>& ports) {
  auto expected = default_ports(k).size();
  if (ports.size() != expected)
    throw ArityError(primitive_name(k) + " takes " + std::to_string(expected) + " ports, got " +
                     std::to_string(ports.size()));
  if (std::set<Symbol>(ports.begin(), ports.end()).size() != ports.size())
    throw ArityError(primitive_name(k) + " ports must be distinct");
  using E = SpecExpr;
  using K = SpecExpr::Kind;
  auto in = [&](std::size_t i) { return E::input(ports[i]); };
  auto out = [&](std::size_t i) { return E::output(ports[i]); };
  auto seq = [](std::vector<E> c) { return E::node(K::Seq, std::move(c)); };
  auto loop = [](E body) { return E::node(K::Pref, {E::node(K::Star, {std::move(body)})}); };
  switch (k) {
    case PrimitiveKind::Wire:
      return loop(seq({in(0), out(1)}));
    case PrimitiveKind::IWire:
      return loop(seq({out(1), in(0)}));
    case PrimitiveKind::Fork:
      return loop(seq({in(0), E::node(K::Weave, {out(1), out(2)})}));
    case PrimitiveKind::CElement:
      return loop(seq({E::node(K::Weave, {in(0), in(1)}), out(2)}));
    case PrimitiveKind::Toggle:
      return loop(seq({in(0), out(1), in(0), out(2)}));
    case PrimitiveKind::Merge:
      return loop(seq({E::node(K::Alt, {in(0), in(1)}), out(2)}));
    case PrimitiveKind::Sequencer:
      return E::node(K::Weave, {loop(seq({in(0), out(3)})), loop(seq({in(1), out(4)})),
                                loop(seq({in(2), E::node(K::Alt, {out(3), out(4)})}))});
  }
  throw Error("unknown primitive");
}

inline std::string primitive_text(PrimitiveKind k, const std::vector<Symbol>& ports) {
  return print(primitive_expr(k, ports));
}
inline std::string primitive_text(PrimitiveKind k) { return primitive_text(k, default_ports(k)); }

inline TraceStructure make(PrimitiveKind k, const std::vector<Symbol>& ports) {
  return elaborate(primitive_expr(k, ports));
}
inline TraceStructure make(PrimitiveKind k) { return make(k, default_ports(k)); }

// Event-mode view of a level gate: every symbol is a transition of its wire.
// The environment changes an input only while the gate is stable and never
// repeats the previous event; the gate fires its output when excited.
inline TraceStructure event_gate(const std::vector<Symbol>& inputs, const Symbol& output,
                                 const std::function<bool(const std::vector<bool>&, bool)>& f) {
  const std::size_t k = inputs.size();
  Alphabet ins(inputs.begin(), inputs.end());
  if (ins.size() != k || ins.count(output)) throw ArityError("gate ports must be distinct");
  // state = (input levels, output level, last event index or k+1 for none)
  using Key = std::tuple<std::vector<bool>, bool, std::size_t>;
  std::map<Key, int> ids;
  std::vector<Key> keys;
  std::vector<std::tuple<int, Symbol, int>> transitions;
  auto id_of = [&](const Key& key) {
    auto [it, inserted] = ids.emplace(key, static_cast<int>(keys.size()));
    if (inserted) keys.push_back(key);
    return it->second;
  };
  id_of({std::vector<bool>(k, false), false, k + 1});
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto [levels, out, last] = keys[i];
    bool target = f(levels, out);
    if (target != out) {
      transitions.emplace_back(static_cast<int>(i), output, id_of({levels, target, k}));
      continue;
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (j == last) continue;
      auto next = levels;
      next[j] = !next[j];
      transitions.emplace_back(static_cast<int>(i), inputs[j], id_of({next, out, j}));
    }
  }
  std::set<int> accepting;
  for (std::size_t i = 0; i < keys.size(); ++i) accepting.insert(static_cast<int>(i));
  Alphabet all = ins;
  all.insert(output);
  return TraceStructure(ins, {output},
                        TraceSet::from_transitions(all, keys.size(), 0, transitions, accepting));
}

inline TraceStructure and_gate_events(const Symbol& a = "a", const Symbol& b = "b", const Symbol& c = "c") {
  return event_gate({a, b}, c, [](const std::vector<bool>& x, bool) { return x[0] && x[1]; });
}

inline TraceStructure or_gate_events(const Symbol& a = "a", const Symbol& b = "b", const Symbol& c = "c") {
  return event_gate({a, b}, c, [](const std::vector<bool>& x, bool) { return x[0] || x[1]; });
}

inline TraceStructure c_element_events(const Symbol& a = "a", const Symbol& b = "b", const Symbol& c = "c") {
  return event_gate({a, b}, c, [](const std::vector<bool>& x, bool z) { return x[0] == x[1] ? x[0] : z; });
}

// ---------------------------------------------------------------------------
// Token-ring allocation item

struct AllocNames {
  Symbol a1, a0, b, p1, p0, q, rq1, q1, q0;
};

inline AllocNames alloc_names(std::optional<std::size_t> index = std::nullopt) {
  auto n = [&](const char* base) { return index ? std::string(base) + "_" + std::to_string(*index) : std::string(base); };
  return {n("a1"), n("a0"), n("b"), n("p1"), n("p0"), n("q"), n("rq1"), n("q1"), n("q0")};
}

inline std::string alloc_text(const AllocNames& s) {
  return "pref*[" + s.a1 + "?;" + s.p1 + "!;" + s.a0 + "?;" + s.p0 + "!] || pref*[" + s.b + "?;(" + s.q + "!|" +
         s.p1 + "!;" + s.a0 + "?;" + s.q + "!)]";
}

struct TokenRingAlloc {
  TraceStructure spec;
  Decomposition parts;
};

// The item's interface and its decomposition into sequencer, iwire, two
// wires and merge.
inline TokenRingAlloc token_ring_alloc(std::optional<std::size_t> index = std::nullopt) {
  AllocNames s = alloc_names(index);
  TokenRingAlloc out{parse_structure(alloc_text(s)), {}};
  out.parts.target = out.spec;
  out.parts.parts = {
      make(PrimitiveKind::Sequencer, {s.a1, s.rq1, s.b, s.p1, s.q1}),
      make(PrimitiveKind::IWire, {s.q1, s.rq1}),
      make(PrimitiveKind::Wire, {s.a0, s.p0}),
      make(PrimitiveKind::Wire, {s.a0, s.q0}),
      make(PrimitiveKind::Merge, {s.q1, s.q0, s.q}),
  };
  out.parts.names = {"sequencer", "iwire", "wire_p0", "wire_q0", "merge"};
  return out;
}

// ---------------------------------------------------------------------------
// Networks

// Builds a structure from a cyclic list of edge symbols, e.g. a four-phase
// handshake; `outputs` says which symbols the node produces.
inline TraceStructure edge_cycle(const std::vector<Symbol>& cycle, const Alphabet& outputs) {
  Alphabet all(cycle.begin(), cycle.end());
  std::vector<std::tuple<int, Symbol, int>> transitions;
  std::set<int> accepting;
  const int n = static_cast<int>(cycle.size());
  for (int i = 0; i < n; ++i) {
    transitions.emplace_back(i, cycle[i], (i + 1) % n);
    accepting.insert(i);
  }
  return TraceStructure(set_difference(all, outputs), outputs,
                        TraceSet::from_transitions(all, cycle.size(), 0, transitions, accepting));
}

inline TraceStructure monitor_from(const std::vector<std::tuple<int, Symbol, int>>& transitions,
                                   std::size_t states, const Alphabet& outputs) {
  Alphabet all;
  std::set<int> accepting;
  for (const auto& [from, sym, to] : transitions) all.insert(sym);
  for (std::size_t i = 0; i < states; ++i) accepting.insert(static_cast<int>(i));
  return TraceStructure(set_difference(all, outputs), outputs,
                        TraceSet::from_transitions(all, states, 0, transitions, accepting));
}

struct QElementConfig {
  DelayModel wire = DelayModel::uniform(1, 5);
  DelayModel gate = DelayModel::uniform(1, 5);
  DelayModel environment = DelayModel::uniform(1, 5);
  Time xi_skew = 0;
  Time yi_skew = 0;
  bool monitors = true;
};

// Admissible port behavior of gate A (yo = x1 ∧ ¬u) inside the Q-element.
inline TraceStructure q_element_monitor_a() {
  return monitor_from({{0, "x1+", 1}, {1, "yo+", 2}, {2, "u+", 3}, {3, "yo-", 4}, {4, "x1-", 5},
                       {5, "u-", 0}, {5, "x1+", 6}, {6, "u-", 1}},
                      7, {"yo+", "yo-"});
}

// Admissible port behavior of gate B (xo = ¬y1 ∧ u).
inline TraceStructure q_element_monitor_b() {
  return monitor_from({{0, "y1+", 1}, {1, "u+", 2}, {1, "y1-", 3}, {2, "y1-", 4}, {3, "u+", 4},
                       {4, "xo+", 5}, {5, "u-", 6}, {6, "xo-", 0}},
                      7, {"xo+", "xo-"});
}

// C-element C (inputs x2, y2, output u) and and-gates A, B, with forks on
// xi (x1, x2), yi (y1, y2) and u. X and Y are the four-phase environments.
inline Network q_element_network(const QElementConfig& cfg = {}) {
  Network net;
  Node x;
  x.id = "X";
  x.spec = edge_cycle({"xi+", "xo+", "xi-", "xo-"}, {"xi+", "xi-"});
  x.delay = cfg.environment;
  x.environment = true;
  Node y;
  y.id = "Y";
  y.spec = edge_cycle({"yo+", "yi+", "yo-", "yi-"}, {"yi+", "yi-"});
  y.delay = cfg.environment;
  y.environment = true;
  Node c;
  c.id = "C";
  c.kind = NodeKind::CLevel;
  c.inputs = {"x2", "y2"};
  c.output = "u";
  c.delay = cfg.gate;
  Node a;
  a.id = "A";
  a.kind = NodeKind::And;
  a.inputs = {"x1", "u"};
  a.inverted = {"u"};
  a.output = "yo";
  a.delay = cfg.gate;
  Node b;
  b.id = "B";
  b.kind = NodeKind::And;
  b.inputs = {"y1", "u"};
  b.inverted = {"y1"};
  b.output = "xo";
  b.delay = cfg.gate;
  if (cfg.monitors) {
    a.monitor = q_element_monitor_a();
    b.monitor = q_element_monitor_b();
  }
  net.nodes = {x, b, c, a, y};
  net.drivers = {"X", "Y"};
  auto ch = [&](const char* fn, const char* fp, const char* tn, const char* tp) {
    return net.connect(fn, fp, tn, tp, cfg.wire).id;
  };
  std::string xi1 = ch("X", "xi", "A", "x1");
  std::string xi2 = ch("X", "xi", "C", "x2");
  std::string yi1 = ch("Y", "yi", "B", "y1");
  std::string yi2 = ch("Y", "yi", "C", "y2");
  std::string ua = ch("C", "u", "A", "u");
  std::string ub = ch("C", "u", "B", "u");
  ch("A", "yo", "Y", "yo");
  ch("B", "xo", "X", "xo");
  net.forks = {Fork{"xi", {xi1, xi2}, true, cfg.xi_skew, {}}, Fork{"yi", {yi1, yi2}, true, cfg.yi_skew, {}},
               Fork{"u", {ua, ub}, false, 0, {}}};
  net.validate();
  return net;
}

inline const char* kQElementY1Channel = "Y.yi->B.y1";
inline const char* kQElementX1Channel = "X.xi->A.x1";

// Delays the y1 branch of the yi fork so that u↑ reaches gate B first.
inline Network q_element_skewed(double offset = 100, const QElementConfig& cfg = {}) {
  Network net = q_element_network(cfg);
  net.fork("yi").offsets[kQElementY1Channel] = from_ticks(offset);
  net.validate();
  return net;
}

struct TokenRingConfig {
  DelayModel machine = DelayModel::uniform(1, 20);  // request schedule of the machine stubs
  DelayModel component = DelayModel::uniform(1, 3);
  DelayModel wire = DelayModel::uniform(1, 5);
  ArbitrationPolicy policy = ArbitrationPolicy::Random;
  DelayModel arbitration = DelayModel::uniform(0, 2);
  std::vector<bool> requesters;  // empty: every machine requests
};

inline std::string alloc_node(std::size_t i, const std::string& part) {
  return "alloc" + std::to_string(i) + "." + part;
}
inline std::string machine_node(std::size_t i) { return "machine" + std::to_string(i); }
inline const char* kInjector = "inject";

// Ring of n allocation items (each as its five parts), n machine stubs and an
// iwire that closes the ring and holds the single token at start.
inline Network token_ring(std::size_t n, const TokenRingConfig& cfg = {}) {
  if (n == 0) throw Error("a token ring needs at least one item");
  Network net;
  for (std::size_t i = 0; i < n; ++i) {
    AllocNames s = alloc_names(i);
    auto alloc = token_ring_alloc(i);
    for (std::size_t k = 0; k < alloc.parts.parts.size(); ++k) {
      Node node;
      node.id = alloc_node(i, alloc.parts.names[k]);
      node.spec = alloc.parts.parts[k];
      node.delay = cfg.component;
      net.nodes.push_back(std::move(node));
    }
    Node& seq = net.node(alloc_node(i, "sequencer"));
    seq.spec_text = primitive_text(PrimitiveKind::Sequencer, {s.a1, s.rq1, s.b, s.p1, s.q1});
    seq.arbitration = {cfg.policy, cfg.arbitration, {{s.p1, s.a1}, {s.q1, s.rq1}}};
    net.node(alloc_node(i, "iwire")).spec_text = primitive_text(PrimitiveKind::IWire, {s.q1, s.rq1});
    net.node(alloc_node(i, "wire_p0")).spec_text = primitive_text(PrimitiveKind::Wire, {s.a0, s.p0});
    net.node(alloc_node(i, "wire_q0")).spec_text = primitive_text(PrimitiveKind::Wire, {s.a0, s.q0});
    net.node(alloc_node(i, "merge")).spec_text = primitive_text(PrimitiveKind::Merge, {s.q1, s.q0, s.q});

    bool requests = cfg.requesters.empty() || (i < cfg.requesters.size() && cfg.requesters[i]);
    Node m;
    m.id = machine_node(i);
    m.environment = true;
    m.delay = cfg.machine;
    // A machine that never requests still has to be present; it waits on a
    // grant that never comes.
    m.spec_text = requests ? "pref*[" + s.a1 + "!;" + s.p1 + "?;" + s.a0 + "!;" + s.p0 + "?]"
                           : "pref*[" + s.p1 + "?;" + s.a1 + "!;" + s.p0 + "?;" + s.a0 + "!]";
    m.spec = parse_structure(m.spec_text);
    net.nodes.push_back(std::move(m));
    net.drivers.push_back(machine_node(i));
  }
  Node inj;
  inj.id = kInjector;
  inj.spec_text = primitive_text(PrimitiveKind::IWire, {"tok_in", "tok_out"});
  inj.spec = parse_structure(inj.spec_text);
  inj.delay = cfg.component;
  net.nodes.push_back(std::move(inj));

  for (std::size_t i = 0; i < n; ++i) {
    AllocNames s = alloc_names(i);
    auto w = [&](const std::string& fn, const Symbol& fp, const std::string& tn, const Symbol& tp) {
      return net.connect(fn, fp, tn, tp, cfg.wire).id;
    };
    std::string seq = alloc_node(i, "sequencer"), iw = alloc_node(i, "iwire"), wp = alloc_node(i, "wire_p0"),
                wq = alloc_node(i, "wire_q0"), mg = alloc_node(i, "merge"), mc = machine_node(i);
    w(mc, s.a1, seq, s.a1);
    w(seq, s.p1, mc, s.p1);
    std::string a0p = w(mc, s.a0, wp, s.a0);
    std::string a0q = w(mc, s.a0, wq, s.a0);
    w(wp, s.p0, mc, s.p0);
    w(iw, s.rq1, seq, s.rq1);
    std::string q1i = w(seq, s.q1, iw, s.q1);
    std::string q1m = w(seq, s.q1, mg, s.q1);
    w(wq, s.q0, mg, s.q0);
    if (i + 1 < n) w(mg, s.q, alloc_node(i + 1, "sequencer"), alloc_names(i + 1).b);
    else w(mg, s.q, kInjector, "tok_in");
    net.forks.push_back(Fork{"a0_" + std::to_string(i), {a0p, a0q}, false, 0, {}});
    net.forks.push_back(Fork{"q1_" + std::to_string(i), {q1i, q1m}, false, 0, {}});
  }
  net.connect(kInjector, "tok_out", alloc_node(0, "sequencer"), alloc_names(0).b, cfg.wire);
  net.validate();
  return net;
}

inline std::set<std::string> alloc_group(std::size_t i) {
  std::set<std::string> g;
  for (const char* part : {"sequencer", "iwire", "wire_p0", "wire_q0", "merge"}) g.insert(alloc_node(i, part));
  return g;
}

// Symbols crossing the boundary of a group of nodes, in the order they
// happen: outputs when emitted, inputs when the first branch of their
// emission arrives inside the group.
inline Trace boundary_trace(const SimTrace& t, const std::set<std::string>& group) {
  std::map<std::uint64_t, std::pair<std::uint64_t, Symbol>> by_fire;  // fire -> (step, symbol)
  for (const auto& e : t.events) {
    bool src = group.count(e.from.node) != 0, dst = group.count(e.to.node) != 0;
    if (src && !dst) {
      by_fire.emplace(e.fire, std::make_pair(e.emit_step, e.label));
    } else if (!src && dst && e.arrive_step) {
      auto it = by_fire.find(e.fire);
      if (it == by_fire.end() || *e.arrive_step < it->second.first)
        by_fire[e.fire] = {*e.arrive_step, e.sink_label};
    }
  }
  std::vector<std::pair<std::uint64_t, Symbol>> steps;
  for (auto& [fire, v] : by_fire) steps.push_back(v);
  std::sort(steps.begin(), steps.end());
  Trace out;
  for (auto& [step, sym] : steps) out.push_back(sym);
  return out;
}

struct TokenVerdict {
  bool holds = true;
  std::optional<std::uint64_t> step;  // first step where conservation fails
  std::string detail;
};

// Exactly one token at every step: held by an item (between b arriving and
// q leaving), held by the injector, or in flight on a ring channel.
inline TokenVerdict check_token_conservation(const SimTrace& t, std::size_t n) {
  std::map<std::string, int> held;  // holder -> count
  held[kInjector] = 1;
  std::map<std::string, int> flight;
  std::set<std::string> ring_channels;
  auto holder_of_input = [&](const SimEvent& e) -> std::optional<std::string> {
    if (e.to.node == kInjector) return std::string(kInjector);
    for (std::size_t i = 0; i < n; ++i)
      if (e.to.node == alloc_node(i, "sequencer") && e.to.port == alloc_names(i).b) return "alloc" + std::to_string(i);
    return std::nullopt;
  };
  auto holder_of_output = [&](const SimEvent& e) -> std::optional<std::string> {
    if (e.from.node == kInjector) return std::string(kInjector);
    for (std::size_t i = 0; i < n; ++i)
      if (e.from.node == alloc_node(i, "merge") && e.from.port == alloc_names(i).q) return "alloc" + std::to_string(i);
    return std::nullopt;
  };
  struct Step {
    std::uint64_t step;
    bool arrival;
    const SimEvent* e;
  };
  std::vector<Step> steps;
  for (const auto& e : t.events) {
    if (!holder_of_output(e)) continue;
    steps.push_back({e.emit_step, false, &e});
    if (e.arrive_step) steps.push_back({*e.arrive_step, true, &e});
  }
  std::sort(steps.begin(), steps.end(), [](const Step& a, const Step& b) { return a.step < b.step; });
  TokenVerdict v;
  for (const auto& s : steps) {
    if (s.arrival) {
      --flight[s.e->channel];
      ++held[*holder_of_input(*s.e)];
    } else {
      ++flight[s.e->channel];
      --held[*holder_of_output(*s.e)];
    }
    int total = 0;
    for (const auto& [h, c] : held) {
      if (c < 0 || c > 1) {
        v.holds = false;
        v.step = s.step;
        v.detail = h + " holds " + std::to_string(c) + " tokens";
        return v;
      }
      total += c;
    }
    for (const auto& [ch, c] : flight) total += c;
    if (total != 1) {
      v.holds = false;
      v.step = s.step;
      v.detail = std::to_string(total) + " tokens in the ring";
      return v;
    }
  }
  return v;
}

}  // namespace dicirc
