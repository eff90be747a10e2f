#pragma once

// Space-time graphs of simulation runs: one vertical line of points per node,
// one arrow per delivered event. Points on a line are ordered by the step at
// which they happened; the causal order is the transitive closure of line
// successors and arrows.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dicirc/error.hpp"
#include "dicirc/network.hpp"
#include "dicirc/simulator.hpp"

namespace dicirc {

struct Point {
  std::string node;
  std::size_t index = 0;  // position on the node's line
  Time time = 0;
  Symbol label;
  bool emission = false;
  std::uint64_t step = 0;
  bool wait = false;  // rendezvous: waiting for two or more inputs after this point
  friend bool operator==(const Point&, const Point&) = default;
};

struct PointRef {
  std::size_t line = 0;
  std::size_t index = 0;
  friend bool operator==(const PointRef&, const PointRef&) = default;
  friend auto operator<=>(const PointRef&, const PointRef&) = default;
};

struct Arrow {
  std::uint64_t event = 0;
  PointRef from;
  PointRef to;
  friend bool operator==(const Arrow&, const Arrow&) = default;
};

struct Line {
  std::string node;
  bool wait_initial = false;
  std::vector<Point> points;
  friend bool operator==(const Line&, const Line&) = default;
};

class CausalGraph {
 public:
  std::vector<Line> lines;
  std::vector<Arrow> arrows;

  std::size_t line_of(const std::string& node) const {
    for (std::size_t i = 0; i < lines.size(); ++i)
      if (lines[i].node == node) return i;
    throw Error("unknown node '" + node + "' in space-time graph");
  }

  const Point& point(const PointRef& p) const {
    if (p.line >= lines.size() || p.index >= lines[p.line].points.size()) throw Error("unknown point");
    return lines[p.line].points[p.index];
  }

  // The k-th (1-based) point labelled `label` on the node's line.
  std::optional<PointRef> find(const std::string& node, const Symbol& label, std::size_t occurrence) const {
    std::size_t line = line_of(node);
    std::size_t seen = 0;
    for (const auto& p : lines[line].points)
      if (p.label == label && ++seen == occurrence) return PointRef{line, p.index};
    return std::nullopt;
  }

  // Strict causal order: a non-empty path along lines and arrows.
  bool causally_related(const PointRef& p, const PointRef& q) const {
    point(p);
    point(q);
    std::map<PointRef, std::vector<PointRef>> out;
    for (const auto& a : arrows) out[a.from].push_back(a.to);
    std::vector<std::vector<bool>> seen(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) seen[i].assign(lines[i].points.size(), false);
    std::deque<PointRef> queue;
    auto successors = [&](const PointRef& r) {
      std::vector<PointRef> s;
      if (r.index + 1 < lines[r.line].points.size()) s.push_back({r.line, r.index + 1});
      if (auto it = out.find(r); it != out.end()) s.insert(s.end(), it->second.begin(), it->second.end());
      return s;
    };
    for (const auto& s : successors(p)) queue.push_back(s);
    while (!queue.empty()) {
      PointRef r = queue.front();
      queue.pop_front();
      if (r == q) return true;
      if (seen[r.line][r.index]) continue;
      seen[r.line][r.index] = true;
      // Later points on the same line than q can never lead back to q.
      for (const auto& s : successors(r)) queue.push_back(s);
    }
    return false;
  }

  friend bool operator==(const CausalGraph&, const CausalGraph&) = default;
};

namespace detail {

// Marks points after which a node waits for two or more inputs.
inline void mark_waits(Line& line, const Node& n) {
  if (n.kind == NodeKind::Automaton || n.monitor) {
    const TraceStructure& r = n.kind == NodeKind::Automaton ? *n.spec : *n.monitor;
    const TraceSet& ts = r.traces();
    auto waiting = [&](int state) {
      std::size_t enabled = 0;
      for (const auto& s : r.inputs())
        if (ts.next(state, s) != TraceSet::kDead) ++enabled;
      return enabled >= 2;
    };
    int state = ts.initial();
    line.wait_initial = waiting(state);
    for (auto& p : line.points) {
      int next = ts.next(state, p.label);
      if (next != TraceSet::kDead) state = next;
      p.wait = waiting(state);
    }
    return;
  }
  std::map<std::string, bool> levels;
  for (const auto& i : n.inputs) levels[i] = false;
  bool out = false;
  // Waiting: output stable, no single input change moves it, but some pair does.
  auto waiting = [&]() {
    if (n.evaluate(levels, out) != out) return false;
    auto flips = [&](std::vector<std::string> which) {
      auto l = levels;
      for (const auto& w : which) l[w] = !l[w];
      return n.evaluate(l, out) != out;
    };
    for (const auto& i : n.inputs)
      if (flips({i})) return false;
    for (std::size_t i = 0; i < n.inputs.size(); ++i)
      for (std::size_t j = i + 1; j < n.inputs.size(); ++j)
        if (flips({n.inputs[i], n.inputs[j]})) return true;
    return false;
  };
  line.wait_initial = waiting();
  for (auto& p : line.points) {
    auto pe = split_symbol(p.label);
    if (p.emission) out = pe.edge == '+';
    else if (levels.count(pe.port)) levels[pe.port] = pe.edge ? pe.edge == '+' : !levels[pe.port];
    p.wait = waiting();
  }
}

}  // namespace detail

inline CausalGraph build(const SimTrace& t) {
  CausalGraph g;
  std::optional<Network> net;
  if (!t.network.is_null()) net = Network::from_json(t.network);
  std::map<std::string, std::size_t> line_index;
  auto line = [&](const std::string& node) {
    auto [it, inserted] = line_index.emplace(node, g.lines.size());
    if (inserted) g.lines.push_back(Line{node, false, {}});
    return it->second;
  };
  if (net)
    for (const auto& n : net->nodes) line(n.id);

  struct Raw {
    std::uint64_t step;
    Point p;
  };
  std::vector<std::vector<Raw>> raw;
  std::map<std::uint64_t, std::pair<std::size_t, std::uint64_t>> fire_point;  // fire -> (line, step)
  for (const auto& e : t.events) {
    if (e.arrival_time <= e.emit_time) throw TraceFormatError("inconsistent trace: event " + std::to_string(e.id) + " has no positive delay");
    std::size_t src = line(e.from.node);
    raw.resize(g.lines.size());
    auto [it, inserted] = fire_point.emplace(e.fire, std::make_pair(src, e.emit_step));
    if (inserted) {
      raw[src].push_back({e.emit_step, Point{e.from.node, 0, e.emit_time, e.label, true, e.emit_step, false}});
    } else if (it->second != std::make_pair(src, e.emit_step)) {
      throw TraceFormatError("inconsistent trace: events of one emission disagree");
    }
    if (e.arrive_step) {
      std::size_t dst = line(e.to.node);
      raw.resize(g.lines.size());
      if (*e.arrive_step <= e.emit_step) throw TraceFormatError("inconsistent trace: arrival before emission");
      raw[dst].push_back({*e.arrive_step, Point{e.to.node, 0, e.arrival_time, e.sink_label, false, *e.arrive_step, false}});
    }
  }
  raw.resize(g.lines.size());
  std::map<std::pair<std::size_t, std::uint64_t>, std::size_t> index_of;  // (line, step) -> index
  for (std::size_t l = 0; l < g.lines.size(); ++l) {
    auto& r = raw[l];
    std::sort(r.begin(), r.end(), [](const Raw& a, const Raw& b) { return a.step < b.step; });
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i > 0 && r[i].p.time < r[i - 1].p.time) throw TraceFormatError("inconsistent trace: line " + g.lines[l].node + " goes back in time");
      r[i].p.index = i;
      index_of[{l, r[i].step}] = i;
      g.lines[l].points.push_back(r[i].p);
    }
  }
  for (const auto& e : t.events) {
    if (!e.arrive_step) continue;
    std::size_t src = line_index.at(e.from.node), dst = line_index.at(e.to.node);
    g.arrows.push_back({e.id, {src, index_of.at({src, e.emit_step})}, {dst, index_of.at({dst, *e.arrive_step})}});
  }
  if (net)
    for (auto& l : g.lines) detail::mark_waits(l, net->node(l.node));
  return g;
}

struct PointKey {
  std::string node;
  Symbol label;
  std::size_t occurrence = 1;
  friend bool operator==(const PointKey&, const PointKey&) = default;
};

struct OrderConstraint {
  PointKey before;
  PointKey after;
};

struct OrderViolation {
  std::size_t constraint = 0;
  std::string node;
  Symbol first;   // the point that had to come first
  Symbol second;
  std::string reason;
};

struct OrderVerdict {
  bool holds = true;
  std::vector<OrderViolation> violations;
};

inline std::string describe(const PointKey& k) {
  return k.node + ":" + k.label + "#" + std::to_string(k.occurrence);
}

// A constraint is violated when its second point happened and the first one
// did not happen before it. Constraints whose second point never happened
// are satisfied.
inline OrderVerdict check_order(const CausalGraph& g, const std::vector<OrderConstraint>& constraints) {
  OrderVerdict v;
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    if (c.before.occurrence == 0 || c.after.occurrence == 0) throw Error("unresolvable constraint: occurrences count from 1");
    auto b = g.find(c.before.node, c.before.label, c.before.occurrence);
    auto a = g.find(c.after.node, c.after.label, c.after.occurrence);
    if (!a) continue;
    std::string reason;
    if (!b) reason = describe(c.after) + " happened without " + describe(c.before);
    else if (b->line == a->line && b->index > a->index) reason = describe(c.after) + " came before " + describe(c.before);
    else if (b->line != a->line && !g.causally_related(*b, *a)) reason = describe(c.before) + " does not precede " + describe(c.after);
    if (!reason.empty()) {
      v.holds = false;
      v.violations.push_back({i, c.after.node, c.before.label, c.after.label, reason});
    }
  }
  return v;
}

// The two ordering requirements of the Q-element for its first `cycles`
// cycles: y1↑ before u↑ at gate B, x1↓ before u↓ at gate A.
inline std::vector<OrderConstraint> q_element_constraints(std::size_t cycles = 1) {
  std::vector<OrderConstraint> out;
  for (std::size_t k = 1; k <= cycles; ++k) {
    out.push_back({{"B", "y1+", k}, {"B", "u+", k}});
    out.push_back({{"A", "x1-", k}, {"A", "u-", k}});
  }
  return out;
}

inline nlohmann::json to_json(const CausalGraph& g) {
  nlohmann::json lines = nlohmann::json::array();
  for (const auto& l : g.lines) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : l.points)
      pts.push_back({{"index", p.index}, {"time", to_ticks(p.time)}, {"label", p.label},
                     {"kind", p.emission ? "emit" : "arrive"}, {"step", p.step}, {"wait", p.wait}});
    lines.push_back({{"node", l.node}, {"wait_initial", l.wait_initial}, {"points", pts}});
  }
  nlohmann::json arrows = nlohmann::json::array();
  for (const auto& a : g.arrows)
    arrows.push_back({{"event", a.event},
                      {"from", {g.lines[a.from.line].node, a.from.index}},
                      {"to", {g.lines[a.to.line].node, a.to.index}}});
  return {{"lines", lines}, {"arrows", arrows}};
}

inline CausalGraph graph_from_json(const nlohmann::json& j) {
  try {
    CausalGraph g;
    for (const auto& jl : j.at("lines")) {
      Line l{jl.at("node").get<std::string>(), jl.at("wait_initial").get<bool>(), {}};
      for (const auto& jp : jl.at("points")) {
        Point p;
        p.node = l.node;
        p.index = jp.at("index").get<std::size_t>();
        if (p.index != l.points.size()) throw Error("point indices are not consecutive");
        p.time = from_ticks(jp.at("time").get<double>());
        p.label = jp.at("label").get<std::string>();
        p.emission = jp.at("kind") == "emit";
        p.step = jp.at("step").get<std::uint64_t>();
        p.wait = jp.at("wait").get<bool>();
        l.points.push_back(std::move(p));
      }
      g.lines.push_back(std::move(l));
    }
    for (const auto& ja : j.at("arrows")) {
      auto ref = [&](const nlohmann::json& r) {
        PointRef p{g.line_of(r.at(0).get<std::string>()), r.at(1).get<std::size_t>()};
        g.point(p);
        return p;
      };
      g.arrows.push_back({ja.at("event").get<std::uint64_t>(), ref(ja.at("from")), ref(ja.at("to"))});
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw TraceFormatError(std::string("malformed graph: ") + e.what());
  }
}

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

inline std::string format_time(Time t) {
  std::ostringstream os;
  os << to_ticks(t);
  return os.str();
}

}  // namespace detail

// One cluster per node holding its chain of points; bold chain segments
// mark rendezvous waits.
inline std::string to_dot(const CausalGraph& g) {
  std::ostringstream os;
  os << "digraph spacetime {\n";
  std::size_t points = 0;
  for (const auto& l : g.lines) points += l.points.size();
  if (points == 0) {
    os << "}\n";
    return os.str();
  }
  os << "  rankdir=TB;\n  node [shape=plaintext, fontsize=10];\n";
  auto id = [](std::size_t l, std::size_t i) { return "p" + std::to_string(l) + "_" + std::to_string(i); };
  for (std::size_t l = 0; l < g.lines.size(); ++l) {
    const auto& line = g.lines[l];
    os << "  subgraph cluster_" << l << " {\n    label=" << detail::dot_quote(line.node) << ";\n";
    os << "    " << id(l, 0) << "_top [label=\"\", shape=point];\n";
    for (const auto& p : line.points)
      os << "    " << id(l, p.index + 1) << " [label=" << detail::dot_quote(p.label + " @" + detail::format_time(p.time))
         << "];\n";
    for (std::size_t i = 0; i < line.points.size(); ++i) {
      bool wait = i == 0 ? line.wait_initial : line.points[i - 1].wait;
      os << "    " << (i == 0 ? id(l, 0) + "_top" : id(l, i)) << " -> " << id(l, i + 1)
         << " [arrowhead=none" << (wait ? ", penwidth=3" : "") << "];\n";
    }
    os << "  }\n";
  }
  for (const auto& a : g.arrows)
    os << "  " << id(a.from.line, a.from.index + 1) << " -> " << id(a.to.line, a.to.index + 1)
       << " [constraint=false, label=" << detail::dot_quote("e" + std::to_string(a.event)) << "];\n";
  os << "}\n";
  return os.str();
}

}  // namespace dicirc
