#pragma once

// Discrete-event simulation of closed networks. One queue of timed actions
// (deliveries of channel events and firings of node outputs), ties broken by
// creation order. Automaton nodes follow their trace structure; level gates
// evaluate a boolean function with inertial output delay.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dicirc/error.hpp"
#include "dicirc/network.hpp"
#include "dicirc/trace.hpp"

namespace dicirc {

enum class InterferenceKind { Computation, Transmission, Output };

inline std::string interference_kind_name(InterferenceKind k) {
  switch (k) {
    case InterferenceKind::Computation: return "computation";
    case InterferenceKind::Transmission: return "transmission";
    case InterferenceKind::Output: return "output";
  }
  return "?";
}

inline InterferenceKind interference_kind_from_name(const std::string& s) {
  for (auto k : {InterferenceKind::Computation, InterferenceKind::Transmission, InterferenceKind::Output})
    if (interference_kind_name(k) == s) return k;
  throw TraceFormatError("unknown interference kind '" + s + "'");
}

struct SimEvent {
  std::uint64_t id = 0;
  std::uint64_t fire = 0;  // events of one emission share the fire id
  std::string channel;
  Endpoint from;
  Endpoint to;
  Symbol label;       // as emitted, e.g. "xi+"
  Symbol sink_label;  // as received, e.g. "x1+"
  Time emit_time = 0;
  Time arrival_time = 0;
  std::uint64_t emit_step = 0;
  std::optional<std::uint64_t> arrive_step;  // empty if never delivered
  std::vector<std::uint64_t> causes;
  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

struct InterferenceReport {
  InterferenceKind kind = InterferenceKind::Computation;
  Time time = 0;
  std::string location;  // node or channel id
  std::vector<std::uint64_t> events;
  int state = -1;        // acceptor or monitor state, -1 when not applicable
  Symbol symbol;         // the unexpected symbol or edge
  std::string detail;
  friend bool operator==(const InterferenceReport&, const InterferenceReport&) = default;
};

struct SimOptions {
  std::uint64_t seed = 0;
  std::uint64_t max_events = 1000;   // deliveries
  std::optional<Time> max_time;
  bool halt_on_interference = true;
  bool shuffle_ties = false;         // random order among simultaneous actions
};

struct SimTrace {
  nlohmann::json network;
  SimOptions options;
  std::vector<SimEvent> events;
  std::vector<InterferenceReport> interferences;
  bool halted = false;
  std::uint64_t deliveries = 0;
  std::uint64_t steps = 0;
};

inline constexpr const char* kOutputDisabled = "scheduled output disabled by an input";

namespace detail {

struct GateState {
  std::map<std::string, bool> levels;
  bool output = false;
  std::optional<std::uint64_t> pending;  // action seq of the scheduled output edge
  std::vector<std::uint64_t> pending_causes;
  int monitor = 0;
  std::optional<Time> last_data_edge;
  std::optional<Time> last_enable_fall;
};

struct AutomatonState {
  int state = 0;
  std::map<Symbol, std::uint64_t> pending;  // output symbol -> action seq
  std::map<Symbol, std::vector<std::uint64_t>> pending_causes;
  std::optional<std::uint64_t> last_delivery;
  std::map<Symbol, Time> last_arrival;
};

struct Action {
  Time time;
  std::uint64_t tie;
  std::uint64_t seq;
  bool delivery;
  std::size_t node;      // firing node
  Symbol symbol;         // firing symbol, or edge symbol for gates
  std::uint64_t event;   // delivered event
  bool operator>(const Action& o) const {
    if (time != o.time) return time > o.time;
    if (tie != o.tie) return tie > o.tie;
    return seq > o.seq;
  }
};

class Engine {
 public:
  Engine(const Network& net, const SimOptions& opts)
      : net_(net), opts_(opts), rng_(opts.seed), tie_rng_(opts.seed ^ 0x5eedULL) {
    net_.validate();
    trace_.network = net_.to_json();
    trace_.options = opts;
    gates_.resize(net_.nodes.size());
    autos_.resize(net_.nodes.size());
    occurrences_.resize(net_.nodes.size(), 0);
    channel_occurrences_.resize(net_.channels.size(), 0);
    fork_occurrences_.resize(net_.forks.size(), 0);
    in_flight_.resize(net_.channels.size());
    for (std::size_t c = 0; c < net_.channels.size(); ++c) out_channels_[net_.channels[c].from].push_back(c);
    for (const auto& n : net_.nodes)
      for (const auto& p : n.output_ports()) output_owner_[p].insert(n.id);
  }

  SimTrace run() {
    for (std::size_t i = 0; i < net_.nodes.size(); ++i) {
      const Node& n = net_.nodes[i];
      if (n.is_gate()) {
        for (const auto& p : n.inputs) gates_[i].levels[p] = false;
        reevaluate_gate(i);
      } else {
        schedule_outputs(i);
      }
    }
    while (!queue_.empty() && !stopped_) {
      Action a = queue_.top();
      queue_.pop();
      if (opts_.max_time && a.time > *opts_.max_time) break;
      if (cancelled_.count(a.seq)) continue;
      now_ = a.time;
      if (a.delivery) deliver(a.event);
      else fire(a.node, a.symbol, a.seq);
      if (trace_.deliveries >= opts_.max_events) break;
    }
    trace_.steps = step_;
    return std::move(trace_);
  }

 private:
  std::uint64_t push(Time t, bool delivery, std::size_t node, Symbol sym, std::uint64_t event) {
    std::uint64_t seq = seq_++;
    std::uint64_t tie = opts_.shuffle_ties ? tie_rng_() : 0;
    queue_.push(Action{t, tie, seq, delivery, node, std::move(sym), event});
    return seq;
  }

  void report(InterferenceKind kind, std::string location, std::vector<std::uint64_t> events, int state,
              Symbol symbol, std::string detail) {
    if (stopped_) return;
    trace_.interferences.push_back(
        {kind, now_, std::move(location), std::move(events), state, std::move(symbol), std::move(detail)});
    if (opts_.halt_on_interference) {
      stopped_ = true;
      trace_.halted = true;
    }
  }

  // Emits symbol `label` from (node, port) on every channel leaving that port.
  void emit(std::size_t node, const std::string& port, char edge, const std::vector<std::uint64_t>& causes) {
    const Node& n = net_.nodes[node];
    const std::uint64_t fire_id = fire_++;
    const std::uint64_t step = step_++;
    const Symbol label = join_symbol(port, edge);
    if (output_owner_[port].size() > 1) {
      report(InterferenceKind::Output, n.id, {}, -1, label, "output '" + port + "' is shared with another node");
    }
    std::map<std::size_t, Time> fork_base;
    for (std::size_t c : out_channels_[{n.id, port}]) {
      const Channel& ch = net_.channels[c];
      Time d;
      auto f = net_.fork_of(ch.id);
      if (f && net_.forks[*f].isochronic) {
        const Fork& fk = net_.forks[*f];
        auto it = fork_base.find(*f);
        if (it == fork_base.end()) {
          const Channel& first = net_.channels[net_.channel_index(fk.channels.front())];
          it = fork_base.emplace(*f, first.delay.sample(rng_, fork_occurrences_[*f]++)).first;
        }
        d = it->second;
        if (auto off = fk.offsets.find(ch.id); off != fk.offsets.end()) d += off->second;
        if (fk.skew > 0) d += std::uniform_int_distribution<Time>(0, fk.skew)(rng_);
      } else {
        d = ch.delay.sample(rng_, channel_occurrences_[c]++);
      }
      SimEvent e;
      e.id = trace_.events.size();
      e.fire = fire_id;
      e.channel = ch.id;
      e.from = ch.from;
      e.to = ch.to;
      e.label = label;
      e.sink_label = join_symbol(ch.to.port, edge);
      e.emit_time = now_;
      e.arrival_time = now_ + d;
      e.emit_step = step;
      e.causes = causes;
      if (!in_flight_[c].empty())
        report(InterferenceKind::Transmission, ch.id, {in_flight_[c].front(), e.id}, -1, label,
               "event emitted while another is in flight");
      in_flight_[c].push_back(e.id);
      push(e.arrival_time, true, 0, "", e.id);
      trace_.events.push_back(std::move(e));
    }
  }

  void deliver(std::uint64_t id) {
    SimEvent& e = trace_.events[id];
    e.arrive_step = step_++;
    ++trace_.deliveries;
    std::size_t c = net_.channel_index(e.channel);
    auto& fl = in_flight_[c];
    fl.erase(std::find(fl.begin(), fl.end(), id));
    std::size_t node = net_.node_index(e.to.node);
    if (net_.nodes[node].is_gate()) deliver_to_gate(node, e);
    else deliver_to_automaton(node, e);
  }

  void deliver_to_automaton(std::size_t node, const SimEvent& e) {
    const Node& n = net_.nodes[node];
    auto& st = autos_[node];
    const TraceSet& ts = n.spec->traces();
    st.last_arrival[e.sink_label] = now_;
    int next = ts.next(st.state, e.sink_label);
    if (next == TraceSet::kDead) {
      report(InterferenceKind::Computation, n.id, {e.id}, st.state, e.sink_label,
             "symbol not accepted in current state");
      return;
    }
    st.state = next;
    st.last_delivery = e.id;
    schedule_outputs(node);
  }

  void schedule_outputs(std::size_t node) {
    if (stopped_) return;
    const Node& n = net_.nodes[node];
    auto& st = autos_[node];
    const TraceSet& ts = n.spec->traces();
    auto conflict = [&](const Symbol& a, const Symbol& b) {
      int sa = ts.next(st.state, a), sb = ts.next(st.state, b);
      return sa == TraceSet::kDead || sb == TraceSet::kDead || ts.next(sa, b) == TraceSet::kDead ||
             ts.next(sb, a) == TraceSet::kDead;
    };
    std::vector<Symbol> candidates;
    for (const auto& o : n.spec->outputs()) {
      if (st.pending.count(o) || ts.next(st.state, o) == TraceSet::kDead) continue;
      bool blocked = false;
      for (const auto& [p, seq] : st.pending)
        if (conflict(o, p)) blocked = true;
      if (!blocked) candidates.push_back(o);
    }
    std::vector<std::uint64_t> causes;
    if (st.last_delivery) causes.push_back(*st.last_delivery);
    while (!candidates.empty()) {
      std::vector<Symbol> group;
      for (const auto& o : candidates)
        if (o == candidates.front() || conflict(o, candidates.front())) group.push_back(o);
      Symbol chosen = group.front();
      Time extra = 0;
      if (group.size() > 1) {
        chosen = arbitrate(n, st, group);
        extra = n.arbitration.delay.sample(rng_, 0);
      }
      Time d = n.delay.sample(rng_, occurrences_[node]++) + extra;
      st.pending[chosen] = push(now_ + d, false, node, chosen, 0);
      st.pending_causes[chosen] = causes;
      std::vector<Symbol> rest;
      for (const auto& o : candidates)
        if (std::find(group.begin(), group.end(), o) == group.end() && !conflict(o, chosen)) rest.push_back(o);
      candidates = std::move(rest);
    }
  }

  Symbol arbitrate(const Node& n, const AutomatonState& st, const std::vector<Symbol>& group) {
    if (n.arbitration.policy == ArbitrationPolicy::Fifo) {
      auto key = [&](const Symbol& o) {
        auto r = n.arbitration.requests.find(o);
        if (r == n.arbitration.requests.end()) return std::numeric_limits<Time>::max();
        auto t = st.last_arrival.find(r->second);
        return t == st.last_arrival.end() ? std::numeric_limits<Time>::max() : t->second;
      };
      return *std::min_element(group.begin(), group.end(), [&](const Symbol& a, const Symbol& b) {
        return std::make_pair(key(a), a) < std::make_pair(key(b), b);
      });
    }
    return group[std::uniform_int_distribution<std::size_t>(0, group.size() - 1)(rng_)];
  }

  void fire(std::size_t node, const Symbol& sym, std::uint64_t seq) {
    const Node& n = net_.nodes[node];
    if (n.is_gate()) {
      fire_gate(node, sym);
      return;
    }
    auto& st = autos_[node];
    st.pending.erase(sym);
    auto causes = std::move(st.pending_causes[sym]);
    st.pending_causes.erase(sym);
    int next = n.spec->traces().next(st.state, sym);
    if (next == TraceSet::kDead) {
      report(InterferenceKind::Computation, n.id, causes, st.state, sym, kOutputDisabled);
      if (!stopped_) schedule_outputs(node);
      return;
    }
    (void)seq;
    st.state = next;
    auto pe = split_symbol(sym);
    emit(node, pe.port, pe.edge, causes);
    schedule_outputs(node);
  }

  void deliver_to_gate(std::size_t node, const SimEvent& e) {
    const Node& n = net_.nodes[node];
    auto& g = gates_[node];
    const std::string& port = e.to.port;
    char edge = split_symbol(e.sink_label).edge;
    bool old = g.levels.at(port);
    bool now = edge == '+' ? true : edge == '-' ? false : !old;
    Symbol sym = join_symbol(port, now ? '+' : '-');
    if (edge && now == old) {
      report(InterferenceKind::Computation, n.id, {e.id}, -1, e.sink_label, "edge does not change the level");
      if (stopped_) return;
    }
    g.levels[port] = now;
    if (n.monitor) {
      int m = n.monitor->traces().next(g.monitor, sym);
      if (m == TraceSet::kDead) {
        report(InterferenceKind::Computation, n.id, {e.id}, g.monitor, sym, "edge not admissible at the gate");
        if (stopped_) return;
      } else {
        g.monitor = m;
      }
    }
    if (n.kind == NodeKind::Latch) {
      if (port == n.inputs[0]) g.last_data_edge = now_;
      if (port == n.inputs[1] && !now) g.last_enable_fall = now_;
      if (g.last_data_edge && g.last_enable_fall &&
          std::abs(*g.last_data_edge - *g.last_enable_fall) <= n.latch_window) {
        report(InterferenceKind::Computation, n.id, {e.id}, -1, sym, "data edge races the falling enable");
        g.last_enable_fall.reset();
        if (stopped_) return;
      }
    }
    reevaluate_gate(node, e.id);
  }

  void reevaluate_gate(std::size_t node, std::optional<std::uint64_t> cause = std::nullopt) {
    if (stopped_) return;
    const Node& n = net_.nodes[node];
    auto& g = gates_[node];
    bool f = n.evaluate(g.levels, g.output);
    if (g.pending && f == g.output) {
      cancelled_.insert(*g.pending);
      g.pending.reset();
      report(InterferenceKind::Computation, n.id, cause ? std::vector<std::uint64_t>{*cause} : std::vector<std::uint64_t>{},
             -1, join_symbol(n.output, g.output ? '-' : '+'), "pending output edge cancelled (glitch)");
    } else if (!g.pending && f != g.output) {
      Time d = n.delay.sample(rng_, occurrences_[node]++);
      g.pending = push(now_ + d, false, node, join_symbol(n.output, f ? '+' : '-'), 0);
      g.pending_causes.clear();
      if (cause) g.pending_causes.push_back(*cause);
    }
  }

  void fire_gate(std::size_t node, const Symbol& sym) {
    const Node& n = net_.nodes[node];
    auto& g = gates_[node];
    g.pending.reset();
    if (n.monitor) {
      int m = n.monitor->traces().next(g.monitor, sym);
      if (m == TraceSet::kDead) {
        report(InterferenceKind::Computation, n.id, g.pending_causes, g.monitor, sym,
               "output edge not admissible at the gate");
        if (stopped_) return;
      } else {
        g.monitor = m;
      }
    }
    g.output = split_symbol(sym).edge == '+';
    emit(node, n.output, split_symbol(sym).edge, g.pending_causes);
    reevaluate_gate(node);
  }

  const Network& net_;
  SimOptions opts_;
  std::mt19937_64 rng_;
  std::mt19937_64 tie_rng_;
  SimTrace trace_;
  std::priority_queue<Action, std::vector<Action>, std::greater<Action>> queue_;
  std::set<std::uint64_t> cancelled_;
  std::vector<GateState> gates_;
  std::vector<AutomatonState> autos_;
  std::vector<std::size_t> occurrences_;
  std::vector<std::size_t> channel_occurrences_;
  std::vector<std::size_t> fork_occurrences_;
  std::vector<std::vector<std::uint64_t>> in_flight_;
  std::map<Endpoint, std::vector<std::size_t>> out_channels_;
  std::map<std::string, std::set<std::string>> output_owner_;
  Time now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t step_ = 0;
  std::uint64_t fire_ = 0;
  bool stopped_ = false;
};

}  // namespace detail

inline SimTrace simulate(const Network& net, const SimOptions& opts) { return detail::Engine(net, opts).run(); }

// ---------------------------------------------------------------------------
// JSON-lines form

inline nlohmann::json to_json(const SimEvent& e) {
  nlohmann::json j = {{"type", "event"},
                      {"id", e.id},
                      {"fire", e.fire},
                      {"channel", e.channel},
                      {"from", {e.from.node, e.from.port}},
                      {"to", {e.to.node, e.to.port}},
                      {"label", e.label},
                      {"sink_label", e.sink_label},
                      {"emit_time", to_ticks(e.emit_time)},
                      {"arrival_time", to_ticks(e.arrival_time)},
                      {"emit_step", e.emit_step},
                      {"causes", e.causes}};
  j["arrive_step"] = e.arrive_step ? nlohmann::json(*e.arrive_step) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const InterferenceReport& r) {
  return {{"type", "interference"}, {"kind", interference_kind_name(r.kind)},
          {"time", to_ticks(r.time)}, {"location", r.location},
          {"events", r.events},       {"state", r.state},
          {"symbol", r.symbol},       {"detail", r.detail}};
}

inline void write_jsonl(std::ostream& os, const SimTrace& t) {
  nlohmann::json header = {{"type", "header"},
                           {"format", "dicirc-simtrace"},
                           {"version", 1},
                           {"seed", t.options.seed},
                           {"max_events", t.options.max_events},
                           {"on_interference", t.options.halt_on_interference ? "halt" : "log"},
                           {"shuffle_ties", t.options.shuffle_ties},
                           {"network", t.network}};
  header["max_time"] = t.options.max_time ? nlohmann::json(to_ticks(*t.options.max_time)) : nlohmann::json(nullptr);
  os << header.dump() << '\n';
  for (const auto& e : t.events) os << to_json(e).dump() << '\n';
  for (const auto& r : t.interferences) os << to_json(r).dump() << '\n';
  os << nlohmann::json{{"type", "end"},
                       {"events", t.events.size()},
                       {"interferences", t.interferences.size()},
                       {"deliveries", t.deliveries},
                       {"steps", t.steps},
                       {"halted", t.halted}}
            .dump()
     << '\n';
}

inline std::string to_jsonl(const SimTrace& t) {
  std::ostringstream os;
  write_jsonl(os, t);
  return os.str();
}

inline SimTrace read_jsonl(std::istream& is) {
  SimTrace t;
  std::string line;
  bool header = false, end = false;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        if (header) throw TraceFormatError("second header");
        header = true;
        if (j.at("format") != "dicirc-simtrace") throw TraceFormatError("not a simulation trace");
        t.network = j.at("network");
        t.options.seed = j.at("seed").get<std::uint64_t>();
        t.options.max_events = j.at("max_events").get<std::uint64_t>();
        t.options.halt_on_interference = j.at("on_interference") == "halt";
        t.options.shuffle_ties = j.value("shuffle_ties", false);
        if (!j.at("max_time").is_null()) t.options.max_time = from_ticks(j.at("max_time").get<double>());
      } else if (!header) {
        throw TraceFormatError("trace does not start with a header");
      } else if (type == "event") {
        SimEvent e;
        e.id = j.at("id").get<std::uint64_t>();
        if (e.id != t.events.size()) throw TraceFormatError("event ids are not consecutive");
        e.fire = j.at("fire").get<std::uint64_t>();
        e.channel = j.at("channel").get<std::string>();
        auto from = j.at("from").get<std::vector<std::string>>();
        auto to = j.at("to").get<std::vector<std::string>>();
        if (from.size() != 2 || to.size() != 2) throw TraceFormatError("bad endpoint");
        e.from = {from[0], from[1]};
        e.to = {to[0], to[1]};
        e.label = j.at("label").get<std::string>();
        e.sink_label = j.at("sink_label").get<std::string>();
        e.emit_time = from_ticks(j.at("emit_time").get<double>());
        e.arrival_time = from_ticks(j.at("arrival_time").get<double>());
        e.emit_step = j.at("emit_step").get<std::uint64_t>();
        if (!j.at("arrive_step").is_null()) e.arrive_step = j.at("arrive_step").get<std::uint64_t>();
        e.causes = j.at("causes").get<std::vector<std::uint64_t>>();
        t.events.push_back(std::move(e));
      } else if (type == "interference") {
        InterferenceReport r;
        r.kind = interference_kind_from_name(j.at("kind").get<std::string>());
        r.time = from_ticks(j.at("time").get<double>());
        r.location = j.at("location").get<std::string>();
        r.events = j.at("events").get<std::vector<std::uint64_t>>();
        r.state = j.at("state").get<int>();
        r.symbol = j.at("symbol").get<std::string>();
        r.detail = j.at("detail").get<std::string>();
        t.interferences.push_back(std::move(r));
      } else if (type == "end") {
        end = true;
        t.deliveries = j.at("deliveries").get<std::uint64_t>();
        t.steps = j.at("steps").get<std::uint64_t>();
        t.halted = j.at("halted").get<bool>();
      } else {
        throw TraceFormatError("unknown line type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw TraceFormatError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const TraceFormatError& e) {
      throw TraceFormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!header) throw TraceFormatError("empty trace");
  if (!end) throw TraceFormatError("trace has no end line");
  return t;
}

inline SimTrace from_jsonl(const std::string& text) {
  std::istringstream is(text);
  return read_jsonl(is);
}

// ---------------------------------------------------------------------------
// Replay

struct ReplayVerdict {
  bool ok = true;
  std::string reason;
  std::vector<InterferenceReport> reproduced;
};

// Re-executes the logged emissions and deliveries in step order against the
// network and checks that every step was possible and that the same
// interference reports arise.
inline ReplayVerdict replay(const SimTrace& t, const Network& net) {
  if (t.network != net.to_json()) throw NetworkError("trace was produced by a different network");
  ReplayVerdict v;
  auto fail = [&](std::string why) {
    v.ok = false;
    v.reason = std::move(why);
    return v;
  };

  struct Step {
    std::uint64_t step;
    bool delivery;
    std::uint64_t event;
  };
  std::vector<Step> steps;
  std::map<std::uint64_t, std::uint64_t> fire_step;
  for (const auto& e : t.events) {
    if (e.arrival_time <= e.emit_time) return fail("event " + std::to_string(e.id) + " arrives before it is emitted");
    auto [it, inserted] = fire_step.emplace(e.fire, e.emit_step);
    if (!inserted && it->second != e.emit_step) return fail("events of one emission have different steps");
    if (inserted) steps.push_back({e.emit_step, false, e.id});
    if (e.arrive_step) {
      if (*e.arrive_step <= e.emit_step) return fail("event " + std::to_string(e.id) + " delivered before emission");
      steps.push_back({*e.arrive_step, true, e.id});
    }
    for (auto c : e.causes) {
      if (c >= t.events.size()) return fail("unknown cause");
      const auto& ce = t.events[c];
      if (!ce.arrive_step || *ce.arrive_step >= e.emit_step)
        return fail("event " + std::to_string(e.id) + " is emitted before its cause " + std::to_string(c) + " arrives");
    }
  }
  std::sort(steps.begin(), steps.end(), [](const Step& a, const Step& b) { return a.step < b.step; });
  for (std::size_t i = 1; i < steps.size(); ++i)
    if (steps[i].step == steps[i - 1].step) return fail("two actions share a step");

  std::vector<std::map<std::string, bool>> levels(net.nodes.size());
  std::vector<bool> outputs(net.nodes.size(), false);
  std::vector<int> state(net.nodes.size(), 0);
  std::vector<std::optional<Time>> data_edge(net.nodes.size()), enable_fall(net.nodes.size());
  std::map<std::string, std::vector<std::uint64_t>> in_flight;
  std::map<std::string, std::set<std::string>> owners;
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    for (const auto& p : net.nodes[i].output_ports()) owners[p].insert(net.nodes[i].id);
    if (net.nodes[i].is_gate())
      for (const auto& p : net.nodes[i].inputs) levels[i][p] = false;
  }
  auto report = [&](InterferenceKind k, Time time, std::string loc, std::vector<std::uint64_t> ev, int st, Symbol s,
                    std::string detail) {
    v.reproduced.push_back({k, time, std::move(loc), std::move(ev), st, std::move(s), std::move(detail)});
  };
  auto excited = [&](std::size_t i) {
    return net.nodes[i].evaluate(levels[i], outputs[i]) != outputs[i];
  };

  Time last_time = 0;
  for (const auto& s : steps) {
    const SimEvent& e = t.events[s.event];
    Time now = s.delivery ? e.arrival_time : e.emit_time;
    if (now < last_time) return fail("step " + std::to_string(s.step) + " goes back in time");
    last_time = now;
    if (!s.delivery) {
      std::size_t i = net.node_index(e.from.node);
      const Node& n = net.nodes[i];
      if (owners[e.from.port].size() > 1)
        report(InterferenceKind::Output, now, n.id, {}, -1, e.label, "output '" + e.from.port + "' is shared with another node");
      if (n.is_gate()) {
        bool value = split_symbol(e.label).edge == '+';
        if (value == outputs[i] || n.evaluate(levels[i], outputs[i]) != value)
          return fail("gate '" + n.id + "' fires " + e.label + " without being excited");
        if (n.monitor) {
          int m = n.monitor->traces().next(state[i], e.label);
          if (m == TraceSet::kDead)
            report(InterferenceKind::Computation, now, n.id, e.causes, state[i], e.label, "output edge not admissible at the gate");
          else
            state[i] = m;
        }
        outputs[i] = value;
      } else {
        int next = n.spec->traces().next(state[i], e.label);
        if (next == TraceSet::kDead || !n.spec->is_output(e.label))
          return fail("node '" + n.id + "' cannot output " + e.label + " at step " + std::to_string(s.step));
        state[i] = next;
      }
      for (const auto& ev : t.events) {
        if (ev.fire != e.fire) continue;
        auto& fl = in_flight[ev.channel];
        if (!fl.empty())
          report(InterferenceKind::Transmission, now, ev.channel, {fl.front(), ev.id}, -1, ev.label,
                 "event emitted while another is in flight");
        fl.push_back(ev.id);
      }
      continue;
    }
    auto& fl = in_flight[e.channel];
    auto it = std::find(fl.begin(), fl.end(), e.id);
    if (it == fl.end()) return fail("event " + std::to_string(e.id) + " delivered but not in flight");
    fl.erase(it);
    std::size_t i = net.node_index(e.to.node);
    const Node& n = net.nodes[i];
    if (!n.is_gate()) {
      int next = n.spec->traces().next(state[i], e.sink_label);
      if (next == TraceSet::kDead)
        report(InterferenceKind::Computation, now, n.id, {e.id}, state[i], e.sink_label, "symbol not accepted in current state");
      else
        state[i] = next;
      continue;
    }
    bool was_excited = excited(i);
    char edge = split_symbol(e.sink_label).edge;
    bool old = levels[i].at(e.to.port);
    bool lv = edge == '+' ? true : edge == '-' ? false : !old;
    Symbol sym = join_symbol(e.to.port, lv ? '+' : '-');
    if (edge && lv == old) report(InterferenceKind::Computation, now, n.id, {e.id}, -1, e.sink_label, "edge does not change the level");
    levels[i][e.to.port] = lv;
    if (n.monitor) {
      int m = n.monitor->traces().next(state[i], sym);
      if (m == TraceSet::kDead)
        report(InterferenceKind::Computation, now, n.id, {e.id}, state[i], sym, "edge not admissible at the gate");
      else
        state[i] = m;
    }
    if (n.kind == NodeKind::Latch) {
      if (e.to.port == n.inputs[0]) data_edge[i] = now;
      if (e.to.port == n.inputs[1] && !lv) enable_fall[i] = now;
      if (data_edge[i] && enable_fall[i] && std::abs(*data_edge[i] - *enable_fall[i]) <= n.latch_window) {
        report(InterferenceKind::Computation, now, n.id, {e.id}, -1, sym, "data edge races the falling enable");
        enable_fall[i].reset();
      }
    }
    if (was_excited && !excited(i))
      report(InterferenceKind::Computation, now, n.id, {e.id}, -1, join_symbol(n.output, outputs[i] ? '-' : '+'),
             "pending output edge cancelled (glitch)");
  }
  if (t.options.halt_on_interference && v.reproduced.size() > 1) v.reproduced.resize(1);
  // A scheduled output that an input disabled leaves no event behind, so
  // those reports cannot be reconstructed from the log.
  std::vector<InterferenceReport> logged;
  for (const auto& r : t.interferences)
    if (r.detail != kOutputDisabled) logged.push_back(r);
  if (v.reproduced != logged) return fail("interference reports differ from the log");
  return v;
}

inline nlohmann::json summary_json(const SimTrace& t) {
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& r : t.interferences) reports.push_back(to_json(r));
  return {{"seed", t.options.seed},
          {"events", t.events.size()},
          {"deliveries", t.deliveries},
          {"halted", t.halted},
          {"interference_free", t.interferences.empty()},
          {"interferences", reports}};
}

}  // namespace dicirc
