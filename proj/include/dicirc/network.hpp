#pragma once

// Gate-level and component-level networks: nodes joined by point-to-point
// channels, plus the JSON netlist format. Time is kept as integer
// milliticks so that runs are exactly reproducible.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dicirc/error.hpp"
#include "dicirc/spec_language.hpp"
#include "dicirc/trace.hpp"

namespace dicirc {

using Time = std::int64_t;
inline constexpr Time kMilli = 1000;

inline Time from_ticks(double t) { return static_cast<Time>(std::llround(t * kMilli)); }
inline double to_ticks(Time t) { return static_cast<double>(t) / kMilli; }

class DelayModel {
 public:
  enum class Kind { Fixed, Uniform, Table };

  DelayModel() = default;
  static DelayModel fixed(double d) { return DelayModel(Kind::Fixed, {from_ticks(d)}); }
  static DelayModel uniform(double lo, double hi) { return DelayModel(Kind::Uniform, {from_ticks(lo), from_ticks(hi)}); }
  static DelayModel table(const std::vector<double>& ds) {
    std::vector<Time> p;
    for (double d : ds) p.push_back(from_ticks(d));
    return DelayModel(Kind::Table, std::move(p));
  }

  Kind kind() const { return kind_; }
  const std::vector<Time>& params() const { return params_; }

  // Throws NetworkError unless every delay the model can produce is > 0
  // (or ≥ 0 when zero is allowed).
  void validate(const std::string& where, bool allow_zero = false) const {
    const Time floor = allow_zero ? 0 : 1;
    auto bad = [&](const std::string& why) { throw NetworkError(where + ": " + why); };
    switch (kind_) {
      case Kind::Fixed:
        if (params_.size() != 1) bad("fixed delay takes one parameter");
        break;
      case Kind::Uniform:
        if (params_.size() != 2) bad("uniform delay takes two parameters");
        if (params_[0] > params_[1]) bad("uniform delay has lo > hi");
        break;
      case Kind::Table:
        if (params_.empty()) bad("table delay needs at least one entry");
        break;
    }
    for (Time p : params_)
      if (p < floor) bad(allow_zero ? "negative delay" : "non-positive delay");
  }

  // Table entries are used per occurrence; the last one repeats.
  Time sample(std::mt19937_64& rng, std::size_t occurrence) const {
    switch (kind_) {
      case Kind::Fixed:
        return params_[0];
      case Kind::Uniform:
        return std::uniform_int_distribution<Time>(params_[0], params_[1])(rng);
      case Kind::Table:
        return params_[std::min(occurrence, params_.size() - 1)];
    }
    return 0;
  }

  nlohmann::json to_json() const {
    static const char* names[] = {"fixed", "uniform", "table"};
    nlohmann::json p = nlohmann::json::array();
    for (Time t : params_) p.push_back(to_ticks(t));
    return {{"kind", names[static_cast<int>(kind_)]}, {"params", p}};
  }

  static DelayModel from_json(const nlohmann::json& j) {
    std::string kind = j.at("kind").get<std::string>();
    std::vector<double> p = j.at("params").get<std::vector<double>>();
    DelayModel m;
    if (kind == "fixed") m.kind_ = Kind::Fixed;
    else if (kind == "uniform") m.kind_ = Kind::Uniform;
    else if (kind == "table") m.kind_ = Kind::Table;
    else throw NetworkError("unknown delay kind '" + kind + "'");
    m.params_.clear();
    for (double d : p) m.params_.push_back(from_ticks(d));
    return m;
  }

  friend bool operator==(const DelayModel&, const DelayModel&) = default;

 private:
  DelayModel(Kind k, std::vector<Time> p) : kind_(k), params_(std::move(p)) {}
  Kind kind_ = Kind::Fixed;
  std::vector<Time> params_{kMilli};
};

// A symbol "x+" or "x-" is a level edge on port x; any other symbol is a
// plain event on the port of the same name.
struct PortEdge {
  std::string port;
  char edge = 0;  // '+', '-' or 0
};

inline PortEdge split_symbol(const Symbol& s) {
  if (s.size() > 1 && (s.back() == '+' || s.back() == '-')) return {s.substr(0, s.size() - 1), s.back()};
  return {s, 0};
}

inline Symbol join_symbol(const std::string& port, char edge) { return edge ? port + edge : port; }

enum class NodeKind { Automaton, And, Or, Xor, CLevel, Latch };

inline std::string node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Automaton: return "automaton";
    case NodeKind::And: return "AND";
    case NodeKind::Or: return "OR";
    case NodeKind::Xor: return "XOR";
    case NodeKind::CLevel: return "C_LEVEL";
    case NodeKind::Latch: return "LATCH";
  }
  return "?";
}

inline NodeKind node_kind_from_name(const std::string& s) {
  for (NodeKind k : {NodeKind::Automaton, NodeKind::And, NodeKind::Or, NodeKind::Xor, NodeKind::CLevel, NodeKind::Latch})
    if (node_kind_name(k) == s) return k;
  throw NetworkError("unknown node kind '" + s + "'");
}

enum class ArbitrationPolicy { Random, Fifo };

struct Arbitration {
  ArbitrationPolicy policy = ArbitrationPolicy::Random;
  DelayModel delay = DelayModel::fixed(0);
  std::map<Symbol, Symbol> requests;  // grant output -> request input, for FIFO
  friend bool operator==(const Arbitration&, const Arbitration&) = default;
};

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Automaton;
  DelayModel delay = DelayModel::fixed(1);  // response delay

  // Automaton nodes: the structure interpreted operationally.
  std::optional<TraceStructure> spec;
  std::string spec_text;  // kept for the netlist when the spec came from an expression
  Arbitration arbitration;
  bool environment = false;

  // Level gates: inputs (LATCH: data then enable), inverted inputs, output.
  std::vector<std::string> inputs;
  std::set<std::string> inverted;
  std::string output;
  // Admissible edge sequences at the gate's ports, e.g. "x1+", "yo-".
  std::optional<TraceStructure> monitor;
  Time latch_window = 0;

  std::set<std::string> input_ports() const {
    std::set<std::string> out;
    if (kind == NodeKind::Automaton) {
      for (const auto& s : spec->inputs()) out.insert(split_symbol(s).port);
    } else {
      out.insert(inputs.begin(), inputs.end());
    }
    return out;
  }

  std::set<std::string> output_ports() const {
    std::set<std::string> out;
    if (kind == NodeKind::Automaton) {
      for (const auto& s : spec->outputs()) out.insert(split_symbol(s).port);
    } else {
      out.insert(output);
    }
    return out;
  }

  bool is_gate() const { return kind != NodeKind::Automaton; }

  // Boolean function of a level gate.
  bool evaluate(const std::map<std::string, bool>& levels, bool current) const {
    auto level = [&](const std::string& p) { return levels.at(p) != (inverted.count(p) != 0); };
    switch (kind) {
      case NodeKind::And: {
        for (const auto& p : inputs)
          if (!level(p)) return false;
        return true;
      }
      case NodeKind::Or: {
        for (const auto& p : inputs)
          if (level(p)) return true;
        return false;
      }
      case NodeKind::Xor: {
        bool v = false;
        for (const auto& p : inputs) v = v != level(p);
        return v;
      }
      case NodeKind::CLevel: {
        bool first = level(inputs.front());
        for (const auto& p : inputs)
          if (level(p) != first) return current;
        return first;
      }
      case NodeKind::Latch: {
        bool x = level(inputs[0]);
        bool e = level(inputs[1]);
        return (x && e) || (current && !e);
      }
      case NodeKind::Automaton:
        break;
    }
    throw NetworkError("node '" + id + "' is not a level gate");
  }
};

struct Endpoint {
  std::string node;
  std::string port;
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
  friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

struct Channel {
  std::string id;
  Endpoint from;
  Endpoint to;
  DelayModel delay = DelayModel::fixed(1);
};

// A group of channels leaving one port. Isochronic forks share one sampled
// delay per emission; each branch adds its offset and a jitter in [0, skew].
struct Fork {
  std::string id;
  std::vector<std::string> channels;
  bool isochronic = false;
  Time skew = 0;
  std::map<std::string, Time> offsets;
};

class Network {
 public:
  std::vector<Node> nodes;
  std::vector<Channel> channels;
  std::vector<Fork> forks;
  std::vector<std::string> drivers;  // environment nodes

  const Node& node(const std::string& id) const { return nodes.at(node_index(id)); }
  std::size_t node_index(const std::string& id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].id == id) return i;
    throw NetworkError("unknown node '" + id + "'");
  }
  std::size_t channel_index(const std::string& id) const {
    for (std::size_t i = 0; i < channels.size(); ++i)
      if (channels[i].id == id) return i;
    throw NetworkError("unknown channel '" + id + "'");
  }
  std::optional<std::size_t> fork_of(const std::string& channel) const {
    for (std::size_t i = 0; i < forks.size(); ++i)
      for (const auto& c : forks[i].channels)
        if (c == channel) return i;
    return std::nullopt;
  }

  Fork& fork(const std::string& id) {
    for (auto& f : forks)
      if (f.id == id) return f;
    throw NetworkError("unknown fork '" + id + "'");
  }
  Channel& channel(const std::string& id) { return channels.at(channel_index(id)); }
  Node& node(const std::string& id) { return nodes.at(node_index(id)); }

  // Adds a channel with a generated id "from.port->to.port".
  Channel& connect(const std::string& from_node, const std::string& from_port, const std::string& to_node,
                   const std::string& to_port, DelayModel delay = DelayModel::fixed(1)) {
    Channel c{from_node + "." + from_port + "->" + to_node + "." + to_port, {from_node, from_port},
              {to_node, to_port}, std::move(delay)};
    channels.push_back(std::move(c));
    return channels.back();
  }

  void validate() const {
    std::set<std::string> ids;
    for (const auto& n : nodes) {
      if (n.id.empty()) throw NetworkError("node with empty id");
      if (!ids.insert(n.id).second) throw NetworkError("duplicate node id '" + n.id + "'");
      n.delay.validate("response delay of node '" + n.id + "'");
      if (n.kind == NodeKind::Automaton) {
        if (!n.spec) throw NetworkError("automaton node '" + n.id + "' has no spec");
        if (auto problem = n.spec->circuit_spec_problem())
          throw NetworkError("spec of node '" + n.id + "': " + *problem);
        n.arbitration.delay.validate("arbitration delay of node '" + n.id + "'", true);
        for (const auto& s : n.spec->alphabet()) {
          auto pe = split_symbol(s);
          for (const auto& t : n.spec->alphabet())
            if (split_symbol(t).port == pe.port && n.spec->is_input(t) != n.spec->is_input(s))
              throw NetworkError("node '" + n.id + "' uses port '" + pe.port + "' in both directions");
        }
      } else {
        if (n.inputs.empty()) throw NetworkError("gate '" + n.id + "' has no inputs");
        if (n.output.empty()) throw NetworkError("gate '" + n.id + "' has no output");
        if (n.kind == NodeKind::Latch && n.inputs.size() != 2)
          throw NetworkError("latch '" + n.id + "' needs exactly two inputs (data, enable)");
        std::set<std::string> seen(n.inputs.begin(), n.inputs.end());
        if (seen.size() != n.inputs.size()) throw NetworkError("gate '" + n.id + "' repeats an input");
        if (seen.count(n.output)) throw NetworkError("gate '" + n.id + "' reads its own output");
        for (const auto& p : n.inverted)
          if (!seen.count(p)) throw NetworkError("gate '" + n.id + "' inverts unknown input '" + p + "'");
        if (n.latch_window < 0) throw NetworkError("latch window of '" + n.id + "' is negative");
      }
    }
    std::set<std::string> channel_ids;
    std::map<Endpoint, std::size_t> feeds;
    std::map<Endpoint, std::size_t> fanout;
    for (const auto& c : channels) {
      if (!channel_ids.insert(c.id).second) throw NetworkError("duplicate channel id '" + c.id + "'");
      c.delay.validate("delay of channel '" + c.id + "'");
      const Node& src = node(c.from.node);
      const Node& dst = node(c.to.node);
      if (!src.output_ports().count(c.from.port))
        throw NetworkError("channel '" + c.id + "': '" + c.from.port + "' is not an output of '" + src.id + "'");
      if (!dst.input_ports().count(c.to.port))
        throw NetworkError("channel '" + c.id + "': '" + c.to.port + "' is not an input of '" + dst.id + "'");
      if (src.is_gate() && !dst.is_gate()) {
        for (char e : {'+', '-'})
          if (!dst.spec->is_input(join_symbol(c.to.port, e)))
            throw NetworkError("channel '" + c.id + "' carries level edges but '" + dst.id + "' lacks input '" +
                               join_symbol(c.to.port, e) + "'");
      }
      ++feeds[c.to];
      ++fanout[c.from];
    }
    for (const auto& n : nodes) {
      for (const auto& p : n.input_ports()) {
        auto count = feeds[{n.id, p}];
        if (count != 1)
          throw NetworkError("input '" + p + "' of node '" + n.id + "' is fed by " + std::to_string(count) +
                             " channels, expected exactly one");
      }
      for (const auto& p : n.output_ports())
        if (fanout[{n.id, p}] == 0) throw NetworkError("output '" + p + "' of node '" + n.id + "' drives no channel");
    }
    std::set<std::string> in_fork;
    for (const auto& f : forks) {
      if (f.channels.empty()) throw NetworkError("fork '" + f.id + "' has no channels");
      if (f.skew < 0) throw NetworkError("fork '" + f.id + "' has negative skew");
      const Endpoint& from = channels.at(channel_index(f.channels.front())).from;
      for (const auto& c : f.channels) {
        if (!in_fork.insert(c).second) throw NetworkError("channel '" + c + "' belongs to two forks");
        if (!(channels.at(channel_index(c)).from == from))
          throw NetworkError("fork '" + f.id + "' joins channels from different ports");
      }
      for (const auto& [c, off] : f.offsets) {
        if (std::find(f.channels.begin(), f.channels.end(), c) == f.channels.end())
          throw NetworkError("fork '" + f.id + "' has an offset for foreign channel '" + c + "'");
        if (off < 0) throw NetworkError("fork '" + f.id + "' has a negative offset");
      }
    }
    for (const auto& d : drivers) node(d);
  }

  nlohmann::json to_json() const {
    nlohmann::json jn = nlohmann::json::array();
    for (const auto& n : nodes) {
      nlohmann::json j = {{"id", n.id}, {"kind", node_kind_name(n.kind)}, {"delay", n.delay.to_json()}};
      if (n.kind == NodeKind::Automaton) {
        if (!n.spec_text.empty()) j["spec"] = n.spec_text;
        else j["spec"] = dicirc::to_json(*n.spec);
        if (!(n.arbitration == Arbitration{})) {
          j["arbitration"] = {{"policy", n.arbitration.policy == ArbitrationPolicy::Fifo ? "fifo" : "random"},
                              {"delay", n.arbitration.delay.to_json()},
                              {"requests", n.arbitration.requests}};
        }
      } else {
        j["inputs"] = n.inputs;
        j["inverted"] = n.inverted;
        j["output"] = n.output;
        if (n.monitor) j["monitor"] = dicirc::to_json(*n.monitor);
        if (n.kind == NodeKind::Latch) j["latch_window"] = to_ticks(n.latch_window);
      }
      jn.push_back(std::move(j));
    }
    nlohmann::json jc = nlohmann::json::array();
    for (const auto& c : channels)
      jc.push_back({{"id", c.id},
                    {"from", {c.from.node, c.from.port}},
                    {"to", {c.to.node, c.to.port}},
                    {"delay", c.delay.to_json()}});
    nlohmann::json jf = nlohmann::json::array();
    for (const auto& f : forks) {
      nlohmann::json off = nlohmann::json::object();
      for (const auto& [c, t] : f.offsets) off[c] = to_ticks(t);
      jf.push_back({{"id", f.id}, {"channels", f.channels}, {"isochronic", f.isochronic},
                    {"skew", to_ticks(f.skew)}, {"offsets", off}});
    }
    return {{"nodes", jn}, {"channels", jc}, {"forks", jf}, {"drivers", drivers}};
  }

  static Network from_json(const nlohmann::json& j) {
    try {
      Network net;
      for (const auto& jn : j.at("nodes")) {
        Node n;
        n.id = jn.at("id").get<std::string>();
        n.kind = node_kind_from_name(jn.value("kind", "automaton"));
        if (jn.contains("delay")) n.delay = DelayModel::from_json(jn.at("delay"));
        if (n.kind == NodeKind::Automaton) {
          const auto& spec = jn.at("spec");
          if (spec.is_string()) {
            n.spec_text = spec.get<std::string>();
            n.spec = parse_structure(n.spec_text);
          } else {
            n.spec = structure_from_json(spec);
          }
          if (jn.contains("arbitration")) {
            const auto& a = jn.at("arbitration");
            std::string policy = a.value("policy", "random");
            if (policy != "random" && policy != "fifo") throw NetworkError("unknown arbitration policy '" + policy + "'");
            n.arbitration.policy = policy == "fifo" ? ArbitrationPolicy::Fifo : ArbitrationPolicy::Random;
            if (a.contains("delay")) n.arbitration.delay = DelayModel::from_json(a.at("delay"));
            if (a.contains("requests")) n.arbitration.requests = a.at("requests").get<std::map<Symbol, Symbol>>();
          }
        } else {
          n.inputs = jn.at("inputs").get<std::vector<std::string>>();
          if (jn.contains("inverted")) n.inverted = jn.at("inverted").get<std::set<std::string>>();
          n.output = jn.at("output").get<std::string>();
          if (jn.contains("monitor")) n.monitor = structure_from_json(jn.at("monitor"));
          if (jn.contains("latch_window")) n.latch_window = from_ticks(jn.at("latch_window").get<double>());
        }
        net.nodes.push_back(std::move(n));
      }
      for (const auto& jc : j.at("channels")) {
        auto from = jc.at("from").get<std::vector<std::string>>();
        auto to = jc.at("to").get<std::vector<std::string>>();
        if (from.size() != 2 || to.size() != 2) throw NetworkError("channel endpoints are [node, port] pairs");
        Channel c{"", {from[0], from[1]}, {to[0], to[1]}, DelayModel::fixed(1)};
        c.id = jc.value("id", from[0] + "." + from[1] + "->" + to[0] + "." + to[1]);
        if (jc.contains("delay")) c.delay = DelayModel::from_json(jc.at("delay"));
        net.channels.push_back(std::move(c));
      }
      if (j.contains("forks")) {
        for (const auto& jf : j.at("forks")) {
          Fork f;
          f.id = jf.at("id").get<std::string>();
          f.channels = jf.at("channels").get<std::vector<std::string>>();
          f.isochronic = jf.value("isochronic", false);
          f.skew = from_ticks(jf.value("skew", 0.0));
          if (jf.contains("offsets"))
            for (const auto& [c, t] : jf.at("offsets").items()) f.offsets[c] = from_ticks(t.get<double>());
          net.forks.push_back(std::move(f));
        }
      }
      if (j.contains("drivers")) net.drivers = j.at("drivers").get<std::vector<std::string>>();
      net.validate();
      return net;
    } catch (const nlohmann::json::exception& e) {
      throw NetworkError(std::string("malformed netlist: ") + e.what());
    }
  }
};

}  // namespace dicirc
