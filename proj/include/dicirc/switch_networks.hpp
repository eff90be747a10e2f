#pragma once

// Series/parallel switch networks and the gates built from a pull-up network
// Nu and a pull-down network Nd.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dicirc/error.hpp"

namespace dicirc {

class SwitchNetwork {
 public:
  enum class Kind { Literal, Series, Parallel, Constant };

  static SwitchNetwork literal(std::string var, bool negated = false) {
    SwitchNetwork n(Kind::Literal);
    n.var_ = std::move(var);
    n.negated_ = negated;
    return n;
  }
  static SwitchNetwork series(std::vector<SwitchNetwork> children) {
    SwitchNetwork n(Kind::Series);
    n.children_ = std::move(children);
    return n;
  }
  static SwitchNetwork parallel(std::vector<SwitchNetwork> children) {
    SwitchNetwork n(Kind::Parallel);
    n.children_ = std::move(children);
    return n;
  }
  static SwitchNetwork constant(bool value) {
    SwitchNetwork n(Kind::Constant);
    n.value_ = value;
    return n;
  }

  Kind kind() const { return kind_; }
  const std::string& var() const { return var_; }
  bool negated() const { return negated_; }
  bool value() const { return value_; }
  const std::vector<SwitchNetwork>& children() const { return children_; }

  void collect_variables(std::vector<std::string>& out) const {
    if (kind_ == Kind::Literal) out.push_back(var_);
    for (const auto& c : children_) c.collect_variables(out);
  }

 private:
  explicit SwitchNetwork(Kind k) : kind_(k) {}
  Kind kind_;
  std::string var_;
  bool negated_ = false;
  bool value_ = false;
  std::vector<SwitchNetwork> children_;
};

using Assignment = std::map<std::string, bool>;

// True iff a conducting path connects the two ends of the network.
inline bool eval(const SwitchNetwork& n, const Assignment& a) {
  switch (n.kind()) {
    case SwitchNetwork::Kind::Constant:
      return n.value();
    case SwitchNetwork::Kind::Literal: {
      auto it = a.find(n.var());
      if (it == a.end()) throw Error("no value for variable '" + n.var() + "'");
      return it->second != n.negated();
    }
    case SwitchNetwork::Kind::Series:
      for (const auto& c : n.children())
        if (!eval(c, a)) return false;
      return true;
    case SwitchNetwork::Kind::Parallel:
      for (const auto& c : n.children())
        if (eval(c, a)) return true;
      return false;
  }
  return false;
}

struct Gate {
  std::vector<std::string> inputs;
  SwitchNetwork pull_up = SwitchNetwork::constant(false);
  SwitchNetwork pull_down = SwitchNetwork::constant(false);
};

inline constexpr std::size_t kMaxExhaustiveInputs = 20;

inline void validate_gate(const Gate& g) {
  if (g.inputs.size() > kMaxExhaustiveInputs)
    throw Error("gate has " + std::to_string(g.inputs.size()) + " inputs, at most " +
                std::to_string(kMaxExhaustiveInputs) + " are checked exhaustively");
  std::vector<std::string> vars;
  g.pull_up.collect_variables(vars);
  g.pull_down.collect_variables(vars);
  for (const auto& v : vars)
    if (std::find(g.inputs.begin(), g.inputs.end(), v) == g.inputs.end())
      throw Error("variable '" + v + "' is not a declared gate input");
}

// Assignment number k sets inputs[i] to bit i of k.
inline Assignment assignment_of(const Gate& g, std::uint64_t k) {
  Assignment a;
  for (std::size_t i = 0; i < g.inputs.size(); ++i) a[g.inputs[i]] = ((k >> i) & 1U) != 0;
  return a;
}

struct ShortVerdict {
  bool holds = true;
  std::vector<Assignment> shorts;
};

inline ShortVerdict check_no_short(const Gate& g) {
  validate_gate(g);
  ShortVerdict v;
  const std::uint64_t count = std::uint64_t{1} << g.inputs.size();
  for (std::uint64_t k = 0; k < count; ++k) {
    Assignment a = assignment_of(g, k);
    if (eval(g.pull_up, a) && eval(g.pull_down, a)) v.shorts.push_back(std::move(a));
  }
  v.holds = v.shorts.empty();
  return v;
}

enum class GateClass { Combinational, StateHolding };

inline std::string gate_class_name(GateClass c) {
  return c == GateClass::Combinational ? "combinational" : "state_holding";
}

inline GateClass classify_gate(const Gate& g) {
  auto shorts = check_no_short(g);
  if (!shorts.holds) throw Error("gate shorts its supplies for some input assignment");
  const std::uint64_t count = std::uint64_t{1} << g.inputs.size();
  for (std::uint64_t k = 0; k < count; ++k) {
    Assignment a = assignment_of(g, k);
    if (!eval(g.pull_up, a) && !eval(g.pull_down, a)) return GateClass::StateHolding;
  }
  return GateClass::Combinational;
}

// Output of a gate given its previous output: pulled up, pulled down, or floating.
inline bool gate_next(const Gate& g, const Assignment& a, bool z_before) {
  if (eval(g.pull_up, a)) return true;
  if (eval(g.pull_down, a)) return false;
  return z_before;
}

inline bool latch_next(bool x, bool e, bool z_before) { return (x && e) || (z_before && !e); }

// NAND: Nu = ¬x1 ∨ ¬x2, Nd = x1 ∧ x2
inline Gate nand_gate() {
  using N = SwitchNetwork;
  return Gate{{"x1", "x2"},
              N::parallel({N::literal("x1", true), N::literal("x2", true)}),
              N::series({N::literal("x1"), N::literal("x2")})};
}

// Latch: Nu = x ∧ e, Nd = ¬x ∧ e
inline Gate latch_gate() {
  using N = SwitchNetwork;
  return Gate{{"x", "e"},
              N::series({N::literal("x"), N::literal("e")}),
              N::series({N::literal("x", true), N::literal("e")})};
}

inline nlohmann::json to_json(const SwitchNetwork& n) {
  switch (n.kind()) {
    case SwitchNetwork::Kind::Constant:
      return {{"const", n.value()}};
    case SwitchNetwork::Kind::Literal:
      return n.negated() ? nlohmann::json{{"not", n.var()}} : nlohmann::json{{"var", n.var()}};
    case SwitchNetwork::Kind::Series:
    case SwitchNetwork::Kind::Parallel: {
      nlohmann::json children = nlohmann::json::array();
      for (const auto& c : n.children()) children.push_back(to_json(c));
      return {{n.kind() == SwitchNetwork::Kind::Series ? "series" : "parallel", children}};
    }
  }
  return nullptr;
}

inline SwitchNetwork switch_network_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.size() != 1) throw Error("switch network node must be an object with one key");
  const std::string key = j.begin().key();
  const nlohmann::json& value = j.begin().value();
  if (key == "var") return SwitchNetwork::literal(value.get<std::string>());
  if (key == "not") return SwitchNetwork::literal(value.get<std::string>(), true);
  if (key == "const") return SwitchNetwork::constant(value.get<bool>());
  if (key == "series" || key == "parallel") {
    std::vector<SwitchNetwork> children;
    for (const auto& c : value) children.push_back(switch_network_from_json(c));
    return key == "series" ? SwitchNetwork::series(std::move(children)) : SwitchNetwork::parallel(std::move(children));
  }
  throw Error("unknown switch network node '" + key + "'");
}

inline nlohmann::json to_json(const Gate& g) {
  return {{"inputs", g.inputs}, {"pull_up", to_json(g.pull_up)}, {"pull_down", to_json(g.pull_down)}};
}

inline Gate gate_from_json(const nlohmann::json& j) {
  try {
    Gate g{j.at("inputs").get<std::vector<std::string>>(), switch_network_from_json(j.at("pull_up")),
           switch_network_from_json(j.at("pull_down"))};
    validate_gate(g);
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed gate: ") + e.what());
  }
}

}  // namespace dicirc
