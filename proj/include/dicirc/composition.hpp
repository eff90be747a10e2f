#pragma once

// Verification of decompositions R0 → (R1, ..., Rn-1): the closed network
// T = R̄0 || R1 || ... || Rn-1 must be closed (i), free of output
// interference (ii) and computation interference (iii), and must show the
// target's behavior at its boundary (iv). Also the alphabet side conditions
// of the substitution and separation theorems, and symbol renaming.

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dicirc/error.hpp"
#include "dicirc/trace.hpp"

namespace dicirc {

struct Decomposition {
  TraceStructure target;
  std::vector<TraceStructure> parts;
  std::vector<std::string> names;  // optional labels for parts, for reports
};

struct DecompositionOptions {
  // Require every symbol to be read by at most one component, i.e. forks
  // must be explicit FORK parts.
  bool strict_forks = false;
};

// Component indices in reports: 0 is the reflected target, i ≥ 1 is parts[i-1].
struct ClosedVerdict {
  bool holds = true;
  Alphabet unread_outputs;    // produced but consumed by nobody
  Alphabet unproduced_inputs; // consumed but produced by nobody
  Alphabet multi_reader;      // strict mode only
};

struct OutputClash {
  std::size_t first;
  std::size_t second;
  Symbol symbol;
  friend bool operator==(const OutputClash&, const OutputClash&) = default;
};

struct OutputInterferenceVerdict {
  bool holds = true;
  std::vector<OutputClash> clashes;
};

struct ComputationWitness {
  Trace trace;              // t ∈ tT
  Symbol symbol;            // x, an output of `component`
  std::size_t component;    // i
  std::size_t blocked_by;   // a component with x in its alphabet that cannot accept it
};

struct ComputationInterferenceVerdict {
  bool holds = true;
  std::optional<ComputationWitness> witness;
  std::size_t joint_states = 0;
};

struct BoundaryVerdict {
  bool holds = true;
  std::optional<Trace> distinguishing;
  bool extra_in_network = false;  // the trace is in tT↓aS0 but not in tS0
};

struct DecompositionReport {
  ClosedVerdict closed;
  OutputInterferenceVerdict output_interference;
  ComputationInterferenceVerdict computation_interference;
  BoundaryVerdict boundary;
  bool holds = false;
  std::string first_failure;  // "i".."iv", empty when all hold
};

namespace detail {

inline std::vector<TraceStructure> components_of(const Decomposition& d) {
  std::vector<TraceStructure> out{reflect(d.target)};
  out.insert(out.end(), d.parts.begin(), d.parts.end());
  return out;
}

}  // namespace detail

// T = R̄0 || R1 || ... || Rn-1
inline TraceStructure close_network(const Decomposition& d) {
  TraceStructure t = reflect(d.target);
  for (const auto& p : d.parts) t = weave(t, p);
  return t;
}

// Condition (iii) on the reachable joint states of all components: whenever a
// component can produce x locally, every other component that knows x must be
// able to accept it. Breadth-first, so the witness trace is shortest.
inline ComputationInterferenceVerdict check_computation_interference(const std::vector<TraceStructure>& comps) {
  Alphabet all;
  for (const auto& c : comps) all = set_union(all, c.alphabet());
  std::vector<Symbol> symbols(all.begin(), all.end());
  const std::size_t n = comps.size();
  // index[c][x] = symbol index of symbols[x] in component c's acceptor, or -1
  std::vector<std::vector<int>> index(n, std::vector<int>(symbols.size(), -1));
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t x = 0; x < symbols.size(); ++x) index[c][x] = comps[c].traces().index_of(symbols[x]);

  using Joint = std::vector<int>;
  std::map<Joint, std::pair<Joint, int>> parent;  // state -> (previous, symbol)
  std::deque<Joint> queue;
  Joint start(n);
  for (std::size_t c = 0; c < n; ++c) start[c] = comps[c].traces().initial();
  parent.emplace(start, std::make_pair(Joint{}, -1));
  queue.push_back(start);

  auto path_to = [&](Joint j) {
    Trace t;
    while (true) {
      const auto& [prev, sym] = parent.at(j);
      if (sym < 0) break;
      t.push_back(symbols[sym]);
      j = prev;
    }
    std::reverse(t.begin(), t.end());
    return t;
  };

  ComputationInterferenceVerdict v;
  while (!queue.empty()) {
    Joint j = queue.front();
    queue.pop_front();
    for (std::size_t x = 0; x < symbols.size(); ++x) {
      Joint next = j;
      bool enabled = true;
      std::optional<std::size_t> blocked;
      for (std::size_t c = 0; c < n; ++c) {
        if (index[c][x] < 0) continue;
        int p = comps[c].traces().next(j[c], static_cast<std::size_t>(index[c][x]));
        if (p == TraceSet::kDead) {
          enabled = false;
          if (!blocked) blocked = c;
        } else {
          next[c] = p;
        }
      }
      if (!enabled) {
        for (std::size_t c = 0; c < n; ++c) {
          if (index[c][x] < 0 || !comps[c].is_output(symbols[x])) continue;
          if (comps[c].traces().next(j[c], static_cast<std::size_t>(index[c][x])) == TraceSet::kDead) continue;
          // Component c offers x but the network refuses it.
          std::size_t by = *blocked;
          for (std::size_t o = 0; o < n; ++o) {
            if (o == c || index[o][x] < 0) continue;
            if (comps[o].traces().next(j[o], static_cast<std::size_t>(index[o][x])) == TraceSet::kDead) {
              by = o;
              break;
            }
          }
          v.holds = false;
          v.witness = ComputationWitness{path_to(j), symbols[x], c, by};
          v.joint_states = parent.size();
          return v;
        }
        continue;
      }
      if (parent.count(next)) continue;
      parent.emplace(next, std::make_pair(j, static_cast<int>(x)));
      queue.push_back(std::move(next));
    }
  }
  v.joint_states = parent.size();
  return v;
}

inline DecompositionReport check_decomposition(const Decomposition& d, const DecompositionOptions& opts = {}) {
  if (d.parts.empty()) throw Error("a decomposition needs at least one part");
  d.target.validate_circuit_spec();
  for (std::size_t i = 0; i < d.parts.size(); ++i) {
    if (auto problem = d.parts[i].circuit_spec_problem())
      throw InvalidSpecError("part " + std::to_string(i + 1) + " is not a circuit specification: " + *problem);
  }
  auto comps = detail::components_of(d);
  DecompositionReport report;

  // (i) closed network
  Alphabet outs, ins;
  std::map<Symbol, std::size_t> readers;
  for (const auto& c : comps) {
    outs = set_union(outs, c.outputs());
    ins = set_union(ins, c.inputs());
    for (const auto& s : c.inputs()) ++readers[s];
  }
  report.closed.unread_outputs = set_difference(outs, ins);
  report.closed.unproduced_inputs = set_difference(ins, outs);
  if (opts.strict_forks)
    for (const auto& [s, count] : readers)
      if (count > 1) report.closed.multi_reader.insert(s);
  report.closed.holds = report.closed.unread_outputs.empty() && report.closed.unproduced_inputs.empty() &&
                        report.closed.multi_reader.empty();

  // (ii) pairwise disjoint outputs
  for (std::size_t i = 0; i < comps.size(); ++i)
    for (std::size_t j = i + 1; j < comps.size(); ++j)
      for (const auto& s : set_intersection(comps[i].outputs(), comps[j].outputs()))
        report.output_interference.clashes.push_back({i, j, s});
  report.output_interference.holds = report.output_interference.clashes.empty();

  // (iii)
  report.computation_interference = check_computation_interference(comps);

  // (iv) tT↓aS0 = tS0
  TraceStructure t = close_network(d);
  TraceSet boundary = project_set(t.traces(), d.target.alphabet());
  if (!(boundary == d.target.traces())) {
    report.boundary.holds = false;
    report.boundary.distinguishing = TraceSet::distinguishing_trace(boundary, d.target.traces());
    report.boundary.extra_in_network = boundary.contains(*report.boundary.distinguishing);
  }

  report.holds = report.closed.holds && report.output_interference.holds &&
                 report.computation_interference.holds && report.boundary.holds;
  if (!report.closed.holds) report.first_failure = "i";
  else if (!report.output_interference.holds) report.first_failure = "ii";
  else if (!report.computation_interference.holds) report.first_failure = "iii";
  else if (!report.boundary.holds) report.first_failure = "iv";
  return report;
}

// Replaces part `index` (0-based into parts) by the parts of `sub`, whose
// target must be that part.
inline Decomposition substitute(const Decomposition& d, std::size_t index, const Decomposition& sub) {
  if (index >= d.parts.size()) throw Error("part index out of range");
  if (!(d.parts[index] == sub.target)) throw Error("sub-decomposition target differs from the replaced part");
  Decomposition out;
  out.target = d.target;
  for (std::size_t i = 0; i < d.parts.size(); ++i) {
    if (i == index) {
      out.parts.insert(out.parts.end(), sub.parts.begin(), sub.parts.end());
      for (std::size_t k = 0; k < sub.parts.size(); ++k)
        out.names.push_back(k < sub.names.size() ? sub.names[k] : "part" + std::to_string(out.parts.size()));
    } else {
      out.parts.push_back(d.parts[i]);
      out.names.push_back(i < d.names.size() ? d.names[i] : "part" + std::to_string(i + 1));
    }
  }
  return out;
}

struct AlphabetCheck {
  bool holds = true;
  Alphabet offending;
  std::vector<std::string> diagnostics;
};

// Side condition of R0 → (R1, S) ∧ S → (R2, R3) ⇒ R0 → (R1, R2, R3):
// (aR0 ∪ aR1) ∩ (aR2 ∪ aR3) = aS.
inline AlphabetCheck check_substitution(const TraceStructure& r0, const TraceStructure& r1,
                                        const TraceStructure& r2, const TraceStructure& r3,
                                        const TraceStructure& s) {
  Alphabet outer = set_union(r0.alphabet(), r1.alphabet());
  Alphabet inner = set_union(r2.alphabet(), r3.alphabet());
  Alphabet shared = set_intersection(outer, inner);
  Alphabet as = s.alphabet();
  AlphabetCheck out;
  for (const auto& x : set_difference(shared, as)) {
    out.offending.insert(x);
    out.diagnostics.push_back("internal symbol '" + x + "' of the substituted decomposition also occurs outside it");
  }
  for (const auto& x : set_difference(as, shared)) {
    out.offending.insert(x);
    out.diagnostics.push_back("symbol '" + x + "' of S is not shared between both decompositions");
  }
  out.holds = out.offending.empty();
  return out;
}

// Side conditions of R0 → (Ri) ∧ S0 → (Si) ⇒ R0||S0 → (Ri||Si). Both lists
// hold the target first, then the parts.
inline AlphabetCheck check_separation(const std::vector<TraceStructure>& r, const std::vector<TraceStructure>& s) {
  if (r.size() != s.size()) throw Error("separation needs decompositions with equally many components");
  if (r.size() < 2) throw Error("separation needs at least one part per decomposition");
  const std::size_t n = r.size();
  AlphabetCheck out;

  Alphabet r_internal, s_internal;
  for (std::size_t i = 1; i < n; ++i) {
    r_internal = set_union(r_internal, r[i].alphabet());
    s_internal = set_union(s_internal, s[i].alphabet());
  }
  r_internal = set_difference(r_internal, r[0].alphabet());
  s_internal = set_difference(s_internal, s[0].alphabet());
  for (const auto& x : set_intersection(r_internal, s_internal)) {
    out.offending.insert(x);
    out.diagnostics.push_back("internal symbol '" + x + "' is used by both decompositions");
  }

  auto outputs_of = [&](std::size_t i) { return set_union(r[i].outputs(), s[i].outputs()); };
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (const auto& x : set_intersection(outputs_of(i), outputs_of(j))) {
        out.offending.insert(x);
        out.diagnostics.push_back("components " + std::to_string(i) + " and " + std::to_string(j) +
                                  " both output '" + x + "'");
      }
  // The reflected targets output what the targets take as input.
  Alphabet boundary_outputs = set_union(r[0].inputs(), s[0].inputs());
  for (std::size_t i = 1; i < n; ++i)
    for (const auto& x : set_intersection(outputs_of(i), boundary_outputs)) {
      out.offending.insert(x);
      out.diagnostics.push_back("component " + std::to_string(i) + " outputs '" + x +
                                "' which the environment also outputs");
    }
  out.holds = out.offending.empty();
  return out;
}

// Renames symbols; symbols not in the mapping keep their name. The mapping
// must be injective on the alphabet.
inline TraceStructure rename(const TraceStructure& r, const std::map<Symbol, Symbol>& mapping) {
  auto image = [&](const Symbol& s) {
    auto it = mapping.find(s);
    return it == mapping.end() ? s : it->second;
  };
  std::map<Symbol, Symbol> seen;
  for (const auto& s : r.alphabet()) {
    Symbol t = image(s);
    auto [it, inserted] = seen.emplace(t, s);
    if (!inserted)
      throw MappingError("renaming is not injective: '" + it->second + "' and '" + s + "' both map to '" + t + "'");
  }
  Alphabet ins, outs;
  for (const auto& s : r.inputs()) ins.insert(image(s));
  for (const auto& s : r.outputs()) outs.insert(image(s));
  std::vector<std::tuple<int, Symbol, int>> transitions;
  for (const auto& [from, sym, to] : r.traces().transitions()) transitions.emplace_back(from, image(sym), to);
  auto acc = r.traces().accepting_states();
  return TraceStructure(ins, outs,
                        TraceSet::from_transitions(set_union(ins, outs), r.traces().num_states(),
                                                   r.traces().initial(), transitions, {acc.begin(), acc.end()}));
}

inline Decomposition rename(const Decomposition& d, const std::map<Symbol, Symbol>& mapping) {
  Decomposition out;
  out.target = rename(d.target, mapping);
  for (const auto& p : d.parts) out.parts.push_back(rename(p, mapping));
  out.names = d.names;
  return out;
}

inline nlohmann::json to_json(const DecompositionReport& r) {
  nlohmann::json clashes = nlohmann::json::array();
  for (const auto& c : r.output_interference.clashes)
    clashes.push_back({{"components", {c.first, c.second}}, {"symbol", c.symbol}});
  nlohmann::json iii = {{"holds", r.computation_interference.holds},
                        {"joint_states", r.computation_interference.joint_states}};
  if (const auto& w = r.computation_interference.witness)
    iii["witness"] = {{"t", w->trace}, {"x", w->symbol}, {"component", w->component}, {"blocked_by", w->blocked_by}};
  nlohmann::json iv = {{"holds", r.boundary.holds}};
  if (r.boundary.distinguishing) {
    iv["distinguishing"] = *r.boundary.distinguishing;
    iv["in"] = r.boundary.extra_in_network ? "network" : "target";
  }
  nlohmann::json j = {
      {"closed",
       {{"holds", r.closed.holds},
        {"unread_outputs", r.closed.unread_outputs},
        {"unproduced_inputs", r.closed.unproduced_inputs},
        {"multi_reader", r.closed.multi_reader}}},
      {"output_interference", {{"holds", r.output_interference.holds}, {"clashes", clashes}}},
      {"computation_interference", iii},
      {"boundary", iv},
      {"holds", r.holds},
  };
  if (!r.first_failure.empty()) j["first_failure"] = r.first_failure;
  return j;
}

}  // namespace dicirc
