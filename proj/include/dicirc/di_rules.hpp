#pragma once

// Delay-insensitivity rules on circuit specifications.
//
// Every rule is decided on the canonical acceptor of a prefix-closed trace
// set. In that acceptor each state is live, so "two residual languages are
// equal" becomes "the same state" and a missing transition is the dead state.
// Trace quantifiers thereby turn into finite scans over states and pairs of
// states.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dicirc/error.hpp"
#include "dicirc/trace.hpp"

namespace dicirc {

enum class Rule { R0, R1, R2, R2Prime, R3Prime, R3DoublePrime, R3TriplePrime };

inline std::string rule_name(Rule r) {
  switch (r) {
    case Rule::R0: return "R0";
    case Rule::R1: return "R1";
    case Rule::R2: return "R2";
    case Rule::R2Prime: return "R2'";
    case Rule::R3Prime: return "R3'";
    case Rule::R3DoublePrime: return "R3''";
    case Rule::R3TriplePrime: return "R3'''";
  }
  return "?";
}

enum class R3Variant { Prime, DoublePrime, TriplePrime };

// One concrete instantiation of a violated rule: the prefix s, the symbols
// a, b (and c for R2'), and the segment t where the rule quantifies one.
struct Witness {
  Trace prefix;
  std::vector<Symbol> symbols;
  std::optional<Trace> segment;
  std::string explanation;

  friend bool operator==(const Witness&, const Witness&) = default;
};

struct RuleVerdict {
  Rule rule = Rule::R0;
  bool holds = true;
  std::vector<Witness> witnesses;
  // Number of instantiations where the rule's antecedent was satisfiable;
  // zero means the rule holds vacuously.
  std::size_t instances = 0;
};

enum class DiClass { Synchronization, DataCommunication, Arbitration, None };

inline std::string class_name(DiClass c) {
  switch (c) {
    case DiClass::Synchronization: return "synchronization";
    case DiClass::DataCommunication: return "data-communication";
    case DiClass::Arbitration: return "arbitration";
    case DiClass::None: return "none";
  }
  return "none";
}

struct RuleOptions {
  // Decide R2' by scanning enumerated traces up to `bound` instead of the
  // exact product construction. For cross-checking only.
  bool bounded_r2_prime = false;
  std::size_t bound = 10;
  // Witnesses kept per verdict, shortest first.
  std::size_t max_witnesses = 1;
};

struct RuleReport {
  std::vector<RuleVerdict> verdicts;
  DiClass cls = DiClass::None;
  bool di = false;

  const RuleVerdict& verdict(Rule r) const {
    for (const auto& v : verdicts)
      if (v.rule == r) return v;
    throw Error("rule " + rule_name(r) + " not in report");
  }
};

namespace detail {

inline void require_circuit_spec(const TraceStructure& r) { r.validate_circuit_spec(); }

inline bool same_direction(const TraceStructure& r, const Symbol& a, const Symbol& b) {
  return (r.is_input(a) && r.is_input(b)) || (r.is_output(a) && r.is_output(b));
}

inline bool opposite_direction(const TraceStructure& r, const Symbol& a, const Symbol& b) {
  return (r.is_input(a) && r.is_output(b)) || (r.is_output(a) && r.is_input(b));
}

// Shortest t such that exactly one of x·t and y·t is live (states of a
// prefix-closed canonical acceptor; kDead allowed). Requires x != y.
inline Trace distinguishing_segment(const TraceSet& ts, int x, int y) {
  using Pair = std::pair<int, int>;
  std::map<Pair, Trace> seen{{{x, y}, {}}};
  std::deque<Pair> queue{{x, y}};
  while (!queue.empty()) {
    Pair p = queue.front();
    queue.pop_front();
    Trace path = seen.at(p);
    if ((p.first == TraceSet::kDead) != (p.second == TraceSet::kDead)) return path;
    for (std::size_t a = 0; a < ts.alphabet().size(); ++a) {
      Pair q{ts.next(p.first, a), ts.next(p.second, a)};
      if (q.first == TraceSet::kDead && q.second == TraceSet::kDead) continue;
      if (seen.count(q)) continue;
      Trace ext = path;
      ext.push_back(ts.alphabet()[a]);
      seen.emplace(q, std::move(ext));
      queue.push_back(q);
    }
  }
  throw Error("states are not distinguishable");
}

struct Candidate {
  Witness witness;
  bool operator<(const Candidate& o) const {
    ShortLex lex;
    if (lex(witness.prefix, o.witness.prefix)) return true;
    if (lex(o.witness.prefix, witness.prefix)) return false;
    if (witness.symbols != o.witness.symbols) return witness.symbols < o.witness.symbols;
    Trace t1 = witness.segment.value_or(Trace{}), t2 = o.witness.segment.value_or(Trace{});
    return lex(t1, t2);
  }
};

inline RuleVerdict finish(Rule rule, std::vector<Candidate> found, std::size_t instances,
                          const RuleOptions& opts) {
  std::sort(found.begin(), found.end());
  RuleVerdict v;
  v.rule = rule;
  v.instances = instances;
  v.holds = found.empty();
  for (std::size_t i = 0; i < found.size() && i < opts.max_witnesses; ++i)
    v.witnesses.push_back(std::move(found[i].witness));
  return v;
}

}  // namespace detail

// R0: no trace contains an immediately repeated symbol.
inline RuleVerdict check_r0(const TraceStructure& r, const RuleOptions& opts = {}) {
  detail::require_circuit_spec(r);
  const TraceSet& ts = r.traces();
  auto access = ts.access_traces();
  std::vector<detail::Candidate> found;
  std::size_t instances = 0;
  for (std::size_t q = 0; q < ts.num_states(); ++q) {
    for (std::size_t a = 0; a < ts.alphabet().size(); ++a) {
      int p = ts.next(static_cast<int>(q), a);
      if (p == TraceSet::kDead) continue;
      ++instances;
      if (ts.next(p, a) != TraceSet::kDead) {
        const Symbol& s = ts.alphabet()[a];
        found.push_back({{access[q], {s, s}, std::nullopt, "s a a ∈ tR"}});
      }
    }
  }
  return detail::finish(Rule::R0, std::move(found), instances, opts);
}

// R1: for a, b of the same direction, s a b t ∈ tR ⇔ s b a t ∈ tR.
inline RuleVerdict check_r1(const TraceStructure& r, const RuleOptions& opts = {}) {
  detail::require_circuit_spec(r);
  const TraceSet& ts = r.traces();
  const auto& sym = ts.alphabet();
  auto access = ts.access_traces();
  std::vector<detail::Candidate> found;
  std::size_t instances = 0;
  for (std::size_t q = 0; q < ts.num_states(); ++q) {
    for (std::size_t a = 0; a < sym.size(); ++a) {
      for (std::size_t b = a + 1; b < sym.size(); ++b) {
        if (!detail::same_direction(r, sym[a], sym[b])) continue;
        int x = ts.next(ts.next(static_cast<int>(q), a), b);
        int y = ts.next(ts.next(static_cast<int>(q), b), a);
        if (x == TraceSet::kDead && y == TraceSet::kDead) continue;
        ++instances;
        if (x == y) continue;
        Trace t = detail::distinguishing_segment(ts, x, y);
        // Orient the witness so that s a b t is the member.
        bool x_side = ts.run(x, t) != TraceSet::kDead;
        Symbol first = x_side ? sym[a] : sym[b];
        Symbol second = x_side ? sym[b] : sym[a];
        found.push_back({{access[q], {first, second}, t, "s a b t ∈ tR but s b a t ∉ tR"}});
      }
    }
  }
  return detail::finish(Rule::R1, std::move(found), instances, opts);
}

// R2: for a, b of opposite directions, if both s a b and s b a are traces
// then s a b t ∈ tR ⇔ s b a t ∈ tR.
inline RuleVerdict check_r2(const TraceStructure& r, const RuleOptions& opts = {}) {
  detail::require_circuit_spec(r);
  const TraceSet& ts = r.traces();
  const auto& sym = ts.alphabet();
  auto access = ts.access_traces();
  std::vector<detail::Candidate> found;
  std::size_t instances = 0;
  for (std::size_t q = 0; q < ts.num_states(); ++q) {
    for (std::size_t a = 0; a < sym.size(); ++a) {
      for (std::size_t b = a + 1; b < sym.size(); ++b) {
        if (!detail::opposite_direction(r, sym[a], sym[b])) continue;
        int x = ts.next(ts.next(static_cast<int>(q), a), b);
        int y = ts.next(ts.next(static_cast<int>(q), b), a);
        if (x == TraceSet::kDead || y == TraceSet::kDead) continue;
        ++instances;
        if (x == y) continue;
        Trace t = detail::distinguishing_segment(ts, x, y);
        bool x_side = ts.run(x, t) != TraceSet::kDead;
        Symbol first = x_side ? sym[a] : sym[b];
        Symbol second = x_side ? sym[b] : sym[a];
        found.push_back({{access[q], {first, second}, t,
                          "s a b, s b a ∈ tR and s a b t ∈ tR but s b a t ∉ tR"}});
      }
    }
  }
  return detail::finish(Rule::R2, std::move(found), instances, opts);
}

namespace detail {

inline RuleVerdict check_r2_prime_bounded(const TraceStructure& r, const RuleOptions& opts) {
  const TraceSet& ts = r.traces();
  std::vector<Candidate> found;
  std::size_t instances = 0;
  for (const Trace& w : enumerate(ts, opts.bound, opts.bound)) {
    // w = s a b t c
    if (w.size() < 3) continue;
    const Symbol& c = w.back();
    for (std::size_t i = 0; i + 2 < w.size(); ++i) {
      const Symbol& a = w[i];
      const Symbol& b = w[i + 1];
      if (!opposite_direction(r, a, b) || !same_direction(r, a, c)) continue;
      Trace swapped(w.begin(), w.end() - 1);
      std::swap(swapped[i], swapped[i + 1]);
      if (!ts.contains(swapped)) continue;
      ++instances;
      Trace full = swapped;
      full.push_back(c);
      if (ts.contains(full)) continue;
      Trace s(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(i));
      Trace t(w.begin() + static_cast<std::ptrdiff_t>(i) + 2, w.end() - 1);
      found.push_back({{s, {a, b, c}, t, "s a b t c ∈ tR and s b a t ∈ tR but s b a t c ∉ tR"}});
    }
  }
  return finish(Rule::R2Prime, std::move(found), instances, opts);
}

}  // namespace detail

// R2': for a, c of one direction and b of the other,
// (s a b t c ∈ tR ∧ s b a t ∈ tR) ⇒ s b a t c ∈ tR.
//
// With p1 = state after s a b and p2 = state after s b a, a violation is a
// t with t c ∈ L(p1), t ∈ L(p2) and t c ∉ L(p2): a reachable pair in the
// product of the acceptor with itself, started at (p1, p2).
inline RuleVerdict check_r2_prime(const TraceStructure& r, const RuleOptions& opts = {}) {
  detail::require_circuit_spec(r);
  if (opts.bounded_r2_prime) return detail::check_r2_prime_bounded(r, opts);
  const TraceSet& ts = r.traces();
  const auto& sym = ts.alphabet();
  const std::size_t k = sym.size();
  auto access = ts.access_traces();
  std::vector<detail::Candidate> found;
  std::size_t instances = 0;

  for (std::size_t q = 0; q < ts.num_states(); ++q) {
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        if (!detail::opposite_direction(r, sym[a], sym[b])) continue;
        int p1 = ts.next(ts.next(static_cast<int>(q), a), b);
        int p2 = ts.next(ts.next(static_cast<int>(q), b), a);
        if (p1 == TraceSet::kDead || p2 == TraceSet::kDead) continue;
        ++instances;
        if (p1 == p2) continue;  // identical futures: the implication is trivial

        // Breadth-first over live pairs; the first pair found for each c
        // gives the shortest t.
        using Pair = std::pair<int, int>;
        std::map<Pair, Trace> seen{{{p1, p2}, {}}};
        std::deque<Pair> queue{{p1, p2}};
        std::vector<char> reported(k, 0);
        while (!queue.empty()) {
          Pair p = queue.front();
          queue.pop_front();
          const Trace t = seen.at(p);
          for (std::size_t c = 0; c < k; ++c) {
            if (reported[c] || !detail::same_direction(r, sym[a], sym[c])) continue;
            if (ts.next(p.first, c) != TraceSet::kDead && ts.next(p.second, c) == TraceSet::kDead) {
              reported[c] = 1;
              found.push_back({{access[q], {sym[a], sym[b], sym[c]}, t,
                                "s a b t c ∈ tR and s b a t ∈ tR but s b a t c ∉ tR"}});
            }
          }
          for (std::size_t x = 0; x < k; ++x) {
            Pair n{ts.next(p.first, x), ts.next(p.second, x)};
            if (n.first == TraceSet::kDead || n.second == TraceSet::kDead || seen.count(n)) continue;
            Trace ext = t;
            ext.push_back(sym[x]);
            seen.emplace(n, std::move(ext));
            queue.push_back(n);
          }
        }
      }
    }
  }
  return detail::finish(Rule::R2Prime, std::move(found), instances, opts);
}

// a disables b when some s has s a, s b ∈ tR but s a b ∉ tR. Returns the
// shortest such s as a witness.
inline std::optional<Witness> disables(const TraceStructure& r, const Symbol& a, const Symbol& b) {
  auto alphabet = r.alphabet();
  if (!alphabet.count(a)) throw UnknownSymbolError("symbol '" + a + "' is not in the alphabet");
  if (!alphabet.count(b)) throw UnknownSymbolError("symbol '" + b + "' is not in the alphabet");
  if (a == b) throw Error("disable relation needs two distinct symbols");
  const TraceSet& ts = r.traces();
  auto access = ts.access_traces();
  std::optional<Witness> best;
  ShortLex lex;
  for (std::size_t q = 0; q < ts.num_states(); ++q) {
    int pa = ts.next(static_cast<int>(q), a);
    int pb = ts.next(static_cast<int>(q), b);
    if (pa == TraceSet::kDead || pb == TraceSet::kDead) continue;
    if (ts.next(pa, b) != TraceSet::kDead) continue;
    if (!best || lex(access[q], best->prefix))
      best = Witness{access[q], {a, b}, std::nullopt, "s a ∈ tR and s b ∈ tR but s a b ∉ tR"};
  }
  return best;
}

// R3', R3'', R3''': no disabling among all pairs, among pairs that are not
// both inputs, or among input/output pairs respectively.
inline RuleVerdict check_r3(const TraceStructure& r, R3Variant variant, const RuleOptions& opts = {}) {
  detail::require_circuit_spec(r);
  const TraceSet& ts = r.traces();
  const auto& sym = ts.alphabet();
  auto access = ts.access_traces();
  auto quantified = [&](const Symbol& a, const Symbol& b) {
    switch (variant) {
      case R3Variant::Prime: return true;
      case R3Variant::DoublePrime: return !(r.is_input(a) && r.is_input(b));
      case R3Variant::TriplePrime: return detail::opposite_direction(r, a, b);
    }
    return true;
  };
  std::vector<detail::Candidate> found;
  std::size_t instances = 0;
  for (std::size_t q = 0; q < ts.num_states(); ++q) {
    for (std::size_t a = 0; a < sym.size(); ++a) {
      for (std::size_t b = 0; b < sym.size(); ++b) {
        if (a == b || !quantified(sym[a], sym[b])) continue;
        int pa = ts.next(static_cast<int>(q), a);
        int pb = ts.next(static_cast<int>(q), b);
        if (pa == TraceSet::kDead || pb == TraceSet::kDead) continue;
        ++instances;
        if (ts.next(pa, b) == TraceSet::kDead)
          found.push_back({{access[q], {sym[a], sym[b]}, std::nullopt, "s a ∈ tR and s b ∈ tR but s a b ∉ tR"}});
      }
    }
  }
  Rule rule = variant == R3Variant::Prime         ? Rule::R3Prime
              : variant == R3Variant::DoublePrime ? Rule::R3DoublePrime
                                                  : Rule::R3TriplePrime;
  return detail::finish(rule, std::move(found), instances, opts);
}

// Strongest class whose rule holds, provided R0, R1 and R2' hold.
inline DiClass classify(const TraceStructure& r, const RuleOptions& opts = {}) {
  if (!check_r0(r, opts).holds || !check_r1(r, opts).holds || !check_r2_prime(r, opts).holds)
    return DiClass::None;
  if (check_r3(r, R3Variant::Prime, opts).holds) return DiClass::Synchronization;
  if (check_r3(r, R3Variant::DoublePrime, opts).holds) return DiClass::DataCommunication;
  if (check_r3(r, R3Variant::TriplePrime, opts).holds) return DiClass::Arbitration;
  return DiClass::None;
}

// R0 ∧ R1 ∧ R2' ∧ R3''' plus the class. R3' and R3'' are included in the
// report so the class can be read off it.
inline RuleReport check_di(const TraceStructure& r, const RuleOptions& opts = {}) {
  RuleReport report;
  report.verdicts.push_back(check_r0(r, opts));
  report.verdicts.push_back(check_r1(r, opts));
  report.verdicts.push_back(check_r2_prime(r, opts));
  report.verdicts.push_back(check_r3(r, R3Variant::TriplePrime, opts));
  report.di = std::all_of(report.verdicts.begin(), report.verdicts.end(),
                          [](const RuleVerdict& v) { return v.holds; });
  report.verdicts.push_back(check_r3(r, R3Variant::DoublePrime, opts));
  report.verdicts.push_back(check_r3(r, R3Variant::Prime, opts));
  if (report.verdicts[0].holds && report.verdicts[1].holds && report.verdicts[2].holds) {
    if (report.verdicts[5].holds) report.cls = DiClass::Synchronization;
    else if (report.verdicts[4].holds) report.cls = DiClass::DataCommunication;
    else if (report.verdicts[3].holds) report.cls = DiClass::Arbitration;
  }
  return report;
}

// Replays a witness against the structure and confirms that it exhibits a
// violation of `rule`.
inline bool witness_reproduces(const TraceStructure& r, Rule rule, const Witness& w) {
  const auto& s = w.prefix;
  auto with = [&](std::initializer_list<Trace> parts) {
    Trace out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
  };
  auto in = [&](const Trace& t) { return r.traces().contains(t); };
  switch (rule) {
    case Rule::R0: {
      if (w.symbols.size() != 2 || w.symbols[0] != w.symbols[1]) return false;
      return in(with({s, {w.symbols[0], w.symbols[0]}}));
    }
    case Rule::R1:
    case Rule::R2: {
      if (w.symbols.size() != 2 || !w.segment) return false;
      const Symbol &a = w.symbols[0], &b = w.symbols[1];
      bool pair_ok = rule == Rule::R1 ? detail::same_direction(r, a, b) : detail::opposite_direction(r, a, b);
      if (!pair_ok) return false;
      if (rule == Rule::R2 && !(in(with({s, {a, b}})) && in(with({s, {b, a}})))) return false;
      return in(with({s, {a, b}, *w.segment})) != in(with({s, {b, a}, *w.segment}));
    }
    case Rule::R2Prime: {
      if (w.symbols.size() != 3 || !w.segment) return false;
      const Symbol &a = w.symbols[0], &b = w.symbols[1], &c = w.symbols[2];
      if (!detail::opposite_direction(r, a, b) || !detail::same_direction(r, a, c)) return false;
      const Trace& t = *w.segment;
      return in(with({s, {a, b}, t, {c}})) && in(with({s, {b, a}, t})) && !in(with({s, {b, a}, t, {c}}));
    }
    case Rule::R3Prime:
    case Rule::R3DoublePrime:
    case Rule::R3TriplePrime: {
      if (w.symbols.size() != 2) return false;
      const Symbol &a = w.symbols[0], &b = w.symbols[1];
      if (a == b) return false;
      if (rule == Rule::R3DoublePrime && r.is_input(a) && r.is_input(b)) return false;
      if (rule == Rule::R3TriplePrime && !detail::opposite_direction(r, a, b)) return false;
      return in(with({s, {a}})) && in(with({s, {b}})) && !in(with({s, {a, b}}));
    }
  }
  return false;
}

inline nlohmann::json to_json(const Witness& w) {
  nlohmann::json j;
  j["s"] = w.prefix;
  j["symbols"] = w.symbols;
  if (w.segment) j["t"] = *w.segment;
  j["explanation"] = w.explanation;
  return j;
}

inline nlohmann::json to_json(const RuleReport& report) {
  nlohmann::json rules = nlohmann::json::object();
  for (const auto& v : report.verdicts) {
    nlohmann::json witnesses = nlohmann::json::array();
    for (const auto& w : v.witnesses) witnesses.push_back(to_json(w));
    rules[rule_name(v.rule)] = {{"holds", v.holds}, {"witnesses", witnesses}, {"instances", v.instances}};
  }
  return {{"rules", rules}, {"class", class_name(report.cls)}, {"di", report.di}};
}

}  // namespace dicirc
