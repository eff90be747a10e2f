#pragma once

// Trace structures <inputs, outputs, traces> over regular trace sets, and the
// operation algebra on them: concatenation, union, repetition, prefix
// closure, projection, weave and reflection.
//
// A trace set is stored as a minimal deterministic acceptor. Only live states
// (reachable and able to reach acceptance) are kept; a missing transition
// means "dead". The one exception is the empty set, which is a single
// non-accepting state without transitions.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dicirc/error.hpp"

namespace dicirc {

using Symbol = std::string;
using Trace = std::vector<Symbol>;
using Alphabet = std::set<Symbol>;

inline constexpr std::size_t kDefaultEnumerationBound = 12;

inline std::string to_string(const Trace& t) {
  if (t.empty()) return "ε";
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ' ';
    out += t[i];
  }
  return out;
}

inline Trace concat_traces(const Trace& a, const Trace& b) {
  Trace out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline Alphabet set_union(const Alphabet& a, const Alphabet& b) {
  Alphabet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

inline Alphabet set_intersection(const Alphabet& a, const Alphabet& b) {
  Alphabet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.end()));
  return out;
}

inline Alphabet set_difference(const Alphabet& a, const Alphabet& b) {
  Alphabet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::inserter(out, out.end()));
  return out;
}

// Shortlex: shorter traces first, then lexicographic by symbol name.
struct ShortLex {
  bool operator()(const Trace& a, const Trace& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

class TraceSet;

namespace detail {

// Nondeterministic acceptor with ε-moves (symbol index -1). Used only as an
// intermediate form; every public value is canonicalized.
struct Nfa {
  std::vector<Symbol> alphabet;
  std::vector<std::vector<std::pair<int, int>>> out;
  std::vector<char> accepting;
  std::vector<int> initial;

  int add_state(bool accept) {
    out.emplace_back();
    accepting.push_back(accept ? 1 : 0);
    return static_cast<int>(out.size()) - 1;
  }
  void add_edge(int from, int symbol, int to) { out[from].emplace_back(symbol, to); }
};

struct Dfa {
  std::vector<Symbol> alphabet;
  std::vector<std::vector<int>> next;  // -1 = dead
  std::vector<char> accepting;
  int initial = 0;
};

inline Dfa determinize(const Nfa& nfa) {
  const std::size_t k = nfa.alphabet.size();
  auto closure = [&](std::vector<int> states) {
    std::vector<char> seen(nfa.out.size(), 0);
    std::vector<int> stack = states;
    for (int s : states) seen[s] = 1;
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      for (auto [sym, to] : nfa.out[s]) {
        if (sym == -1 && !seen[to]) {
          seen[to] = 1;
          states.push_back(to);
          stack.push_back(to);
        }
      }
    }
    std::sort(states.begin(), states.end());
    return states;
  };

  Dfa dfa;
  dfa.alphabet = nfa.alphabet;
  std::map<std::vector<int>, int> ids;
  std::deque<std::vector<int>> work;
  auto intern = [&](const std::vector<int>& set) {
    auto it = ids.find(set);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(dfa.next.size());
    ids.emplace(set, id);
    dfa.next.emplace_back(k, -1);
    bool acc = std::any_of(set.begin(), set.end(), [&](int s) { return nfa.accepting[s] != 0; });
    dfa.accepting.push_back(acc ? 1 : 0);
    work.push_back(set);
    return id;
  };
  dfa.initial = intern(closure(nfa.initial));
  while (!work.empty()) {
    std::vector<int> set = std::move(work.front());
    work.pop_front();
    int id = ids.at(set);
    for (std::size_t a = 0; a < k; ++a) {
      std::vector<int> target;
      for (int s : set)
        for (auto [sym, to] : nfa.out[s])
          if (sym == static_cast<int>(a)) target.push_back(to);
      if (target.empty()) continue;
      std::sort(target.begin(), target.end());
      target.erase(std::unique(target.begin(), target.end()), target.end());
      int to = intern(closure(std::move(target)));
      dfa.next[id][a] = to;
    }
  }
  return dfa;
}

}  // namespace detail

// Regular set of traces as a canonical minimal deterministic acceptor.
// States are numbered by breadth-first discovery from the initial state,
// following symbols in name order, so equal languages over equal alphabets
// have identical representations.
class TraceSet {
 public:
  static constexpr int kDead = -1;

  // The empty set over the empty alphabet.
  TraceSet() : next_(1), accepting_(1, 0) {}

  static TraceSet empty(const Alphabet& alphabet) {
    detail::Dfa d;
    d.alphabet.assign(alphabet.begin(), alphabet.end());
    d.next.emplace_back(d.alphabet.size(), -1);
    d.accepting.push_back(0);
    return canonical(std::move(d));
  }

  static TraceSet epsilon(const Alphabet& alphabet) {
    detail::Dfa d;
    d.alphabet.assign(alphabet.begin(), alphabet.end());
    d.next.emplace_back(d.alphabet.size(), -1);
    d.accepting.push_back(1);
    return canonical(std::move(d));
  }

  // The singleton {w}; every symbol of w must be in the alphabet.
  static TraceSet word(const Alphabet& alphabet, const Trace& w) {
    detail::Dfa d;
    d.alphabet.assign(alphabet.begin(), alphabet.end());
    for (std::size_t i = 0; i <= w.size(); ++i) {
      d.next.emplace_back(d.alphabet.size(), -1);
      d.accepting.push_back(i == w.size() ? 1 : 0);
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      auto it = std::lower_bound(d.alphabet.begin(), d.alphabet.end(), w[i]);
      if (it == d.alphabet.end() || *it != w[i])
        throw UnknownSymbolError("symbol '" + w[i] + "' is not in the alphabet");
      d.next[i][it - d.alphabet.begin()] = static_cast<int>(i + 1);
    }
    return canonical(std::move(d));
  }

  // Builds a set from an explicit deterministic transition list. The result
  // is canonicalized, so unreachable and dead states are discarded.
  static TraceSet from_transitions(const Alphabet& alphabet, std::size_t states, int initial,
                                   const std::vector<std::tuple<int, Symbol, int>>& transitions,
                                   const std::set<int>& accepting) {
    if (states == 0) return empty(alphabet);
    detail::Dfa d;
    d.alphabet.assign(alphabet.begin(), alphabet.end());
    d.next.assign(states, std::vector<int>(d.alphabet.size(), -1));
    d.accepting.assign(states, 0);
    auto in_range = [&](int s) { return s >= 0 && static_cast<std::size_t>(s) < states; };
    if (!in_range(initial)) throw Error("initial state out of range");
    d.initial = initial;
    for (int s : accepting) {
      if (!in_range(s)) throw Error("accepting state out of range");
      d.accepting[s] = 1;
    }
    for (const auto& [from, sym, to] : transitions) {
      if (!in_range(from) || !in_range(to)) throw Error("transition state out of range");
      auto it = std::lower_bound(d.alphabet.begin(), d.alphabet.end(), sym);
      if (it == d.alphabet.end() || *it != sym)
        throw UnknownSymbolError("symbol '" + sym + "' is not in the alphabet");
      int& slot = d.next[from][it - d.alphabet.begin()];
      if (slot != -1 && slot != to)
        throw Error("nondeterministic transition on '" + sym + "' from state " + std::to_string(from));
      slot = to;
    }
    return canonical(std::move(d));
  }

  static TraceSet from_nfa(const detail::Nfa& nfa) { return canonical(detail::determinize(nfa)); }
  static TraceSet from_dfa(detail::Dfa dfa) { return canonical(std::move(dfa)); }

  const std::vector<Symbol>& alphabet() const { return alphabet_; }
  Alphabet alphabet_set() const { return {alphabet_.begin(), alphabet_.end()}; }
  std::size_t num_states() const { return next_.size(); }
  int initial() const { return 0; }

  int index_of(const Symbol& s) const {
    auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), s);
    if (it == alphabet_.end() || *it != s) return -1;
    return static_cast<int>(it - alphabet_.begin());
  }

  int next(int state, std::size_t symbol) const {
    if (state == kDead) return kDead;
    return next_[state][symbol];
  }

  int next(int state, const Symbol& s) const {
    int i = index_of(s);
    if (i < 0) return kDead;
    return next(state, static_cast<std::size_t>(i));
  }

  int run(int from, const Trace& t) const {
    int q = from;
    for (const auto& s : t) {
      q = next(q, s);
      if (q == kDead) break;
    }
    return q;
  }

  bool accepting(int state) const { return state != kDead && accepting_[state] != 0; }
  bool contains(const Trace& t) const { return accepting(run(initial(), t)); }
  bool is_empty() const { return next_.size() == 1 && !accepting_[0] && used_symbols_.empty(); }

  // In the canonical form every state is live, so the set is prefix-closed
  // exactly when every state accepts.
  bool prefix_closed() const {
    return std::all_of(accepting_.begin(), accepting_.end(), [](char c) { return c != 0; }) || is_empty();
  }

  // Same language over a different alphabet. Symbols that carry transitions
  // cannot be dropped.
  TraceSet with_alphabet(const Alphabet& alphabet) const {
    for (const auto& s : used_symbols_)
      if (!alphabet.count(s))
        throw UnknownSymbolError("cannot drop symbol '" + s + "' which occurs in the trace set");
    detail::Dfa d;
    d.alphabet.assign(alphabet.begin(), alphabet.end());
    d.next.assign(next_.size(), std::vector<int>(d.alphabet.size(), -1));
    d.accepting = accepting_;
    for (std::size_t q = 0; q < next_.size(); ++q)
      for (std::size_t a = 0; a < alphabet_.size(); ++a)
        if (next_[q][a] != kDead) {
          auto it = std::lower_bound(d.alphabet.begin(), d.alphabet.end(), alphabet_[a]);
          d.next[q][it - d.alphabet.begin()] = next_[q][a];
        }
    return canonical(std::move(d));
  }

  // Symbols that label at least one transition.
  const Alphabet& used_symbols() const { return used_symbols_; }

  std::vector<std::tuple<int, Symbol, int>> transitions() const {
    std::vector<std::tuple<int, Symbol, int>> out;
    for (std::size_t q = 0; q < next_.size(); ++q)
      for (std::size_t a = 0; a < alphabet_.size(); ++a)
        if (next_[q][a] != kDead) out.emplace_back(static_cast<int>(q), alphabet_[a], next_[q][a]);
    return out;
  }

  std::vector<int> accepting_states() const {
    std::vector<int> out;
    for (std::size_t q = 0; q < accepting_.size(); ++q)
      if (accepting_[q]) out.push_back(static_cast<int>(q));
    return out;
  }

  // Language equality. Alphabets are not compared: a symbol without
  // transitions contributes nothing to the set.
  friend bool operator==(const TraceSet& a, const TraceSet& b) {
    return a.accepting_ == b.accepting_ && a.transitions() == b.transitions();
  }

  // Shortest (then lexicographically least) trace in exactly one of the sets.
  static std::optional<Trace> distinguishing_trace(const TraceSet& a, const TraceSet& b) {
    Alphabet symbols = set_union(a.alphabet_set(), b.alphabet_set());
    using Pair = std::pair<int, int>;
    std::map<Pair, Trace> seen;
    std::deque<Pair> queue;
    Pair start{a.initial(), b.initial()};
    seen.emplace(start, Trace{});
    queue.push_back(start);
    while (!queue.empty()) {
      Pair p = queue.front();
      queue.pop_front();
      const Trace& path = seen.at(p);
      if (a.accepting(p.first) != b.accepting(p.second)) return path;
      for (const auto& s : symbols) {
        Pair q{a.next(p.first, s), b.next(p.second, s)};
        if (q.first == kDead && q.second == kDead) continue;
        if (seen.count(q)) continue;
        Trace ext = path;
        ext.push_back(s);
        seen.emplace(q, std::move(ext));
        queue.push_back(q);
      }
    }
    return std::nullopt;
  }

  // Shortest access trace of every state, by shortlex order.
  std::vector<Trace> access_traces() const {
    std::vector<Trace> out(next_.size());
    std::vector<char> seen(next_.size(), 0);
    std::deque<int> queue{initial()};
    seen[initial()] = 1;
    while (!queue.empty()) {
      int q = queue.front();
      queue.pop_front();
      for (std::size_t a = 0; a < alphabet_.size(); ++a) {
        int p = next_[q][a];
        if (p == kDead || seen[p]) continue;
        seen[p] = 1;
        out[p] = out[q];
        out[p].push_back(alphabet_[a]);
        queue.push_back(p);
      }
    }
    return out;
  }

  detail::Nfa to_nfa() const {
    detail::Nfa n;
    n.alphabet = alphabet_;
    for (std::size_t q = 0; q < next_.size(); ++q) n.add_state(accepting_[q] != 0);
    for (std::size_t q = 0; q < next_.size(); ++q)
      for (std::size_t a = 0; a < alphabet_.size(); ++a)
        if (next_[q][a] != kDead) n.add_edge(static_cast<int>(q), static_cast<int>(a), next_[q][a]);
    n.initial = {initial()};
    return n;
  }

 private:
  static TraceSet canonical(detail::Dfa d);

  std::vector<Symbol> alphabet_;
  std::vector<std::vector<int>> next_;
  std::vector<char> accepting_;
  Alphabet used_symbols_;
};

// Trim to live states, merge equivalent states (Moore refinement with an
// implicit dead class), then renumber breadth-first.
inline TraceSet TraceSet::canonical(detail::Dfa d) {
  const std::size_t n = d.next.size();
  const std::size_t k = d.alphabet.size();

  std::vector<char> reachable(n, 0);
  {
    std::vector<int> stack{d.initial};
    reachable[d.initial] = 1;
    while (!stack.empty()) {
      int q = stack.back();
      stack.pop_back();
      for (int p : d.next[q])
        if (p != -1 && !reachable[p]) {
          reachable[p] = 1;
          stack.push_back(p);
        }
    }
  }
  std::vector<char> live(n, 0);
  {
    std::vector<std::vector<int>> rev(n);
    for (std::size_t q = 0; q < n; ++q)
      for (int p : d.next[q])
        if (p != -1) rev[p].push_back(static_cast<int>(q));
    std::vector<int> stack;
    for (std::size_t q = 0; q < n; ++q)
      if (d.accepting[q] && reachable[q]) {
        live[q] = 1;
        stack.push_back(static_cast<int>(q));
      }
    while (!stack.empty()) {
      int q = stack.back();
      stack.pop_back();
      for (int p : rev[q])
        if (reachable[p] && !live[p]) {
          live[p] = 1;
          stack.push_back(p);
        }
    }
  }

  TraceSet out;
  out.alphabet_ = d.alphabet;
  out.next_.clear();
  out.accepting_.clear();
  if (!live[d.initial]) {
    out.next_.emplace_back(k, kDead);
    out.accepting_.push_back(0);
    return out;
  }

  // Moore refinement over live states; dead is the fixed class -1.
  std::vector<int> cls(n, -1);
  for (std::size_t q = 0; q < n; ++q)
    if (live[q]) cls[q] = d.accepting[q] ? 1 : 0;
  std::size_t classes = 0;
  while (true) {
    std::map<std::vector<int>, int> sig_ids;
    std::vector<int> next_cls(n, -1);
    for (std::size_t q = 0; q < n; ++q) {
      if (!live[q]) continue;
      std::vector<int> sig;
      sig.reserve(k + 1);
      sig.push_back(cls[q]);
      for (std::size_t a = 0; a < k; ++a) {
        int p = d.next[q][a];
        sig.push_back(p == -1 || !live[p] ? -1 : cls[p]);
      }
      auto [it, inserted] = sig_ids.emplace(std::move(sig), static_cast<int>(sig_ids.size()));
      next_cls[q] = it->second;
    }
    std::size_t count = sig_ids.size();
    cls = std::move(next_cls);
    if (count == classes) break;
    classes = count;
  }

  // Breadth-first renumbering of classes.
  std::vector<int> rep(classes, -1);
  for (std::size_t q = 0; q < n; ++q)
    if (live[q] && rep[cls[q]] == -1) rep[cls[q]] = static_cast<int>(q);
  std::vector<int> number(classes, -1);
  std::deque<int> queue;
  number[cls[d.initial]] = 0;
  queue.push_back(cls[d.initial]);
  std::vector<int> order;
  while (!queue.empty()) {
    int c = queue.front();
    queue.pop_front();
    order.push_back(c);
    int q = rep[c];
    for (std::size_t a = 0; a < k; ++a) {
      int p = d.next[q][a];
      if (p == -1 || !live[p]) continue;
      int pc = cls[p];
      if (number[pc] == -1) {
        number[pc] = static_cast<int>(order.size() + queue.size());
        queue.push_back(pc);
      }
    }
  }
  out.next_.assign(order.size(), std::vector<int>(k, kDead));
  out.accepting_.assign(order.size(), 0);
  for (int c : order) {
    int q = rep[c];
    int id = number[c];
    out.accepting_[id] = d.accepting[q];
    for (std::size_t a = 0; a < k; ++a) {
      int p = d.next[q][a];
      if (p == -1 || !live[p]) continue;
      out.next_[id][a] = number[cls[p]];
      out.used_symbols_.insert(d.alphabet[a]);
    }
  }
  return out;
}

// <inputs, outputs, traces>. The trace set's alphabet is always the full
// alphabet inputs ∪ outputs.
class TraceStructure {
 public:
  TraceStructure() = default;

  TraceStructure(Alphabet inputs, Alphabet outputs, const TraceSet& traces)
      : inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
    traces_ = traces.with_alphabet(alphabet());
  }

  const Alphabet& inputs() const { return inputs_; }
  const Alphabet& outputs() const { return outputs_; }
  Alphabet alphabet() const { return set_union(inputs_, outputs_); }
  const TraceSet& traces() const { return traces_; }

  bool is_input(const Symbol& s) const { return inputs_.count(s) != 0; }
  bool is_output(const Symbol& s) const { return outputs_.count(s) != 0; }

  bool is_prefix_closed() const { return traces_.prefix_closed(); }

  // Empty when the structure is a valid circuit specification, otherwise the
  // reason it is not.
  std::optional<std::string> circuit_spec_problem() const {
    auto overlap = set_intersection(inputs_, outputs_);
    if (!overlap.empty()) return "symbol '" + *overlap.begin() + "' is both input and output";
    if (traces_.is_empty()) return "trace set is empty";
    if (!is_prefix_closed()) return "trace set is not prefix-closed";
    return std::nullopt;
  }

  bool is_circuit_spec() const { return !circuit_spec_problem().has_value(); }

  void validate_circuit_spec() const {
    if (auto problem = circuit_spec_problem()) throw InvalidSpecError("not a circuit specification: " + *problem);
  }

  friend bool operator==(const TraceStructure& a, const TraceStructure& b) {
    return a.inputs_ == b.inputs_ && a.outputs_ == b.outputs_ && a.traces_ == b.traces_;
  }

 private:
  Alphabet inputs_;
  Alphabet outputs_;
  TraceSet traces_;
};

// a? ≡ <{a}, ∅, {a}>
inline TraceStructure input_symbol(const Symbol& a) {
  return TraceStructure({a}, {}, TraceSet::word({a}, {a}));
}

// b! ≡ <∅, {b}, {b}>
inline TraceStructure output_symbol(const Symbol& b) {
  return TraceStructure({}, {b}, TraceSet::word({b}, {b}));
}

inline TraceStructure from_words(Alphabet inputs, Alphabet outputs, const std::vector<Trace>& words) {
  Alphabet all = set_union(inputs, outputs);
  detail::Nfa n;
  n.alphabet.assign(all.begin(), all.end());
  int start = n.add_state(false);
  n.initial = {start};
  for (const auto& w : words) {
    int q = start;
    if (w.empty()) {
      int e = n.add_state(true);
      n.add_edge(start, -1, e);
      continue;
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      auto it = std::lower_bound(n.alphabet.begin(), n.alphabet.end(), w[i]);
      if (it == n.alphabet.end() || *it != w[i])
        throw UnknownSymbolError("symbol '" + w[i] + "' is not in the alphabet");
      int p = n.add_state(i + 1 == w.size());
      n.add_edge(q, static_cast<int>(it - n.alphabet.begin()), p);
      q = p;
    }
  }
  return TraceStructure(std::move(inputs), std::move(outputs), TraceSet::from_nfa(n));
}

namespace detail {

// Copies `set` into `nfa` (whose alphabet is a superset) and returns the
// offset of its states.
inline int embed(Nfa& nfa, const TraceSet& set) {
  int base = static_cast<int>(nfa.out.size());
  for (std::size_t q = 0; q < set.num_states(); ++q) nfa.add_state(set.accepting(static_cast<int>(q)));
  for (const auto& [from, sym, to] : set.transitions()) {
    auto it = std::lower_bound(nfa.alphabet.begin(), nfa.alphabet.end(), sym);
    nfa.add_edge(base + from, static_cast<int>(it - nfa.alphabet.begin()), base + to);
  }
  return base;
}

inline Nfa empty_nfa(const Alphabet& alphabet) {
  Nfa n;
  n.alphabet.assign(alphabet.begin(), alphabet.end());
  return n;
}

}  // namespace detail

// R;S: traces {uv | u ∈ tR, v ∈ tS}
inline TraceStructure concat(const TraceStructure& r, const TraceStructure& s) {
  Alphabet ins = set_union(r.inputs(), s.inputs());
  Alphabet outs = set_union(r.outputs(), s.outputs());
  auto nfa = detail::empty_nfa(set_union(ins, outs));
  int rb = detail::embed(nfa, r.traces());
  int sb = detail::embed(nfa, s.traces());
  for (std::size_t q = 0; q < r.traces().num_states(); ++q) {
    if (nfa.accepting[rb + q]) {
      nfa.accepting[rb + q] = 0;
      nfa.add_edge(rb + static_cast<int>(q), -1, sb + s.traces().initial());
    }
  }
  nfa.initial = {rb + r.traces().initial()};
  return TraceStructure(std::move(ins), std::move(outs), TraceSet::from_nfa(nfa));
}

// R|S: traces tR ∪ tS
inline TraceStructure unite(const TraceStructure& r, const TraceStructure& s) {
  Alphabet ins = set_union(r.inputs(), s.inputs());
  Alphabet outs = set_union(r.outputs(), s.outputs());
  auto nfa = detail::empty_nfa(set_union(ins, outs));
  int rb = detail::embed(nfa, r.traces());
  int sb = detail::embed(nfa, s.traces());
  nfa.initial = {rb + r.traces().initial(), sb + s.traces().initial()};
  return TraceStructure(std::move(ins), std::move(outs), TraceSet::from_nfa(nfa));
}

// *[R]: all finite concatenations of traces of R, including ε.
inline TraceStructure repeat(const TraceStructure& r) {
  auto nfa = detail::empty_nfa(r.alphabet());
  int start = nfa.add_state(true);
  int rb = detail::embed(nfa, r.traces());
  nfa.add_edge(start, -1, rb + r.traces().initial());
  for (std::size_t q = 0; q < r.traces().num_states(); ++q)
    if (nfa.accepting[rb + q]) nfa.add_edge(rb + static_cast<int>(q), -1, start);
  nfa.initial = {start};
  return TraceStructure(r.inputs(), r.outputs(), TraceSet::from_nfa(nfa));
}

// pref R: all prefixes of traces of R. Every canonical state is live, so
// making every state accepting yields exactly the prefix set.
inline TraceStructure pref(const TraceStructure& r) {
  const TraceSet& t = r.traces();
  if (t.is_empty()) return r;
  std::set<int> all;
  for (std::size_t q = 0; q < t.num_states(); ++q) all.insert(static_cast<int>(q));
  return TraceStructure(r.inputs(), r.outputs(),
                        TraceSet::from_transitions(t.alphabet_set(), t.num_states(), t.initial(),
                                                   t.transitions(), all));
}

// Projection of a trace set onto `keep`: other symbols are erased.
inline TraceSet project_set(const TraceSet& t, const Alphabet& keep) {
  Alphabet kept = set_intersection(t.alphabet_set(), keep);
  detail::Nfa nfa = detail::empty_nfa(kept);
  for (std::size_t q = 0; q < t.num_states(); ++q) nfa.add_state(t.accepting(static_cast<int>(q)));
  for (const auto& [from, sym, to] : t.transitions()) {
    if (kept.count(sym)) {
      auto it = std::lower_bound(nfa.alphabet.begin(), nfa.alphabet.end(), sym);
      nfa.add_edge(from, static_cast<int>(it - nfa.alphabet.begin()), to);
    } else {
      nfa.add_edge(from, -1, to);
    }
  }
  nfa.initial = {t.initial()};
  return TraceSet::from_nfa(nfa);
}

// R↓A: hides every symbol outside A.
inline TraceStructure project(const TraceStructure& r, const Alphabet& keep) {
  return TraceStructure(set_intersection(r.inputs(), keep), set_intersection(r.outputs(), keep),
                        project_set(r.traces(), keep));
}

// Synchronized product of two trace sets: a trace over the joint alphabet
// belongs to the result iff its projection onto each operand's alphabet
// belongs to that operand.
inline TraceSet weave_sets(const TraceSet& a, const TraceSet& b) {
  Alphabet all = set_union(a.alphabet_set(), b.alphabet_set());
  std::vector<Symbol> symbols(all.begin(), all.end());
  std::vector<int> ia, ib;
  for (const auto& s : symbols) {
    ia.push_back(a.index_of(s));
    ib.push_back(b.index_of(s));
  }
  detail::Dfa d;
  d.alphabet = symbols;
  std::map<std::pair<int, int>, int> ids;
  std::deque<std::pair<int, int>> work;
  auto intern = [&](std::pair<int, int> p) {
    auto it = ids.find(p);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(d.next.size());
    ids.emplace(p, id);
    d.next.emplace_back(symbols.size(), -1);
    d.accepting.push_back(a.accepting(p.first) && b.accepting(p.second) ? 1 : 0);
    work.push_back(p);
    return id;
  };
  d.initial = intern({a.initial(), b.initial()});
  while (!work.empty()) {
    auto [qa, qb] = work.front();
    work.pop_front();
    int id = ids.at({qa, qb});
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      int na = ia[i] < 0 ? qa : a.next(qa, static_cast<std::size_t>(ia[i]));
      int nb = ib[i] < 0 ? qb : b.next(qb, static_cast<std::size_t>(ib[i]));
      if (na == TraceSet::kDead || nb == TraceSet::kDead) continue;
      int to = intern({na, nb});
      d.next[id][i] = to;
    }
  }
  return TraceSet::from_dfa(std::move(d));
}

// R||S
inline TraceStructure weave(const TraceStructure& r, const TraceStructure& s) {
  return TraceStructure(set_union(r.inputs(), s.inputs()), set_union(r.outputs(), s.outputs()),
                        weave_sets(r.traces(), s.traces()));
}

// Reflection: the environment's view, inputs and outputs exchanged.
inline TraceStructure reflect(const TraceStructure& r) {
  return TraceStructure(r.outputs(), r.inputs(), r.traces());
}

inline bool equals(const TraceStructure& r, const TraceStructure& s) { return r == s; }

// Membership; a symbol outside the alphabet simply means "not a member".
inline bool contains(const TraceStructure& r, const Trace& t) { return r.traces().contains(t); }

// Members of length ≤ n in shortlex order.
inline std::vector<Trace> enumerate(const TraceSet& t, std::size_t n,
                                    std::size_t bound = kDefaultEnumerationBound) {
  if (n > bound)
    throw BoundExceededError("enumeration length " + std::to_string(n) + " exceeds bound " +
                             std::to_string(bound));
  std::vector<Trace> out;
  if (t.is_empty()) return out;
  std::vector<std::pair<Trace, int>> frontier{{Trace{}, t.initial()}};
  for (std::size_t len = 0;; ++len) {
    for (const auto& [w, q] : frontier)
      if (t.accepting(q)) out.push_back(w);
    if (len == n) break;
    std::vector<std::pair<Trace, int>> next;
    for (const auto& [w, q] : frontier) {
      for (std::size_t a = 0; a < t.alphabet().size(); ++a) {
        int p = t.next(q, a);
        if (p == TraceSet::kDead) continue;
        Trace ext = w;
        ext.push_back(t.alphabet()[a]);
        next.emplace_back(std::move(ext), p);
      }
    }
    if (next.empty()) break;
    frontier = std::move(next);
  }
  return out;
}

inline std::vector<Trace> enumerate(const TraceStructure& r, std::size_t n,
                                    std::size_t bound = kDefaultEnumerationBound) {
  return enumerate(r.traces(), n, bound);
}

// ---------------------------------------------------------------------------
// Canonical JSON interchange form.

inline nlohmann::json to_json(const TraceStructure& r) {
  nlohmann::json j;
  j["inputs"] = std::vector<Symbol>(r.inputs().begin(), r.inputs().end());
  j["outputs"] = std::vector<Symbol>(r.outputs().begin(), r.outputs().end());
  j["states"] = r.traces().num_states();
  j["initial"] = r.traces().initial();
  j["accepting"] = r.traces().accepting_states();
  nlohmann::json transitions = nlohmann::json::array();
  for (const auto& [from, sym, to] : r.traces().transitions()) transitions.push_back({from, sym, to});
  j["transitions"] = std::move(transitions);
  return j;
}

inline TraceStructure structure_from_json(const nlohmann::json& j) {
  try {
    Alphabet ins = j.at("inputs").get<Alphabet>();
    Alphabet outs = j.at("outputs").get<Alphabet>();
    auto states = j.at("states").get<std::size_t>();
    int initial = j.at("initial").get<int>();
    std::set<int> accepting = j.at("accepting").get<std::set<int>>();
    std::vector<std::tuple<int, Symbol, int>> transitions;
    for (const auto& t : j.at("transitions"))
      transitions.emplace_back(t.at(0).get<int>(), t.at(1).get<Symbol>(), t.at(2).get<int>());
    return TraceStructure(ins, outs,
                          TraceSet::from_transitions(set_union(ins, outs), states, initial, transitions,
                                                     accepting));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed trace structure document: ") + e.what());
  }
}

}  // namespace dicirc
