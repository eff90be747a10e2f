// Brute-force reference implementations used by the oracle tests. Nothing
// here calls into the library's determinization, minimization or rule code:
// languages are raw partial transition tables walked word by word.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dicirc/dicirc.hpp"

namespace oracle {

using dicirc::Alphabet;
using dicirc::Symbol;
using dicirc::Trace;
using Words = std::set<Trace>;

// Partial DFA; a missing transition means the word is rejected.
struct Raw {
  std::vector<Symbol> alphabet;
  Alphabet inputs, outputs;
  int states = 1;
  std::map<std::pair<int, Symbol>, int> delta;
  std::set<int> accepting;

  std::optional<int> step(int q, const Symbol& a) const {
    auto it = delta.find({q, a});
    if (it == delta.end()) return std::nullopt;
    return it->second;
  }
  bool member(const Trace& w) const {
    int q = 0;
    for (const auto& a : w) {
      auto n = step(q, a);
      if (!n) return false;
      q = *n;
    }
    return accepting.count(q) != 0;
  }

  dicirc::TraceStructure structure() const {
    std::vector<std::tuple<int, Symbol, int>> t;
    for (const auto& [k, v] : delta) t.emplace_back(k.first, k.second, v);
    Alphabet all(alphabet.begin(), alphabet.end());
    return dicirc::TraceStructure(inputs, outputs,
                                  dicirc::TraceSet::from_transitions(all, states, 0, t, accepting));
  }
};

inline const std::vector<Symbol>& pool() {
  static const std::vector<Symbol> p{"a", "b", "c", "d"};
  return p;
}

// ≤ 4 symbols, ≤ 6 states. With prefix_closed every state accepts, which on
// a partial table is exactly a prefix-closed non-empty language.
inline Raw random_raw(std::mt19937_64& rng, bool prefix_closed, double density = 0.5) {
  Raw r;
  std::uniform_int_distribution<int> nsym(1, 4), nst(1, 6);
  std::bernoulli_distribution coin(0.5), edge(density);
  for (const auto& s : pool())
    if (coin(rng)) r.alphabet.push_back(s);
  if (r.alphabet.empty()) r.alphabet.push_back(pool()[rng() % pool().size()]);
  for (const auto& s : r.alphabet) (coin(rng) ? r.inputs : r.outputs).insert(s);
  r.states = nst(rng);
  std::uniform_int_distribution<int> target(0, r.states - 1);
  for (int q = 0; q < r.states; ++q) {
    for (const auto& s : r.alphabet)
      if (edge(rng)) r.delta[{q, s}] = target(rng);
    if (prefix_closed || coin(rng)) r.accepting.insert(q);
  }
  return r;
}

// Members of length ≤ n, by walking every path of the table.
inline Words members(const Raw& r, std::size_t n) {
  Words out;
  std::function<void(int, Trace&)> go = [&](int q, Trace& w) {
    if (r.accepting.count(q)) out.insert(w);
    if (w.size() == n) return;
    for (const auto& s : r.alphabet) {
      auto p = r.step(q, s);
      if (!p) continue;
      w.push_back(s);
      go(*p, w);
      w.pop_back();
    }
  };
  Trace w;
  go(0, w);
  return out;
}

inline Words library_words(const dicirc::TraceStructure& s, std::size_t n) {
  auto v = dicirc::enumerate(s, n);
  return {v.begin(), v.end()};
}

inline Words truncate(const Words& w, std::size_t n) {
  Words out;
  for (const auto& t : w)
    if (t.size() <= n) out.insert(t);
  return out;
}

// Set formulas applied to enumerated members.
inline Words concat(const Words& a, const Words& b, std::size_t n) {
  Words out;
  for (const auto& u : a)
    for (const auto& v : b)
      if (u.size() + v.size() <= n) out.insert(dicirc::concat_traces(u, v));
  return out;
}

inline Words repeat(const Words& a, std::size_t n) {
  Words out{{}};
  Words frontier{{}};
  while (!frontier.empty()) {
    Words next;
    for (const auto& u : frontier)
      for (const auto& v : a) {
        if (v.empty() || u.size() + v.size() > n) continue;
        auto w = dicirc::concat_traces(u, v);
        if (out.insert(w).second) next.insert(w);
      }
    frontier = std::move(next);
  }
  return out;
}

inline Words prefixes(const Words& a, std::size_t n) {
  Words out;
  for (const auto& w : a)
    for (std::size_t k = 0; k <= std::min(n, w.size()); ++k) out.insert(Trace(w.begin(), w.begin() + k));
  return out;
}

inline Trace project_word(const Trace& w, const Alphabet& keep) {
  Trace out;
  for (const auto& s : w)
    if (keep.count(s)) out.push_back(s);
  return out;
}

// {u↓keep | u ∈ L(r)} up to length n. The hidden stretches between kept
// symbols can be arbitrarily long, so membership is decided by searching
// the table on the fly rather than from a bounded enumeration.
inline Words projection(const Raw& r, const Alphabet& keep, std::size_t n) {
  auto closure = [&](std::set<int> s) {
    std::vector<int> stack(s.begin(), s.end());
    while (!stack.empty()) {
      int q = stack.back();
      stack.pop_back();
      for (const auto& a : r.alphabet) {
        if (keep.count(a)) continue;
        auto p = r.step(q, a);
        if (p && s.insert(*p).second) stack.push_back(*p);
      }
    }
    return s;
  };
  std::vector<Symbol> kept;
  for (const auto& a : r.alphabet)
    if (keep.count(a)) kept.push_back(a);
  Words out;
  std::function<void(const std::set<int>&, Trace&)> go = [&](const std::set<int>& s, Trace& w) {
    for (int q : s)
      if (r.accepting.count(q)) {
        out.insert(w);
        break;
      }
    if (w.size() == n) return;
    for (const auto& a : kept) {
      std::set<int> t;
      for (int q : s)
        if (auto p = r.step(q, a)) t.insert(*p);
      if (t.empty()) continue;
      w.push_back(a);
      go(closure(t), w);
      w.pop_back();
    }
  };
  Trace w;
  go(closure({0}), w);
  return out;
}

// Words over aR ∪ aS whose projections lie in both languages.
inline Words weave(const Raw& r, const Raw& s, std::size_t n) {
  Alphabet ar(r.alphabet.begin(), r.alphabet.end()), as(s.alphabet.begin(), s.alphabet.end());
  Alphabet all = dicirc::set_union(ar, as);
  Words out;
  Trace w;
  std::function<void()> go = [&]() {
    if (r.member(project_word(w, ar)) && s.member(project_word(w, as))) out.insert(w);
    if (w.size() == n) return;
    for (const auto& a : all) {
      w.push_back(a);
      // Abandon words whose projection already fell off a table.
      bool alive = true;
      for (const Raw* x : {&r, &s}) {
        Alphabet ax(x->alphabet.begin(), x->alphabet.end());
        int q = 0;
        for (const auto& c : project_word(w, ax)) {
          auto p = x->step(q, c);
          if (!p) {
            alive = false;
            break;
          }
          q = *p;
        }
      }
      if (alive) go();
      w.pop_back();
    }
  };
  go();
  return out;
}

// ---------------------------------------------------------------------------
// DI rules quantified over the members of length ≤ n. The consequent of each
// implication is tested by plain membership, which is exact.

struct RuleVerdicts {
  bool r0 = true, r1 = true, r2 = true, r2p = true, r3p = true, r3pp = true, r3ppp = true;
};

inline bool same_dir(const Raw& r, const Symbol& a, const Symbol& b) {
  return r.inputs.count(a) == r.inputs.count(b);
}

inline bool disables(const Raw& r, const Words& w, const Symbol& a, const Symbol& b, std::size_t n) {
  for (const auto& s : w) {
    if (s.size() + 1 > n) continue;
    Trace sa = s, sb = s;
    sa.push_back(a);
    sb.push_back(b);
    Trace sab = sa;
    sab.push_back(b);
    if (r.member(sa) && r.member(sb) && !r.member(sab)) return true;
  }
  return false;
}

inline RuleVerdicts rules(const Raw& r, std::size_t n) {
  RuleVerdicts v;
  Words w = members(r, n);
  for (const auto& t : w) {
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      const Symbol& a = t[i];
      const Symbol& b = t[i + 1];
      if (a == b) {
        v.r0 = false;
        continue;
      }
      Trace swapped = t;
      std::swap(swapped[i], swapped[i + 1]);
      if (same_dir(r, a, b)) {
        if (!r.member(swapped)) v.r1 = false;
        continue;
      }
      // Opposite directions: R2 applies only when both orders of the pair are
      // present right after s.
      Trace sab(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      Trace sba = sab;
      std::swap(sba[i], sba[i + 1]);
      if (r.member(sba) && !r.member(swapped)) v.r2 = false;
      // R2': t = s a b u c with c in a's direction.
      if (t.size() >= i + 3 && same_dir(r, a, t.back())) {
        Trace head(swapped.begin(), swapped.end() - 1);
        if (r.member(head) && !r.member(swapped)) v.r2p = false;
      }
    }
  }
  for (const auto& a : r.alphabet)
    for (const auto& b : r.alphabet) {
      if (a == b || !disables(r, w, a, b, n)) continue;
      v.r3p = false;
      bool both_inputs = r.inputs.count(a) && r.inputs.count(b);
      if (!both_inputs) v.r3pp = false;
      if (!same_dir(r, a, b)) v.r3ppp = false;
    }
  return v;
}

}  // namespace oracle
