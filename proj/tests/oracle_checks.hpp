// Randomized comparisons between the library and the brute-force oracle.
// Each check returns a description of the first disagreement, or nothing.
#pragma once

#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "oracle.hpp"

namespace oracle {

inline constexpr std::size_t kOpLength = 8;
inline constexpr std::size_t kRuleLength = 10;

inline std::string show(const Words& w) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (const auto& t : w) {
    os << (first ? "" : ", ") << (t.empty() ? "ε" : dicirc::to_string(t));
    first = false;
  }
  os << "}";
  return os.str();
}

inline std::optional<std::string> compare(const std::string& what, const Words& lib, const Words& ref) {
  if (lib == ref) return std::nullopt;
  return what + ": library " + show(lib) + " oracle " + show(ref);
}

inline Alphabet random_subset(std::mt19937_64& rng, const std::vector<Symbol>& from) {
  Alphabet out;
  for (const auto& s : from)
    if (rng() & 1) out.insert(s);
  return out;
}

// Every structure operation on one random pair.
inline std::optional<std::string> operations_case(std::mt19937_64& rng) {
  const std::size_t n = kOpLength;
  Raw r = random_raw(rng, false), s = random_raw(rng, false);
  auto R = r.structure(), S = s.structure();
  Words er = members(r, n), es = members(s, n);
  std::optional<std::string> bad;
  auto check = [&](const std::string& what, const Words& lib, const Words& ref) {
    if (!bad) bad = compare(what, lib, ref);
  };
  check("enumerate", library_words(R, n), er);
  Words u = er;
  u.insert(es.begin(), es.end());
  check("union", library_words(dicirc::unite(R, S), n), u);
  check("concat", library_words(dicirc::concat(R, S), n), concat(er, es, n));
  check("repeat", library_words(dicirc::repeat(R), n), repeat(er, n));
  // A live state of a table with k states reaches acceptance within k-1 steps.
  check("pref", library_words(dicirc::pref(R), n),
        prefixes(members(r, n + static_cast<std::size_t>(r.states) - 1), n));
  Alphabet keep = random_subset(rng, r.alphabet);
  check("project", library_words(dicirc::project(R, keep), n), projection(r, keep, n));
  check("weave", library_words(dicirc::weave(R, S), n), weave(r, s, n));
  auto refl = dicirc::reflect(R);
  check("reflect", library_words(refl, n), er);
  if (!bad && (refl.inputs() != r.outputs || refl.outputs() != r.inputs)) bad = "reflect: alphabets not exchanged";
  return bad;
}

// All seven rule verdicts on one random prefix-closed structure.
inline std::optional<std::string> rules_case(std::mt19937_64& rng) {
  Raw r = random_raw(rng, true);
  auto R = r.structure();
  RuleVerdicts ref = rules(r, kRuleLength);
  using dicirc::R3Variant;
  const std::pair<const char*, std::pair<bool, bool>> verdicts[] = {
      {"R0", {dicirc::check_r0(R).holds, ref.r0}},
      {"R1", {dicirc::check_r1(R).holds, ref.r1}},
      {"R2", {dicirc::check_r2(R).holds, ref.r2}},
      {"R2'", {dicirc::check_r2_prime(R).holds, ref.r2p}},
      {"R3'", {dicirc::check_r3(R, R3Variant::Prime).holds, ref.r3p}},
      {"R3''", {dicirc::check_r3(R, R3Variant::DoublePrime).holds, ref.r3pp}},
      {"R3'''", {dicirc::check_r3(R, R3Variant::TriplePrime).holds, ref.r3ppp}},
  };
  for (const auto& [name, v] : verdicts)
    if (v.first != v.second)
      return std::string(name) + ": library " + (v.first ? "holds" : "fails") + ", oracle " +
             (v.second ? "holds" : "fails") + " on " + dicirc::to_json(R).dump();
  // Every reported witness must replay.
  auto report = dicirc::check_di(R);
  for (const auto& v : report.verdicts)
    for (const auto& w : v.witnesses)
      if (!dicirc::witness_reproduces(R, v.rule, w))
        return "witness for " + dicirc::rule_name(v.rule) + " does not replay";
  return std::nullopt;
}

struct Law {
  std::string name;
  std::function<std::optional<std::string>(std::mt19937_64&)> run;
};

inline std::vector<Law> algebra_laws() {
  using namespace dicirc;
  auto one = [](std::mt19937_64& g) { return random_raw(g, false).structure(); };
  auto fail = [](bool ok, const std::string& what) -> std::optional<std::string> {
    if (ok) return std::nullopt;
    return what;
  };
  return {
      {"union commutative",
       [=](std::mt19937_64& g) {
         auto a = one(g), b = one(g);
         return fail(equals(unite(a, b), unite(b, a)), "R|S != S|R");
       }},
      {"union associative",
       [=](std::mt19937_64& g) {
         auto a = one(g), b = one(g), c = one(g);
         return fail(equals(unite(unite(a, b), c), unite(a, unite(b, c))), "(R|S)|U != R|(S|U)");
       }},
      {"weave commutative",
       [=](std::mt19937_64& g) {
         auto a = one(g), b = one(g);
         return fail(equals(weave(a, b), weave(b, a)), "R||S != S||R");
       }},
      {"weave associative",
       [=](std::mt19937_64& g) {
         auto a = one(g), b = one(g), c = one(g);
         return fail(equals(weave(weave(a, b), c), weave(a, weave(b, c))), "(R||S)||U != R||(S||U)");
       }},
      {"pref idempotent",
       [=](std::mt19937_64& g) {
         auto a = pref(one(g));
         return fail(equals(pref(a), a), "pref pref R != pref R");
       }},
      {"prefix-closure detection",
       [=](std::mt19937_64& g) {
         auto a = one(g);
         return fail(a.is_prefix_closed() == equals(pref(a), a), "is_prefix_closed disagrees with pref");
       }},
      {"reflect involution",
       [=](std::mt19937_64& g) {
         auto a = one(g);
         return fail(equals(reflect(reflect(a)), a), "reflect reflect R != R");
       }},
      {"project onto own alphabet",
       [=](std::mt19937_64& g) {
         auto a = one(g);
         return fail(equals(project(a, a.alphabet()), a), "R↓aR != R");
       }},
      {"project composition",
       [=](std::mt19937_64& g) {
         Raw r = random_raw(g, false);
         auto a = r.structure();
         Alphabet x = random_subset(g, pool()), y = random_subset(g, pool());
         return fail(equals(project(project(a, x), y), project(a, set_intersection(x, y))),
                     "(R↓A)↓B != R↓(A∩B)");
       }},
      {"rule symmetry under reflection",
       [=](std::mt19937_64& g) -> std::optional<std::string> {
         auto a = random_raw(g, true).structure();
         auto b = reflect(a);
         if (check_r0(a).holds != check_r0(b).holds) return "R0";
         if (check_r1(a).holds != check_r1(b).holds) return "R1";
         if (check_r2(a).holds != check_r2(b).holds) return "R2";
         if (check_r2_prime(a).holds != check_r2_prime(b).holds) return "R2'";
         if (check_r3(a, R3Variant::Prime).holds != check_r3(b, R3Variant::Prime).holds) return "R3'";
         if (check_r3(a, R3Variant::TriplePrime).holds != check_r3(b, R3Variant::TriplePrime).holds) return "R3'''";
         if (check_di(a).di != check_di(b).di) return "check_di";
         return std::nullopt;
       }},
      {"class monotonicity",
       [=](std::mt19937_64& g) -> std::optional<std::string> {
         auto a = random_raw(g, true).structure();
         bool p = check_r3(a, R3Variant::Prime).holds, pp = check_r3(a, R3Variant::DoublePrime).holds,
              ppp = check_r3(a, R3Variant::TriplePrime).holds;
         if ((p && !pp) || (pp && !ppp)) return "R3' => R3'' => R3''' broken";
         auto c = classify(a);
         if (c != DiClass::None && (!check_r0(a).holds || !check_r1(a).holds || !check_r2_prime(a).holds))
           return "class reported although a base rule fails";
         if (c == DiClass::Synchronization && !p) return "synchronization without R3'";
         if (c == DiClass::DataCommunication && (!pp || p)) return "data-communication mismatch";
         if (c == DiClass::Arbitration && (!ppp || pp)) return "arbitration mismatch";
         return std::nullopt;
       }},
      {"canonical equality agrees with enumeration",
       [=](std::mt19937_64& g) -> std::optional<std::string> {
         Raw r = random_raw(g, false), s = random_raw(g, false);
         s.alphabet = r.alphabet;
         s.inputs = r.inputs;
         s.outputs = r.outputs;
         for (auto it = s.delta.begin(); it != s.delta.end();)
           it = std::find(s.alphabet.begin(), s.alphabet.end(), it->first.second) == s.alphabet.end()
                    ? s.delta.erase(it)
                    : std::next(it);
         // Two tables of at most 6 states agree on all words iff they agree up to length 11.
         bool lang = members(r, 11) == members(s, 11);
         return fail(equals(r.structure(), s.structure()) == lang, "equals disagrees with enumeration");
       }},
  };
}

}  // namespace oracle
