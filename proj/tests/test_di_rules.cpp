#include <gtest/gtest.h>

#include "dicirc/dicirc.hpp"

using namespace dicirc;

namespace {

TraceStructure S(const std::string& text) { return parse_structure(text); }

Trace T(const std::string& w) {
  Trace t;
  for (char c : w) t.push_back(std::string(1, c));
  return t;
}

TraceStructure finite(Alphabet ins, Alphabet outs, std::initializer_list<std::string> ws) {
  std::vector<Trace> v;
  for (const auto& w : ws) v.push_back(T(w));
  return pref(from_words(std::move(ins), std::move(outs), v));
}

void expect_witnesses_reproduce(const TraceStructure& r, const RuleReport& report) {
  for (const auto& v : report.verdicts)
    for (const auto& w : v.witnesses) EXPECT_TRUE(witness_reproduces(r, v.rule, w)) << rule_name(v.rule);
}

const RuleVerdict& verdict(const RuleReport& r, Rule rule) {
  for (const auto& v : r.verdicts)
    if (v.rule == rule) return v;
  throw std::logic_error("missing verdict");
}

}  // namespace

TEST(DiRules, R0) {
  EXPECT_TRUE(check_r0(make(PrimitiveKind::Wire)).holds);
  EXPECT_TRUE(check_r0(make(PrimitiveKind::CElement)).holds);
  auto v = check_r0(S("pref*[a?;a?;b!]"));
  ASSERT_FALSE(v.holds);
  ASSERT_EQ(v.witnesses.size(), 1u);
  EXPECT_TRUE(v.witnesses[0].prefix.empty());
  EXPECT_EQ(v.witnesses[0].symbols, (std::vector<Symbol>{"a", "a"}));
}

TEST(DiRules, R1) {
  EXPECT_TRUE(check_r1(make(PrimitiveKind::CElement)).holds);
  for (auto k : {PrimitiveKind::Toggle, PrimitiveKind::Merge, PrimitiveKind::Sequencer})
    EXPECT_TRUE(check_r1(make(k)).holds) << primitive_name(k);
  auto v = check_r1(and_gate_events());
  ASSERT_FALSE(v.holds);
  EXPECT_TRUE(witness_reproduces(and_gate_events(), Rule::R1, v.witnesses.at(0)));
  EXPECT_FALSE(check_r1(or_gate_events()).holds);
}

TEST(DiRules, R2) {
  EXPECT_TRUE(check_r2(make(PrimitiveKind::Wire)).holds);
  EXPECT_TRUE(check_r2(make(PrimitiveKind::Sequencer)).holds);
  auto r = finite({"a", "x", "y"}, {"b"}, {"abx", "bay"});
  auto v = check_r2(r);
  ASSERT_FALSE(v.holds);
  EXPECT_TRUE(v.witnesses.at(0).prefix.empty());
  EXPECT_TRUE(witness_reproduces(r, Rule::R2, v.witnesses[0]));
}

TEST(DiRules, R2Prime) {
  for (auto k : all_primitive_kinds()) EXPECT_TRUE(check_r2_prime(make(k)).holds) << primitive_name(k);
  // c follows a and b only when a came first.
  auto r = finite({"a", "c"}, {"b", "d"}, {"abdc", "bad"});
  auto v = check_r2_prime(r);
  ASSERT_FALSE(v.holds);
  const auto& w = v.witnesses.at(0);
  ASSERT_TRUE(w.segment.has_value());
  EXPECT_EQ(*w.segment, T("d"));
  EXPECT_EQ(w.symbols, (std::vector<Symbol>{"a", "b", "c"}));
  EXPECT_TRUE(witness_reproduces(r, Rule::R2Prime, w));
  // Neither order jointly present: vacuous.
  auto vac = check_r2_prime(finite({"a"}, {"b"}, {"ab"}));
  EXPECT_TRUE(vac.holds);
  EXPECT_EQ(vac.instances, 0u);
}

TEST(DiRules, BoundedR2PrimeAgreesOnExamples) {
  RuleOptions bounded;
  bounded.bounded_r2_prime = true;
  for (auto k : all_primitive_kinds()) EXPECT_TRUE(check_r2_prime(make(k), bounded).holds);
  EXPECT_FALSE(check_r2_prime(finite({"a", "c"}, {"b", "d"}, {"abdc", "bad"}), bounded).holds);
}

TEST(DiRules, Disables) {
  auto seq = make(PrimitiveKind::Sequencer);
  auto w = disables(seq, "p", "q");
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(w->prefix.size(), 3u);
  EXPECT_TRUE(contains(seq, concat_traces(w->prefix, {"p"})));
  EXPECT_TRUE(contains(seq, concat_traces(w->prefix, {"q"})));
  EXPECT_FALSE(contains(seq, concat_traces(w->prefix, {"p", "q"})));

  auto wire = make(PrimitiveKind::Wire);
  EXPECT_FALSE(disables(wire, "a", "b"));
  EXPECT_FALSE(disables(wire, "b", "a"));

  // Both requests are offered at the start of a merge and each excludes the other.
  auto merge = make(PrimitiveKind::Merge);
  auto m = disables(merge, "a", "b");
  ASSERT_TRUE(m.has_value());
  EXPECT_TRUE(m->prefix.empty());

  EXPECT_THROW(disables(wire, "a", "zz"), UnknownSymbolError);
}

TEST(DiRules, R3Variants) {
  auto c = make(PrimitiveKind::CElement);
  EXPECT_TRUE(check_r3(c, R3Variant::Prime).holds);
  auto seq = make(PrimitiveKind::Sequencer);
  EXPECT_FALSE(check_r3(seq, R3Variant::DoublePrime).holds);
  EXPECT_TRUE(check_r3(seq, R3Variant::TriplePrime).holds);
  auto toggle = make(PrimitiveKind::Toggle);
  auto v = check_r3(toggle, R3Variant::Prime);
  EXPECT_TRUE(v.holds);
  EXPECT_EQ(v.instances, 0u);
}

TEST(DiRules, Classify) {
  EXPECT_EQ(classify(make(PrimitiveKind::CElement)), DiClass::Synchronization);
  EXPECT_EQ(classify(make(PrimitiveKind::Sequencer)), DiClass::Arbitration);
  EXPECT_EQ(classify(make(PrimitiveKind::Merge)), DiClass::DataCommunication);
  EXPECT_EQ(classify(make(PrimitiveKind::Wire)), DiClass::Synchronization);
  EXPECT_EQ(classify(and_gate_events()), DiClass::None);
}

TEST(DiRules, CheckDiOnThePrimitives) {
  for (auto k : all_primitive_kinds()) {
    auto r = make(k);
    auto report = check_di(r);
    EXPECT_TRUE(report.di) << primitive_name(k);
    EXPECT_EQ(report.cls, classify(r));
  }
}

TEST(DiRules, GateEventSpecsFailR1) {
  for (const auto& g : {and_gate_events(), or_gate_events()}) {
    auto report = check_di(g);
    EXPECT_FALSE(report.di);
    EXPECT_TRUE(verdict(report, Rule::R0).holds);
    EXPECT_FALSE(verdict(report, Rule::R1).holds);
    expect_witnesses_reproduce(g, report);
  }
}

TEST(DiRules, VerdictsAreSymmetricUnderReflection) {
  std::vector<TraceStructure> all{and_gate_events(), or_gate_events(),
                                  finite({"a", "x", "y"}, {"b"}, {"abx", "bay"}),
                                  finite({"a", "c"}, {"b", "d"}, {"abdc", "bad"})};
  for (auto k : all_primitive_kinds()) all.push_back(make(k));
  for (const auto& r : all) {
    auto a = check_di(r), b = check_di(reflect(r));
    EXPECT_EQ(a.di, b.di);
    for (std::size_t i = 0; i < a.verdicts.size(); ++i) {
      if (a.verdicts[i].rule == Rule::R3DoublePrime) continue;
      EXPECT_EQ(a.verdicts[i].holds, b.verdicts[i].holds) << rule_name(a.verdicts[i].rule);
    }
    EXPECT_EQ(check_r2(r).holds, check_r2(reflect(r)).holds);
  }
}

// R3'' exempts input pairs but not output pairs, so reflection moves a
// structure between the data-communication and arbitration classes.
TEST(DiRules, R3DoublePrimeIsNotReflectionSymmetric) {
  auto merge = make(PrimitiveKind::Merge);
  EXPECT_TRUE(check_r3(merge, R3Variant::DoublePrime).holds);
  EXPECT_FALSE(check_r3(reflect(merge), R3Variant::DoublePrime).holds);
  EXPECT_EQ(classify(reflect(merge)), DiClass::Arbitration);
  auto seq = make(PrimitiveKind::Sequencer);
  EXPECT_EQ(classify(reflect(seq)), DiClass::DataCommunication);
}

TEST(DiRules, ReportJson) {
  auto j = to_json(check_di(make(PrimitiveKind::Sequencer)));
  EXPECT_EQ(j["class"], "arbitration");
  EXPECT_EQ(j["di"], true);
  EXPECT_EQ(j["rules"]["R0"]["holds"], true);
  EXPECT_EQ(j["rules"]["R3''"]["holds"], false);
  EXPECT_TRUE(j["rules"]["R1"]["witnesses"].is_array());
}

TEST(DiRules, RejectsNonCircuitSpecs) {
  EXPECT_THROW(check_di(S("*[a?;b!]")), InvalidSpecError);
  EXPECT_THROW(check_r0(TraceStructure({"a"}, {}, TraceSet::empty({"a"}))), InvalidSpecError);
}

TEST(DiRules, WitnessesAreShortestFirst) {
  RuleOptions opts;
  opts.max_witnesses = 10;
  auto v = check_r1(and_gate_events(), opts);
  ASSERT_GE(v.witnesses.size(), 2u);
  for (std::size_t i = 1; i < v.witnesses.size(); ++i)
    EXPECT_LE(v.witnesses[i - 1].prefix.size(), v.witnesses[i].prefix.size());
}
