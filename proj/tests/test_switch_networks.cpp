#include <gtest/gtest.h>

#include "dicirc/dicirc.hpp"

using namespace dicirc;
using N = SwitchNetwork;

TEST(SwitchNetworks, Eval) {
  auto nand = nand_gate();
  EXPECT_FALSE(eval(nand.pull_up, {{"x1", true}, {"x2", true}}));
  EXPECT_TRUE(eval(nand.pull_up, {{"x1", false}, {"x2", true}}));
  EXPECT_TRUE(eval(N::literal("x"), {{"x", true}}));
  EXPECT_FALSE(eval(N::literal("x", true), {{"x", true}}));
  EXPECT_FALSE(eval(latch_gate().pull_up, {{"x", true}, {"e", false}}));
  EXPECT_THROW(eval(N::literal("y"), {{"x", true}}), Error);
}

TEST(SwitchNetworks, NoShort) {
  EXPECT_TRUE(check_no_short(nand_gate()).holds);
  EXPECT_TRUE(check_no_short(latch_gate()).holds);
  Gate bad{{"x"}, N::literal("x"), N::literal("x")};
  auto v = check_no_short(bad);
  EXPECT_FALSE(v.holds);
  ASSERT_EQ(v.shorts.size(), 1u);
  EXPECT_EQ(v.shorts[0], (Assignment{{"x", true}}));
  EXPECT_THROW(classify_gate(bad), Error);
}

TEST(SwitchNetworks, TooManyInputs) {
  Gate g;
  for (int i = 0; i <= static_cast<int>(kMaxExhaustiveInputs); ++i) g.inputs.push_back("x" + std::to_string(i));
  EXPECT_THROW(check_no_short(g), Error);
}

TEST(SwitchNetworks, UndeclaredVariable) {
  Gate g{{"x"}, N::literal("y"), N::literal("x", true)};
  EXPECT_THROW(validate_gate(g), Error);
}

TEST(SwitchNetworks, Classify) {
  EXPECT_EQ(classify_gate(nand_gate()), GateClass::Combinational);
  EXPECT_EQ(classify_gate(latch_gate()), GateClass::StateHolding);
  EXPECT_EQ(classify_gate(Gate{{}, N::constant(true), N::constant(false)}), GateClass::Combinational);
  EXPECT_EQ(gate_class_name(GateClass::StateHolding), "state_holding");
}

TEST(SwitchNetworks, CombinationalOutputIsThePullUpFunction) {
  auto g = nand_gate();
  for (std::uint64_t k = 0; k < 4; ++k) {
    auto a = assignment_of(g, k);
    bool want = !(a.at("x1") && a.at("x2"));
    for (bool z : {false, true}) EXPECT_EQ(gate_next(g, a, z), want);
  }
}

TEST(SwitchNetworks, ClassInvariantUnderEquivalentRewrites) {
  // Nu and Nd of the nand with reordered and regrouped literals.
  Gate g{{"x1", "x2"},
         N::parallel({N::literal("x2", true), N::parallel({N::literal("x1", true)})}),
         N::series({N::series({N::literal("x2")}), N::literal("x1")})};
  EXPECT_EQ(classify_gate(g), classify_gate(nand_gate()));
}

TEST(SwitchNetworks, LatchTruthTable) {
  for (int x = 0; x < 2; ++x)
    for (int e = 0; e < 2; ++e)
      for (int z = 0; z < 2; ++z) {
        bool want = e ? x != 0 : z != 0;
        EXPECT_EQ(latch_next(x, e, z), want);
        EXPECT_EQ(gate_next(latch_gate(), {{"x", x != 0}, {"e", e != 0}}, z != 0), want);
      }
}

TEST(SwitchNetworks, LatchIteration) {
  for (bool z0 : {false, true}) {
    bool z = z0;
    for (bool x : {true, false, true, true}) {
      z = latch_next(x, false, z);
      EXPECT_EQ(z, z0);
    }
    for (bool x : {true, false, false, true}) {
      z = latch_next(x, true, z);
      EXPECT_EQ(z, x);
    }
  }
}

TEST(SwitchNetworks, JsonRoundTrip) {
  for (const auto& g : {nand_gate(), latch_gate()}) {
    auto j = to_json(g);
    auto back = gate_from_json(j);
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(classify_gate(back), classify_gate(g));
  }
  auto j = nlohmann::json::parse(R"({"inputs":["x"],"pull_up":{"var":"x"},"pull_down":{"not":"x"}})");
  EXPECT_EQ(classify_gate(gate_from_json(j)), GateClass::Combinational);
  EXPECT_THROW(gate_from_json(nlohmann::json::parse(R"({"inputs":["x"],"pull_up":{"xor":[]},"pull_down":{"const":false}})")),
               Error);
}
