#include <gtest/gtest.h>

#include "dicirc/dicirc.hpp"

using namespace dicirc;

namespace {

SimTrace run(const Network& net, std::uint64_t seed, std::uint64_t events = 400) {
  SimOptions o;
  o.seed = seed;
  o.max_events = events;
  return simulate(net, o);
}

// Two automata passing one event each way.
Network ping_pong() {
  Network net;
  Node p;
  p.id = "P";
  p.spec_text = "pref(b!;c?)";
  p.spec = parse_structure(p.spec_text);
  p.delay = DelayModel::fixed(1);
  Node q;
  q.id = "Q";
  q.spec_text = "pref(b?;c!)";
  q.spec = parse_structure(q.spec_text);
  q.delay = DelayModel::fixed(2);
  net.nodes = {p, q};
  net.drivers = {"P"};
  net.connect("P", "b", "Q", "b", DelayModel::fixed(1));
  net.connect("Q", "c", "P", "c", DelayModel::fixed(0.5));
  return net;
}

}  // namespace

TEST(SpacetimeGraph, ArrowsRunFromEmissionToArrival) {
  auto t = run(q_element_network(), 1);
  auto g = build(t);
  std::size_t delivered = 0;
  for (const auto& e : t.events) delivered += e.arrive_step.has_value();
  EXPECT_EQ(g.arrows.size(), delivered);
  for (const auto& a : g.arrows) {
    const auto& from = g.point(a.from);
    const auto& to = g.point(a.to);
    EXPECT_TRUE(from.emission);
    EXPECT_FALSE(to.emission);
    EXPECT_LT(from.time, to.time);
    EXPECT_NE(a.from.line, a.to.line);
  }
  for (const auto& l : g.lines)
    for (std::size_t i = 1; i < l.points.size(); ++i) {
      EXPECT_LE(l.points[i - 1].time, l.points[i].time);
      EXPECT_EQ(l.points[i].index, i);
    }
}

TEST(SpacetimeGraph, EmptyTrace) {
  SimTrace t;
  auto g = build(t);
  EXPECT_TRUE(g.lines.empty());
  EXPECT_TRUE(g.arrows.empty());
  EXPECT_EQ(to_dot(g), "digraph spacetime {\n}\n");
  EXPECT_TRUE(check_order(g, {}).holds);
}

TEST(SpacetimeGraph, CausalRelation) {
  auto g = build(run(q_element_network(), 2));
  const auto& line = g.lines[g.line_of("X")];
  ASSERT_GE(line.points.size(), 2u);
  std::size_t x = g.line_of("X");
  EXPECT_TRUE(g.causally_related({x, 0}, {x, 1}));
  EXPECT_FALSE(g.causally_related({x, 1}, {x, 0}));
  // One emission of xi reaches A and C; neither arrival precedes the other.
  auto at_a = g.find("A", "x1+", 1);
  auto at_c = g.find("C", "x2+", 1);
  ASSERT_TRUE(at_a && at_c);
  EXPECT_FALSE(g.causally_related(*at_a, *at_c));
  EXPECT_FALSE(g.causally_related(*at_c, *at_a));
  auto emit = g.find("X", "xi+", 1);
  ASSERT_TRUE(emit);
  EXPECT_TRUE(g.causally_related(*emit, *at_a));
  EXPECT_TRUE(g.causally_related(*emit, *at_c));
}

TEST(SpacetimeGraph, NominalQElementKeepsItsOrder) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto v = check_order(build(run(q_element_network(), seed)), q_element_constraints(3));
    EXPECT_TRUE(v.holds) << "seed " << seed << ": " << (v.violations.empty() ? "" : v.violations[0].reason);
  }
}

TEST(SpacetimeGraph, SkewedQElementViolatesOneConstraint) {
  auto g = build(run(q_element_skewed(100), 1));
  auto v = check_order(g, q_element_constraints(1));
  EXPECT_FALSE(v.holds);
  ASSERT_EQ(v.violations.size(), 1u);
  EXPECT_EQ(v.violations[0].node, "B");
  EXPECT_EQ(v.violations[0].first, "y1+");
  EXPECT_EQ(v.violations[0].second, "u+");
}

TEST(SpacetimeGraph, UnresolvableConstraint) {
  auto g = build(run(q_element_network(), 1));
  EXPECT_THROW(check_order(g, {{{"B", "y1+", 0}, {"B", "u+", 1}}}), Error);
  auto v = check_order(g, {{{"B", "nope", 1}, {"B", "u+", 1}}});
  EXPECT_FALSE(v.holds);
}

TEST(SpacetimeGraph, JsonRoundTrip) {
  for (const auto& net : {q_element_network(), q_element_skewed(100), token_ring(3)}) {
    auto g = build(run(net, 4, 200));
    auto j = to_json(g);
    EXPECT_EQ(graph_from_json(j), g);
    EXPECT_EQ(to_json(graph_from_json(j)), j);
  }
  EXPECT_THROW(graph_from_json(nlohmann::json::parse(R"({"lines":[{"node":"X"}]})")), TraceFormatError);
}

TEST(SpacetimeGraph, RendezvousMarksTheCElement) {
  auto g = build(run(q_element_network(), 1));
  const auto& c = g.lines[g.line_of("C")];
  EXPECT_TRUE(c.wait_initial);  // u needs both x2 and y2 before rising
}

TEST(SpacetimeGraph, DotGolden) {
  auto t = run(ping_pong(), 1);
  EXPECT_EQ(to_dot(build(t)),
            "digraph spacetime {\n"
            "  rankdir=TB;\n"
            "  node [shape=plaintext, fontsize=10];\n"
            "  subgraph cluster_0 {\n"
            "    label=\"P\";\n"
            "    p0_0_top [label=\"\", shape=point];\n"
            "    p0_1 [label=\"b @1\"];\n"
            "    p0_2 [label=\"c @4.5\"];\n"
            "    p0_0_top -> p0_1 [arrowhead=none];\n"
            "    p0_1 -> p0_2 [arrowhead=none];\n"
            "  }\n"
            "  subgraph cluster_1 {\n"
            "    label=\"Q\";\n"
            "    p1_0_top [label=\"\", shape=point];\n"
            "    p1_1 [label=\"b @2\"];\n"
            "    p1_2 [label=\"c @4\"];\n"
            "    p1_0_top -> p1_1 [arrowhead=none];\n"
            "    p1_1 -> p1_2 [arrowhead=none];\n"
            "  }\n"
            "  p0_1 -> p1_1 [constraint=false, label=\"e0\"];\n"
            "  p1_2 -> p0_2 [constraint=false, label=\"e1\"];\n"
            "}\n");
}
