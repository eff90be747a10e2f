#include <gtest/gtest.h>

#include "dicirc/dicirc.hpp"

using namespace dicirc;
using K = SpecExpr::Kind;

namespace {

const std::vector<std::string> kPrimitiveTexts = {
    "pref*[a?;b!]",       "pref*[b!;a?]",   "pref*[a?;b! || c!]", "pref*[a? || b?;c!]",
    "pref*[a?;b!;a?;c!]", "pref*[(a?|b?);c!]",
    "pref*[a?;p!] || pref*[b?;q!] || pref*[n?;(p!|q!)]",
};

}  // namespace

TEST(SpecLanguage, WireAst) {
  auto e = parse("pref*[a?;b!]");
  auto want = SpecExpr::node(
      K::Pref, {SpecExpr::node(K::Star, {SpecExpr::node(K::Seq, {SpecExpr::input("a"), SpecExpr::output("b")})})});
  EXPECT_EQ(e, want);
}

TEST(SpecLanguage, TokenRingSpecIsAWeaveOfTwoPrefStars) {
  auto e = parse("pref*[a1?;p1!;a0?;p0!] || pref*[b?;(q!|p1!;a0?;q!)]");
  ASSERT_EQ(e.kind, K::Weave);
  ASSERT_EQ(e.children.size(), 2u);
  for (const auto& c : e.children) {
    EXPECT_EQ(c.kind, K::Pref);
    EXPECT_EQ(c.children.at(0).kind, K::Star);
  }
  // ';' binds tighter than '|': q! alternated with the sequence p1!;a0?;q!
  const auto& alt = e.children[1].children[0].children[0].children[1];
  ASSERT_EQ(alt.kind, K::Alt);
  EXPECT_EQ(alt.children[0], SpecExpr::output("q"));
  EXPECT_EQ(alt.children[1].kind, K::Seq);
}

TEST(SpecLanguage, DanglingSeparatorIsAParseError) {
  try {
    parse("a?;");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.column(), 3u);
    EXPECT_TRUE(e.expected().count("symbol name"));
  }
}

TEST(SpecLanguage, ErrorPositions) {
  try {
    parse("pref*[a?;b!]\n  || pref*[c?;;d!]");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 15u);
  }
  EXPECT_THROW(parse("pref*[a?;b!"), ParseError);
  EXPECT_THROW(parse("a"), ParseError);
  EXPECT_THROW(parse("a?)"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("a? $ b!"), ParseError);
}

TEST(SpecLanguage, CommentsAndWhitespace) {
  auto a = parse("# a wire\npref *[ a? ; b! ]  # trailing\n");
  EXPECT_EQ(print(a), "pref*[a?;b!]");
}

TEST(SpecLanguage, ElaborateExamples) {
  auto c = parse_structure("pref*[a?||b?;c!]");
  EXPECT_TRUE(equals(c, weave(parse_structure("pref*[a?;c!]"), parse_structure("pref*[b?;c!]"))));
  auto b = parse_structure("b!");
  EXPECT_TRUE(b.inputs().empty());
  EXPECT_EQ(b.outputs(), Alphabet{"b"});
  EXPECT_EQ(enumerate(b, 3), std::vector<Trace>{{"b"}});
  auto toggle = parse_structure("pref*[a?;b!;a?;c!]");
  std::vector<Trace> want{{}, {"a"}, {"a", "b"}, {"a", "b", "a"}, {"a", "b", "a", "c"}};
  EXPECT_EQ(enumerate(toggle, 4), want);
}

TEST(SpecLanguage, DirectionConflictWithinOneOperand) {
  EXPECT_THROW(parse_structure("pref*[a?;a!]"), DirectionConflictError);
  EXPECT_THROW(parse_structure("a?|a!"), DirectionConflictError);
  // Across weave operands a name may be read on one side and written on the other.
  auto r = parse_structure("pref*[a!;b?] || pref*[a?;c!]");
  EXPECT_TRUE(r.is_output("a"));
}

TEST(SpecLanguage, SharedOutputAcrossOperandsSynchronizes) {
  // The sequencer writes p and q in two operands each.
  auto r = parse_structure("pref*[a?;c!] || pref*[b?;c!]");
  EXPECT_EQ(r.outputs(), Alphabet{"c"});
  EXPECT_TRUE(equals(r, make(PrimitiveKind::CElement)));
}

TEST(SpecLanguage, PrintRoundTripsThePrimitiveTexts) {
  for (const auto& text : kPrimitiveTexts) {
    auto e = parse(text);
    std::string printed = print(e);
    EXPECT_EQ(printed, text);
    EXPECT_EQ(parse(printed), e);
    EXPECT_TRUE(equals(parse_structure(printed), elaborate(e)));
  }
}

TEST(SpecLanguage, PrimitiveTextsMatchTheConstructors) {
  auto kinds = all_primitive_kinds();
  ASSERT_EQ(kinds.size(), kPrimitiveTexts.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    EXPECT_EQ(primitive_text(kinds[i]), kPrimitiveTexts[i]);
    EXPECT_TRUE(equals(parse_structure(kPrimitiveTexts[i]), make(kinds[i]))) << kPrimitiveTexts[i];
  }
}

TEST(SpecLanguage, PrintParenthesizesByPrecedence) {
  EXPECT_EQ(print(parse("(a?|b?);c!")), "(a?|b?);c!");
  EXPECT_EQ(print(parse("a?|b?;c!")), "a?|b?;c!");
  EXPECT_EQ(print(parse("((a?;b!))")), "a?;b!");
  EXPECT_EQ(print(parse("pref(a?|b!)")), "pref(a?|b!)");
  EXPECT_EQ(print(parse("(a?||b?);c!")), "a? || b?;c!");
  EXPECT_EQ(print(parse("a?||(b?;c!)")), "a? || (b?;c!)");
}

TEST(SpecLanguage, StructuresWithoutAstPrintAsJson) {
  auto p = print(parse_structure("pref*[a?;b!]"));
  EXPECT_FALSE(p.is_expression);
  auto j = nlohmann::json::parse(p.text);
  EXPECT_TRUE(equals(structure_from_json(j), parse_structure("pref*[a?;b!]")));
}
