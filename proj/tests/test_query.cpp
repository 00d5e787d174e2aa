#include <gtest/gtest.h>

#include "craql/minilang.hpp"
#include "craql/query.hpp"
#include "harness.hpp"

namespace craql::query {
namespace {

std::vector<std::pair<TokenKind, std::string>> kinds(std::string_view text) {
  std::vector<std::pair<TokenKind, std::string>> out;
  for (const Token& t : tokenize(text)) out.emplace_back(t.kind, t.text);
  return out;
}

TEST(Tokenize, SelectHeader) {
  auto toks = kinds("select ({Block} b)");
  std::vector<std::pair<TokenKind, std::string>> want = {
      {TokenKind::Keyword, "select"}, {TokenKind::Operator, "("}, {TokenKind::NodeType, "Block"},
      {TokenKind::Identifier, "b"},   {TokenKind::Operator, ")"}, {TokenKind::End, ""},
  };
  EXPECT_EQ(toks, want);
}

TEST(Tokenize, EllipsisIsOneToken) {
  auto toks = kinds("({MethodDeclaration} m ... {Block} b)");
  ASSERT_GE(toks.size(), 4u);
  EXPECT_EQ(toks[3], std::make_pair(TokenKind::Operator, std::string("...")));
}

TEST(Tokenize, CountStar) {
  auto toks = kinds("count(*)");
  std::vector<std::pair<TokenKind, std::string>> want = {
      {TokenKind::Identifier, "count"}, {TokenKind::Operator, "("}, {TokenKind::Operator, "*"},
      {TokenKind::Operator, ")"},       {TokenKind::End, ""},
  };
  EXPECT_EQ(toks, want);
}

TEST(Tokenize, CompoundOperatorsCommentsAndLocations) {
  auto toks = tokenize("x ++; // note\n  y += 2;");
  ASSERT_EQ(toks.size(), 8u);
  EXPECT_EQ(toks[1].text, "++");
  EXPECT_EQ(toks[3].text, "y");
  EXPECT_EQ(toks[3].loc, (SourceLoc{2, 3}));
  EXPECT_EQ(toks[4].text, "+=");
}

TEST(Tokenize, BlockBraceVersusNodeType) {
  auto toks = kinds("{ {Block} }");
  EXPECT_EQ(toks[0].second, "{");
  EXPECT_EQ(toks[1], std::make_pair(TokenKind::NodeType, std::string("Block")));
  EXPECT_EQ(toks[2].second, "}");
}

TEST(Tokenize, ErrorsCarryLocation) {
  try {
    tokenize("print(\"abc);", "q.craql");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.loc(), (SourceLoc{1, 7}));
    EXPECT_NE(std::string(e.what()).find("unterminated string"), std::string::npos);
  }
  try {
    tokenize("x = 1;\n  @", "q.craql");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.loc(), (SourceLoc{2, 3}));
    EXPECT_NE(std::string(e.what()).find("stray character"), std::string::npos);
  }
}

TEST(Parse, BlockTopQueryNesting) {
  QueryDocument doc = harness::bundled_query("blocktop_decls");
  ASSERT_EQ(doc.queries.size(), 1u);
  const SelectQuery& top = *doc.queries[0].query;
  EXPECT_EQ(top.pattern.first.type, "Block");
  ASSERT_EQ(top.body.size(), 1u);
  ASSERT_EQ(top.body[0].kind, Stmt::Kind::Select);
  const SelectQuery& mid = *top.body[0].select;
  EXPECT_EQ(mid.input.kind, InputSpec::Kind::DirectlyIn);
  int nested = 0;
  for (const Stmt& s : mid.body) {
    if (s.kind != Stmt::Kind::If) continue;
    for (const Stmt& inner : s.body) nested += inner.kind == Stmt::Kind::Select;
  }
  EXPECT_EQ(nested, 1);
}

TEST(Parse, OutmostDirectlyIn) {
  QueryDocument doc = parse_query_text("select outmost ({Statement} s) directly in m { }");
  const SelectQuery& q = *doc.queries[0].query;
  EXPECT_EQ(q.modifier, Modifier::Outmost);
  EXPECT_EQ(q.input.kind, InputSpec::Kind::DirectlyIn);
  ASSERT_TRUE(q.input.expr);
  EXPECT_EQ(q.input.expr->kind, Expr::Kind::Variable);
  EXPECT_EQ(q.input.expr->text, "m");
}

TEST(Parse, StarAndEllipsisPatterns) {
  auto star = parse_query_text("select ({MethodDeclaration} d * {MethodInvocation} c) { }");
  EXPECT_EQ(star.queries[0].query->pattern.kind, PatternKind::Star);
  EXPECT_EQ(star.queries[0].query->pattern.second->name, "c");
  auto dots = parse_query_text("select ({MethodDeclaration} m ... {Block} b) { }");
  EXPECT_EQ(dots.queries[0].query->pattern.kind, PatternKind::Ellipsis);
}

TEST(Parse, UnresolvedLabel) {
  try {
    parse_query_text("q1 : select ({Block} b) { callquery(q2); }");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_NE(std::string(e.what()).find("unresolved query label q2"), std::string::npos);
  }
}

TEST(Parse, DuplicateLabel) {
  EXPECT_THROW(parse_query_text("a : select ({Block} b) { } a : select ({Block} c) { }"), SyntaxError);
}

TEST(Parse, ErrorsListExpectedTokens) {
  try {
    parse_query_text("select ({Block} b) where { }");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_FALSE(e.expected().empty());
    EXPECT_EQ(e.loc().line, 1u);
  }
  EXPECT_THROW(parse_query_text("select ({Block b}) { }"), SyntaxError);
  EXPECT_THROW(parse_query_text("select (Statements s) { }"), SyntaxError);
  EXPECT_THROW(parse_query_text("select ({Block} b) { select ({Block} b) { } }"), SyntaxError);
  EXPECT_THROW(parse_query_text("select outmost ({Block} a * {Block} b) { }"), SyntaxError);
  EXPECT_THROW(parse_query_text("select ({Block} b) { return 1; }"), SyntaxError);
}

TEST(Parse, ElseBindsToNearestIf) {
  auto doc = parse_query_text("select ({Block} b) { if (x) { if (y) { a = 1; } else { a = 2; } } }");
  const Stmt& outer = doc.queries[0].query->body[0];
  EXPECT_FALSE(outer.else_body);
  ASSERT_EQ(outer.body.size(), 1u);
  EXPECT_TRUE(outer.body[0].else_body);
}

TEST(Parse, PrecedenceAndAccessors) {
  auto doc = parse_query_text("select ({Block} b) where a || b && !c.d == 1 + 2 * 3 { x = m.{Block}.depth(); }");
  EXPECT_EQ(unparse(*doc.queries[0].query->where), "(a || (b && ((!c.d) == (1 + (2 * 3)))))");
  EXPECT_EQ(unparse(*doc.queries[0].query->body[0].expr), "m.{Block}.depth()");
}

TEST(Parse, CallQueryWithInputOverride) {
  auto doc = harness::bundled_query("loop_depth");
  ASSERT_TRUE(doc.queries[0].label);
  EXPECT_EQ(*doc.queries[0].label, "q1");
  const Stmt& call = doc.queries[0].query->body[1];
  EXPECT_EQ(call.kind, Stmt::Kind::CallQuery);
  ASSERT_TRUE(call.input);
  EXPECT_EQ(call.input->kind, InputSpec::Kind::DirectlyIn);
  EXPECT_EQ(doc.find_label("q1"), doc.queries[0].query.get());
}

TEST(Parse, AllBundledQueriesParseAndRoundTrip) {
  auto stems = harness::bundled_queries();
  EXPECT_EQ(stems.size(), 15u);
  for (const auto& stem : stems) {
    QueryDocument doc = harness::bundled_query(stem);
    std::string printed = unparse(doc);
    QueryDocument again = parse_query_text(printed);
    EXPECT_EQ(again, doc) << stem << "\n" << printed;
    EXPECT_EQ(unparse(again), printed) << stem;
  }
}

TEST(Lint, UnknownTypesAndProperties) {
  const auto& schema = *minilang::schema();
  auto warn = validate_against_schema(parse_query_text("select ({Blok} b) { x = b.bodyy; }"), schema);
  ASSERT_EQ(warn.size(), 2u);
  EXPECT_EQ(warn[0].message, "unknown node type Blok");
  EXPECT_EQ(warn[1].message, "no type declares property bodyy");
  EXPECT_TRUE(validate_against_schema(parse_query_text("select ({Statement} s) { x = s.parent(); }"), schema).empty());
}

TEST(Lint, BundledQueriesAreClean) {
  for (const auto& stem : harness::bundled_queries()) {
    auto warn = validate_against_schema(harness::bundled_query(stem), *minilang::schema());
    EXPECT_TRUE(warn.empty()) << stem << ": " << (warn.empty() ? "" : warn[0].message);
  }
}

}  // namespace
}  // namespace craql::query
