#include <gtest/gtest.h>

#include "harness.hpp"

namespace craql::oracle {
namespace {

struct Case {
  minilang::BuildOutput built;
  Environment env;
  RunOutput out;
  Engine engine;

  explicit Case(const std::string& fixture) : built(harness::build_fixture(fixture)), engine(built.project, env, out) {}

  OracleResult oracle(std::string_view text) {
    doc = query::parse_query_text(text);
    return oracle_select(*doc.queries[0].query, engine);
  }
  ResultSet fast(std::string_view text) {
    doc = query::parse_query_text(text);
    return engine.enumerate(*doc.queries[0].query);
  }
  std::vector<std::string> texts(const OracleResult& r) const {
    std::vector<std::string> out;
    for (const OracleRow& row : r.sorted()) {
      std::string s = built.project.source_text(row.first);
      if (row.second) s += " | " + built.project.source_text(*row.second);
      out.push_back(s);
    }
    return out;
  }

  query::QueryDocument doc;
};

NodeId body_of(const ProjectAst& p, std::string_view method) {
  for (NodeId m : harness::nodes_of(p, "MethodDeclaration")) {
    if (p.token(m, "name") == method) return std::get<NodeId>(*p.property(m, "body"));
  }
  return 0;
}

TEST(Oracle, SampleSelections) {
  Case c("Sample.mj");
  EXPECT_EQ(c.oracle("select ({Block} b) { }").rows.size(), 3u);
  EXPECT_EQ(c.texts(c.oracle("select inmost ({Block} b) { }")),
            (std::vector<std::string>{"{ return count; }", "{\n      i = i + 1;\n    }"}));
  c.env.set("m", Value::node(body_of(c.built.project, "greet")));
  EXPECT_EQ(c.oracle("select outmost ({Statement} s) directly in m { }").rows.size(), 4u);
  EXPECT_EQ(c.oracle("select ({Statement} s) directly in m { }").rows.size(), 5u);
}

TEST(Oracle, OutmostOfDeepNesting) {
  Case c("Nest.mj");
  auto all = c.oracle("select ({Block} b) { }");
  auto top = c.oracle("select outmost ({Block} b) { }");
  auto bottom = c.oracle("select inmost ({Block} b) { }");
  EXPECT_EQ(all.rows.size(), 10u);
  ASSERT_EQ(top.rows.size(), 1u);
  EXPECT_EQ(c.built.project.type_name(*c.built.project.parent(top.rows[0].first)), "MethodDeclaration");
  ASSERT_EQ(bottom.rows.size(), 1u);
  EXPECT_EQ(c.built.project.source_text(bottom.rows[0].first).find("d9"), std::string::npos);
}

TEST(Oracle, StarPair) {
  Case c("Fact.mj");
  EXPECT_EQ(c.texts(c.oracle("select ({MethodDeclaration} d * {MethodInvocation} m) { }")),
            (std::vector<std::string>{"int fact(int n) { return fact(n - 1); } | fact(n - 1)"}));
  auto dots = c.oracle("select ({MethodDeclaration} d ... {Name} n) { }");
  ASSERT_EQ(dots.rows.size(), 1u);
  EXPECT_EQ(c.built.project.source_text(*dots.rows[0].second), "n");
}

TEST(Oracle, PathKeysFollowChildIndices) {
  Case c("Sample.mj");
  auto rows = c.oracle("select ({WhileStatement} w) { }").sorted();
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].first_key, (PathKey{0, 0, 2, 0, 3}));
}

TEST(Compare, IdenticalResultsAgree) {
  Case c("Sample.mj");
  for (std::string_view q : {"select ({Block} b) { }", "select inmost ({Statement} s) { }",
                             "select ({Block} a ... {Statement} s) { }"}) {
    auto report = compare(c.fast(q), c.oracle(q), c.built.project);
    EXPECT_TRUE(report.empty()) << q << "\n" << report.to_string();
  }
}

TEST(Compare, DisabledOutmostShowsNestedCandidates) {
  Case c("Nest.mj");
  ResultSet plain = c.fast("select ({Block} b) { }");
  OracleResult expected = c.oracle("select outmost ({Block} b) { }");
  DiffReport report = compare(plain, expected, c.built.project);
  EXPECT_FALSE(report.empty());
  EXPECT_TRUE(report.missing.empty());
  EXPECT_EQ(report.extra.size(), 9u);
  EXPECT_NE(report.to_string().find("Nest.mj"), std::string::npos);
}

TEST(Compare, OrderDifferenceIsReported) {
  Case c("Sample.mj");
  ResultSet rs = c.fast("select ({Block} b) { }");
  std::swap(rs.rows[0], rs.rows[2]);
  DiffReport report = compare(rs, c.oracle("select ({Block} b) { }"), c.built.project);
  EXPECT_TRUE(report.missing.empty());
  EXPECT_TRUE(report.extra.empty());
  EXPECT_TRUE(report.order_differs);
}

TEST(Compare, EmptyResults) {
  auto empty = minilang::build_project("empty", {});
  Environment env;
  RunOutput out;
  Engine engine(empty.project, env, out);
  auto doc = query::parse_query_text("select ({Block} b) { }");
  auto report = compare(engine.enumerate(*doc.queries[0].query),
                        oracle_select(*doc.queries[0].query, engine), empty.project);
  EXPECT_TRUE(report.empty());
}

}  // namespace
}  // namespace craql::oracle
