#include <gtest/gtest.h>

#include <algorithm>

#include "expectations.hpp"
#include "generators.hpp"
#include "harness.hpp"

namespace craql {
namespace {

constexpr std::uint32_t kSeed = 20240611;
constexpr int kFiles = 120;

const minilang::BuildOutput& corpus() {
  static const minilang::BuildOutput built = minilang::build_project("random", testgen::random_corpus(kSeed, kFiles));
  return built;
}

const std::vector<std::string>& candidate_types() {
  static const std::vector<std::string> types = {"Block", "Statement", "Expression", "IfStatement",
                                                 "MethodInvocation", "InfixExpression", "WhileStatement"};
  return types;
}

TEST(ModifierLaws, HoldOnRandomCorpus) {
  ASSERT_GE(corpus().files_parsed, 100u);
  auto report = harness::check_modifier_laws(corpus().project);
  EXPECT_EQ(report.counterexamples, 0u) << (report.examples.empty() ? "" : report.examples.front());
  EXPECT_GT(report.checks, 1000u);
}

TEST(OracleEquivalence, RandomCorpus) {
  const ProjectAst& p = corpus().project;
  Environment env;
  RunOutput out;
  Engine engine(p, env, out);
  std::vector<NodeId> methods = harness::nodes_of(p, "MethodDeclaration");
  std::size_t compared = 0;
  for (const char* modifier : {"", "outmost ", "inmost "}) {
    for (const auto& t : candidate_types()) {
      for (const char* input : {"", " in m", " directly in m"}) {
        auto doc = query::parse_query_text(std::string("select ") + modifier + "({" + t + "} x)" + input + " { }");
        const auto& q = *doc.queries[0].query;
        for (std::size_t i = 0; i < methods.size(); i += *input ? 7 : methods.size()) {
          env.set("m", Value::node(methods[i]));
          auto diff = oracle::compare(engine.enumerate(q), oracle::oracle_select(q, engine), p);
          EXPECT_TRUE(diff.empty()) << query::unparse(doc) << "\n" << diff.to_string();
          ++compared;
        }
      }
    }
  }
  for (const char* pair : {"({MethodDeclaration} a * {Block} b)", "({Block} a * {Statement} b)",
                           "({MethodDeclaration} a ... {Block} b)", "({TypeDeclaration} a ... {Expression} b)"}) {
    auto doc = query::parse_query_text(std::string("select ") + pair + " { }");
    auto diff = oracle::compare(engine.enumerate(*doc.queries[0].query),
                                oracle::oracle_select(*doc.queries[0].query, engine), p);
    EXPECT_TRUE(diff.empty()) << pair << "\n" << diff.to_string();
    ++compared;
  }
  EXPECT_GT(compared, 100u);
}

TEST(OracleEquivalence, InvariantUnderInputOrder) {
  const ProjectAst& p = corpus().project;
  Environment env;
  RunOutput out;
  Engine engine(p, env, out);
  auto blocks = harness::nodes_of(p, "Block");
  std::vector<NodeId> forward(blocks.begin(), blocks.begin() + std::min<std::size_t>(blocks.size(), 200));
  std::vector<NodeId> backward(forward.rbegin(), forward.rend());
  auto doc = query::parse_query_text("select ({Statement} s) in xs { }");
  env.set("xs", Value::list(forward));
  auto a = oracle::oracle_select(*doc.queries[0].query, engine).sorted();
  env.set("xs", Value::list(backward));
  auto b = oracle::oracle_select(*doc.queries[0].query, engine).sorted();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].first, b[i].first);
  auto diff = oracle::compare(engine.enumerate(*doc.queries[0].query), oracle::oracle_select(*doc.queries[0].query, engine), p);
  EXPECT_TRUE(diff.empty()) << diff.to_string();
}

TEST(Composability, NestedSelectEqualsStar) {
  const ProjectAst& p = corpus().project;
  for (const char* t : {"MethodInvocation", "Block", "ReturnStatement"}) {
    std::string body = "{ print(x.position() + \":\" + y.position()); }";
    auto nested = harness::run(std::string("select ({MethodDeclaration} x) { select ({") + t + "} y) in x " + body + " }", p);
    auto star = harness::run(std::string("select ({MethodDeclaration} x * {") + t + "} y) " + body, p);
    EXPECT_EQ(nested.out.printed, star.out.printed) << t;
    EXPECT_FALSE(star.out.printed.empty()) << t;
  }
}

TEST(CountStar, NeverDecreasesAndEndsAtRows) {
  const ProjectAst& p = corpus().project;
  auto run = harness::run(
      "select ({Statement} s) where count(*) >= last { last = count(*); seen++; final = count(*); }", p);
  Environment env;
  RunOutput out;
  Engine engine(p, env, out);
  auto doc = query::parse_query_text("select ({Statement} s) { }");
  auto rows = engine.enumerate(*doc.queries[0].query).rows.size();
  EXPECT_EQ(static_cast<std::size_t>(harness::number(run.env, "seen")), rows);
  EXPECT_EQ(static_cast<std::size_t>(harness::number(run.env, "final")), rows);
}

TEST(Serialization, FixedPointOnRandomCorpus) {
  const ProjectAst& p = corpus().project;
  std::string once = serialize_project(p);
  ProjectAst back = deserialize_project(once, minilang::default_registry());
  EXPECT_EQ(serialize_project(back), once);
  EXPECT_TRUE(same_project(back, p));
}

TEST(Traversal, PreorderInvariantsOnRandomCorpus) {
  const ProjectAst& p = corpus().project;
  std::vector<int> seen(p.size(), 0);
  for (NodeId root : p.roots()) {
    auto pre = p.descendants_preorder(root);
    for (NodeId n : pre) {
      ++seen[n];
      if (n != root) EXPECT_EQ(p.depth(*p.parent(n)) + 1, p.depth(n));
    }
    std::vector<NodeId> by_span(pre.begin(), pre.end());
    std::stable_sort(by_span.begin(), by_span.end(), [&](NodeId a, NodeId b) {
      const Span& sa = p.node(a).span;
      const Span& sb = p.node(b).span;
      return sa.start != sb.start ? sa.start < sb.start : sa.end > sb.end;
    });
    EXPECT_TRUE(std::equal(by_span.begin(), by_span.end(), pre.begin()));
  }
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

}  // namespace
}  // namespace craql
