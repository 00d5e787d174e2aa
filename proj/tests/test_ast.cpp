#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "craql/ast.hpp"
#include "craql/minilang.hpp"
#include "harness.hpp"

namespace craql {
namespace {

using harness::build_fixture;
using harness::node_with_text;
using harness::nodes_of;

const NodeTypeSchema& mini() { return *minilang::schema(); }

TEST(Schema, SubtypeFollowsDeclaredEdges) {
  EXPECT_TRUE(mini().is_subtype("WhileStatement", "Statement"));
  EXPECT_TRUE(mini().is_subtype("Block", "Block"));
  EXPECT_FALSE(mini().is_subtype("MethodInvocation", "Statement"));
  EXPECT_TRUE(mini().is_subtype("MethodInvocation", "Expression"));
  EXPECT_FALSE(mini().is_subtype("Statement", "Block"));
}

TEST(Schema, UnknownTypeNamesTheIdentifier) {
  try {
    mini().is_subtype("Blok", "Statement");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("Blok"), std::string::npos);
  }
}

TEST(Schema, PropertiesAreInheritedFirst) {
  NodeTypeSchema s("toy");
  s.add_type("Base", std::nullopt, true, {{"name", PropertyKind::Token}});
  TypeId derived = s.add_type("Derived", "Base", false, {{"kids", PropertyKind::ChildList}});
  auto props = s.properties(derived);
  ASSERT_EQ(props.size(), 2u);
  EXPECT_EQ(props[0].name, "name");
  EXPECT_EQ(props[1].name, "kids");
  EXPECT_EQ(s.property_index(derived, "kids"), 1u);
  EXPECT_TRUE(s.is_abstract(s.require("Base")));
}

TEST(Schema, DuplicatePropertyAndUnknownSupertypeRejected) {
  NodeTypeSchema s("toy");
  EXPECT_THROW(s.add_type("A", std::nullopt, false, {{"x", PropertyKind::Token}, {"x", PropertyKind::Token}}),
               SchemaError);
  EXPECT_THROW(s.add_type("B", "Missing", false), SchemaError);
  s.add_type("C", std::nullopt, false);
  EXPECT_THROW(s.add_type("C", std::nullopt, false), SchemaError);
}

TEST(Schema, VirtualTypesMatchOnToken) {
  auto f = harness::build_source("I.mj", "interface I { void m(); } class K { }");
  const ProjectAst& p = f.project;
  auto types = nodes_of(p, "TypeDeclaration");
  TypeId cls = p.schema().require("ClassDeclaration");
  TypeId itf = p.schema().require("InterfaceDeclaration");
  EXPECT_TRUE(p.schema().is_virtual(cls));
  std::vector<std::string> seen;
  for (NodeId t : types) {
    if (p.file_of(t).name() == kBuiltinsFileName) continue;
    seen.push_back(std::string(*p.token(t, "name")) + (p.matches(t, cls) ? ":class" : "") +
                   (p.matches(t, itf) ? ":interface" : ""));
  }
  EXPECT_EQ(seen, (std::vector<std::string>{"I:interface", "K:class"}));
}

TEST(Traversal, LeafYieldsItself) {
  auto f = build_fixture("Sample.mj");
  NodeId lit = node_with_text(f.project, "NumberLiteral", "0");
  auto seq = f.project.descendants_preorder(lit);
  ASSERT_EQ(seq.size(), 1u);
  EXPECT_EQ(seq[0], lit);
}

TEST(Traversal, GreetBodyStartsWithDeclarationOfI) {
  auto f = build_fixture("Sample.mj");
  const ProjectAst& p = f.project;
  auto blocks = nodes_of(p, "Block");
  ASSERT_EQ(blocks.size(), 3u);
  auto seq = p.descendants_preorder(blocks[1]);
  EXPECT_EQ(seq[0], blocks[1]);
  EXPECT_EQ(p.type_name(seq[1]), "VariableDeclarationStatement");
  EXPECT_EQ(p.source_text(seq[1]), "int i = 0;");
}

TEST(Traversal, RootSequenceCoversWholeFile) {
  auto f = build_fixture("Sample.mj");
  const ProjectAst& p = f.project;
  NodeId root = p.query_roots().at(0);
  std::size_t in_file = 0;
  for (const AstNode& n : p.nodes()) in_file += n.span.file == p.node(root).span.file;
  EXPECT_EQ(p.descendants_preorder(root).size(), in_file);
}

TEST(Traversal, PreorderMatchesOffsetRankAndVisitsOnce) {
  for (const auto& file : harness::fixture_files()) {
    auto f = build_fixture(file);
    const ProjectAst& p = f.project;
    for (NodeId root : p.roots()) {
      auto seq = p.descendants_preorder(root);
      std::set<NodeId> unique(seq.begin(), seq.end());
      EXPECT_EQ(unique.size(), seq.size()) << file;
      std::vector<NodeId> by_offset(seq.begin(), seq.end());
      std::stable_sort(by_offset.begin(), by_offset.end(), [&](NodeId a, NodeId b) {
        const Span& x = p.node(a).span;
        const Span& y = p.node(b).span;
        if (x.start != y.start) return x.start < y.start;
        return x.end > y.end;
      });
      // Ties (same start and end) keep pre-order, which puts ancestors first.
      EXPECT_TRUE(std::equal(seq.begin(), seq.end(), by_offset.begin())) << file;
    }
  }
}

TEST(Depth, RootChildAndParentRelation) {
  auto f = build_fixture("Sample.mj");
  const ProjectAst& p = f.project;
  NodeId root = p.query_roots().at(0);
  EXPECT_EQ(p.depth(root), 0u);
  EXPECT_EQ(p.depth(p.children(root)[0]), 1u);
  for (NodeId n = 0; n < p.size(); ++n) {
    if (auto parent = p.parent(n)) EXPECT_EQ(p.depth(*parent) + 1, p.depth(n));
  }
  auto blocks = nodes_of(p, "Block");
  EXPECT_EQ(p.depth(blocks[2]) - p.depth(blocks[1]), 2u);
}

TEST(SourceText, ExactSliceAndEmptySpan) {
  auto f = build_fixture("Sample.mj");
  const ProjectAst& p = f.project;
  EXPECT_NO_THROW(node_with_text(p, "ReturnStatement", "return count;"));
  EXPECT_EQ(p.file_of(p.query_roots()[0]).slice(5, 5), "");
}

TEST(SourceText, UnicodeOffsetsCountScalars) {
  auto f = harness::build_source("U.mj", "class U { void m() { log(\"h\xC3\xA9llo\"); x = 1; } }");
  const ProjectAst& p = f.project;
  NodeId lit = nodes_of(p, "StringLiteral").at(0);
  EXPECT_EQ(p.source_text(lit), "\"h\xC3\xA9llo\"");
  EXPECT_EQ(p.node(lit).span.end - p.node(lit).span.start, 7u);
  NodeId assign = node_with_text(p, "ExpressionStatement", "x = 1;");
  EXPECT_EQ(p.node(assign).span.start, 35u);
}

std::string ingested_block_document() {
  return R"({
"schema": "minilang",
"project": "ext",
"files": [{"name": "ext.ast"}],
"nodes": [
{"id": 0, "type": "CompilationUnit", "file": 0, "span": [0, 40, 1], "props": {"types": [1]}},
{"id": 1, "type": "TypeDeclaration", "file": 0, "span": [0, 40, 1], "props": {"name": {"token": "E"}, "interface": {"token": "false"}, "bodyDeclarations": [2]}},
{"id": 2, "type": "MethodDeclaration", "file": 0, "span": [10, 38, 1], "props": {"returnType": {"token": "void"}, "name": {"token": "m"}, "parameters": [], "body": 3}},
{"id": 3, "type": "Block", "file": 0, "span": [20, 38, 1], "props": {"statements": []}}
],
"roots": [0]
})";
}

TEST(SourceText, PlaceholderWithoutRetainedText) {
  ProjectAst p = deserialize_project(ingested_block_document(), minilang::default_registry());
  EXPECT_FALSE(p.has_source(3));
  EXPECT_EQ(p.source_text(3), "<Block@ext.ast:1>");
}

TEST(Serialization, RoundTripIsByteIdenticalForEveryFixture) {
  auto registry = minilang::default_registry();
  for (const auto& file : harness::fixture_files()) {
    auto f = build_fixture(file);
    std::string first = serialize_project(f.project);
    ProjectAst back = deserialize_project(first, registry);
    EXPECT_TRUE(same_project(back, f.project)) << file;
    EXPECT_EQ(serialize_project(back), first) << file;
  }
}

TEST(Serialization, EmptyProjectIsValid) {
  std::string doc = R"({"schema":"minilang","project":"none","files":[],"nodes":[],"roots":[]})";
  ProjectAst p = deserialize_project(doc, minilang::default_registry());
  EXPECT_EQ(p.size(), 0u);
  EXPECT_TRUE(p.query_roots().empty());
  EXPECT_EQ(serialize_project(deserialize_project(serialize_project(p), minilang::default_registry())),
            serialize_project(p));
}

FormatErrorKind kind_of(const std::string& doc) {
  try {
    deserialize_project(doc, minilang::default_registry());
  } catch (const FormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "document was accepted";
  return FormatErrorKind::Malformed;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return s.replace(pos, from.size(), to);
}

TEST(Serialization, DistinctDiagnostics) {
  const std::string good = ingested_block_document();
  EXPECT_EQ(kind_of("{\"schema\": "), FormatErrorKind::Malformed);
  EXPECT_EQ(kind_of(replace(good, "\"roots\": [0]", "\"roots\": [0],")), FormatErrorKind::Malformed);
  EXPECT_EQ(kind_of(replace(good, "\"minilang\"", "\"cobol\"")), FormatErrorKind::UnknownSchema);
  EXPECT_EQ(kind_of(replace(good, "\"type\": \"Block\"", "\"type\": \"Blok\"")), FormatErrorKind::UnknownNodeType);
  EXPECT_EQ(kind_of(replace(good, "\"body\": 3", "\"body\": 9")), FormatErrorKind::DanglingNodeId);
  EXPECT_EQ(kind_of(replace(good, "\"roots\": [0]", "\"roots\": [0], \"bindings\": {\"method\": {\"3\": 1}}")),
            FormatErrorKind::BindingTypeMismatch);
  EXPECT_EQ(kind_of(replace(good, "\"types\": [1]", "\"types\": []")), FormatErrorKind::Structure);
  EXPECT_EQ(kind_of(replace(good, "[20, 38, 1]", "[20, 39, 1]")), FormatErrorKind::Structure);
}

TEST(Serialization, BindingMismatchMessageAndLocation) {
  std::string doc = replace(ingested_block_document(), "\"roots\": [0]",
                            "\"roots\": [0], \"bindings\": {\"method\": {\"3\": 1}}");
  try {
    deserialize_project(doc, minilang::default_registry());
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("binding target type mismatch"), std::string::npos);
    EXPECT_EQ(e.location(), "bindings.method.3");
  }
}

TEST(Serialization, MalformedJsonReportsLine) {
  std::string doc = "{\n\"schema\": \"minilang\",\n\"project\": oops\n}";
  try {
    deserialize_project(doc, minilang::default_registry());
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatErrorKind::Malformed);
    EXPECT_EQ(e.location(), "line 3");
  }
}

TEST(Structure, DoubleParentRejected) {
  auto schema = minilang::schema();
  TreeBuilder b(*schema);
  NodeId cu = b.make("CompilationUnit", {0, 0, 0, 1});
  NodeId t1 = b.make("TypeDeclaration", {0, 0, 0, 1});
  b.append_child(cu, "types", t1);
  b.append_child(cu, "types", t1);
  std::vector<SourceFile> files{SourceFile("x.mj", std::string())};
  EXPECT_THROW(ProjectAst(schema, "p", files, b.take(), {cu}), StructureError);
}

TEST(Structure, AncestorQueries) {
  auto f = build_fixture("Sample.mj");
  const ProjectAst& p = f.project;
  auto blocks = nodes_of(p, "Block");
  EXPECT_TRUE(p.is_proper_ancestor(blocks[1], blocks[2]));
  EXPECT_FALSE(p.is_proper_ancestor(blocks[2], blocks[1]));
  EXPECT_FALSE(p.is_proper_ancestor(blocks[1], blocks[1]));
  EXPECT_EQ(p.root_of(blocks[2]), p.query_roots()[0]);
}

}  // namespace
}  // namespace craql
