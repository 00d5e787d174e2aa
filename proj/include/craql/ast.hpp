#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace craql {

using NodeId = std::uint32_t;
using TypeId = std::uint32_t;

/// Name of the synthetic file holding built-in type surrogates. Roots in this
/// file are never part of a query's default input.
inline constexpr std::string_view kBuiltinsFileName = "<builtins>";

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//===----------------------------------------------------------------------===//
// Node type schema
//===----------------------------------------------------------------------===//

enum class PropertyKind { SingleChild, ChildList, Token };

struct PropertyDecl {
  std::string name;
  PropertyKind kind;
};

/// A type that never appears as a node's concrete type but matches nodes of
/// `base` whose token property `token_property` equals `token_value`.
struct VirtualMatch {
  TypeId base;
  std::string token_property;
  std::string token_value;
};

/// Node-type lattice of a target language: single-inheritance supertype
/// edges, per-type ordered properties (inherited first), abstract flags.
/// Acyclic by construction since a supertype must be registered first.
class NodeTypeSchema {
 public:
  explicit NodeTypeSchema(std::string name) : name_(std::move(name)) {}

  TypeId add_type(std::string name, std::optional<std::string_view> supertype,
                  bool is_abstract, std::vector<PropertyDecl> properties = {});
  TypeId add_virtual_type(std::string name, std::string_view base,
                          std::string token_property, std::string token_value);

  const std::string& name() const { return name_; }
  std::size_t size() const { return types_.size(); }

  std::optional<TypeId> find(std::string_view type_name) const;
  /// Throws SchemaError naming the identifier when absent.
  TypeId require(std::string_view type_name) const;
  const std::string& type_name(TypeId t) const { return types_.at(t).name; }

  bool is_subtype(TypeId t, TypeId ancestor) const;
  bool is_subtype(std::string_view t, std::string_view ancestor) const;

  bool is_abstract(TypeId t) const { return types_.at(t).is_abstract; }
  bool is_virtual(TypeId t) const { return types_.at(t).virtual_match.has_value(); }
  const std::optional<VirtualMatch>& virtual_match(TypeId t) const {
    return types_.at(t).virtual_match;
  }
  std::optional<TypeId> supertype(TypeId t) const { return types_.at(t).supertype; }

  std::span<const PropertyDecl> properties(TypeId t) const { return types_.at(t).properties; }
  std::optional<std::size_t> property_index(TypeId t, std::string_view prop) const;
  /// True if any registered type declares a property with this name.
  bool declares_property_anywhere(std::string_view prop) const;

 private:
  struct TypeInfo {
    std::string name;
    std::optional<TypeId> supertype;
    bool is_abstract = false;
    std::vector<PropertyDecl> properties;
    std::vector<TypeId> ancestors;  // self first
    std::optional<VirtualMatch> virtual_match;
  };

  std::string name_;
  std::vector<TypeInfo> types_;
  std::unordered_map<std::string, TypeId> by_name_;
};

/// Schemas known to the serialized-AST loader, keyed by schema name.
class SchemaRegistry {
 public:
  void add(std::shared_ptr<const NodeTypeSchema> schema);
  std::shared_ptr<const NodeTypeSchema> find(std::string_view name) const;

 private:
  std::map<std::string, std::shared_ptr<const NodeTypeSchema>, std::less<>> schemas_;
};

//===----------------------------------------------------------------------===//
// Nodes and projects
//===----------------------------------------------------------------------===//

/// Offsets count Unicode scalar values from 0; line is 1-based.
struct Span {
  std::uint32_t file = 0;
  std::uint32_t start = 0;
  std::uint32_t end = 0;
  std::uint32_t line = 1;

  friend bool operator==(const Span&, const Span&) = default;
};

/// Absent (monostate), single child, child list, or token text.
using PropValue = std::variant<std::monostate, NodeId, std::vector<NodeId>, std::string>;

struct AstNode {
  TypeId type = 0;
  std::vector<PropValue> props;  // indexed like schema.properties(type)
  std::optional<NodeId> parent;  // materialized by ProjectAst
  Span span;

  friend bool operator==(const AstNode&, const AstNode&) = default;
};

class SourceFile {
 public:
  SourceFile(std::string name, std::optional<std::string> text);

  const std::string& name() const { return name_; }
  const std::optional<std::string>& text() const { return text_; }
  /// Length in Unicode scalars; 0 when no text is retained.
  std::uint32_t length() const;
  /// UTF-8 slice for the scalar range [start, end).
  std::string_view slice(std::uint32_t start, std::uint32_t end) const;

  friend bool operator==(const SourceFile& a, const SourceFile& b) {
    return a.name_ == b.name_ && a.text_ == b.text_;
  }

 private:
  std::string name_;
  std::optional<std::string> text_;
  std::vector<std::uint32_t> scalar_offsets_;  // byte offset of each scalar, plus end
};

struct BindingTable {
  std::map<NodeId, NodeId> method;  // invocation -> method declaration
  std::map<NodeId, NodeId> type;    // expression -> type declaration

  friend bool operator==(const BindingTable&, const BindingTable&) = default;
};

/// Thrown when a tree violates a structural invariant (dangling ids, double
/// parents, unreachable nodes, span nesting, binding target kinds).
class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed trees of one project. Immutable once bindings are attached; safe
/// to share across concurrent readers.
class ProjectAst {
 public:
  ProjectAst(std::shared_ptr<const NodeTypeSchema> schema, std::string name,
             std::vector<SourceFile> files, std::vector<AstNode> nodes,
             std::vector<NodeId> roots);

  /// Validates target kinds; throws StructureError("binding target type mismatch").
  void attach_bindings(BindingTable bindings);

  const NodeTypeSchema& schema() const { return *schema_; }
  const std::shared_ptr<const NodeTypeSchema>& schema_ptr() const { return schema_; }
  const std::string& name() const { return name_; }
  std::span<const SourceFile> files() const { return files_; }
  std::span<const AstNode> nodes() const { return nodes_; }
  std::span<const NodeId> roots() const { return roots_; }
  const BindingTable& bindings() const { return bindings_; }
  std::size_t size() const { return nodes_.size(); }

  /// Compilation-unit roots that form the default query input.
  std::vector<NodeId> query_roots() const;

  const AstNode& node(NodeId n) const { return nodes_.at(n); }
  TypeId type(NodeId n) const { return nodes_.at(n).type; }
  const std::string& type_name(NodeId n) const { return schema_->type_name(type(n)); }
  std::optional<NodeId> parent(NodeId n) const { return nodes_.at(n).parent; }
  std::span<const NodeId> children(NodeId n) const;
  /// Parent edges to the compilation-unit root.
  std::uint32_t depth(NodeId n) const { return depth_.at(n); }
  NodeId root_of(NodeId n) const;

  /// Pre-order sequence of the subtree at `root`, starting with root.
  std::span<const NodeId> descendants_preorder(NodeId root) const;
  std::size_t preorder_rank(NodeId n) const { return rank_.at(n); }
  /// True iff `ancestor` is a proper ancestor of `n`.
  bool is_proper_ancestor(NodeId ancestor, NodeId n) const;

  /// Subtype-aware type test; virtual types compare their token property.
  bool matches(NodeId n, TypeId t) const;

  const PropValue* property(NodeId n, std::string_view prop) const;
  std::optional<std::string_view> token(NodeId n, std::string_view prop) const;

  const SourceFile& file_of(NodeId n) const { return files_.at(nodes_.at(n).span.file); }
  bool has_source(NodeId n) const { return file_of(n).text().has_value(); }
  /// Exact source slice, or `<Type@file:line>` when the file text is absent.
  std::string source_text(NodeId n) const;
  std::string placeholder(NodeId n) const;

 private:
  void link_and_order();
  void validate_spans() const;

  std::shared_ptr<const NodeTypeSchema> schema_;
  std::string name_;
  std::vector<SourceFile> files_;
  std::vector<AstNode> nodes_;
  std::vector<NodeId> roots_;
  BindingTable bindings_;

  std::vector<NodeId> child_storage_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> child_range_;
  std::vector<NodeId> preorder_;
  std::vector<std::uint32_t> rank_;
  std::vector<std::uint32_t> subtree_end_;  // exclusive rank bound
  std::vector<std::uint32_t> depth_;
};

/// Structural comparison of two projects (files, nodes, roots, bindings).
bool same_project(const ProjectAst& a, const ProjectAst& b);

//===----------------------------------------------------------------------===//
// Building trees
//===----------------------------------------------------------------------===//

/// Mutable node arena used by frontends to build one file's tree.
class TreeBuilder {
 public:
  explicit TreeBuilder(const NodeTypeSchema& schema) : schema_(&schema) {}

  NodeId make(std::string_view type, Span span);
  void set_child(NodeId n, std::string_view prop, NodeId child);
  void append_child(NodeId n, std::string_view prop, NodeId child);
  void set_token(NodeId n, std::string_view prop, std::string token);

  AstNode& operator[](NodeId n) { return nodes_.at(n); }
  const AstNode& operator[](NodeId n) const { return nodes_.at(n); }
  std::size_t size() const { return nodes_.size(); }
  std::vector<AstNode> take() { return std::move(nodes_); }

 private:
  PropValue& slot(NodeId n, std::string_view prop, PropertyKind expected);

  const NodeTypeSchema* schema_;
  std::vector<AstNode> nodes_;
};

struct ParsedFile {
  SourceFile file;
  std::vector<AstNode> nodes;  // span.file ignored; set on assembly
  NodeId root = 0;
};

/// Merges per-file trees into a project, renumbering ids in pre-order.
ProjectAst assemble_project(std::shared_ptr<const NodeTypeSchema> schema, std::string name,
                            std::vector<ParsedFile> files);

//===----------------------------------------------------------------------===//
// Serialized AST format
//===----------------------------------------------------------------------===//

enum class FormatErrorKind {
  Malformed,
  UnknownSchema,
  UnknownNodeType,
  DanglingNodeId,
  BindingTypeMismatch,
  Structure,
};

class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrorKind kind, std::string location, const std::string& message)
      : std::runtime_error(location + ": " + message), kind_(kind), location_(std::move(location)) {}

  FormatErrorKind kind() const { return kind_; }
  const std::string& location() const { return location_; }

 private:
  FormatErrorKind kind_;
  std::string location_;
};

std::string serialize_project(const ProjectAst& project);
ProjectAst deserialize_project(std::string_view document, const SchemaRegistry& schemas);

}  // namespace craql
