#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "craql/ast.hpp"
#include "craql/query.hpp"

namespace craql {

//===----------------------------------------------------------------------===//
// Values
//===----------------------------------------------------------------------===//

struct Undefined {
  friend bool operator==(Undefined, Undefined) { return true; }
};

struct NodeRef {
  NodeId id;
  friend bool operator==(NodeRef, NodeRef) = default;
};

/// Ordered node handles; preserves source order.
struct NodeList {
  std::vector<NodeId> ids;
  friend bool operator==(const NodeList&, const NodeList&) = default;
};

/// Runtime value: undefined, 64-bit integer, string, boolean, node, node list.
class Value {
 public:
  Value() = default;
  static Value number(std::int64_t n) { return Value(Storage(std::in_place_type<std::int64_t>, n)); }
  static Value string(std::string s) { return Value(Storage(std::in_place_type<std::string>, std::move(s))); }
  static Value boolean(bool b) { return Value(Storage(std::in_place_type<bool>, b)); }
  static Value node(NodeId n) { return Value(Storage(std::in_place_type<NodeRef>, NodeRef{n})); }
  static Value list(std::vector<NodeId> ids) {
    return Value(Storage(std::in_place_type<NodeList>, NodeList{std::move(ids)}));
  }

  bool is_undefined() const { return std::holds_alternative<Undefined>(v_); }
  bool is_number() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_boolean() const { return std::holds_alternative<bool>(v_); }
  bool is_node() const { return std::holds_alternative<NodeRef>(v_); }
  bool is_list() const { return std::holds_alternative<NodeList>(v_); }

  std::int64_t as_number() const { return std::get<std::int64_t>(v_); }
  const std::string& as_string() const { return std::get<std::string>(v_); }
  bool as_boolean() const { return std::get<bool>(v_); }
  NodeId as_node() const { return std::get<NodeRef>(v_).id; }
  const std::vector<NodeId>& as_list() const { return std::get<NodeList>(v_).ids; }

  /// undefined, 0, "", false and empty lists are falsy.
  bool truthy() const;
  const char* kind_name() const;

  friend bool operator==(const Value&, const Value&) = default;

 private:
  using Storage = std::variant<Undefined, std::int64_t, std::string, bool, NodeRef, NodeList>;
  explicit Value(Storage v) : v_(std::move(v)) {}
  Storage v_;
};

/// Text for exported variables: numbers in decimal, booleans as true/false,
/// strings verbatim, nodes as `<Type@file:line>`, lists as their length.
std::string render_value(const Value& v, const ProjectAst& project);

/// Per-project variable store shared by every query run on the project.
struct Environment {
  std::map<std::string, Value, std::less<>> variables;
  /// Row counters of active selects; innermost last.
  std::vector<std::size_t> count_stack;
  std::size_t call_depth = 0;

  const Value* find(std::string_view name) const;
  Value get(std::string_view name) const;
  void set(std::string_view name, Value v) { variables.insert_or_assign(std::string(name), std::move(v)); }
};

//===----------------------------------------------------------------------===//
// Results
//===----------------------------------------------------------------------===//

struct ExecutionStats {
  std::uint64_t nodes_visited = 0;
  std::uint64_t rows_yielded = 0;
  std::uint64_t files_parsed = 0;

  ExecutionStats& operator+=(const ExecutionStats& o) {
    nodes_visited += o.nodes_visited;
    rows_yielded += o.rows_yielded;
    files_parsed += o.files_parsed;
    return *this;
  }
};

struct ResultRow {
  NodeId first;
  std::optional<NodeId> second;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct ResultSet {
  std::vector<ResultRow> rows;
  ExecutionStats stats;
};

/// Everything one document run emits: print lines, entry-query row records.
struct RunOutput {
  std::vector<std::string> printed;
  std::vector<std::string> rows;
  ExecutionStats stats;
  /// Set when a node's text had to be replaced by a placeholder.
  bool degraded = false;
};

/// `file<TAB>line<TAB>nodetype<TAB>text` with tabs, newlines and backslashes escaped.
std::string row_record(const ProjectAst& project, NodeId n);

class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalOptions {
  std::size_t recursion_limit = 512;
};

//===----------------------------------------------------------------------===//
// Evaluator
//===----------------------------------------------------------------------===//

/// Evaluates query documents over one project. Single-threaded; the project
/// and documents are only read.
class Engine {
 public:
  Engine(const ProjectAst& project, Environment& env, RunOutput& out, EvalOptions options = {});

  /// Runs the entry query on the project's compilation units. Rows of the
  /// entry query go to the output as records.
  void execute(const query::QueryDocument& doc);

  /// Enumerates a select's rows (pattern, modifier, input, where) without
  /// running its body. `input` overrides the query's own input spec.
  ResultSet enumerate(const query::SelectQuery& q, const std::optional<query::InputSpec>& input = std::nullopt);

  /// Input trees for an input spec; project default yields compilation units.
  std::vector<NodeId> input_roots(const query::InputSpec& input);

  Value evaluate(const query::Expr& e);
  void exec(const query::Stmt& s);

  /// Called after every enumeration, once pattern variables and row
  /// counters are restored, with the input spec actually used.
  using SelectObserver =
      std::function<void(const query::SelectQuery&, const query::InputSpec&, const ResultSet&)>;
  void observe_selects(SelectObserver observer) { observer_ = std::move(observer); }

  Environment& env() { return env_; }
  const ProjectAst& project() const { return project_; }

 private:
  ResultSet run_select(const query::SelectQuery& q, const std::optional<query::InputSpec>& input);
  void enumerate_single(const query::SelectQuery& q, const query::InputSpec& input, ResultSet& rs);
  void enumerate_pairs(const query::SelectQuery& q, const query::InputSpec& input, ResultSet& rs);
  bool where_holds(const query::SelectQuery& q);

  Value eval_operand_numeric(const query::Expr& e);
  Value binary(const query::Expr& e);
  Value call(const query::Expr& e);
  Value node_method(const query::Expr& e, const Value& receiver, std::span<const query::Expr> args);
  Value accessor(const query::Expr& e, NodeId base);
  std::string display(const Value& v);
  TypeId type_arg(const query::Expr& arg);

  [[noreturn]] void fail(query::SourceLoc loc, const std::string& message) const;

  const ProjectAst& project_;
  Environment& env_;
  RunOutput& out_;
  EvalOptions options_;
  const query::QueryDocument* doc_ = nullptr;
  std::vector<NodeId> current_nodes_;
  SelectObserver observer_;
};

/// Runs a document against a project with a seeded environment.
void execute_document(const query::QueryDocument& doc, const ProjectAst& project, Environment& env, RunOutput& out,
                      EvalOptions options = {});

}  // namespace craql
