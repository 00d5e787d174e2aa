#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "craql/ast.hpp"

namespace craql::query {

inline constexpr std::string_view kFileExtension = ".craql";

struct SourceLoc {
  std::uint32_t line = 1;
  std::uint32_t column = 1;

  friend bool operator==(const SourceLoc&, const SourceLoc&) = default;
};

//===----------------------------------------------------------------------===//
// Tokens
//===----------------------------------------------------------------------===//

enum class TokenKind {
  Keyword,     // select outmost inmost directly in where if else while callquery true false
  Identifier,
  NodeType,    // {Name}
  Integer,
  String,      // text holds the decoded value
  Operator,    // == != <= >= && || ++ -- += -= = < > + - * ! . , ; : ( ) { } ...
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  SourceLoc loc;

  friend bool operator==(const Token&, const Token&) = default;
};

/// Diagnostic for lexing, parsing, and label resolution failures.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::string source, SourceLoc loc, const std::string& message,
              std::vector<std::string> expected = {});

  const std::string& source() const { return source_; }
  SourceLoc loc() const { return loc_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::string source_;
  SourceLoc loc_;
  std::vector<std::string> expected_;
};

std::vector<Token> tokenize(std::string_view text, const std::string& source = "<query>");

//===----------------------------------------------------------------------===//
// Query IR
//===----------------------------------------------------------------------===//

struct Expr {
  enum class Kind { Integer, String, Boolean, NodeType, Variable, Access, Call, Infix, Prefix, CountStar };

  Kind kind = Kind::Integer;
  SourceLoc loc;
  std::int64_t integer = 0;
  bool boolean = false;
  /// String value, node type, variable name, accessor name, call name, or operator.
  std::string text;
  /// Access: `x.{Name}` form. Call: a receiver precedes the arguments.
  bool braced = false;
  bool has_receiver = false;
  /// Access: [base]. Call: [receiver?, args...]. Infix: [lhs, rhs]. Prefix: [operand].
  std::vector<Expr> operands;

  /// Structural equality, ignoring source locations.
  friend bool operator==(const Expr& a, const Expr& b);
};

struct InputSpec {
  enum class Kind { ProjectDefault, In, DirectlyIn };
  Kind kind = Kind::ProjectDefault;
  std::optional<Expr> expr;

  friend bool operator==(const InputSpec&, const InputSpec&) = default;
};

enum class PatternKind { Single, Star, Ellipsis };
enum class Modifier { None, Outmost, Inmost };

struct PatternVar {
  std::string type;
  std::string name;

  friend bool operator==(const PatternVar&, const PatternVar&) = default;
};

struct Pattern {
  PatternKind kind = PatternKind::Single;
  PatternVar first;
  std::optional<PatternVar> second;  // present iff kind != Single

  friend bool operator==(const Pattern&, const Pattern&) = default;
};

struct SelectQuery;

struct Stmt {
  enum class Kind { Assign, IncDec, If, While, Select, CallQuery, Print, ExprStmt };

  Kind kind = Kind::ExprStmt;
  SourceLoc loc;
  std::string target;  // Assign/IncDec variable, CallQuery label
  std::string op;      // = += -= ++ --
  std::optional<Expr> expr;  // value, condition, printed expression
  std::vector<Stmt> body;    // then-block / loop body
  std::optional<std::vector<Stmt>> else_body;
  std::shared_ptr<const SelectQuery> select;
  std::optional<InputSpec> input;  // CallQuery override

  friend bool operator==(const Stmt& a, const Stmt& b);
};

struct SelectQuery {
  SourceLoc loc;
  Modifier modifier = Modifier::None;
  Pattern pattern;
  InputSpec input;
  std::optional<Expr> where;
  std::vector<Stmt> body;

  friend bool operator==(const SelectQuery& a, const SelectQuery& b);
};

struct LabeledQuery {
  std::optional<std::string> label;
  std::shared_ptr<const SelectQuery> query;

  friend bool operator==(const LabeledQuery& a, const LabeledQuery& b) {
    return a.label == b.label && *a.query == *b.query;
  }
};

struct QueryDocument {
  std::string source;
  std::vector<LabeledQuery> queries;  // first is the entry point

  const SelectQuery* find_label(std::string_view label) const;

  /// Structural equality of the queries (source name ignored).
  friend bool operator==(const QueryDocument& a, const QueryDocument& b) { return a.queries == b.queries; }
};

QueryDocument parse_query_document(const std::vector<Token>& tokens, std::string source = "<query>");
QueryDocument parse_query_text(std::string_view text, std::string source = "<query>");

/// Canonical pretty-printed form; reparses to a structurally equal document.
std::string unparse(const QueryDocument& doc);
std::string unparse(const Expr& expr);

//===----------------------------------------------------------------------===//
// Schema lint
//===----------------------------------------------------------------------===//

struct LintWarning {
  SourceLoc loc;
  std::string message;
};

/// Warns about braced node types absent from the schema and accessor names
/// that are neither a declared property nor a node type.
std::vector<LintWarning> validate_against_schema(const QueryDocument& doc, const NodeTypeSchema& schema);

}  // namespace craql::query
