#include "craql/query.hpp"

namespace craql::query {

bool operator==(const Expr& a, const Expr& b) {
  return a.kind == b.kind && a.integer == b.integer && a.boolean == b.boolean && a.text == b.text &&
         a.braced == b.braced && a.has_receiver == b.has_receiver && a.operands == b.operands;
}

bool operator==(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind || a.target != b.target || a.op != b.op || a.expr != b.expr || a.body != b.body ||
      a.else_body != b.else_body || a.input != b.input) {
    return false;
  }
  if (!a.select || !b.select) return a.select == b.select;
  return *a.select == *b.select;
}

bool operator==(const SelectQuery& a, const SelectQuery& b) {
  return a.modifier == b.modifier && a.pattern == b.pattern && a.input == b.input && a.where == b.where &&
         a.body == b.body;
}

//===----------------------------------------------------------------------===//
// Unparse
//===----------------------------------------------------------------------===//

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

void print_expr(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::Integer: out += std::to_string(e.integer); break;
    case Expr::Kind::String: out += quote(e.text); break;
    case Expr::Kind::Boolean: out += e.boolean ? "true" : "false"; break;
    case Expr::Kind::NodeType: out += "{" + e.text + "}"; break;
    case Expr::Kind::Variable: out += e.text; break;
    case Expr::Kind::CountStar: out += "count(*)"; break;
    case Expr::Kind::Access:
      print_expr(e.operands[0], out);
      out += e.braced ? ".{" + e.text + "}" : "." + e.text;
      break;
    case Expr::Kind::Call: {
      std::size_t first_arg = 0;
      if (e.has_receiver) {
        print_expr(e.operands[0], out);
        out += ".";
        first_arg = 1;
      }
      out += e.text + "(";
      for (std::size_t i = first_arg; i < e.operands.size(); ++i) {
        if (i > first_arg) out += ", ";
        print_expr(e.operands[i], out);
      }
      out += ")";
      break;
    }
    case Expr::Kind::Infix:
      out += "(";
      print_expr(e.operands[0], out);
      out += " " + e.text + " ";
      print_expr(e.operands[1], out);
      out += ")";
      break;
    case Expr::Kind::Prefix:
      out += "(" + e.text;
      print_expr(e.operands[0], out);
      out += ")";
      break;
  }
}

void print_input(const InputSpec& in, std::string& out) {
  if (in.kind == InputSpec::Kind::ProjectDefault) return;
  out += in.kind == InputSpec::Kind::DirectlyIn ? " directly in " : " in ";
  print_expr(*in.expr, out);
}

void print_select(const SelectQuery& q, int indent, std::string& out);

void print_body(const std::vector<Stmt>& body, int indent, std::string& out) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  out += "{\n";
  for (const Stmt& s : body) {
    out += pad + "  ";
    switch (s.kind) {
      case Stmt::Kind::Assign:
        out += s.target + " " + s.op + " ";
        print_expr(*s.expr, out);
        out += ";\n";
        break;
      case Stmt::Kind::IncDec:
        out += s.target + s.op + ";\n";
        break;
      case Stmt::Kind::If:
        out += "if (";
        print_expr(*s.expr, out);
        out += ") ";
        print_body(s.body, indent + 1, out);
        if (s.else_body) {
          out.pop_back();
          out += " else ";
          print_body(*s.else_body, indent + 1, out);
        }
        break;
      case Stmt::Kind::While:
        out += "while (";
        print_expr(*s.expr, out);
        out += ") ";
        print_body(s.body, indent + 1, out);
        break;
      case Stmt::Kind::Select:
        print_select(*s.select, indent + 1, out);
        break;
      case Stmt::Kind::CallQuery:
        out += "callquery(" + s.target + ")";
        if (s.input) print_input(*s.input, out);
        out += ";\n";
        break;
      case Stmt::Kind::Print:
        out += "print(";
        print_expr(*s.expr, out);
        out += ");\n";
        break;
      case Stmt::Kind::ExprStmt:
        print_expr(*s.expr, out);
        out += ";\n";
        break;
    }
  }
  out += pad + "}\n";
}

void print_select(const SelectQuery& q, int indent, std::string& out) {
  out += "select ";
  if (q.modifier == Modifier::Outmost) out += "outmost ";
  if (q.modifier == Modifier::Inmost) out += "inmost ";
  out += "({" + q.pattern.first.type + "} " + q.pattern.first.name;
  if (q.pattern.second) {
    out += q.pattern.kind == PatternKind::Star ? " * " : " ... ";
    out += "{" + q.pattern.second->type + "} " + q.pattern.second->name;
  }
  out += ")";
  print_input(q.input, out);
  if (q.where) {
    out += " where ";
    print_expr(*q.where, out);
  }
  out += " ";
  print_body(q.body, indent, out);
}

}  // namespace

std::string unparse(const Expr& expr) {
  std::string out;
  print_expr(expr, out);
  return out;
}

std::string unparse(const QueryDocument& doc) {
  std::string out;
  for (const auto& lq : doc.queries) {
    if (lq.label) out += *lq.label + " : ";
    print_select(*lq.query, 0, out);
  }
  return out;
}

//===----------------------------------------------------------------------===//
// Schema lint
//===----------------------------------------------------------------------===//

namespace {

class Linter {
 public:
  explicit Linter(const NodeTypeSchema& schema) : schema_(schema) {}

  void query(const SelectQuery& q) {
    type_name(q.loc, q.pattern.first.type);
    if (q.pattern.second) type_name(q.loc, q.pattern.second->type);
    if (q.input.expr) expr(*q.input.expr);
    if (q.where) expr(*q.where);
    body(q.body);
  }

  std::vector<LintWarning> take() { return std::move(warnings_); }

 private:
  void type_name(SourceLoc loc, const std::string& name) {
    if (!schema_.find(name)) warnings_.push_back({loc, "unknown node type " + name});
  }

  void body(const std::vector<Stmt>& stmts) {
    for (const Stmt& s : stmts) {
      if (s.expr) expr(*s.expr);
      if (s.input && s.input->expr) expr(*s.input->expr);
      body(s.body);
      if (s.else_body) body(*s.else_body);
      if (s.select) query(*s.select);
    }
  }

  void expr(const Expr& e) {
    if (e.kind == Expr::Kind::NodeType) type_name(e.loc, e.text);
    if (e.kind == Expr::Kind::Access && !schema_.declares_property_anywhere(e.text) && !schema_.find(e.text)) {
      warnings_.push_back({e.loc, e.braced ? "unknown node type " + e.text : "no type declares property " + e.text});
    }
    for (const Expr& o : e.operands) expr(o);
  }

  const NodeTypeSchema& schema_;
  std::vector<LintWarning> warnings_;
};

}  // namespace

std::vector<LintWarning> validate_against_schema(const QueryDocument& doc, const NodeTypeSchema& schema) {
  Linter linter(schema);
  for (const auto& lq : doc.queries) linter.query(*lq.query);
  return linter.take();
}

}  // namespace craql::query
