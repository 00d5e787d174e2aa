#include <map>
#include <set>

#include "craql/minilang.hpp"

namespace craql::minilang {

namespace {

constexpr std::string_view kBuiltinsSource =
    "class int {}\n"
    "class boolean {}\n"
    "class String {}\n";

class Binder {
 public:
  explicit Binder(const ProjectAst& project) : p_(project), s_(project.schema()) {
    t_type_ = s_.require("TypeDeclaration");
    t_method_ = s_.require("MethodDeclaration");
    t_field_ = s_.require("FieldDeclaration");
    for (NodeId root : p_.roots()) {
      for (NodeId td : list(root, "types")) {
        types_.try_emplace(std::string(tok(td, "name")), td);
      }
    }
  }

  BindingTable run() {
    for (NodeId root : p_.roots()) {
      for (NodeId td : list(root, "types")) {
        for (NodeId member : list(td, "bodyDeclarations")) {
          if (p_.type(member) == t_method_) bind_method(td, member);
          if (p_.type(member) == t_field_) {
            scopes_.assign(1, {});
            for (NodeId frag : list(member, "fragments")) {
              if (auto init = child(frag, "initializer")) resolve(*init, td);
            }
          }
        }
      }
    }
    return std::move(table_);
  }

 private:
  using Scope = std::map<std::string, std::string, std::less<>>;

  // Tree access ------------------------------------------------------------
  std::span<const NodeId> list(NodeId n, std::string_view prop) const {
    const PropValue* v = p_.property(n, prop);
    if (!v) return {};
    if (const auto* l = std::get_if<std::vector<NodeId>>(v)) return *l;
    return {};
  }
  std::optional<NodeId> child(NodeId n, std::string_view prop) const {
    const PropValue* v = p_.property(n, prop);
    if (!v) return std::nullopt;
    if (const auto* c = std::get_if<NodeId>(v)) return *c;
    return std::nullopt;
  }
  std::string_view tok(NodeId n, std::string_view prop) const { return p_.token(n, prop).value_or(""); }
  bool is(NodeId n, std::string_view type) const { return p_.type_name(n) == type; }

  std::optional<NodeId> type_named(std::string_view name) const {
    auto it = types_.find(name);
    if (it == types_.end()) return std::nullopt;
    return it->second;
  }

  // Member lookup through the project-local superclass chain.
  template <typename Fn>
  auto walk_supertypes(NodeId td, Fn&& fn) const -> decltype(fn(td)) {
    std::set<NodeId> seen;
    std::optional<NodeId> cur = td;
    while (cur && seen.insert(*cur).second) {
      if (auto found = fn(*cur)) return found;
      auto super = p_.token(*cur, "superclass");
      cur = super ? type_named(*super) : std::nullopt;
    }
    return std::nullopt;
  }

  std::optional<NodeId> find_method(NodeId td, std::string_view name, std::size_t arity) const {
    return walk_supertypes(td, [&](NodeId t) -> std::optional<NodeId> {
      for (NodeId m : list(t, "bodyDeclarations")) {
        if (p_.type(m) == t_method_ && tok(m, "name") == name && list(m, "parameters").size() == arity) return m;
      }
      return std::nullopt;
    });
  }

  std::optional<std::string> find_field_type(NodeId td, std::string_view name) const {
    return walk_supertypes(td, [&](NodeId t) -> std::optional<std::string> {
      for (NodeId f : list(t, "bodyDeclarations")) {
        if (p_.type(f) != t_field_) continue;
        for (NodeId frag : list(f, "fragments")) {
          if (tok(frag, "name") == name) return std::string(tok(f, "type"));
        }
      }
      return std::nullopt;
    });
  }

  // Walking ----------------------------------------------------------------
  void declare(NodeId decl, std::string_view type) { scopes_.back()[std::string(tok(decl, "name"))] = type; }

  std::optional<std::string> local_type(std::string_view name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      if (auto found = it->find(name); found != it->end()) return found->second;
    }
    return std::nullopt;
  }

  void bind_method(NodeId td, NodeId md) {
    scopes_.assign(1, {});
    for (NodeId param : list(md, "parameters")) declare(param, tok(param, "type"));
    if (auto body = child(md, "body")) statement(*body, td);
  }

  void statement(NodeId s, NodeId td) {
    const std::string& kind = p_.type_name(s);
    if (kind == "Block") {
      scopes_.emplace_back();
      for (NodeId c : list(s, "statements")) statement(c, td);
      scopes_.pop_back();
    } else if (kind == "VariableDeclarationStatement") {
      for (NodeId frag : list(s, "fragments")) {
        if (auto init = child(frag, "initializer")) resolve(*init, td);
        declare(frag, tok(s, "type"));
      }
    } else if (kind == "ForStatement") {
      scopes_.emplace_back();
      for (NodeId init : list(s, "initializers")) {
        if (is(init, "VariableDeclarationStatement")) {
          statement(init, td);
        } else {
          resolve(init, td);
        }
      }
      if (auto cond = child(s, "expression")) resolve(*cond, td);
      for (NodeId u : list(s, "updaters")) resolve(u, td);
      if (auto body = child(s, "body")) statement(*body, td);
      scopes_.pop_back();
    } else if (kind == "TryStatement") {
      if (auto body = child(s, "body")) statement(*body, td);
      for (NodeId cc : list(s, "catchClauses")) {
        scopes_.emplace_back();
        if (auto ex = child(cc, "exception")) declare(*ex, tok(*ex, "type"));
        if (auto body = child(cc, "body")) statement(*body, td);
        scopes_.pop_back();
      }
    } else {
      // If/While/Return/Throw/ExpressionStatement: children in source order.
      for (NodeId c : p_.children(s)) {
        if (s_.is_subtype(p_.type(c), t_statement())) {
          statement(c, td);
        } else {
          resolve(c, td);
        }
      }
    }
  }

  TypeId t_statement() const { return s_.require("Statement"); }

  void record_type(NodeId e, std::optional<NodeId> td) {
    if (td) table_.type[e] = *td;
  }

  std::optional<NodeId> resolve(NodeId e, NodeId td) {
    const std::string& kind = p_.type_name(e);
    if (kind == "Name") {
      std::string_view id = tok(e, "identifier");
      std::optional<NodeId> result;
      if (id == "this") {
        result = td;
      } else if (auto local = local_type(id)) {
        result = type_named(*local);
      } else if (auto field = find_field_type(td, id)) {
        result = type_named(*field);
      } else {
        result = type_named(id);
      }
      record_type(e, result);
      return result;
    }
    if (kind == "MethodInvocation") {
      std::optional<NodeId> receiver_type = td;
      if (auto recv = child(e, "expression")) receiver_type = resolve(*recv, td);
      for (NodeId a : list(e, "arguments")) resolve(a, td);
      if (!receiver_type) return std::nullopt;
      auto target = find_method(*receiver_type, tok(e, "name"), list(e, "arguments").size());
      if (!target) return std::nullopt;
      table_.method[e] = *target;
      auto result = type_named(tok(*target, "returnType"));
      record_type(e, result);
      return result;
    }
    if (kind == "ClassInstanceCreation") {
      for (NodeId a : list(e, "arguments")) resolve(a, td);
      auto result = type_named(tok(e, "type"));
      record_type(e, result);
      return result;
    }
    if (kind == "NumberLiteral" || kind == "StringLiteral" || kind == "BooleanLiteral") {
      auto result = type_named(kind == "NumberLiteral" ? "int" : kind == "StringLiteral" ? "String" : "boolean");
      record_type(e, result);
      return result;
    }
    if (kind == "FieldAccess") {
      auto recv = child(e, "expression");
      auto recv_type = recv ? resolve(*recv, td) : std::nullopt;
      if (!recv_type) return std::nullopt;
      auto field = find_field_type(*recv_type, tok(e, "name"));
      return field ? type_named(*field) : std::nullopt;
    }
    if (kind == "Assignment") {
      auto lhs = child(e, "leftHandSide");
      auto result = lhs ? resolve(*lhs, td) : std::nullopt;
      if (auto rhs = child(e, "rightHandSide")) resolve(*rhs, td);
      return result;
    }
    if (kind == "InfixExpression") {
      auto l = child(e, "leftOperand");
      auto r = child(e, "rightOperand");
      auto lt = l ? resolve(*l, td) : std::nullopt;
      auto rt = r ? resolve(*r, td) : std::nullopt;
      std::string_view op = tok(e, "operator");
      if (op == "+" && (lt == type_named("String") || rt == type_named("String"))) return type_named("String");
      if (op == "+" || op == "-" || op == "*" || op == "/" || op == "%") return type_named("int");
      return type_named("boolean");
    }
    if (kind == "PrefixExpression") {
      if (auto operand = child(e, "operand")) resolve(*operand, td);
      return type_named(tok(e, "operator") == "!" ? "boolean" : "int");
    }
    for (NodeId c : p_.children(e)) resolve(c, td);
    return std::nullopt;
  }

  const ProjectAst& p_;
  const NodeTypeSchema& s_;
  TypeId t_type_, t_method_, t_field_;
  std::map<std::string, NodeId, std::less<>> types_;
  std::vector<Scope> scopes_;
  BindingTable table_;
};

}  // namespace

BindingTable bind_project(const ProjectAst& project) { return Binder(project).run(); }

BuildOutput build_project(std::string project_name, std::vector<SourceInput> sources) {
  std::vector<ParsedFile> parsed;
  std::vector<Diagnostic> diagnostics;
  std::size_t files_parsed = 0;
  for (auto& src : sources) {
    ParseOutput out = parse_file(src.name, std::move(src.text));
    ++files_parsed;
    diagnostics.insert(diagnostics.end(), out.diagnostics.begin(), out.diagnostics.end());
    if (out.tree) parsed.push_back(std::move(*out.tree));
  }
  ParseOutput builtins = parse_file(std::string(kBuiltinsFileName), std::string(kBuiltinsSource));
  parsed.push_back(std::move(*builtins.tree));

  ProjectAst project = assemble_project(schema(), std::move(project_name), std::move(parsed));
  project.attach_bindings(bind_project(project));
  return BuildOutput{std::move(project), std::move(diagnostics), files_parsed};
}

}  // namespace craql::minilang
