#include "craql/engine.hpp"

#include <algorithm>
#include <unordered_set>

namespace craql {

using query::Expr;
using query::InputSpec;
using query::Modifier;
using query::PatternKind;
using query::SelectQuery;
using query::SourceLoc;
using query::Stmt;

//===----------------------------------------------------------------------===//
// Values
//===----------------------------------------------------------------------===//

bool Value::truthy() const {
  if (is_number()) return as_number() != 0;
  if (is_string()) return !as_string().empty();
  if (is_boolean()) return as_boolean();
  if (is_node()) return true;
  if (is_list()) return !as_list().empty();
  return false;
}

const char* Value::kind_name() const {
  if (is_number()) return "number";
  if (is_string()) return "string";
  if (is_boolean()) return "boolean";
  if (is_node()) return "node";
  if (is_list()) return "node list";
  return "undefined";
}

std::string render_value(const Value& v, const ProjectAst& project) {
  if (v.is_number()) return std::to_string(v.as_number());
  if (v.is_string()) return v.as_string();
  if (v.is_boolean()) return v.as_boolean() ? "true" : "false";
  if (v.is_node()) return project.placeholder(v.as_node());
  if (v.is_list()) return std::to_string(v.as_list().size());
  return "";
}

const Value* Environment::find(std::string_view name) const {
  auto it = variables.find(name);
  return it == variables.end() ? nullptr : &it->second;
}

Value Environment::get(std::string_view name) const {
  const Value* v = find(name);
  return v ? *v : Value();
}

namespace {

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

/// Restores pattern variables to their pre-select values on scope exit.
class SavedVariables {
 public:
  SavedVariables(Environment& env, const query::Pattern& pattern) : env_(env) {
    save(pattern.first.name);
    if (pattern.second) save(pattern.second->name);
  }
  ~SavedVariables() {
    for (auto& [name, value] : saved_) {
      if (value) {
        env_.set(name, std::move(*value));
      } else {
        env_.variables.erase(name);
      }
    }
  }
  SavedVariables(const SavedVariables&) = delete;
  SavedVariables& operator=(const SavedVariables&) = delete;

 private:
  void save(const std::string& name) {
    const Value* v = env_.find(name);
    saved_.emplace_back(name, v ? std::optional<Value>(*v) : std::nullopt);
  }

  Environment& env_;
  std::vector<std::pair<std::string, std::optional<Value>>> saved_;
};

class CountScope {
 public:
  CountScope(Environment& env, std::size_t initial) : env_(env) { env_.count_stack.push_back(initial); }
  ~CountScope() { env_.count_stack.pop_back(); }
  CountScope(const CountScope&) = delete;
  CountScope& operator=(const CountScope&) = delete;

 private:
  Environment& env_;
};

bool roots_overlap(const ProjectAst& p, const std::vector<NodeId>& roots) {
  for (std::size_t i = 1; i < roots.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (p.is_proper_ancestor(roots[j], roots[i])) return true;
    }
  }
  return false;
}

}  // namespace

std::string row_record(const ProjectAst& project, NodeId n) {
  return escape_field(project.file_of(n).name()) + '\t' + std::to_string(project.node(n).span.line) + '\t' +
         project.type_name(n) + '\t' + escape_field(project.source_text(n));
}

//===----------------------------------------------------------------------===//
// Selection
//===----------------------------------------------------------------------===//

Engine::Engine(const ProjectAst& project, Environment& env, RunOutput& out, EvalOptions options)
    : project_(project), env_(env), out_(out), options_(options) {}

void Engine::execute(const query::QueryDocument& doc) {
  doc_ = &doc;
  if (doc.queries.empty()) return;
  ResultSet rs = run_select(*doc.queries.front().query, std::nullopt);
  for (const ResultRow& row : rs.rows) {
    std::string record = row_record(project_, row.first);
    if (!project_.has_source(row.first)) out_.degraded = true;
    if (row.second) {
      record += '\t' + row_record(project_, *row.second);
      if (!project_.has_source(*row.second)) out_.degraded = true;
    }
    out_.rows.push_back(std::move(record));
  }
}

std::vector<NodeId> Engine::input_roots(const InputSpec& input) {
  if (input.kind == InputSpec::Kind::ProjectDefault) return project_.query_roots();
  Value v = evaluate(*input.expr);
  std::vector<NodeId> roots;
  if (v.is_node()) {
    roots.push_back(v.as_node());
  } else if (v.is_list()) {
    roots = v.as_list();
  } else if (!v.is_undefined()) {
    fail(input.expr->loc, std::string("select input must be a node or node list, got ") + v.kind_name());
  }
  std::sort(roots.begin(), roots.end(),
            [&](NodeId a, NodeId b) { return project_.preorder_rank(a) < project_.preorder_rank(b); });
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots;
}

ResultSet Engine::enumerate(const SelectQuery& q, const std::optional<InputSpec>& input) {
  const InputSpec& spec = input ? *input : q.input;
  ResultSet rs;
  {
    SavedVariables saved(env_, q.pattern);
    CountScope count(env_, 0);
    if (q.pattern.kind == PatternKind::Single) {
      enumerate_single(q, spec, rs);
    } else {
      enumerate_pairs(q, spec, rs);
    }
  }
  rs.stats.rows_yielded = rs.rows.size();
  out_.stats += rs.stats;
  if (observer_) observer_(q, spec, rs);
  return rs;
}

ResultSet Engine::run_select(const SelectQuery& q, const std::optional<InputSpec>& input) {
  ResultSet rs = enumerate(q, input);
  SavedVariables saved(env_, q.pattern);
  CountScope count(env_, rs.rows.size());
  for (const ResultRow& row : rs.rows) {
    env_.set(q.pattern.first.name, Value::node(row.first));
    if (row.second) env_.set(q.pattern.second->name, Value::node(*row.second));
    current_nodes_.push_back(row.first);
    for (const Stmt& s : q.body) exec(s);
    current_nodes_.pop_back();
  }
  return rs;
}

bool Engine::where_holds(const SelectQuery& q) {
  if (!q.where) return true;
  return evaluate(*q.where).truthy();
}

namespace {

/// Walks each input tree in pre-order, calling `visit(n)` on nodes matching
/// `t`. `visit` returns false to skip n's subtree. Below a `directly` root,
/// subtrees of nodes sharing the root's concrete type are skipped.
template <typename Visit>
void walk_inputs(const ProjectAst& p, const std::vector<NodeId>& roots, bool include_root, bool directly,
                 TypeId t, ExecutionStats& stats, Visit&& visit) {
  std::vector<NodeId> stack;
  for (NodeId r : roots) {
    TypeId root_type = p.type(r);
    stack.clear();
    if (include_root) {
      stack.push_back(r);
    } else {
      auto kids = p.children(r);
      stack.assign(kids.rbegin(), kids.rend());
    }
    while (!stack.empty()) {
      NodeId n = stack.back();
      stack.pop_back();
      ++stats.nodes_visited;
      bool descend = true;
      if (p.matches(n, t)) descend = visit(n);
      if (directly && p.type(n) == root_type) descend = false;
      if (descend) {
        auto kids = p.children(n);
        stack.insert(stack.end(), kids.rbegin(), kids.rend());
      }
    }
  }
}

}  // namespace

void Engine::enumerate_single(const SelectQuery& q, const InputSpec& spec, ResultSet& rs) {
  auto t = project_.schema().find(q.pattern.first.type);
  if (!t) fail(q.loc, "unknown node type " + q.pattern.first.type);
  std::vector<NodeId> roots = input_roots(spec);
  bool overlap = roots_overlap(project_, roots);
  std::unordered_set<NodeId> seen;

  walk_inputs(project_, roots, spec.kind == InputSpec::Kind::ProjectDefault,
              spec.kind == InputSpec::Kind::DirectlyIn, *t, rs.stats, [&](NodeId n) {
                bool keep = true;
                if (q.modifier == Modifier::Inmost) {
                  for (NodeId d : project_.descendants_preorder(n).subspan(1)) {
                    ++rs.stats.nodes_visited;
                    if (project_.matches(d, *t)) {
                      keep = false;
                      break;
                    }
                  }
                }
                if (keep && (!overlap || !seen.contains(n))) {
                  env_.set(q.pattern.first.name, Value::node(n));
                  current_nodes_.push_back(n);
                  bool accepted = where_holds(q);
                  current_nodes_.pop_back();
                  if (accepted) {
                    seen.insert(n);
                    rs.rows.push_back({n, std::nullopt});
                    env_.count_stack.back() = rs.rows.size();
                  }
                }
                return q.modifier != Modifier::Outmost;
              });

  if (overlap) {
    std::sort(rs.rows.begin(), rs.rows.end(), [&](const ResultRow& a, const ResultRow& b) {
      return project_.preorder_rank(a.first) < project_.preorder_rank(b.first);
    });
  }
}

void Engine::enumerate_pairs(const SelectQuery& q, const InputSpec& spec, ResultSet& rs) {
  const auto& second = *q.pattern.second;
  auto t1 = project_.schema().find(q.pattern.first.type);
  if (!t1) fail(q.loc, "unknown node type " + q.pattern.first.type);
  auto t2 = project_.schema().find(second.type);
  if (!t2) fail(q.loc, "unknown node type " + second.type);
  const bool ellipsis = q.pattern.kind == PatternKind::Ellipsis;

  std::vector<NodeId> roots = input_roots(spec);
  bool overlap = roots_overlap(project_, roots);
  std::vector<NodeId> firsts;
  walk_inputs(project_, roots, spec.kind == InputSpec::Kind::ProjectDefault,
              spec.kind == InputSpec::Kind::DirectlyIn, *t1, rs.stats, [&](NodeId n) {
                firsts.push_back(n);
                return true;
              });
  if (overlap) {
    std::sort(firsts.begin(), firsts.end(),
              [&](NodeId a, NodeId b) { return project_.preorder_rank(a) < project_.preorder_rank(b); });
    firsts.erase(std::unique(firsts.begin(), firsts.end()), firsts.end());
  }

  for (NodeId n1 : firsts) {
    current_nodes_.push_back(n1);
    for (NodeId n2 : project_.descendants_preorder(n1).subspan(1)) {
      ++rs.stats.nodes_visited;
      if (!project_.matches(n2, *t2)) continue;
      env_.set(q.pattern.first.name, Value::node(n1));
      env_.set(second.name, Value::node(n2));
      if (where_holds(q)) {
        rs.rows.push_back({n1, n2});
        if (!ellipsis) env_.count_stack.back() = rs.rows.size();
      }
    }
    current_nodes_.pop_back();
  }

  if (ellipsis && !rs.rows.empty()) {
    auto distance = [&](const ResultRow& r) {
      return project_.depth(*r.second) - project_.depth(r.first);
    };
    std::uint32_t best = 0;
    for (const ResultRow& r : rs.rows) best = std::max(best, distance(r));
    std::erase_if(rs.rows, [&](const ResultRow& r) { return distance(r) != best; });
  }
}

//===----------------------------------------------------------------------===//
// Expressions
//===----------------------------------------------------------------------===//

void Engine::fail(SourceLoc loc, const std::string& message) const {
  std::string text = (doc_ ? doc_->source : std::string("<query>")) + ":" + std::to_string(loc.line) + ":" +
                     std::to_string(loc.column) + ": " + message;
  if (!current_nodes_.empty()) {
    NodeId n = current_nodes_.back();
    text += " (at " + project_.file_of(n).name() + ":" + std::to_string(project_.node(n).span.line) + ")";
  }
  throw RuntimeError(text);
}

namespace {

bool values_equal(const Value& l, const Value& r) {
  if (l.is_list() && r.is_number()) return static_cast<std::int64_t>(l.as_list().size()) == r.as_number();
  if (l.is_number() && r.is_list()) return static_cast<std::int64_t>(r.as_list().size()) == l.as_number();
  return l == r;
}

}  // namespace

Value Engine::eval_operand_numeric(const Expr& e) {
  if (e.kind == Expr::Kind::Variable && !env_.find(e.text)) return Value::number(0);
  return evaluate(e);
}

std::string Engine::display(const Value& v) {
  if (v.is_node()) {
    if (!project_.has_source(v.as_node())) out_.degraded = true;
    return project_.source_text(v.as_node());
  }
  if (v.is_list()) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.as_list().size(); ++i) {
      if (i) out += ", ";
      out += display(Value::node(v.as_list()[i]));
    }
    return out + "]";
  }
  if (v.is_undefined()) return "undefined";
  return render_value(v, project_);
}

Value Engine::evaluate(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Integer: return Value::number(e.integer);
    case Expr::Kind::String: return Value::string(e.text);
    case Expr::Kind::Boolean: return Value::boolean(e.boolean);
    case Expr::Kind::NodeType: fail(e.loc, "node type {" + e.text + "} is only valid as a function argument");
    case Expr::Kind::Variable: return env_.get(e.text);
    case Expr::Kind::CountStar:
      if (env_.count_stack.empty()) fail(e.loc, "count(*) outside of a select");
      return Value::number(static_cast<std::int64_t>(env_.count_stack.back()));
    case Expr::Kind::Access: {
      Value base = evaluate(e.operands[0]);
      std::string accessor_text = e.braced ? ".{" + e.text + "}" : "." + e.text;
      if (base.is_undefined()) fail(e.loc, "property access " + accessor_text + " on undefined");
      if (!base.is_node()) fail(e.loc, "property access " + accessor_text + " on a " + base.kind_name());
      return accessor(e, base.as_node());
    }
    case Expr::Kind::Call: return call(e);
    case Expr::Kind::Infix: return binary(e);
    case Expr::Kind::Prefix: {
      if (e.text == "!") return Value::boolean(!evaluate(e.operands[0]).truthy());
      Value v = eval_operand_numeric(e.operands[0]);
      if (v.is_list()) v = Value::number(static_cast<std::int64_t>(v.as_list().size()));
      if (!v.is_number()) fail(e.loc, std::string("arithmetic on a ") + v.kind_name() + " operand");
      std::int64_t r;
      if (__builtin_sub_overflow(std::int64_t{0}, v.as_number(), &r)) fail(e.loc, "integer overflow");
      return Value::number(r);
    }
  }
  fail(e.loc, "unsupported expression");
}

namespace {

std::optional<std::int64_t> as_integer(const Value& v) {
  if (v.is_number()) return v.as_number();
  if (v.is_list()) return static_cast<std::int64_t>(v.as_list().size());
  return std::nullopt;
}

}  // namespace

Value Engine::binary(const Expr& e) {
  const std::string& op = e.text;
  const Expr& lhs = e.operands[0];
  const Expr& rhs = e.operands[1];

  if (op == "&&") return Value::boolean(evaluate(lhs).truthy() && evaluate(rhs).truthy());
  if (op == "||") return Value::boolean(evaluate(lhs).truthy() || evaluate(rhs).truthy());
  if (op == "==") return Value::boolean(values_equal(evaluate(lhs), evaluate(rhs)));
  if (op == "!=") return Value::boolean(!values_equal(evaluate(lhs), evaluate(rhs)));

  Value l = eval_operand_numeric(lhs);
  Value r = eval_operand_numeric(rhs);

  if (op == "<" || op == "<=" || op == ">" || op == ">=") {
    int cmp;
    if (l.is_string() && r.is_string()) {
      cmp = l.as_string().compare(r.as_string());
    } else {
      auto a = as_integer(l), b = as_integer(r);
      if (!a || !b) {
        fail(e.loc, std::string("cannot compare ") + l.kind_name() + " with " + r.kind_name());
      }
      cmp = *a < *b ? -1 : *a > *b ? 1 : 0;
    }
    if (op == "<") return Value::boolean(cmp < 0);
    if (op == "<=") return Value::boolean(cmp <= 0);
    if (op == ">") return Value::boolean(cmp > 0);
    return Value::boolean(cmp >= 0);
  }

  if (op == "+" && (l.is_string() || r.is_string())) return Value::string(display(l) + display(r));

  auto a = as_integer(l), b = as_integer(r);
  if (!a) fail(e.loc, std::string("arithmetic on a ") + l.kind_name() + " operand");
  if (!b) fail(e.loc, std::string("arithmetic on a ") + r.kind_name() + " operand");
  std::int64_t result = 0;
  bool overflow = false;
  if (op == "+") {
    overflow = __builtin_add_overflow(*a, *b, &result);
  } else if (op == "-") {
    overflow = __builtin_sub_overflow(*a, *b, &result);
  } else if (op == "*") {
    overflow = __builtin_mul_overflow(*a, *b, &result);
  } else {
    fail(e.loc, "unknown operator " + op);
  }
  if (overflow) fail(e.loc, "integer overflow");
  return Value::number(result);
}

Value Engine::accessor(const Expr& e, NodeId base) {
  const NodeTypeSchema& schema = project_.schema();
  if (auto idx = schema.property_index(project_.type(base), e.text)) {
    const PropValue& pv = project_.node(base).props[*idx];
    if (const auto* child = std::get_if<NodeId>(&pv)) return Value::node(*child);
    if (const auto* list = std::get_if<std::vector<NodeId>>(&pv)) return Value::list(*list);
    if (const auto* token = std::get_if<std::string>(&pv)) return Value::string(*token);
    return Value();
  }
  if (auto t = schema.find(e.text)) {
    std::optional<NodeId> found;
    for (NodeId c : project_.children(base)) {
      if (!project_.matches(c, *t)) continue;
      if (found) fail(e.loc, "ambiguous child access ." + e.text + " on " + project_.type_name(base));
      found = c;
    }
    return found ? Value::node(*found) : Value();
  }
  return Value();
}

TypeId Engine::type_arg(const Expr& arg) {
  if (arg.kind != Expr::Kind::NodeType) fail(arg.loc, "expected a node type argument such as {Block}");
  auto t = project_.schema().find(arg.text);
  if (!t) fail(arg.loc, "unknown node type " + arg.text);
  return *t;
}

namespace {

constexpr std::string_view kNodeMethods[] = {
    "contains", "directly_contains", "isparent", "parent",   "isnodetype",    "position",
    "linenumber", "filename",        "depth",    "nodetype", "methodbinding", "typebinding",
};

bool is_node_method(std::string_view name) {
  return std::find(std::begin(kNodeMethods), std::end(kNodeMethods), name) != std::end(kNodeMethods);
}

}  // namespace

Value Engine::call(const Expr& e) {
  const std::string& name = e.text;
  std::span<const Expr> args(e.operands);
  if (is_node_method(name)) {
    Value receiver;
    if (e.has_receiver) {
      receiver = evaluate(args[0]);
      args = args.subspan(1);
    } else {
      if (args.empty()) fail(e.loc, name + "() needs a node receiver");
      receiver = evaluate(args[0]);
      args = args.subspan(1);
    }
    return node_method(e, receiver, args);
  }
  if (e.has_receiver) fail(e.loc, "unknown method ." + name + "()");
  if (name == "max" || name == "min") {
    if (args.size() != 2) fail(e.loc, name + "() expects 2 arguments");
    std::int64_t v[2];
    for (int i = 0; i < 2; ++i) {
      Value a = eval_operand_numeric(args[i]);
      if (a.is_undefined()) {
        v[i] = 0;
      } else if (auto n = as_integer(a)) {
        v[i] = *n;
      } else if (a.is_node() && project_.type_name(a.as_node()) == "NumberLiteral") {
        auto token = project_.token(a.as_node(), "token").value_or("0");
        try {
          v[i] = std::stoll(std::string(token));
        } catch (const std::exception&) {
          fail(args[i].loc, "numeric literal out of range");
        }
      } else {
        fail(args[i].loc, name + "() expects numbers, got " + a.kind_name());
      }
    }
    return Value::number(name == "max" ? std::max(v[0], v[1]) : std::min(v[0], v[1]));
  }
  if (name == "print") {
    if (args.size() != 1) fail(e.loc, "print() expects 1 argument");
    out_.printed.push_back(display(evaluate(args[0])));
    return Value();
  }
  fail(e.loc, "unknown function " + name + "()");
}

Value Engine::node_method(const Expr& e, const Value& receiver, std::span<const Expr> args) {
  const std::string& name = e.text;
  auto expect_args = [&](std::size_t n) {
    if (args.size() != n) {
      fail(e.loc, name + "() expects " + std::to_string(n) + (n == 1 ? " argument" : " arguments"));
    }
  };
  auto require_node = [&]() -> NodeId {
    if (!receiver.is_node()) fail(e.loc, name + "() requires a node receiver, got " + receiver.kind_name());
    return receiver.as_node();
  };

  if (name == "isnodetype") {
    expect_args(1);
    TypeId t = type_arg(args[0]);
    if (receiver.is_undefined()) return Value::boolean(false);
    return Value::boolean(project_.matches(require_node(), t));
  }

  if (name == "contains" || name == "directly_contains" || name == "isparent") {
    expect_args(1);
    NodeId self = require_node();
    const bool by_type = args[0].kind == Expr::Kind::NodeType;
    std::optional<TypeId> t;
    std::optional<NodeId> target;
    if (by_type) {
      t = type_arg(args[0]);
    } else {
      Value a = evaluate(args[0]);
      if (a.is_undefined()) return Value::boolean(false);
      if (!a.is_node()) fail(args[0].loc, name + "() expects a node or node type, got " + a.kind_name());
      target = a.as_node();
    }

    if (name == "isparent") {
      if (target) return Value::boolean(project_.parent(*target) == self);
      for (NodeId c : project_.children(self)) {
        if (project_.matches(c, *t)) return Value::boolean(true);
      }
      return Value::boolean(false);
    }
    if (name == "contains") {
      if (target) return Value::boolean(project_.is_proper_ancestor(self, *target));
      for (NodeId d : project_.descendants_preorder(self).subspan(1)) {
        if (project_.matches(d, *t)) return Value::boolean(true);
      }
      return Value::boolean(false);
    }
    TypeId self_type = project_.type(self);
    if (target) {
      if (!project_.is_proper_ancestor(self, *target)) return Value::boolean(false);
      for (auto p = project_.parent(*target); p && *p != self; p = project_.parent(*p)) {
        if (project_.type(*p) == self_type) return Value::boolean(false);
      }
      return Value::boolean(true);
    }
    auto kids = project_.children(self);
    std::vector<NodeId> stack(kids.rbegin(), kids.rend());
    while (!stack.empty()) {
      NodeId n = stack.back();
      stack.pop_back();
      if (project_.matches(n, *t)) return Value::boolean(true);
      if (project_.type(n) == self_type) continue;
      auto sub = project_.children(n);
      stack.insert(stack.end(), sub.rbegin(), sub.rend());
    }
    return Value::boolean(false);
  }

  expect_args(0);
  NodeId self = require_node();
  const AstNode& node = project_.node(self);
  if (name == "parent") {
    auto p = project_.parent(self);
    return p ? Value::node(*p) : Value();
  }
  if (name == "position") return Value::number(node.span.start);
  if (name == "linenumber") return Value::number(node.span.line);
  if (name == "filename") return Value::string(project_.file_of(self).name());
  if (name == "depth") return Value::number(project_.depth(self));
  if (name == "nodetype") return Value::string(project_.type_name(self));
  const auto& table = name == "methodbinding" ? project_.bindings().method : project_.bindings().type;
  auto it = table.find(self);
  return it == table.end() ? Value() : Value::node(it->second);
}

//===----------------------------------------------------------------------===//
// Statements
//===----------------------------------------------------------------------===//

void Engine::exec(const Stmt& s) {
  switch (s.kind) {
    case Stmt::Kind::Assign: {
      if (s.op == "=") {
        env_.set(s.target, evaluate(*s.expr));
        return;
      }
      Expr combined;
      combined.kind = Expr::Kind::Infix;
      combined.loc = s.loc;
      combined.text = s.op == "+=" ? "+" : "-";
      Expr target;
      target.kind = Expr::Kind::Variable;
      target.loc = s.loc;
      target.text = s.target;
      combined.operands = {std::move(target), *s.expr};
      env_.set(s.target, binary(combined));
      return;
    }
    case Stmt::Kind::IncDec: {
      const Value* cur = env_.find(s.target);
      Value v = cur ? *cur : Value::number(0);
      auto n = as_integer(v);
      if (!n) fail(s.loc, s.op + " on a " + v.kind_name() + " variable " + s.target);
      std::int64_t r;
      bool overflow = s.op == "++" ? __builtin_add_overflow(*n, 1, &r) : __builtin_sub_overflow(*n, 1, &r);
      if (overflow) fail(s.loc, "integer overflow");
      env_.set(s.target, Value::number(r));
      return;
    }
    case Stmt::Kind::If:
      if (evaluate(*s.expr).truthy()) {
        for (const Stmt& b : s.body) exec(b);
      } else if (s.else_body) {
        for (const Stmt& b : *s.else_body) exec(b);
      }
      return;
    case Stmt::Kind::While:
      while (evaluate(*s.expr).truthy()) {
        for (const Stmt& b : s.body) exec(b);
      }
      return;
    case Stmt::Kind::Select:
      run_select(*s.select, std::nullopt);
      return;
    case Stmt::Kind::CallQuery: {
      const SelectQuery* target = doc_ ? doc_->find_label(s.target) : nullptr;
      if (!target) fail(s.loc, "unresolved query label " + s.target);
      if (env_.call_depth >= options_.recursion_limit) fail(s.loc, "query recursion limit exceeded");
      ++env_.call_depth;
      try {
        run_select(*target, s.input);
      } catch (...) {
        --env_.call_depth;
        throw;
      }
      --env_.call_depth;
      return;
    }
    case Stmt::Kind::Print:
      out_.printed.push_back(display(evaluate(*s.expr)));
      return;
    case Stmt::Kind::ExprStmt:
      evaluate(*s.expr);
      return;
  }
}

void execute_document(const query::QueryDocument& doc, const ProjectAst& project, Environment& env, RunOutput& out,
                      EvalOptions options) {
  Engine(project, env, out, options).execute(doc);
}

}  // namespace craql
