#include "craql/oracle.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace craql::oracle {

namespace {

using query::InputSpec;
using query::Modifier;
using query::PatternKind;

PathKey path_key(const ProjectAst& p, NodeId n) {
  PathKey key;
  NodeId cur = n;
  while (auto parent = p.parent(cur)) {
    auto kids = p.children(*parent);
    key.push_back(static_cast<std::uint32_t>(std::find(kids.begin(), kids.end(), cur) - kids.begin()));
    cur = *parent;
  }
  auto roots = p.roots();
  key.push_back(static_cast<std::uint32_t>(std::find(roots.begin(), roots.end(), cur) - roots.begin()));
  std::reverse(key.begin(), key.end());
  return key;
}

void collect_subtree(const ProjectAst& p, NodeId n, std::vector<NodeId>& out) {
  out.push_back(n);
  for (NodeId c : p.children(n)) collect_subtree(p, c, out);
}

std::vector<NodeId> proper_descendants(const ProjectAst& p, NodeId n) {
  std::vector<NodeId> all;
  collect_subtree(p, n, all);
  all.erase(all.begin());
  return all;
}

/// Nodes strictly between `top` and `n` on n's ancestor path.
std::vector<NodeId> interposed(const ProjectAst& p, NodeId top, NodeId n) {
  std::vector<NodeId> path;
  for (auto a = p.parent(n); a && *a != top; a = p.parent(*a)) path.push_back(*a);
  return path;
}

std::vector<NodeId> input_trees(const InputSpec& spec, Engine& engine) {
  const ProjectAst& p = engine.project();
  std::vector<NodeId> roots;
  if (spec.kind == InputSpec::Kind::ProjectDefault) {
    for (NodeId r : p.roots()) {
      if (p.file_of(r).name() != kBuiltinsFileName) roots.push_back(r);
    }
    return roots;
  }
  Value v = engine.evaluate(*spec.expr);
  if (v.is_node()) roots.push_back(v.as_node());
  if (v.is_list()) roots = v.as_list();
  if (!v.is_node() && !v.is_list() && !v.is_undefined()) {
    throw RuntimeError("select input must be a node or node list, got " + std::string(v.kind_name()));
  }
  return roots;
}

/// Nodes of type `t` under the input trees that survive `modifier`.
std::set<NodeId> candidates(const ProjectAst& p, const std::vector<NodeId>& roots, const InputSpec& spec,
                            TypeId t, Modifier modifier) {
  std::set<NodeId> out;
  for (NodeId r : roots) {
    std::vector<NodeId> nodes;
    collect_subtree(p, r, nodes);
    if (spec.kind != InputSpec::Kind::ProjectDefault) nodes.erase(nodes.begin());
    for (NodeId n : nodes) {
      if (!p.matches(n, t)) continue;
      std::vector<NodeId> between = interposed(p, r, n);
      if (spec.kind == InputSpec::Kind::DirectlyIn &&
          std::any_of(between.begin(), between.end(), [&](NodeId a) { return p.type(a) == p.type(r); })) {
        continue;
      }
      if (modifier == Modifier::Outmost &&
          std::any_of(between.begin(), between.end(), [&](NodeId a) { return p.matches(a, t); })) {
        continue;
      }
      if (modifier == Modifier::Inmost) {
        auto below = proper_descendants(p, n);
        if (std::any_of(below.begin(), below.end(), [&](NodeId d) { return p.matches(d, t); })) continue;
      }
      out.insert(n);
    }
  }
  return out;
}

class BoundVariables {
 public:
  explicit BoundVariables(Environment& env) : env_(env) {}
  ~BoundVariables() {
    for (auto& [name, old] : saved_) {
      if (old) {
        env_.set(name, *old);
      } else {
        env_.variables.erase(name);
      }
    }
    if (pushed_) env_.count_stack.pop_back();
  }

  void bind(const std::string& name, NodeId n) {
    if (std::none_of(saved_.begin(), saved_.end(), [&](const auto& s) { return s.first == name; })) {
      const Value* v = env_.find(name);
      saved_.emplace_back(name, v ? std::optional<Value>(*v) : std::nullopt);
    }
    env_.set(name, Value::node(n));
  }
  void push_count() {
    env_.count_stack.push_back(0);
    pushed_ = true;
  }

 private:
  Environment& env_;
  std::vector<std::pair<std::string, std::optional<Value>>> saved_;
  bool pushed_ = false;
};

bool key_less(const OracleRow& a, const OracleRow& b) {
  if (a.first_key != b.first_key) return a.first_key < b.first_key;
  return a.second_key < b.second_key;
}

}  // namespace

std::vector<OracleRow> OracleResult::sorted() const {
  std::vector<OracleRow> out = rows;
  std::sort(out.begin(), out.end(), key_less);
  return out;
}

OracleResult oracle_select(const query::SelectQuery& q, Engine& engine, const std::optional<InputSpec>& input) {
  const ProjectAst& p = engine.project();
  const InputSpec& spec = input ? *input : q.input;
  auto require = [&](const std::string& name) {
    auto t = p.schema().find(name);
    if (!t) throw RuntimeError("unknown node type " + name);
    return *t;
  };

  BoundVariables bound(engine.env());
  bound.push_count();
  std::vector<NodeId> roots = input_trees(spec, engine);
  std::vector<OracleRow> all;

  if (q.pattern.kind == PatternKind::Single) {
    for (NodeId n : candidates(p, roots, spec, require(q.pattern.first.type), q.modifier)) {
      all.push_back({n, std::nullopt, path_key(p, n), {}});
    }
  } else {
    TypeId t2 = require(q.pattern.second->type);
    for (NodeId n1 : candidates(p, roots, spec, require(q.pattern.first.type), Modifier::None)) {
      PathKey k1 = path_key(p, n1);
      for (NodeId n2 : proper_descendants(p, n1)) {
        if (p.matches(n2, t2)) all.push_back({n1, n2, k1, path_key(p, n2)});
      }
    }
  }
  std::sort(all.begin(), all.end(), key_less);

  OracleResult result;
  for (const OracleRow& row : all) {
    bool keep = true;
    if (q.where) {
      bound.bind(q.pattern.first.name, row.first);
      if (row.second) bound.bind(q.pattern.second->name, *row.second);
      keep = engine.evaluate(*q.where).truthy();
    }
    if (!keep) continue;
    result.rows.push_back(row);
    if (q.pattern.kind != PatternKind::Ellipsis) engine.env().count_stack.back() = result.rows.size();
  }

  if (q.pattern.kind == PatternKind::Ellipsis) {
    auto distance = [&](const OracleRow& r) { return interposed(p, r.first, *r.second).size() + 1; };
    std::size_t best = 0;
    for (const OracleRow& r : result.rows) best = std::max(best, distance(r));
    std::erase_if(result.rows, [&](const OracleRow& r) { return distance(r) != best; });
  }
  return result;
}

namespace {

std::string describe(const ProjectAst& p, NodeId first, std::optional<NodeId> second) {
  std::string s = p.placeholder(first);
  if (second) s += " / " + p.placeholder(*second);
  return s;
}

}  // namespace

std::string DiffReport::to_string() const {
  std::string out;
  for (const auto& m : missing) out += "missing: " + m + "\n";
  for (const auto& e : extra) out += "extra: " + e + "\n";
  if (order_differs) out += "rows match but their order differs\n";
  return out;
}

DiffReport compare(const ResultSet& engine_rows, const OracleResult& oracle_rows, const ProjectAst& project) {
  using Key = std::pair<NodeId, std::optional<NodeId>>;
  std::vector<Key> expected;
  for (const OracleRow& r : oracle_rows.sorted()) expected.emplace_back(r.first, r.second);
  std::vector<Key> actual;
  for (const ResultRow& r : engine_rows.rows) actual.emplace_back(r.first, r.second);

  std::set<Key> expected_set(expected.begin(), expected.end());
  std::set<Key> actual_set(actual.begin(), actual.end());
  DiffReport report;
  for (const Key& k : expected) {
    if (!actual_set.contains(k)) report.missing.push_back(describe(project, k.first, k.second));
  }
  for (const Key& k : actual) {
    if (!expected_set.contains(k)) report.extra.push_back(describe(project, k.first, k.second));
  }
  if (report.missing.empty() && report.extra.empty()) report.order_differs = expected != actual;
  return report;
}

}  // namespace craql::oracle
