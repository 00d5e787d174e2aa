#include "craql/ast.hpp"

#include <algorithm>

namespace craql {

//===----------------------------------------------------------------------===//
// NodeTypeSchema
//===----------------------------------------------------------------------===//

TypeId NodeTypeSchema::add_type(std::string name, std::optional<std::string_view> supertype,
                                bool is_abstract, std::vector<PropertyDecl> properties) {
  if (by_name_.contains(name)) throw SchemaError("duplicate node type " + name);
  TypeInfo info;
  info.name = name;
  info.is_abstract = is_abstract;
  if (supertype) {
    TypeId super = require(*supertype);
    if (types_[super].virtual_match) {
      throw SchemaError("cannot derive " + name + " from virtual type " + std::string(*supertype));
    }
    info.supertype = super;
    info.properties = types_[super].properties;
    info.ancestors = types_[super].ancestors;
  }
  for (auto& prop : properties) {
    auto clash = std::find_if(info.properties.begin(), info.properties.end(),
                              [&](const PropertyDecl& p) { return p.name == prop.name; });
    if (clash != info.properties.end()) {
      throw SchemaError("duplicate property " + prop.name + " on " + name);
    }
    info.properties.push_back(std::move(prop));
  }
  auto id = static_cast<TypeId>(types_.size());
  info.ancestors.insert(info.ancestors.begin(), id);
  by_name_.emplace(name, id);
  types_.push_back(std::move(info));
  return id;
}

TypeId NodeTypeSchema::add_virtual_type(std::string name, std::string_view base,
                                        std::string token_property, std::string token_value) {
  TypeId base_id = require(base);
  auto prop = property_index(base_id, token_property);
  if (!prop || types_[base_id].properties[*prop].kind != PropertyKind::Token) {
    throw SchemaError("virtual type " + name + " needs token property " + token_property);
  }
  TypeId id = add_type(std::move(name), base, /*is_abstract=*/true);
  types_[id].virtual_match = VirtualMatch{base_id, std::move(token_property), std::move(token_value)};
  return id;
}

std::optional<TypeId> NodeTypeSchema::find(std::string_view type_name) const {
  auto it = by_name_.find(std::string(type_name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

TypeId NodeTypeSchema::require(std::string_view type_name) const {
  auto t = find(type_name);
  if (!t) throw SchemaError("unknown node type " + std::string(type_name));
  return *t;
}

bool NodeTypeSchema::is_subtype(TypeId t, TypeId ancestor) const {
  const auto& chain = types_.at(t).ancestors;
  return std::find(chain.begin(), chain.end(), ancestor) != chain.end();
}

bool NodeTypeSchema::is_subtype(std::string_view t, std::string_view ancestor) const {
  return is_subtype(require(t), require(ancestor));
}

std::optional<std::size_t> NodeTypeSchema::property_index(TypeId t, std::string_view prop) const {
  const auto& props = types_.at(t).properties;
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (props[i].name == prop) return i;
  }
  return std::nullopt;
}

bool NodeTypeSchema::declares_property_anywhere(std::string_view prop) const {
  return std::any_of(types_.begin(), types_.end(), [&](const TypeInfo& info) {
    return std::any_of(info.properties.begin(), info.properties.end(),
                       [&](const PropertyDecl& p) { return p.name == prop; });
  });
}

void SchemaRegistry::add(std::shared_ptr<const NodeTypeSchema> schema) {
  std::string key = schema->name();
  schemas_[key] = std::move(schema);
}

std::shared_ptr<const NodeTypeSchema> SchemaRegistry::find(std::string_view name) const {
  auto it = schemas_.find(name);
  return it == schemas_.end() ? nullptr : it->second;
}

//===----------------------------------------------------------------------===//
// SourceFile
//===----------------------------------------------------------------------===//

SourceFile::SourceFile(std::string name, std::optional<std::string> text)
    : name_(std::move(name)), text_(std::move(text)) {
  if (!text_) return;
  const std::string& s = *text_;
  scalar_offsets_.reserve(s.size() + 1);
  for (std::uint32_t i = 0; i < s.size(); ++i) {
    auto c = static_cast<unsigned char>(s[i]);
    if ((c & 0xC0) != 0x80) scalar_offsets_.push_back(i);
  }
  scalar_offsets_.push_back(static_cast<std::uint32_t>(s.size()));
}

std::uint32_t SourceFile::length() const {
  return scalar_offsets_.empty() ? 0 : static_cast<std::uint32_t>(scalar_offsets_.size() - 1);
}

std::string_view SourceFile::slice(std::uint32_t start, std::uint32_t end) const {
  if (!text_) return {};
  std::uint32_t len = length();
  start = std::min(start, len);
  end = std::clamp(end, start, len);
  std::uint32_t from = scalar_offsets_[start];
  std::uint32_t to = scalar_offsets_[end];
  return std::string_view(*text_).substr(from, to - from);
}

//===----------------------------------------------------------------------===//
// ProjectAst
//===----------------------------------------------------------------------===//

namespace {

template <typename Fn>
void for_each_child(const AstNode& node, Fn&& fn) {
  for (const auto& prop : node.props) {
    if (const auto* child = std::get_if<NodeId>(&prop)) {
      fn(*child);
    } else if (const auto* list = std::get_if<std::vector<NodeId>>(&prop)) {
      for (NodeId c : *list) fn(c);
    }
  }
}

}  // namespace

ProjectAst::ProjectAst(std::shared_ptr<const NodeTypeSchema> schema, std::string name,
                       std::vector<SourceFile> files, std::vector<AstNode> nodes,
                       std::vector<NodeId> roots)
    : schema_(std::move(schema)),
      name_(std::move(name)),
      files_(std::move(files)),
      nodes_(std::move(nodes)),
      roots_(std::move(roots)) {
  link_and_order();
  validate_spans();
}

void ProjectAst::link_and_order() {
  const std::size_t n = nodes_.size();
  for (auto& node : nodes_) {
    node.parent.reset();
    if (node.type >= schema_->size()) throw StructureError("node type id out of range");
    if (schema_->is_abstract(node.type)) {
      throw StructureError("node has abstract type " + schema_->type_name(node.type));
    }
    if (node.props.size() != schema_->properties(node.type).size()) {
      throw StructureError("property count mismatch on " + schema_->type_name(node.type));
    }
    if (node.span.file >= files_.size()) throw StructureError("span names unknown file");
  }

  child_range_.assign(n, {0, 0});
  child_storage_.clear();
  for (NodeId id = 0; id < n; ++id) {
    auto begin = static_cast<std::uint32_t>(child_storage_.size());
    for_each_child(nodes_[id], [&](NodeId c) {
      if (c >= n) throw StructureError("dangling node id " + std::to_string(c));
      if (nodes_[c].parent) {
        throw StructureError("node " + std::to_string(c) + " has multiple parents");
      }
      nodes_[c].parent = id;
      child_storage_.push_back(c);
    });
    child_range_[id] = {begin, static_cast<std::uint32_t>(child_storage_.size())};
  }

  rank_.assign(n, UINT32_MAX);
  subtree_end_.assign(n, 0);
  depth_.assign(n, 0);
  preorder_.clear();
  preorder_.reserve(n);

  struct Frame {
    NodeId node;
    std::uint32_t next_child;
  };
  std::vector<Frame> stack;
  for (NodeId root : roots_) {
    if (root >= n) throw StructureError("dangling root id " + std::to_string(root));
    if (nodes_[root].parent) throw StructureError("root " + std::to_string(root) + " has a parent");
    if (rank_[root] != UINT32_MAX) throw StructureError("duplicate root " + std::to_string(root));
    rank_[root] = static_cast<std::uint32_t>(preorder_.size());
    preorder_.push_back(root);
    stack.push_back({root, 0});
    while (!stack.empty()) {
      Frame& top = stack.back();
      auto [begin, end] = child_range_[top.node];
      if (begin + top.next_child < end) {
        NodeId c = child_storage_[begin + top.next_child++];
        rank_[c] = static_cast<std::uint32_t>(preorder_.size());
        depth_[c] = depth_[top.node] + 1;
        preorder_.push_back(c);
        stack.push_back({c, 0});
      } else {
        subtree_end_[top.node] = static_cast<std::uint32_t>(preorder_.size());
        stack.pop_back();
      }
    }
  }
  if (preorder_.size() != n) {
    for (NodeId id = 0; id < n; ++id) {
      if (rank_[id] == UINT32_MAX) {
        throw StructureError("node " + std::to_string(id) + " is not reachable from any root");
      }
    }
  }
}

void ProjectAst::validate_spans() const {
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    const Span& s = nodes_[id].span;
    if (s.start > s.end) throw StructureError("node " + std::to_string(id) + " has inverted span");
    const SourceFile& f = files_[s.file];
    if (f.text() && s.end > f.length()) {
      throw StructureError("node " + std::to_string(id) + " span exceeds file length");
    }
    if (auto p = nodes_[id].parent) {
      const Span& ps = nodes_[*p].span;
      if (ps.file != s.file || s.start < ps.start || s.end > ps.end) {
        throw StructureError("node " + std::to_string(id) + " span is not inside its parent's span");
      }
    }
  }
}

void ProjectAst::attach_bindings(BindingTable bindings) {
  auto method_decl = schema_->find("MethodDeclaration");
  auto type_decl = schema_->find("TypeDeclaration");
  auto check = [&](const std::map<NodeId, NodeId>& table, std::optional<TypeId> want) {
    for (auto [from, to] : table) {
      if (from >= nodes_.size() || to >= nodes_.size()) {
        throw StructureError("binding references dangling node id");
      }
      if (!want || !schema_->is_subtype(nodes_[to].type, *want)) {
        throw StructureError("binding target type mismatch");
      }
    }
  };
  check(bindings.method, method_decl);
  check(bindings.type, type_decl);
  bindings_ = std::move(bindings);
}

std::vector<NodeId> ProjectAst::query_roots() const {
  std::vector<NodeId> out;
  for (NodeId r : roots_) {
    if (file_of(r).name() != kBuiltinsFileName) out.push_back(r);
  }
  return out;
}

std::span<const NodeId> ProjectAst::children(NodeId n) const {
  auto [begin, end] = child_range_.at(n);
  return std::span<const NodeId>(child_storage_).subspan(begin, end - begin);
}

NodeId ProjectAst::root_of(NodeId n) const {
  while (auto p = parent(n)) n = *p;
  return n;
}

std::span<const NodeId> ProjectAst::descendants_preorder(NodeId root) const {
  std::uint32_t begin = rank_.at(root);
  return std::span<const NodeId>(preorder_).subspan(begin, subtree_end_[root] - begin);
}

bool ProjectAst::is_proper_ancestor(NodeId ancestor, NodeId n) const {
  return rank_.at(ancestor) < rank_.at(n) && rank_[n] < subtree_end_[ancestor];
}

bool ProjectAst::matches(NodeId n, TypeId t) const {
  const auto& vm = schema_->virtual_match(t);
  if (!vm) return schema_->is_subtype(type(n), t);
  if (!schema_->is_subtype(type(n), vm->base)) return false;
  auto tok = token(n, vm->token_property);
  return tok && *tok == vm->token_value;
}

const PropValue* ProjectAst::property(NodeId n, std::string_view prop) const {
  const AstNode& node = nodes_.at(n);
  auto idx = schema_->property_index(node.type, prop);
  return idx ? &node.props[*idx] : nullptr;
}

std::optional<std::string_view> ProjectAst::token(NodeId n, std::string_view prop) const {
  const PropValue* v = property(n, prop);
  if (!v) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(v)) return std::string_view(*s);
  return std::nullopt;
}

std::string ProjectAst::placeholder(NodeId n) const {
  return "<" + type_name(n) + "@" + file_of(n).name() + ":" + std::to_string(node(n).span.line) + ">";
}

std::string ProjectAst::source_text(NodeId n) const {
  const SourceFile& f = file_of(n);
  if (!f.text()) return placeholder(n);
  const Span& s = node(n).span;
  return std::string(f.slice(s.start, s.end));
}

bool same_project(const ProjectAst& a, const ProjectAst& b) {
  return a.schema().name() == b.schema().name() && a.name() == b.name() &&
         std::ranges::equal(a.files(), b.files()) && std::ranges::equal(a.nodes(), b.nodes()) &&
         std::ranges::equal(a.roots(), b.roots()) && a.bindings() == b.bindings();
}

//===----------------------------------------------------------------------===//
// TreeBuilder / assembly
//===----------------------------------------------------------------------===//

NodeId TreeBuilder::make(std::string_view type, Span span) {
  TypeId t = schema_->require(type);
  if (schema_->is_abstract(t)) throw SchemaError("cannot instantiate abstract type " + std::string(type));
  AstNode node;
  node.type = t;
  node.span = span;
  node.props.resize(schema_->properties(t).size());
  for (std::size_t i = 0; i < node.props.size(); ++i) {
    if (schema_->properties(t)[i].kind == PropertyKind::ChildList) {
      node.props[i] = std::vector<NodeId>{};
    }
  }
  nodes_.push_back(std::move(node));
  return static_cast<NodeId>(nodes_.size() - 1);
}

PropValue& TreeBuilder::slot(NodeId n, std::string_view prop, PropertyKind expected) {
  AstNode& node = nodes_.at(n);
  auto idx = schema_->property_index(node.type, prop);
  if (!idx || schema_->properties(node.type)[*idx].kind != expected) {
    throw SchemaError(schema_->type_name(node.type) + " has no property " + std::string(prop) +
                      " of the requested kind");
  }
  return node.props[*idx];
}

void TreeBuilder::set_child(NodeId n, std::string_view prop, NodeId child) {
  slot(n, prop, PropertyKind::SingleChild) = child;
}

void TreeBuilder::append_child(NodeId n, std::string_view prop, NodeId child) {
  std::get<std::vector<NodeId>>(slot(n, prop, PropertyKind::ChildList)).push_back(child);
}

void TreeBuilder::set_token(NodeId n, std::string_view prop, std::string token) {
  slot(n, prop, PropertyKind::Token) = std::move(token);
}

ProjectAst assemble_project(std::shared_ptr<const NodeTypeSchema> schema, std::string name,
                            std::vector<ParsedFile> files) {
  std::vector<SourceFile> sources;
  std::vector<AstNode> nodes;
  std::vector<NodeId> roots;
  for (std::uint32_t fi = 0; fi < files.size(); ++fi) {
    ParsedFile& pf = files[fi];
    auto base = static_cast<NodeId>(nodes.size());
    // Pre-order renumbering of this file's arena.
    std::vector<NodeId> order;
    std::vector<NodeId> remap(pf.nodes.size(), UINT32_MAX);
    std::vector<NodeId> stack{pf.root};
    while (!stack.empty()) {
      NodeId cur = stack.back();
      stack.pop_back();
      remap[cur] = base + static_cast<NodeId>(order.size());
      order.push_back(cur);
      std::vector<NodeId> kids;
      for_each_child(pf.nodes[cur], [&](NodeId c) { kids.push_back(c); });
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
    for (NodeId old : order) {
      AstNode node = std::move(pf.nodes[old]);
      node.span.file = fi;
      node.parent.reset();
      for (auto& prop : node.props) {
        if (auto* c = std::get_if<NodeId>(&prop)) {
          *c = remap[*c];
        } else if (auto* list = std::get_if<std::vector<NodeId>>(&prop)) {
          for (NodeId& c : *list) c = remap[c];
        }
      }
      nodes.push_back(std::move(node));
    }
    roots.push_back(base);
    sources.push_back(std::move(pf.file));
  }
  return ProjectAst(std::move(schema), std::move(name), std::move(sources), std::move(nodes),
                    std::move(roots));
}

}  // namespace craql
