#include <algorithm>
#include <charconv>

#include "craql/ast.hpp"
#include "json.hpp"

namespace craql {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string serialize_project(const ProjectAst& project) {
  const NodeTypeSchema& schema = project.schema();
  std::string out;
  out += "{\n";
  out += "\"schema\": " + json(schema.name()).dump() + ",\n";
  out += "\"project\": " + json(project.name()).dump() + ",\n";

  out += "\"files\": [";
  for (std::size_t i = 0; i < project.files().size(); ++i) {
    const SourceFile& f = project.files()[i];
    ordered_json entry;
    entry["name"] = f.name();
    if (f.text()) entry["text"] = *f.text();
    out += (i ? ",\n" : "\n") + entry.dump();
  }
  out += project.files().empty() ? "],\n" : "\n],\n";

  out += "\"nodes\": [";
  for (NodeId id = 0; id < project.size(); ++id) {
    const AstNode& node = project.node(id);
    ordered_json entry;
    entry["id"] = id;
    entry["type"] = schema.type_name(node.type);
    entry["file"] = node.span.file;
    entry["span"] = {node.span.start, node.span.end, node.span.line};
    ordered_json props = ordered_json::object();
    auto decls = schema.properties(node.type);
    for (std::size_t i = 0; i < decls.size(); ++i) {
      const PropValue& v = node.props[i];
      if (const auto* c = std::get_if<NodeId>(&v)) {
        props[decls[i].name] = *c;
      } else if (const auto* list = std::get_if<std::vector<NodeId>>(&v)) {
        props[decls[i].name] = *list;
      } else if (const auto* tok = std::get_if<std::string>(&v)) {
        props[decls[i].name] = ordered_json{{"token", *tok}};
      }
    }
    entry["props"] = std::move(props);
    out += (id ? ",\n" : "\n") + entry.dump();
  }
  out += project.size() == 0 ? "],\n" : "\n],\n";

  out += "\"roots\": " + json(std::vector<NodeId>(project.roots().begin(), project.roots().end())).dump() + ",\n";

  auto table = [](const std::map<NodeId, NodeId>& m) {
    ordered_json obj = ordered_json::object();
    for (auto [from, to] : m) obj[std::to_string(from)] = to;
    return obj;
  };
  ordered_json bindings;
  bindings["method"] = table(project.bindings().method);
  bindings["type"] = table(project.bindings().type);
  out += "\"bindings\": " + bindings.dump() + "\n";
  out += "}\n";
  return out;
}

namespace {

[[noreturn]] void fail(FormatErrorKind kind, std::string where, const std::string& what) {
  throw FormatError(kind, std::move(where), what);
}

const json& require_key(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(FormatErrorKind::Malformed, where, std::string("missing key '") + key + "'");
  return *it;
}

std::uint32_t as_index(const json& v, const std::string& where) {
  if (!v.is_number_unsigned()) fail(FormatErrorKind::Malformed, where, "expected a non-negative integer");
  auto x = v.get<std::uint64_t>();
  if (x > UINT32_MAX) fail(FormatErrorKind::Malformed, where, "integer out of range");
  return static_cast<std::uint32_t>(x);
}

std::uint32_t line_of_offset(std::string_view doc, std::size_t offset) {
  offset = std::min(offset, doc.size());
  return 1 + static_cast<std::uint32_t>(std::count(doc.begin(), doc.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

std::map<NodeId, NodeId> read_binding_table(const json& obj, const std::string& where, std::size_t count) {
  if (!obj.is_object()) fail(FormatErrorKind::Malformed, where, "expected an object");
  std::map<NodeId, NodeId> out;
  for (const auto& [key, value] : obj.items()) {
    std::string entry = where + "." + key;
    NodeId from = 0;
    auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), from);
    if (ec != std::errc() || ptr != key.data() + key.size()) {
      fail(FormatErrorKind::Malformed, entry, "binding key is not a node id");
    }
    NodeId to = as_index(value, entry);
    if (from >= count || to >= count) fail(FormatErrorKind::DanglingNodeId, entry, "dangling node id");
    out[from] = to;
  }
  return out;
}

}  // namespace

ProjectAst deserialize_project(std::string_view document, const SchemaRegistry& schemas) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    fail(FormatErrorKind::Malformed, "line " + std::to_string(line_of_offset(document, e.byte)),
         "malformed JSON");
  }
  if (!doc.is_object()) fail(FormatErrorKind::Malformed, "line 1", "expected a top-level object");

  const json& schema_name = require_key(doc, "schema", "document");
  if (!schema_name.is_string()) fail(FormatErrorKind::Malformed, "schema", "expected a string");
  auto schema = schemas.find(schema_name.get<std::string>());
  if (!schema) fail(FormatErrorKind::UnknownSchema, "schema", "unknown schema " + schema_name.get<std::string>());

  const json& project_name = require_key(doc, "project", "document");
  if (!project_name.is_string()) fail(FormatErrorKind::Malformed, "project", "expected a string");

  std::vector<SourceFile> files;
  const json& jfiles = require_key(doc, "files", "document");
  if (!jfiles.is_array()) fail(FormatErrorKind::Malformed, "files", "expected an array");
  for (std::size_t i = 0; i < jfiles.size(); ++i) {
    std::string where = "files[" + std::to_string(i) + "]";
    const json& name = require_key(jfiles[i], "name", where);
    if (!name.is_string()) fail(FormatErrorKind::Malformed, where, "name must be a string");
    std::optional<std::string> text;
    if (auto it = jfiles[i].find("text"); it != jfiles[i].end()) {
      if (!it->is_string()) fail(FormatErrorKind::Malformed, where, "text must be a string");
      text = it->get<std::string>();
    }
    files.emplace_back(name.get<std::string>(), std::move(text));
  }

  const json& jnodes = require_key(doc, "nodes", "document");
  if (!jnodes.is_array()) fail(FormatErrorKind::Malformed, "nodes", "expected an array");
  const std::size_t count = jnodes.size();
  std::vector<AstNode> nodes;
  nodes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string where = "nodes[" + std::to_string(i) + "]";
    const json& jn = jnodes[i];
    if (!jn.is_object()) fail(FormatErrorKind::Malformed, where, "expected an object");
    if (as_index(require_key(jn, "id", where), where + ".id") != i) {
      fail(FormatErrorKind::Malformed, where, "node ids must be dense and in order");
    }
    const json& jtype = require_key(jn, "type", where);
    if (!jtype.is_string()) fail(FormatErrorKind::Malformed, where, "type must be a string");
    auto type = schema->find(jtype.get<std::string>());
    if (!type) fail(FormatErrorKind::UnknownNodeType, where, "unknown node type " + jtype.get<std::string>());
    if (schema->is_abstract(*type)) {
      fail(FormatErrorKind::UnknownNodeType, where, "abstract node type " + jtype.get<std::string>());
    }

    AstNode node;
    node.type = *type;
    node.span.file = as_index(require_key(jn, "file", where), where + ".file");
    if (node.span.file >= files.size()) fail(FormatErrorKind::Malformed, where, "file index out of range");
    const json& jspan = require_key(jn, "span", where);
    if (!jspan.is_array() || jspan.size() != 3) fail(FormatErrorKind::Malformed, where, "span must be [start, end, line]");
    node.span.start = as_index(jspan[0], where + ".span");
    node.span.end = as_index(jspan[1], where + ".span");
    node.span.line = as_index(jspan[2], where + ".span");

    auto decls = schema->properties(*type);
    node.props.resize(decls.size());
    for (std::size_t p = 0; p < decls.size(); ++p) {
      if (decls[p].kind == PropertyKind::ChildList) node.props[p] = std::vector<NodeId>{};
    }
    const json& jprops = require_key(jn, "props", where);
    if (!jprops.is_object()) fail(FormatErrorKind::Malformed, where, "props must be an object");
    for (const auto& [key, value] : jprops.items()) {
      std::string pwhere = where + ".props." + key;
      auto idx = schema->property_index(*type, key);
      if (!idx) fail(FormatErrorKind::Malformed, pwhere, jtype.get<std::string>() + " has no property " + key);
      auto check_id = [&](const json& v) {
        NodeId c = as_index(v, pwhere);
        if (c >= count) fail(FormatErrorKind::DanglingNodeId, pwhere, "dangling node id " + std::to_string(c));
        return c;
      };
      switch (decls[*idx].kind) {
        case PropertyKind::SingleChild:
          node.props[*idx] = check_id(value);
          break;
        case PropertyKind::ChildList: {
          if (!value.is_array()) fail(FormatErrorKind::Malformed, pwhere, "expected an id list");
          std::vector<NodeId> list;
          for (const json& v : value) list.push_back(check_id(v));
          node.props[*idx] = std::move(list);
          break;
        }
        case PropertyKind::Token: {
          if (!value.is_object() || !value.contains("token") || !value["token"].is_string()) {
            fail(FormatErrorKind::Malformed, pwhere, "expected {\"token\": string}");
          }
          node.props[*idx] = value["token"].get<std::string>();
          break;
        }
      }
    }
    nodes.push_back(std::move(node));
  }

  std::vector<NodeId> roots;
  const json& jroots = require_key(doc, "roots", "document");
  if (!jroots.is_array()) fail(FormatErrorKind::Malformed, "roots", "expected an array");
  for (std::size_t i = 0; i < jroots.size(); ++i) {
    std::string where = "roots[" + std::to_string(i) + "]";
    NodeId r = as_index(jroots[i], where);
    if (r >= count) fail(FormatErrorKind::DanglingNodeId, where, "dangling node id " + std::to_string(r));
    roots.push_back(r);
  }

  BindingTable bindings;
  if (auto it = doc.find("bindings"); it != doc.end()) {
    if (!it->is_object()) fail(FormatErrorKind::Malformed, "bindings", "expected an object");
    if (auto m = it->find("method"); m != it->end()) bindings.method = read_binding_table(*m, "bindings.method", count);
    if (auto t = it->find("type"); t != it->end()) bindings.type = read_binding_table(*t, "bindings.type", count);
  }

  try {
    ProjectAst project(schema, project_name.get<std::string>(), std::move(files), std::move(nodes),
                       std::move(roots));
    auto check_targets = [&](const std::map<NodeId, NodeId>& table, const char* kind, const char* want) {
      auto wanted = schema->find(want);
      for (auto [from, to] : table) {
        if (!wanted || !schema->is_subtype(project.type(to), *wanted)) {
          fail(FormatErrorKind::BindingTypeMismatch,
               std::string("bindings.") + kind + "." + std::to_string(from), "binding target type mismatch");
        }
      }
    };
    check_targets(bindings.method, "method", "MethodDeclaration");
    check_targets(bindings.type, "type", "TypeDeclaration");
    project.attach_bindings(std::move(bindings));
    return project;
  } catch (const StructureError& e) {
    fail(FormatErrorKind::Structure, "nodes", e.what());
  }
}

}  // namespace craql
