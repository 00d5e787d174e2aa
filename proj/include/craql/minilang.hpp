#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "craql/ast.hpp"

/// MiniLang: a Java subset (classes, interfaces, fields, methods, the usual
/// statements, call chains) parsed into trees over a JDT-like schema.
namespace craql::minilang {

/// Schema name used in serialized ASTs.
inline constexpr std::string_view kSchemaName = "minilang";
inline constexpr std::string_view kFileExtension = ".mj";

std::shared_ptr<const NodeTypeSchema> schema();

/// Registry containing the MiniLang schema.
SchemaRegistry default_registry();

enum class Severity { Warning, Error, Fatal };

struct Diagnostic {
  std::string file;
  std::uint32_t line = 1;
  std::uint32_t column = 1;
  std::string message;
  Severity severity = Severity::Error;

  std::string to_string() const;
};

struct ParseOutput {
  /// Absent when the file could not be recovered.
  std::optional<ParsedFile> tree;
  std::vector<Diagnostic> diagnostics;
};

ParseOutput parse_file(std::string file_name, std::string text);

/// Resolves method and type bindings over every compilation unit.
BindingTable bind_project(const ProjectAst& project);

struct SourceInput {
  std::string name;
  std::string text;
};

struct BuildOutput {
  ProjectAst project;
  std::vector<Diagnostic> diagnostics;
  std::size_t files_parsed = 0;
};

/// Parses every source, adds the built-ins unit, assembles and binds.
/// Files with fatal diagnostics are skipped.
BuildOutput build_project(std::string project_name, std::vector<SourceInput> sources);

}  // namespace craql::minilang
