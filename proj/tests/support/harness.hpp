#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "craql/engine.hpp"
#include "craql/minilang.hpp"
#include "craql/oracle.hpp"
#include "craql/query.hpp"

namespace craql::harness {

std::filesystem::path source_dir();
std::string read_text(const std::filesystem::path& path);

/// Files under fixtures/: Sample.mj (F1), Fact.mj (F2), AB.mj (F3),
/// Nest.mj (F4), Blocks.mj (F5), Unreachable.mj (F6), plus Loops.mj and Chain.mj.
std::vector<std::string> fixture_files();
std::string fixture_text(const std::string& file);
minilang::BuildOutput build_fixture(const std::string& file);
minilang::BuildOutput build_source(const std::string& file, std::string text);

/// Stems of every bundled query under queries/.
std::vector<std::string> bundled_queries();
query::QueryDocument bundled_query(const std::string& stem);

struct QueryRun {
  Environment env;
  RunOutput out;
};

QueryRun run(const query::QueryDocument& doc, const ProjectAst& project, Environment seed = {});
QueryRun run(std::string_view query_text, const ProjectAst& project, Environment seed = {});

/// Runs the document and compares every enumeration, including nested and
/// called selects, with the reference oracle under the same environment.
/// Returns one description per disagreement; `checked` counts comparisons.
std::vector<std::string> oracle_mismatches(const query::QueryDocument& doc, const ProjectAst& project,
                                           std::size_t* checked = nullptr);

/// Nodes of a concrete or abstract type, in pre-order.
std::vector<NodeId> nodes_of(const ProjectAst& project, std::string_view type);
/// The unique node of `type` whose source text equals `text`.
NodeId node_with_text(const ProjectAst& project, std::string_view type, std::string_view text);

std::int64_t number(const Environment& env, std::string_view name);

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& file, std::string_view text);

}  // namespace craql::harness
