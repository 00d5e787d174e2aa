#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "craql/engine.hpp"
#include "craql/query.hpp"

namespace craql::runner {

namespace fs = std::filesystem;

class RunnerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  fs::path projects_dir;
  fs::path queries_dir;
  fs::path properties_dir;
  fs::path results_dir;
  fs::path project_list;
  fs::path query_list;
  std::size_t recursion_limit = 512;
  std::size_t jobs = 1;

  /// `<root>/projects`, `<root>/queries`, `<root>/properties`, `<root>/results`.
  static RunConfig under(const fs::path& root);
};

/// Names from a list file: one per line, `#` starts a comment, blanks skipped.
std::vector<std::string> read_list_file(const fs::path& file);

//===----------------------------------------------------------------------===//
// Inputs
//===----------------------------------------------------------------------===//

struct LoadedProject {
  std::optional<ProjectAst> ast;
  std::size_t files_parsed = 0;
  std::vector<std::string> diagnostics;
};

/// Loads `<dir>/*.ast.json` when present, otherwise parses every `.mj` file
/// below `dir` (sorted by relative path) and binds the result.
LoadedProject load_project(const fs::path& dir, const std::string& name);

struct LoadedQuery {
  std::string name;  // file stem, used in result file names
  query::QueryDocument doc;
};

/// Parses each listed query file (`.craql` appended when missing). Throws
/// query::SyntaxError or RunnerError on the first failure.
std::vector<LoadedQuery> load_queries(const fs::path& queries_dir, const std::vector<std::string>& names);

struct Properties {
  std::map<std::string, Value> values;
  std::vector<std::string> warnings;
};

/// `key=value` lines; canonical decimal integers become numbers, true/false
/// booleans, anything else a string. `#` lines and blanks are ignored.
Properties parse_properties(std::string_view text);
/// `<properties_dir>/<project>.properties`; an absent file yields no values.
Properties load_properties(const fs::path& properties_dir, const std::string& project);

//===----------------------------------------------------------------------===//
// Execution
//===----------------------------------------------------------------------===//

struct ProjectRunRecord {
  std::string project;
  /// Exported variables (no `temp_` prefix, not undefined), rendered as text.
  std::map<std::string, std::string> variables;
  std::map<std::string, std::size_t> row_counts;
  std::map<std::string, std::vector<std::string>> rows;  // query name -> row records
  std::vector<std::string> printed;
  std::vector<std::string> diagnostics;
  ExecutionStats stats;
  bool aborted = false;
  bool degraded = false;
};

/// Runs every query document, in order, over one project with one shared
/// environment seeded from `seed`.
ProjectRunRecord run_project(const std::string& name, const ProjectAst& project, std::size_t files_parsed,
                             const std::vector<LoadedQuery>& queries, const std::map<std::string, Value>& seed,
                             EvalOptions options = {});

struct BatchResult {
  int exit_status = 0;
  std::vector<ProjectRunRecord> projects;
};

/// Runs the query list over the project list and writes `<project>.vars`,
/// `<project>.<query>.rows` and `<project>.out` under the results directory.
/// Print output is also written to `out` in project order; diagnostics go to `log`.
BatchResult run_batch(const RunConfig& config, std::ostream& out, std::ostream& log);

/// Sorted `name=value` lines with backslash escapes for tabs and newlines.
std::string format_vars(const std::map<std::string, std::string>& variables);
std::map<std::string, std::string> parse_vars(std::string_view text);

//===----------------------------------------------------------------------===//
// Spreadsheets
//===----------------------------------------------------------------------===//

std::string csv_quote(std::string_view cell);
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Writes `<results_dir>/craql_output.csv` from every `.vars` file.
fs::path collate_csv(const fs::path& results_dir);

/// Writes `<properties_dir>/<project>.properties` for each row of
/// `<properties_dir>/projecttags.csv`.
std::vector<fs::path> generate_props(const fs::path& properties_dir);

}  // namespace craql::runner
