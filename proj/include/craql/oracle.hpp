#pragma once

#include <string>
#include <vector>

#include "craql/engine.hpp"

namespace craql::oracle {

/// Position of a node: index of its compilation unit among the project roots
/// followed by the child index taken at each step down from that root.
using PathKey = std::vector<std::uint32_t>;

struct OracleRow {
  NodeId first;
  std::optional<NodeId> second;
  PathKey first_key;
  PathKey second_key;
};

/// Unordered row set; `sorted()` orders it by pre-order key.
struct OracleResult {
  std::vector<OracleRow> rows;

  std::vector<OracleRow> sorted() const;
};

/// Brute-force selection: materializes every node under each input root, its
/// ancestor path, and its descendant set, then filters by the textual
/// modifier definitions. Where clauses and input expressions are evaluated
/// through `engine`.
OracleResult oracle_select(const query::SelectQuery& q, Engine& engine,
                           const std::optional<query::InputSpec>& input = std::nullopt);

struct DiffReport {
  std::vector<std::string> missing;  // oracle rows the engine lacks
  std::vector<std::string> extra;    // engine rows the oracle lacks
  bool order_differs = false;

  bool empty() const { return missing.empty() && extra.empty() && !order_differs; }
  std::string to_string() const;
};

DiffReport compare(const ResultSet& engine_rows, const OracleResult& oracle_rows, const ProjectAst& project);

}  // namespace craql::oracle
