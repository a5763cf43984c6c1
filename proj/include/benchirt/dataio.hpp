#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "benchirt/matrices.hpp"

namespace benchirt {

enum class TableFormat { wide, long_form };

struct LoadOptions {
  /// Enforce at least two agents and two items.
  bool require_population = true;
};

/// Wide: header row "agent,<item>,..." then one row per agent; a blank or
/// "NA" cell is missing. Long: rows of agent,item,value with an optional
/// "agent,item,value" header; cells never listed are missing and a cell
/// listed twice is an error.
ResultMatrix load_results(const std::filesystem::path& path, TableFormat format, LoadOptions options = {});
ResultMatrix parse_results(std::istream& in, TableFormat format, std::string_view source,
                           LoadOptions options = {});

void write_results(std::ostream& out, const ResultMatrix& rm, TableFormat format);
void save_results(const std::filesystem::path& path, const ResultMatrix& rm, TableFormat format);
void write_binary(std::ostream& out, const BinaryResponseMatrix& brm);

/// Reinterprets a matrix whose observed values are exactly 0 or 1.
BinaryResponseMatrix as_binary(const ResultMatrix& rm, std::string rule = "input");

nlohmann::json to_json(const ResultMatrix& rm);
ResultMatrix result_matrix_from_json(const nlohmann::json& j);

/// Two-column CSV of (item_id, value), optionally headed "item,value".
std::vector<std::pair<std::string, double>> load_reference(const std::filesystem::path& path);
std::vector<std::pair<std::string, double>> parse_reference(std::istream& in, std::string_view source);

enum class DuplicateRule {
  exact,       ///< identical observed values and missing pattern
  correlation  ///< Pearson correlation over shared observed items above max_corr
};

struct DuplicatePair {
  std::string kept;
  std::string removed;
  double correlation = 1.0;
};

struct FilterReport {
  std::vector<std::string> removed_constant_items;
  std::vector<DuplicatePair> removed_duplicate_agents;
  std::optional<DuplicateRule> duplicate_rule;
  std::optional<double> max_corr;
};

nlohmann::json to_json(const FilterReport& report);

struct ConstantFilterResult {
  BinaryResponseMatrix responses;
  FilterReport report;
  std::vector<Index> kept_items;  // column indices into the input
};

/// Drops every column whose observed responses are all 0 or all 1 (a column
/// with no observed response counts as constant).
ConstantFilterResult filter_constant_items(const BinaryResponseMatrix& brm);

struct DedupeResult {
  ResultMatrix matrix;
  FilterReport report;
  std::vector<Index> kept_agents;
};

/// Keeps the first of every duplicate group in input order.
DedupeResult dedupe_agents(const ResultMatrix& rm, double max_corr = 0.99,
                           DuplicateRule rule = DuplicateRule::exact);

}  // namespace benchirt
