#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "benchirt/indicators.hpp"
#include "benchirt/irt.hpp"

namespace benchirt {

/// A fitted model plus, optionally, the difficulty binning frozen with it.
/// This is what `score-agent` reads.
struct ParameterBank {
  FittedModel model;
  std::optional<DifficultyBinning> binning;
};

nlohmann::json to_json(const FitStatistic& f);
nlohmann::json to_json(const Convergence& c, bool with_trace = false);
nlohmann::json to_json(const DifficultyBinning& b);
nlohmann::json to_json(const SeedConsistencyReport& r);
nlohmann::json to_json(const InverseMeasure& m);
nlohmann::json to_json(const AgentIndicators& ind);
nlohmann::json to_json(const CorrelationTable& t);

/// Worker count is not echoed so that output does not depend on it.
nlohmann::json to_json(const FittedModel& model, const DifficultyBinning* binning = nullptr);
nlohmann::json to_json(const ParameterBank& bank);

ParameterBank bank_from_json(const nlohmann::json& j);
ParameterBank load_bank(const std::filesystem::path& path);

/// Two-space indented dump with a trailing newline.
std::string dump(const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

/// One row per agent; unbounded measures are written as "unbounded" and
/// absent values as empty cells.
void write_indicators_csv(std::ostream& out, const std::vector<AgentIndicators>& rows);

/// Labeled square matrix; undefined correlations are empty cells.
void write_correlations_csv(std::ostream& out, const CorrelationTable& t);

}  // namespace benchirt
