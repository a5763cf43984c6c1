#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "benchirt/irt.hpp"

namespace benchirt {

/// Reciprocal of a non-negative dispersion; `unbounded` when the dispersion
/// is exactly zero. Serialized as the string "unbounded", never as infinity.
struct InverseMeasure {
  double value = 0.0;
  bool unbounded = false;

  static InverseMeasure reciprocal(double dispersion);
  std::optional<double> finite() const { return unbounded ? std::nullopt : std::optional<double>(value); }
};

/// Agent scores keyed by item id.
using ScoreMap = std::map<std::string, double, std::less<>>;

/// Equal-frequency partition of items by difficulty.
struct DifficultyBinning {
  std::vector<double> edges;                  // bin_count() + 1, ascending
  std::vector<std::vector<std::string>> bins; // item ids per bin, by difficulty
  std::vector<double> mean_difficulty;        // per bin
  int min_bins = 4;
  int min_per_bin = 10;
  std::vector<std::string> warnings;

  int bin_count() const { return static_cast<int>(bins.size()); }
  std::vector<int> counts() const;
  /// Bin index of an item, or -1 when not binned.
  int bin_of(const std::string& item_id) const;
};

/// Bin count starts at max(min_bins, n / min_per_bin) and is reduced until
/// every bin holds at least min_per_bin items (never below one bin). Ties in
/// difficulty are ordered by item id.
DifficultyBinning make_bins(std::vector<std::pair<std::string, double>> items, int min_bins = 4,
                            int min_per_bin = 10);

/// Binning over a fitted model's difficulties; items with negative
/// discrimination are left out unless keep_abstruse.
DifficultyBinning binning_from_model(const FittedModel& model, bool keep_abstruse = false, int min_bins = 4,
                                     int min_per_bin = 10);

struct Dispersion {
  double mean = 0.0;
  double variance = 0.0;  // population
  InverseMeasure regularity;
};

Dispersion variance_and_regularity(std::span<const double> scores);

double bernoulli_variance(double mean);

/// 1 / sum of within-bin variances.
InverseMeasure generality_from_variances(std::span<const double> within_bin_variances);

struct GeneralityResult {
  InverseMeasure value;
  std::vector<double> bin_variances;  // population variance per non-empty bin
  int skipped_bins = 0;               // bins without any scored item
};

GeneralityResult generality(const ScoreMap& scores, const DifficultyBinning& binning);

/// Generality of expected Bernoulli responses of an agent with ability theta
/// to bins located at the given difficulties with the given discriminations.
InverseMeasure theoretical_generality(double theta, std::span<const double> bin_difficulties,
                                      std::span<const double> bin_discriminations);

struct AccPoint {
  int bin = 0;
  double difficulty = 0.0;  // bin mean difficulty
  double mean_score = 0.0;
  double variance = 0.0;    // ribbon half-width is variance / 2
  int count = 0;
};

/// One point per bin holding at least one scored item, by difficulty.
std::vector<AccPoint> empirical_acc(const ScoreMap& scores, const DifficultyBinning& binning);

struct AccSlope {
  double slope = 0.0;
  bool extrapolated = false;  // no adjacent pair brackets 0.5; least-squares slope
};

/// Slope of the first adjacent pair (by difficulty) whose mean scores bracket
/// 0.5, else the least-squares slope through all points.
AccSlope acc_slope_at_half(std::span<const AccPoint> acc);

enum class Dominance { dominates, dominated, incomparable };

std::string_view to_string(Dominance d);

/// `a` dominates `b` when it scores at least as well on every item and better
/// on one. Both must cover the same items.
Dominance dominance(const ScoreMap& a, const ScoreMap& b);

struct AgentIndicators {
  std::string agent_id;
  double mean_score = 0.0;
  double variance = 0.0;
  InverseMeasure regularity;
  InverseMeasure generality;
  std::optional<double> acc_slope;
  bool acc_slope_extrapolated = false;
  std::optional<double> theta;
  int skipped_bins = 0;
};

AgentIndicators compute_indicators(const std::string& agent_id, const ScoreMap& scores,
                                   const DifficultyBinning& binning, std::optional<double> theta = std::nullopt);

struct CorrelationTable {
  std::vector<std::string> names;  // ability, regularity, generality, mean_score
  Eigen::MatrixXd r;               // NaN where undefined
  Eigen::MatrixXi pairs_used;
  Eigen::MatrixXi excluded;        // agents dropped pairwise (unbounded or no ability)
};

/// Pearson correlations over agents; unbounded values and missing abilities
/// are dropped pairwise. Needs at least three agents.
CorrelationTable indicator_correlations(const std::vector<AgentIndicators>& all);

}  // namespace benchirt
