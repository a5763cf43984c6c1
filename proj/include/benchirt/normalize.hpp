#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "benchirt/matrices.hpp"

namespace benchirt {

/// Standard normal CDF, (1 + erf(z / sqrt 2)) / 2.
double standard_normal_cdf(double z);

/// Per column: population z-score over observed cells, then the standard
/// normal CDF. Throws InputError naming any column with fewer than two
/// distinct observed values.
NormalizedMatrix zscore_erf(const ResultMatrix& rm);

/// Per item: (v - random) / (target - random), stored clamped to [-10, 10].
/// Items absent from the matrix are ignored; a present item without both
/// references is an error.
NormalizedMatrix reference_scale(const ResultMatrix& rm, const std::map<std::string, double>& random_ref,
                                 const std::map<std::string, double>& target_ref);

/// Values taken as already comparable (no transform).
NormalizedMatrix identity_normalize(const ResultMatrix& rm);

struct TrialRecord {
  std::string agent;
  std::string item;
  int win = 0;
};

/// Wins / trials per (agent, item) cell; labels in first-appearance order and
/// cells without trials missing.
NormalizedMatrix winrate_aggregate(const std::vector<TrialRecord>& trials);

struct AtOrAbove {
  double threshold = 1.0;
};
struct MajorityWins {};
using BinarizePolicy = std::variant<AtOrAbove, MajorityWins>;

/// at_or_above uses the unclamped values; majority_wins requires a winrate
/// matrix and scores 1 iff the win fraction is at least one half.
BinaryResponseMatrix binarize(const NormalizedMatrix& nm, const BinarizePolicy& policy);

std::string describe(const BinarizePolicy& policy);

}  // namespace benchirt
