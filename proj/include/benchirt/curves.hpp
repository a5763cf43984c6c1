#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "benchirt/indicators.hpp"
#include "benchirt/irt.hpp"

namespace benchirt {

enum class CurveKind { icc, acc_theoretical, acc_empirical, variance_envelope };

std::string_view to_string(CurveKind k);

/// Plot-ready point series; x strictly increasing.
struct CurveSeries {
  CurveKind kind = CurveKind::icc;
  std::string subject;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> ribbon;  // half-widths, empty when not applicable
};

/// 201 points spanning [min b - 4, max b + 4].
std::vector<double> icc_grid(const std::vector<ItemParams>& items, int points = 201, double pad = 4.0);

CurveSeries icc_curve(const ItemParams& item, const std::vector<double>& grid);

/// P(success) of an agent of ability theta as a function of item difficulty,
/// at a common discrimination.
CurveSeries theoretical_acc(const std::string& agent, double theta, double discrimination,
                            const std::vector<double>& difficulty_grid);

/// Bin mean scores against bin mean difficulty; ribbon = variance / 2.
CurveSeries empirical_acc_curve(const std::string& agent, const std::vector<AccPoint>& acc);

/// y = x (1 - x) over [0, 1].
CurveSeries variance_envelope(int points = 101);

/// Median of the positive discriminations; 1 when there are none.
double median_positive_discrimination(const std::vector<ItemParams>& items);

enum class RankBy { difficulty, discrimination };

struct ItemSelection {
  std::optional<RankBy> top_k_by;
  int k = 3;
  bool negative_only = false;
};

/// Items ranked descending by the criterion among positive-discrimination
/// items, or only the negative-discrimination items, or all items.
std::vector<ItemParams> select_items(const std::vector<ItemParams>& items, const ItemSelection& sel);

void write_curves_csv(std::ostream& out, const std::vector<CurveSeries>& series);
nlohmann::json to_json(const std::vector<CurveSeries>& series);

}  // namespace benchirt
