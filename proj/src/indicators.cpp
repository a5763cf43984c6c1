#include "benchirt/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "benchirt/errors.hpp"
#include "benchirt/logistic.hpp"
#include "benchirt/stats.hpp"

namespace benchirt {

InverseMeasure InverseMeasure::reciprocal(double dispersion) {
  if (dispersion == 0.0) return {0.0, true};
  return {1.0 / dispersion, false};
}

std::vector<int> DifficultyBinning::counts() const {
  std::vector<int> out;
  for (const auto& b : bins) out.push_back(static_cast<int>(b.size()));
  return out;
}

int DifficultyBinning::bin_of(const std::string& item_id) const {
  for (std::size_t h = 0; h < bins.size(); ++h)
    if (std::find(bins[h].begin(), bins[h].end(), item_id) != bins[h].end()) return static_cast<int>(h);
  return -1;
}

DifficultyBinning make_bins(std::vector<std::pair<std::string, double>> items, int min_bins, int min_per_bin) {
  if (items.empty()) throw InputError("cannot bin an empty item list");
  if (min_bins < 1 || min_per_bin < 1) throw InputError("min_bins and min_per_bin must be at least 1");
  std::sort(items.begin(), items.end(), [](const auto& l, const auto& r) {
    return l.second != r.second ? l.second < r.second : l.first < r.first;
  });
  const int n = static_cast<int>(items.size());
  int k = std::max(min_bins, n / min_per_bin);
  while (k > 1 && n / k < min_per_bin) --k;

  DifficultyBinning out;
  out.min_bins = min_bins;
  out.min_per_bin = min_per_bin;
  if (k < min_bins) {
    out.warnings.push_back(k == 1 ? "too few items for " + std::to_string(min_bins) + " bins of " +
                                        std::to_string(min_per_bin) + "; using a single bin"
                                  : "only " + std::to_string(k) + " bins of at least " +
                                        std::to_string(min_per_bin) + " items possible");
  }

  const int base = n / k, extra = n % k;
  int pos = 0;
  out.edges.push_back(items.front().second);
  for (int h = 0; h < k; ++h) {
    const int size = base + (h < extra ? 1 : 0);
    std::vector<std::string> ids;
    double sum = 0.0;
    for (int t = pos; t < pos + size; ++t) {
      ids.push_back(items[static_cast<std::size_t>(t)].first);
      sum += items[static_cast<std::size_t>(t)].second;
    }
    out.bins.push_back(std::move(ids));
    out.mean_difficulty.push_back(sum / size);
    pos += size;
    out.edges.push_back(pos < n ? 0.5 * (items[static_cast<std::size_t>(pos) - 1].second +
                                         items[static_cast<std::size_t>(pos)].second)
                                : items.back().second);
  }
  return out;
}

DifficultyBinning binning_from_model(const FittedModel& model, bool keep_abstruse, int min_bins, int min_per_bin) {
  std::vector<std::pair<std::string, double>> items;
  for (const auto& it : model.items)
    if (keep_abstruse || !it.abstruse()) items.emplace_back(it.id, it.b);
  if (items.empty()) throw InputError("no items with positive discrimination to bin");
  return make_bins(std::move(items), min_bins, min_per_bin);
}

Dispersion variance_and_regularity(std::span<const double> scores) {
  if (scores.empty()) throw InputError("variance of an empty score list");
  const auto m = stats::population_moments(scores);
  return {m.mean, m.variance, InverseMeasure::reciprocal(m.variance)};
}

double bernoulli_variance(double mean) { return mean * (1.0 - mean); }

InverseMeasure generality_from_variances(std::span<const double> within_bin_variances) {
  double sum = 0.0;
  for (double v : within_bin_variances) sum += v;
  return InverseMeasure::reciprocal(sum);
}

namespace {

std::vector<double> scores_in_bin(const ScoreMap& scores, const std::vector<std::string>& bin) {
  std::vector<double> out;
  for (const auto& id : bin)
    if (const auto it = scores.find(id); it != scores.end()) out.push_back(it->second);
  return out;
}

}  // namespace

GeneralityResult generality(const ScoreMap& scores, const DifficultyBinning& binning) {
  GeneralityResult res;
  for (const auto& bin : binning.bins) {
    const auto xs = scores_in_bin(scores, bin);
    if (xs.empty()) {
      ++res.skipped_bins;
      continue;
    }
    res.bin_variances.push_back(stats::population_moments(xs).variance);
  }
  if (res.bin_variances.empty()) throw InputError("agent has no scored item in any bin");
  res.value = generality_from_variances(res.bin_variances);
  return res;
}

InverseMeasure theoretical_generality(double theta, std::span<const double> bin_difficulties,
                                      std::span<const double> bin_discriminations) {
  if (bin_difficulties.size() != bin_discriminations.size())
    throw InputError("bin difficulties and discriminations differ in length");
  double sum = 0.0;
  for (std::size_t h = 0; h < bin_difficulties.size(); ++h)
    sum += logistic_variance(bin_discriminations[h] * (theta - bin_difficulties[h]));
  return InverseMeasure::reciprocal(sum);
}

std::vector<AccPoint> empirical_acc(const ScoreMap& scores, const DifficultyBinning& binning) {
  std::vector<AccPoint> out;
  for (int h = 0; h < binning.bin_count(); ++h) {
    const auto xs = scores_in_bin(scores, binning.bins[static_cast<std::size_t>(h)]);
    if (xs.empty()) continue;
    const auto m = stats::population_moments(xs);
    out.push_back({h, binning.mean_difficulty[static_cast<std::size_t>(h)], m.mean, m.variance,
                   static_cast<int>(xs.size())});
  }
  return out;
}

AccSlope acc_slope_at_half(std::span<const AccPoint> acc) {
  if (acc.size() < 2) throw InputError("ACC slope needs at least two points");
  for (std::size_t h = 0; h + 1 < acc.size(); ++h) {
    const auto& p = acc[h];
    const auto& q = acc[h + 1];
    const double lo = std::min(p.mean_score, q.mean_score), hi = std::max(p.mean_score, q.mean_score);
    if (lo <= 0.5 && 0.5 <= hi && q.difficulty != p.difficulty)
      return {(q.mean_score - p.mean_score) / (q.difficulty - p.difficulty), false};
  }
  double sx = 0.0, sy = 0.0;
  for (const auto& p : acc) {
    sx += p.difficulty;
    sy += p.mean_score;
  }
  const double n = static_cast<double>(acc.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : acc) {
    sxx += (p.difficulty - mx) * (p.difficulty - mx);
    sxy += (p.difficulty - mx) * (p.mean_score - my);
  }
  return {sxx > 0.0 ? sxy / sxx : 0.0, true};
}

std::string_view to_string(Dominance d) {
  switch (d) {
    case Dominance::dominates: return "dominates";
    case Dominance::dominated: return "dominated";
    case Dominance::incomparable: return "incomparable";
  }
  return "incomparable";
}

Dominance dominance(const ScoreMap& a, const ScoreMap& b) {
  std::vector<std::string> mismatch;
  for (const auto& [id, _] : a)
    if (!b.contains(id)) mismatch.push_back(id);
  for (const auto& [id, _] : b)
    if (!a.contains(id)) mismatch.push_back(id);
  if (!mismatch.empty()) throw IdMismatchError("dominance needs identical item sets", mismatch);
  bool a_better = false, b_better = false;
  for (const auto& [id, sa] : a) {
    const double sb = b.find(id)->second;
    if (sa > sb) a_better = true;
    if (sb > sa) b_better = true;
  }
  if (a_better && !b_better) return Dominance::dominates;
  if (b_better && !a_better) return Dominance::dominated;
  return Dominance::incomparable;
}

AgentIndicators compute_indicators(const std::string& agent_id, const ScoreMap& scores,
                                   const DifficultyBinning& binning, std::optional<double> theta) {
  AgentIndicators out;
  out.agent_id = agent_id;
  out.theta = theta;
  std::vector<double> xs;
  for (const auto& [_, v] : scores) xs.push_back(v);
  const auto disp = variance_and_regularity(xs);
  out.mean_score = disp.mean;
  out.variance = disp.variance;
  out.regularity = disp.regularity;
  const auto gen = generality(scores, binning);
  out.generality = gen.value;
  out.skipped_bins = gen.skipped_bins;
  const auto acc = empirical_acc(scores, binning);
  if (acc.size() >= 2) {
    const auto slope = acc_slope_at_half(acc);
    out.acc_slope = slope.slope;
    out.acc_slope_extrapolated = slope.extrapolated;
  }
  return out;
}

CorrelationTable indicator_correlations(const std::vector<AgentIndicators>& all) {
  if (all.size() < 3) throw InputError("indicator correlations need at least 3 agents");
  CorrelationTable t;
  t.names = {"ability", "regularity", "generality", "mean_score"};
  auto column = [&](const AgentIndicators& ind, int k) -> std::optional<double> {
    switch (k) {
      case 0: return ind.theta;
      case 1: return ind.regularity.finite();
      case 2: return ind.generality.finite();
      default: return ind.mean_score;
    }
  };
  const int d = static_cast<int>(t.names.size());
  t.r = Eigen::MatrixXd::Constant(d, d, std::numeric_limits<double>::quiet_NaN());
  t.pairs_used = Eigen::MatrixXi::Zero(d, d);
  t.excluded = Eigen::MatrixXi::Zero(d, d);
  for (int p = 0; p < d; ++p)
    for (int q = p; q < d; ++q) {
      std::vector<double> xs, ys;
      for (const auto& ind : all) {
        const auto x = column(ind, p), y = column(ind, q);
        if (x && y) {
          xs.push_back(*x);
          ys.push_back(*y);
        }
      }
      const auto r = stats::pearson(xs, ys);
      const double value = r ? (p == q ? 1.0 : *r) : std::numeric_limits<double>::quiet_NaN();
      t.r(p, q) = t.r(q, p) = value;
      t.pairs_used(p, q) = t.pairs_used(q, p) = static_cast<int>(xs.size());
      t.excluded(p, q) = t.excluded(q, p) = static_cast<int>(all.size() - xs.size());
    }
  return t;
}

}  // namespace benchirt
