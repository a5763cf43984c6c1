#include "benchirt/normalize.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "benchirt/csv.hpp"
#include "benchirt/errors.hpp"

namespace benchirt {

double standard_normal_cdf(double z) { return 0.5 * (1.0 + std::erf(z / std::numbers::sqrt2)); }

NormalizedMatrix zscore_erf(const ResultMatrix& rm) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rm.rows(), rm.cols());
  for (Index i = 0; i < rm.cols(); ++i) {
    std::set<double> distinct;
    double sum = 0.0;
    Index count = 0;
    for (Index j = 0; j < rm.rows(); ++j) {
      if (rm.is_missing(j, i)) continue;
      distinct.insert(rm.values()(j, i));
      sum += rm.values()(j, i);
      ++count;
    }
    if (distinct.size() < 2)
      throw InputError("column '" + rm.item_ids()[i] + "' has fewer than two distinct values; z-scores undefined");
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (Index j = 0; j < rm.rows(); ++j)
      if (!rm.is_missing(j, i)) ss += (rm.values()(j, i) - mean) * (rm.values()(j, i) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(count));
    for (Index j = 0; j < rm.rows(); ++j)
      if (!rm.is_missing(j, i)) out(j, i) = standard_normal_cdf((rm.values()(j, i) - mean) / sd);
  }
  return {rm.labels(), std::move(out), rm.missing(), NormalizationMethod::zscore_erf};
}

NormalizedMatrix reference_scale(const ResultMatrix& rm, const std::map<std::string, double>& random_ref,
                                 const std::map<std::string, double>& target_ref) {
  constexpr double bound = 10.0;
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(rm.rows(), rm.cols());
  for (Index i = 0; i < rm.cols(); ++i) {
    const auto& id = rm.item_ids()[i];
    const auto lo = random_ref.find(id);
    const auto hi = target_ref.find(id);
    if (lo == random_ref.end() || hi == target_ref.end())
      throw InputError("missing reference score for item '" + id + "'");
    if (hi->second == lo->second)
      throw InputError("target and random reference coincide for item '" + id + "'");
    for (Index j = 0; j < rm.rows(); ++j)
      if (!rm.is_missing(j, i)) raw(j, i) = (rm.values()(j, i) - lo->second) / (hi->second - lo->second);
  }
  Eigen::MatrixXd clamped = raw.cwiseMax(-bound).cwiseMin(bound);
  return {rm.labels(), std::move(clamped), rm.missing(), NormalizationMethod::reference_scaled, std::move(raw)};
}

NormalizedMatrix identity_normalize(const ResultMatrix& rm) {
  Eigen::MatrixXd v = rm.values();
  for (Index j = 0; j < v.rows(); ++j)
    for (Index i = 0; i < v.cols(); ++i)
      if (rm.is_missing(j, i)) v(j, i) = 0.0;
  return {rm.labels(), std::move(v), rm.missing(), NormalizationMethod::identity};
}

NormalizedMatrix winrate_aggregate(const std::vector<TrialRecord>& trials) {
  Labels labels;
  std::map<std::string, Index> agents, items;
  for (const auto& t : trials) {
    if (t.win != 0 && t.win != 1)
      throw InputError("win value must be 0 or 1 for (" + t.agent + ", " + t.item + "), got " + std::to_string(t.win));
    if (agents.try_emplace(t.agent, labels.rows()).second) labels.agents.push_back(t.agent);
    if (items.try_emplace(t.item, labels.cols()).second) labels.items.push_back(t.item);
  }
  if (labels.agents.empty()) throw InputError("no trial records");
  Eigen::MatrixXd wins = Eigen::MatrixXd::Zero(labels.rows(), labels.cols());
  Eigen::MatrixXd count = Eigen::MatrixXd::Zero(labels.rows(), labels.cols());
  for (const auto& t : trials) {
    const Index j = agents.at(t.agent), i = items.at(t.item);
    wins(j, i) += t.win;
    count(j, i) += 1.0;
  }
  MissingMask missing = (count.array() == 0.0).matrix();
  Eigen::MatrixXd rate = (missing.array()).select(0.0, wins.array() / count.array().max(1.0)).matrix();
  return {std::move(labels), std::move(rate), std::move(missing), NormalizationMethod::winrate};
}

std::string describe(const BinarizePolicy& policy) {
  if (const auto* p = std::get_if<AtOrAbove>(&policy)) return "at_or_above=" + csv::format_number(p->threshold);
  return "majority_wins";
}

BinaryResponseMatrix binarize(const NormalizedMatrix& nm, const BinarizePolicy& policy) {
  double threshold = 0.5;
  if (const auto* p = std::get_if<AtOrAbove>(&policy)) {
    if (!std::isfinite(p->threshold)) throw InputError("binarization threshold must be finite");
    threshold = p->threshold;
  } else if (nm.method() != NormalizationMethod::winrate) {
    throw InputError("majority-wins binarization requires win-rate scores");
  }
  BinaryResponseMatrix::Values v = (nm.unclamped().array() >= threshold).cast<std::int8_t>().matrix();
  return {nm.labels(), std::move(v), nm.missing(), describe(policy)};
}

}  // namespace benchirt
