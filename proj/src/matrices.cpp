#include "benchirt/matrices.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

#include "benchirt/errors.hpp"

namespace benchirt {

namespace {

std::optional<Index> find_label(const std::vector<std::string>& labels, std::string_view id) {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == id) return static_cast<Index>(i);
  return std::nullopt;
}

void check_unique(const std::vector<std::string>& labels, const char* what) {
  std::unordered_set<std::string_view> seen;
  for (const auto& l : labels) {
    if (l.empty()) throw InputError(std::string("empty ") + what + " label");
    if (!seen.insert(l).second)
      throw InputError(std::string("duplicate ") + what + " label '" + l + "'");
  }
}

std::vector<std::string> take(const std::vector<std::string>& src, const std::vector<Index>& keep) {
  std::vector<std::string> out;
  out.reserve(keep.size());
  for (Index k : keep) out.push_back(src.at(static_cast<std::size_t>(k)));
  return out;
}

void check_shape(const Labels& labels, Index rows, Index cols, const char* what) {
  if (rows != labels.rows() || cols != labels.cols())
    throw InputError(std::string(what) + " dimensions do not match labels");
}

}  // namespace

std::optional<Index> Labels::agent_index(std::string_view id) const { return find_label(agents, id); }
std::optional<Index> Labels::item_index(std::string_view id) const { return find_label(items, id); }

void Labels::validate() const {
  check_unique(agents, "agent");
  check_unique(items, "item");
}

Labels Labels::select_agents(const std::vector<Index>& keep) const { return {take(agents, keep), items}; }
Labels Labels::select_items(const std::vector<Index>& keep) const { return {agents, take(items, keep)}; }

ResultMatrix::ResultMatrix(Labels labels, Eigen::MatrixXd values, MissingMask missing)
    : labels_(std::move(labels)), values_(std::move(values)), missing_(std::move(missing)) {
  labels_.validate();
  check_shape(labels_, values_.rows(), values_.cols(), "value grid");
  check_shape(labels_, missing_.rows(), missing_.cols(), "missing mask");
  for (Index j = 0; j < values_.rows(); ++j)
    for (Index i = 0; i < values_.cols(); ++i) {
      if (missing_(j, i)) {
        values_(j, i) = std::numeric_limits<double>::quiet_NaN();
      } else if (!std::isfinite(values_(j, i))) {
        throw InputError("non-finite value for agent '" + labels_.agents[j] + "', item '" +
                         labels_.items[i] + "'");
      }
    }
}

ResultMatrix::ResultMatrix(Labels labels, Eigen::MatrixXd values)
    : ResultMatrix(std::move(labels), values, MissingMask::Zero(values.rows(), values.cols())) {}

void ResultMatrix::require_population() const {
  if (rows() < 2 || cols() < 2)
    throw InputError("result matrix needs at least 2 agents and 2 items, got " +
                     std::to_string(rows()) + "x" + std::to_string(cols()));
}

ResultMatrix ResultMatrix::select_agents(const std::vector<Index>& keep) const {
  return {labels_.select_agents(keep), detail::take_rows(values_, keep), detail::take_rows(missing_, keep)};
}

ResultMatrix ResultMatrix::select_items(const std::vector<Index>& keep) const {
  return {labels_.select_items(keep), detail::take_cols(values_, keep), detail::take_cols(missing_, keep)};
}

bool operator==(const ResultMatrix& a, const ResultMatrix& b) {
  if (a.labels_ != b.labels_ || a.missing_ != b.missing_) return false;
  for (Index j = 0; j < a.rows(); ++j)
    for (Index i = 0; i < a.cols(); ++i)
      if (!a.missing_(j, i) && a.values_(j, i) != b.values_(j, i)) return false;
  return true;
}

std::string_view to_string(NormalizationMethod m) {
  switch (m) {
    case NormalizationMethod::identity: return "identity";
    case NormalizationMethod::zscore_erf: return "zscore_erf";
    case NormalizationMethod::reference_scaled: return "reference_scaled";
    case NormalizationMethod::winrate: return "winrate";
  }
  return "unknown";
}

NormalizedMatrix::NormalizedMatrix(Labels labels, Eigen::MatrixXd values, MissingMask missing,
                                   NormalizationMethod method,
                                   std::optional<Eigen::MatrixXd> unclamped)
    : labels_(std::move(labels)),
      values_(std::move(values)),
      unclamped_(unclamped ? std::move(*unclamped) : values_),
      missing_(std::move(missing)),
      method_(method) {
  labels_.validate();
  check_shape(labels_, values_.rows(), values_.cols(), "value grid");
  check_shape(labels_, unclamped_.rows(), unclamped_.cols(), "unclamped grid");
  check_shape(labels_, missing_.rows(), missing_.cols(), "missing mask");
  const bool bounded = method_ == NormalizationMethod::zscore_erf || method_ == NormalizationMethod::winrate;
  for (Index j = 0; j < values_.rows(); ++j)
    for (Index i = 0; i < values_.cols(); ++i) {
      if (missing_(j, i)) continue;
      const double v = values_(j, i);
      if (!std::isfinite(v) || (bounded && (v < 0.0 || v > 1.0)))
        throw InputError("normalized value out of range for agent '" + labels_.agents[j] +
                         "', item '" + labels_.items[i] + "'");
    }
}

ResultMatrix NormalizedMatrix::as_result_matrix() const { return {labels_, values_, missing_}; }

BinaryResponseMatrix::BinaryResponseMatrix(Labels labels, Values values, MissingMask missing,
                                           std::string rule)
    : labels_(std::move(labels)), values_(std::move(values)), missing_(std::move(missing)), rule_(std::move(rule)) {
  labels_.validate();
  check_shape(labels_, values_.rows(), values_.cols(), "response grid");
  check_shape(labels_, missing_.rows(), missing_.cols(), "missing mask");
  for (Index j = 0; j < values_.rows(); ++j)
    for (Index i = 0; i < values_.cols(); ++i) {
      if (missing_(j, i)) {
        values_(j, i) = 0;
      } else if (values_(j, i) != 0 && values_(j, i) != 1) {
        throw InputError("binary response must be 0 or 1 for agent '" + labels_.agents[j] +
                         "', item '" + labels_.items[i] + "'");
      }
    }
}

BinaryResponseMatrix::BinaryResponseMatrix(Labels labels, Values values, std::string rule)
    : BinaryResponseMatrix(std::move(labels), values, MissingMask::Zero(values.rows(), values.cols()),
                           std::move(rule)) {}

Eigen::MatrixXd BinaryResponseMatrix::responses() const { return values_.cast<double>(); }

Eigen::MatrixXd BinaryResponseMatrix::observed() const {
  return (!missing_.array()).cast<double>().matrix();
}

BinaryResponseMatrix BinaryResponseMatrix::select_agents(const std::vector<Index>& keep) const {
  return {labels_.select_agents(keep), detail::take_rows(values_, keep), detail::take_rows(missing_, keep), rule_};
}

BinaryResponseMatrix BinaryResponseMatrix::select_items(const std::vector<Index>& keep) const {
  return {labels_.select_items(keep), detail::take_cols(values_, keep), detail::take_cols(missing_, keep), rule_};
}

}  // namespace benchirt
