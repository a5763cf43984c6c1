#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace benchirt {

using Index = Eigen::Index;
using MissingMask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Row (agent) and column (item) labels of an agents x items grid.
/// Both lists are unique; order is the input order and is never changed.
struct Labels {
  std::vector<std::string> agents;
  std::vector<std::string> items;

  Index rows() const { return static_cast<Index>(agents.size()); }
  Index cols() const { return static_cast<Index>(items.size()); }

  std::optional<Index> agent_index(std::string_view id) const;
  std::optional<Index> item_index(std::string_view id) const;

  /// Throws InputError on duplicate or empty labels.
  void validate() const;

  Labels select_agents(const std::vector<Index>& keep) const;
  Labels select_items(const std::vector<Index>& keep) const;

  friend bool operator==(const Labels&, const Labels&) = default;
};

/// Raw agents x items score matrix. Missing cells hold NaN and are marked in
/// the mask; every observed value is finite.
class ResultMatrix {
 public:
  ResultMatrix(Labels labels, Eigen::MatrixXd values, MissingMask missing);
  /// All cells observed.
  ResultMatrix(Labels labels, Eigen::MatrixXd values);

  const Labels& labels() const { return labels_; }
  const std::vector<std::string>& agent_ids() const { return labels_.agents; }
  const std::vector<std::string>& item_ids() const { return labels_.items; }
  const Eigen::MatrixXd& values() const { return values_; }
  const MissingMask& missing() const { return missing_; }

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  bool is_missing(Index agent, Index item) const { return missing_(agent, item); }

  /// Throws InputError unless there are at least two agents and two items.
  void require_population() const;

  ResultMatrix select_agents(const std::vector<Index>& keep) const;
  ResultMatrix select_items(const std::vector<Index>& keep) const;

  friend bool operator==(const ResultMatrix& a, const ResultMatrix& b);

 private:
  Labels labels_;
  Eigen::MatrixXd values_;
  MissingMask missing_;
};

enum class NormalizationMethod { identity, zscore_erf, reference_scaled, winrate };

std::string_view to_string(NormalizationMethod m);

/// Scores on a comparable scale. For zscore_erf and winrate every observed
/// value lies in [0, 1]. reference_scaled stores values clamped to
/// [-10, 10] and keeps the unclamped values for binarization.
class NormalizedMatrix {
 public:
  NormalizedMatrix(Labels labels, Eigen::MatrixXd values, MissingMask missing,
                   NormalizationMethod method,
                   std::optional<Eigen::MatrixXd> unclamped = std::nullopt);

  const Labels& labels() const { return labels_; }
  const Eigen::MatrixXd& values() const { return values_; }
  /// Values before clamping; identical to values() unless reference_scaled.
  const Eigen::MatrixXd& unclamped() const { return unclamped_; }
  const MissingMask& missing() const { return missing_; }
  NormalizationMethod method() const { return method_; }

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }

  /// The same grid as a ResultMatrix, used where indicators consume scores.
  ResultMatrix as_result_matrix() const;

 private:
  Labels labels_;
  Eigen::MatrixXd values_;
  Eigen::MatrixXd unclamped_;
  MissingMask missing_;
  NormalizationMethod method_;
};

/// 0/1 success matrix (missing cells hold 0 and are flagged in the mask).
class BinaryResponseMatrix {
 public:
  using Values = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>;

  BinaryResponseMatrix(Labels labels, Values values, MissingMask missing,
                       std::string rule);
  BinaryResponseMatrix(Labels labels, Values values, std::string rule);

  const Labels& labels() const { return labels_; }
  const Values& values() const { return values_; }
  const MissingMask& missing() const { return missing_; }
  const std::string& rule() const { return rule_; }

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }

  /// Responses as doubles with zeros in missing cells.
  Eigen::MatrixXd responses() const;
  /// 1 where observed, 0 where missing.
  Eigen::MatrixXd observed() const;

  BinaryResponseMatrix select_agents(const std::vector<Index>& keep) const;
  BinaryResponseMatrix select_items(const std::vector<Index>& keep) const;

  friend bool operator==(const BinaryResponseMatrix&, const BinaryResponseMatrix&) = default;

 private:
  Labels labels_;
  Values values_;
  MissingMask missing_;
  std::string rule_;
};

namespace detail {

template <typename Derived>
auto take_rows(const Eigen::DenseBase<Derived>& m, const std::vector<Index>& keep) {
  typename Derived::PlainObject out(static_cast<Index>(keep.size()), m.cols());
  for (Index r = 0; r < out.rows(); ++r) out.row(r) = m.row(keep[r]);
  return out;
}

template <typename Derived>
auto take_cols(const Eigen::DenseBase<Derived>& m, const std::vector<Index>& keep) {
  typename Derived::PlainObject out(m.rows(), static_cast<Index>(keep.size()));
  for (Index c = 0; c < out.cols(); ++c) out.col(c) = m.col(keep[c]);
  return out;
}

}  // namespace detail

}  // namespace benchirt
