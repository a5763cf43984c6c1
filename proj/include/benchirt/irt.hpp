#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "benchirt/matrices.hpp"
#include "benchirt/quadrature.hpp"

namespace benchirt {

enum class ModelKind { two_pl, three_pl };
enum class AbilityMethod { eap, mle };

std::string_view to_string(ModelKind k);
ModelKind model_kind_from_string(std::string_view s);

/// Optimization box and boundary-agent cap.
namespace limits {
inline constexpr double max_abs_discrimination = 500.0;
inline constexpr double max_abs_difficulty = 500.0;
inline constexpr double max_guessing = 0.999;
inline constexpr double ability_cap = 6.0;
}  // namespace limits

/// Grouped chi-square item-fit statistic. `defined` is false when fewer than
/// two ability groups (or no degrees of freedom) are available.
struct FitStatistic {
  bool defined = false;
  double statistic = 0.0;
  double p_value = 1.0;
  int df = 0;
  int groups = 0;
};

struct ItemParams {
  std::string id;
  double a = 1.0;  // discrimination
  double b = 0.0;  // difficulty
  double c = 0.0;  // guessing, 0 for 2PL
  FitStatistic fit;
  bool fallback_used = false;  // Newton failed and grid search was used

  double slope_at_location() const { return a * (1.0 - c) / 4.0; }
  bool abstruse() const { return a < 0.0; }
  double prob(double theta) const;
};

struct AbilityEstimate {
  std::string id;
  double theta = 0.0;
  double standard_error = 0.0;
  bool boundary = false;  // likelihood has no interior maximum; theta is the cap
};

struct FitConfig {
  double tolerance = 1e-4;
  int max_iters = 1000;
  int quadrature_nodes = 21;
  std::uint64_t seed = 1;
  int jobs = 1;
  AbilityMethod ability_method = AbilityMethod::eap;
  /// SD of the seeded perturbation added to the standardized starting abilities.
  double start_jitter = 0.25;
};

struct Convergence {
  int iterations = 0;
  double max_param_delta = 0.0;
  double log_likelihood = 0.0;
  bool converged = false;
  /// Marginal log-likelihood at the start of each cycle, then the final value.
  std::vector<double> log_likelihood_trace;
};

struct FittedModel {
  ModelKind kind = ModelKind::two_pl;
  FitConfig config;
  std::vector<ItemParams> items;
  std::vector<AbilityEstimate> abilities;
  Convergence convergence;
  std::vector<std::string> warnings;

  const ItemParams* find_item(std::string_view id) const;
  const AbilityEstimate* find_ability(std::string_view id) const;
};

/// Number of free item parameters.
int parameter_count(ModelKind kind);

/// Expected complete-data log-likelihood of one item over a set of ability
/// points, given expected successes and trials at each point:
///   Q(p) = sum_k r_k log P_k(p) + (n_k - r_k) log(1 - P_k(p)).
/// Parameters are (a, b) for 2PL and (a, b, c) for 3PL.
class ItemObjective {
 public:
  ItemObjective(Eigen::VectorXd points, Eigen::VectorXd successes, Eigen::VectorXd trials, ModelKind kind);

  ModelKind kind() const { return kind_; }
  Eigen::Index dimension() const { return parameter_count(kind_); }

  double value(const Eigen::VectorXd& params) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& params) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& params) const;
  /// Expected (Fisher) information, positive semi-definite.
  Eigen::MatrixXd information(const Eigen::VectorXd& params) const;

  /// The same objective in slope-intercept form, logit a*theta + d with
  /// d = -a*b, parameters (a, d[, c]). Concave in (a, d) for 2PL.
  double intercept_value(const Eigen::VectorXd& u) const;
  Eigen::VectorXd intercept_gradient(const Eigen::VectorXd& u) const;
  Eigen::MatrixXd intercept_hessian(const Eigen::VectorXd& u) const;

 private:
  Eigen::VectorXd points_;
  Eigen::VectorXd successes_;
  Eigen::VectorXd trials_;
  ModelKind kind_;
};

struct ParameterBox {
  double max_abs_a = limits::max_abs_discrimination;
  double max_abs_b = limits::max_abs_difficulty;
  double max_c = limits::max_guessing;

  Eigen::VectorXd project(Eigen::VectorXd p) const;
};

struct ItemMaximum {
  Eigen::VectorXd params;
  bool fallback_used = false;
};

/// Newton-Raphson with step halving (up to 20 halvings), first in
/// slope-intercept form and then in (a, b) inside the box; falls back to a
/// bounded 101 x 101 grid over (a, b) when Newton cannot make progress away
/// from a stationary point.
ItemMaximum maximize_item(const ItemObjective& objective, Eigen::VectorXd start, const ParameterBox& box = {});

/// Per-agent posterior over quadrature nodes under a standard-normal prior.
struct Posterior {
  Eigen::MatrixXd weights;         // agents x nodes, rows sum to 1
  Eigen::VectorXd log_marginal;    // per agent
  double log_likelihood = 0.0;     // sum of log_marginal
};

/// responses/observed are agents x items (zeros where missing).
Posterior compute_posterior(const Eigen::MatrixXd& responses, const Eigen::MatrixXd& observed,
                            const std::vector<ItemParams>& items, const NormalQuadrature& quad);

double marginal_log_likelihood(const BinaryResponseMatrix& brm, const std::vector<ItemParams>& items,
                               const NormalQuadrature& quad);

/// Alternating estimation: item parameters by marginal maximum likelihood
/// (Gauss-Hermite quadrature over a standard-normal ability prior, Newton per
/// item), then abilities given items, until the largest item-parameter change
/// is at most config.tolerance or config.max_iters cycles ran. Columns must
/// not be constant. Non-convergence is reported, not thrown.
FittedModel fit(const BinaryResponseMatrix& brm, ModelKind kind, const FitConfig& config = {});

/// Scores agents against fixed item parameters (matched by item id). EAP:
/// posterior mean and SD on the quadrature grid. MLE: Fisher scoring.
/// Agents whose likelihood is monotone get +/- ability_cap and are flagged.
std::vector<AbilityEstimate> estimate_abilities(const BinaryResponseMatrix& brm, const std::vector<ItemParams>& items,
                                                int quadrature_nodes = 21,
                                                AbilityMethod method = AbilityMethod::eap);

/// Chi-square fit per item over ability deciles (adjacent groups merged until
/// each holds at least `min_group` agents), df = groups - parameters.
std::vector<FitStatistic> item_fit(const BinaryResponseMatrix& brm, const FittedModel& model, int min_group = 5);

struct SeedConsistencyReport {
  std::vector<std::uint64_t> seeds;
  std::vector<double> log_likelihoods;
  std::vector<bool> converged;
  /// Per item, max pairwise |delta| over seeds of (a, b, c).
  std::vector<std::string> item_ids;
  Eigen::MatrixXd item_deviation;  // items x parameters
  double max_item_deviation = 0.0;
  double max_ability_deviation = 0.0;
  double threshold = 0.0;          // 10 x tolerance
  bool consistent = false;
};

SeedConsistencyReport seed_consistency(const BinaryResponseMatrix& brm, ModelKind kind, const FitConfig& config,
                                       const std::vector<std::uint64_t>& seeds);

}  // namespace benchirt
