#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "benchirt/indicators.hpp"
#include "benchirt/matrices.hpp"
#include "benchirt/random.hpp"

namespace benchirt {

/// Distribution of an agent's scores in [0, 1]: Constant, Categorical,
/// Uniform, a two-component Mix, or Random (Uniform(0, 1)).
class ScoreModel {
 public:
  struct Constant {
    double value;
  };
  struct Categorical {
    std::vector<double> values;
    std::vector<double> probs;
  };
  struct Uniform {
    double lo, hi;
  };
  struct Mix {
    std::shared_ptr<const ScoreModel> first, second;
    double weight_first;
  };
  struct Random {};
  using Kind = std::variant<Constant, Categorical, Uniform, Mix, Random>;

  static ScoreModel constant(double v);
  static ScoreModel categorical(std::vector<double> values, std::vector<double> probs);
  static ScoreModel uniform(double lo, double hi);
  static ScoreModel mix(ScoreModel first, ScoreModel second, double weight_first);
  static ScoreModel random();

  const Kind& kind() const { return kind_; }
  double mean() const;
  double variance() const;
  double sample(Rng& rng) const;
  /// Mini-grammar form accepted by parse_score_model.
  std::string describe() const;

 private:
  explicit ScoreModel(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

/// constant:0.75 | categorical:0:0.3,1:0.7 | uniform:0.3,1 |
/// mix:0.5:<model>:<model> | random. Errors carry the character position.
ScoreModel parse_score_model(std::string_view text);

std::vector<double> sample_scores(const ScoreModel& model, int n, std::uint64_t seed);

/// prefix001, prefix002, ... (at least three digits).
std::vector<std::string> sequential_ids(std::string_view prefix, Index count);

/// Known 2PL population: abilities per agent, (a, b) per item.
struct TwoPLWorld {
  Eigen::VectorXd abilities;
  Eigen::VectorXd discriminations;
  Eigen::VectorXd difficulties;
  std::uint64_t seed = 0;

  Labels labels() const;  // agent001..., item001...
};

struct TwoPLSpec {
  int agents = 500;
  int items = 60;
  std::uint64_t seed = 7;
  double a_lo = 0.5;
  double a_hi = 2.5;
};

/// 2pl:agents=500,items=60,seed=7[,a_lo=0.5,a_hi=2.5]
TwoPLSpec parse_2pl_spec(std::string_view text);

/// theta ~ N(0, 1), b ~ N(0, 1), a ~ Uniform(a_lo, a_hi).
TwoPLWorld make_2pl_world(const TwoPLSpec& spec);

/// Each cell Bernoulli(icc_prob(theta_j, a_i, b_i, 0)), row by row.
BinaryResponseMatrix sample_2pl_matrix(const TwoPLWorld& world);

/// 1 on every item in bins 1..cutoff_bin (1-based), 0 elsewhere.
ScoreMap perfectly_general_agent(const DifficultyBinning& binning, int cutoff_bin);

}  // namespace benchirt
