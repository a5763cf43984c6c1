#include <cmath>
#include <numeric>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "benchirt/errors.hpp"
#include "benchirt/indicators.hpp"
#include "benchirt/logistic.hpp"
#include "benchirt/synth.hpp"

using namespace benchirt;
using ::testing::ElementsAre;
using ::testing::HasSubstr;

namespace {

struct Moments {
  double mean, variance;
};

Moments sample_moments(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, ss / n};
}

std::string error_of(std::string_view spec) {
  try {
    parse_score_model(spec);
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(ScoreModel, ConstantMoments) {
  for (double v : {0.0, 1.0, 0.25, 0.5, 0.75}) {
    const auto m = ScoreModel::constant(v);
    EXPECT_EQ(m.mean(), v);
    EXPECT_EQ(m.variance(), 0.0);
    const auto xs = sample_scores(m, 100, 1);
    EXPECT_EQ(xs.size(), 100u);
    for (double x : xs) EXPECT_EQ(x, v);
  }
}

TEST(ScoreModel, CategoricalMomentsByHand) {
  struct Row {
    std::vector<double> values, probs;
    double mean, variance;
  };
  // E[X] and E[X^2] - E[X]^2 written out per row
  const std::vector<Row> rows = {
      {{0.3, 0.4}, {0.5, 0.5}, 0.35, 0.5 * 0.09 + 0.5 * 0.16 - 0.35 * 0.35},
      {{0.7, 0.8}, {0.5, 0.5}, 0.75, 0.5 * 0.49 + 0.5 * 0.64 - 0.75 * 0.75},
      {{0.6, 0.9}, {0.5, 0.5}, 0.75, 0.5 * 0.36 + 0.5 * 0.81 - 0.75 * 0.75},
      {{0.0, 1.0}, {0.3, 0.7}, 0.70, 0.7 - 0.49},
      {{0.25, 1.0}, {0.3, 0.7}, 0.775, 0.3 * 0.0625 + 0.7 - 0.775 * 0.775},
      {{0.5, 1.0}, {0.3, 0.7}, 0.85, 0.3 * 0.25 + 0.7 - 0.85 * 0.85},
      {{0.75, 1.0}, {0.3, 0.7}, 0.925, 0.3 * 0.5625 + 0.7 - 0.925 * 0.925},
  };
  for (const auto& r : rows) {
    const auto m = ScoreModel::categorical(r.values, r.probs);
    EXPECT_NEAR(m.mean(), r.mean, 1e-12);
    EXPECT_NEAR(m.variance(), r.variance, 1e-12);
  }
  EXPECT_NEAR(ScoreModel::categorical({0.6, 0.9}, {0.5, 0.5}).variance(), 0.0225, 1e-12);
  EXPECT_NEAR(ScoreModel::categorical({0.25, 1.0}, {0.3, 0.7}).variance(), 0.118125, 1e-12);
  EXPECT_NEAR(ScoreModel::categorical({0.75, 1.0}, {0.3, 0.7}).variance(), 0.013125, 1e-12);
}

TEST(ScoreModel, UniformMixAndRandom) {
  const auto u = ScoreModel::uniform(0.3, 1.0);
  EXPECT_NEAR(u.mean(), 0.65, 1e-12);
  EXPECT_NEAR(u.variance(), 0.49 / 12.0, 1e-12);

  const auto mix = ScoreModel::mix(ScoreModel::constant(0.75), u, 0.5);
  EXPECT_NEAR(mix.mean(), 0.70, 1e-12);
  // total variance: mean of variances plus variance of means
  const double within = 0.5 * 0.0 + 0.5 * 0.49 / 12.0;
  const double between = 0.5 * 0.05 * 0.05 + 0.5 * 0.05 * 0.05;
  EXPECT_NEAR(mix.variance(), within + between, 1e-12);

  EXPECT_NEAR(ScoreModel::random().mean(), 0.5, 1e-15);
  EXPECT_NEAR(ScoreModel::random().variance(), 1.0 / 12.0, 1e-15);
}

TEST(ScoreModel, InvariantsEnforced) {
  EXPECT_THROW(ScoreModel::constant(1.5), InputError);
  EXPECT_THROW(ScoreModel::categorical({0.1, 0.2}, {0.5, 0.6}), InputError);
  EXPECT_THROW(ScoreModel::categorical({0.1, 1.2}, {0.5, 0.5}), InputError);
  EXPECT_THROW(ScoreModel::categorical({0.1}, {0.5, 0.5}), InputError);
  EXPECT_THROW(ScoreModel::uniform(0.5, 0.5), InputError);
  EXPECT_THROW(ScoreModel::uniform(-0.1, 0.5), InputError);
  EXPECT_THROW(ScoreModel::mix(ScoreModel::random(), ScoreModel::random(), 1.1), InputError);
  EXPECT_THROW(sample_scores(ScoreModel::random(), 0, 1), InputError);
}

TEST(ScoreModel, SamplesConvergeToAnalyticMoments) {
  const std::vector<std::string> specs = {
      "categorical:0.3:0.5,0.4:0.5", "categorical:0.6:0.5,0.9:0.5", "categorical:0:0.3,1:0.7",
      "categorical:0.25:0.3,1:0.7",  "uniform:0.3,1",               "mix:0.5:constant:0.75:uniform:0.3,1",
      "mix:0.5:categorical:0:0.3,1:0.7:uniform:0.3,1",             "random"};
  std::uint64_t seed = 100;
  for (const auto& spec : specs) {
    const auto m = parse_score_model(spec);
    const auto s = sample_moments(sample_scores(m, 100000, seed++));
    EXPECT_NEAR(s.mean, m.mean(), 0.01 * m.mean()) << spec;
    EXPECT_NEAR(s.variance, m.variance(), 0.01 * m.variance()) << spec;
  }
}

TEST(ScoreModel, SamplingIsDeterministicPerSeed) {
  const auto m = parse_score_model("mix:0.3:random:categorical:0.1:0.5,0.9:0.5");
  EXPECT_EQ(sample_scores(m, 500, 9), sample_scores(m, 500, 9));
  EXPECT_NE(sample_scores(m, 500, 9), sample_scores(m, 500, 10));
  for (double x : sample_scores(m, 500, 9)) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
}

TEST(Grammar, ParsesEveryForm) {
  EXPECT_EQ(parse_score_model("constant:0.75").mean(), 0.75);
  EXPECT_NEAR(parse_score_model("categorical:0:0.3,1:0.7").variance(), 0.21, 1e-12);
  EXPECT_NEAR(parse_score_model("uniform:0.3,1").mean(), 0.65, 1e-12);
  EXPECT_NEAR(parse_score_model("mix:0.5:constant:0.75:uniform:0.3,1").mean(), 0.70, 1e-12);
  EXPECT_NEAR(parse_score_model("mix:0.5:mix:0.5:constant:0:constant:1:random").mean(), 0.5, 1e-12);
  EXPECT_TRUE(std::holds_alternative<ScoreModel::Random>(parse_score_model("random").kind()));
}

TEST(Grammar, DescribeRoundTrips) {
  for (const std::string spec : {"constant:0.75", "categorical:0:0.3,1:0.7", "uniform:0.3,1",
                                 "mix:0.5:constant:0.75:uniform:0.3,1", "random"}) {
    EXPECT_EQ(parse_score_model(spec).describe(), spec);
  }
}

TEST(Grammar, ErrorsCarryPosition) {
  EXPECT_THAT(error_of("bogus:1"), HasSubstr("position 1"));
  EXPECT_THAT(error_of("bogus:1"), HasSubstr("unknown model 'bogus'"));
  EXPECT_THAT(error_of("constant:x"), HasSubstr("position 10"));
  EXPECT_THAT(error_of("constant:0.5junk"), HasSubstr("position 13: unexpected trailing input"));
  EXPECT_THAT(error_of("uniform:0.3;1"), HasSubstr("position 12: expected ','"));
  EXPECT_THAT(error_of("mix:0.5:constant:0.75"), HasSubstr("position 22: expected ':'"));
  EXPECT_THAT(error_of("categorical:0.3:0.4"), HasSubstr("sum to 1"));
  EXPECT_THAT(error_of("uniform:0.9,0.1"), HasSubstr("in 'uniform:0.9,0.1'"));
}

TEST(SequentialIds, PadsToThreeDigits) {
  EXPECT_THAT(sequential_ids("item", 3), ElementsAre("item001", "item002", "item003"));
  const auto many = sequential_ids("a", 1200);
  EXPECT_EQ(many.front(), "a0001");
  EXPECT_EQ(many.back(), "a1200");
}

TEST(TwoPLSpec, ParsesAndRejects) {
  const auto s = parse_2pl_spec("2pl:agents=500,items=60,seed=7");
  EXPECT_EQ(s.agents, 500);
  EXPECT_EQ(s.items, 60);
  EXPECT_EQ(s.seed, 7u);
  EXPECT_EQ(s.a_lo, 0.5);
  EXPECT_EQ(s.a_hi, 2.5);
  EXPECT_EQ(parse_2pl_spec("2pl:a_lo=1,a_hi=1").a_hi, 1.0);
  EXPECT_THROW(parse_2pl_spec("3pl:agents=5"), InputError);
  try {
    parse_2pl_spec("2pl:agents=5,colour=3");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_THAT(e.what(), HasSubstr("position 14"));
    EXPECT_THAT(e.what(), HasSubstr("unknown key 'colour'"));
  }
  EXPECT_THROW(parse_2pl_spec("2pl:agents=0"), InputError);
  EXPECT_THROW(parse_2pl_spec("2pl:a_lo=3,a_hi=1"), InputError);
}

TEST(TwoPLWorld, DrawsFromTheStatedDistributions) {
  const auto w = make_2pl_world({4000, 4000, 3, 0.5, 2.5});
  EXPECT_NEAR(w.abilities.mean(), 0.0, 4.0 / std::sqrt(4000.0));
  EXPECT_NEAR(w.difficulties.mean(), 0.0, 4.0 / std::sqrt(4000.0));
  EXPECT_NEAR(w.abilities.squaredNorm() / 4000.0, 1.0, 0.1);
  EXPECT_GE(w.discriminations.minCoeff(), 0.5);
  EXPECT_LT(w.discriminations.maxCoeff(), 2.5);
  EXPECT_NEAR(w.discriminations.mean(), 1.5, 4.0 * std::sqrt(4.0 / 12.0 / 4000.0));
  const auto labels = w.labels();
  EXPECT_EQ(labels.agents.front(), "agent0001");
  EXPECT_EQ(labels.items.back(), "item4000");
}

TEST(TwoPLWorld, SamplingIsReproducible) {
  const auto w = make_2pl_world({50, 20, 11, 0.5, 2.5});
  const auto m1 = sample_2pl_matrix(w), m2 = sample_2pl_matrix(make_2pl_world({50, 20, 11, 0.5, 2.5}));
  EXPECT_TRUE(m1.values() == m2.values());
  EXPECT_EQ(m1.rule(), "2pl_sample");
}

TEST(TwoPLWorld, CellMeansMatchIcc) {
  // Fixed parameters, replicate response draws by changing only the seed.
  TwoPLWorld w;
  w.abilities = Eigen::Vector3d(-1.0, 0.2, 1.5);
  w.discriminations = Eigen::Vector4d(0.5, 1.0, 2.0, 3.0);
  w.difficulties = Eigen::Vector4d(0.0, -0.5, 1.0, 0.2);
  const int reps = 10000;
  Eigen::MatrixXd hits = Eigen::MatrixXd::Zero(3, 4);
  for (int r = 0; r < reps; ++r) {
    w.seed = static_cast<std::uint64_t>(r);
    hits += sample_2pl_matrix(w).values().cast<double>();
  }
  for (Index j = 0; j < 3; ++j)
    for (Index i = 0; i < 4; ++i) {
      const double p = icc_prob(w.abilities[j], w.discriminations[i], w.difficulties[i]);
      EXPECT_NEAR(hits(j, i) / reps, p, 3.0 * std::sqrt(p * (1 - p) / reps)) << j << "," << i;
    }
}

TEST(TwoPLWorld, MidpointAndSaturation) {
  TwoPLWorld w;
  w.seed = 4;
  w.abilities = Eigen::VectorXd::Constant(200, 0.3);
  w.discriminations = Eigen::VectorXd::Constant(100, 1.7);
  w.difficulties = Eigen::VectorXd::Constant(100, 0.3);
  const double rate = sample_2pl_matrix(w).values().cast<double>().mean();
  EXPECT_NEAR(rate, 0.5, 4.0 * std::sqrt(0.25 / 20000.0));

  w.discriminations.setConstant(50.0);
  w.abilities = Eigen::Vector2d(1.3, -0.7);
  const auto v = sample_2pl_matrix(w).values();
  EXPECT_EQ(v.row(0).cast<int>().sum(), 100);
  EXPECT_EQ(v.row(1).cast<int>().sum(), 0);
}

TEST(PerfectlyGeneralAgent, StepsAtTheCutoff) {
  std::vector<std::pair<std::string, double>> items;
  const auto ids = sequential_ids("item", 40);
  for (int k = 0; k < 40; ++k) items.emplace_back(ids[static_cast<std::size_t>(k)], 0.1 * k);
  const auto binning = make_bins(items);

  const auto all = perfectly_general_agent(binning, 4);
  for (const auto& [_, v] : all) EXPECT_EQ(v, 1.0);

  const auto half = perfectly_general_agent(binning, 2);
  EXPECT_EQ(half.size(), 40u);
  for (const auto& [id, v] : half) EXPECT_EQ(v, binning.bin_of(id) < 2 ? 1.0 : 0.0);
  EXPECT_TRUE(generality(half, binning).value.unbounded);

  EXPECT_THROW(perfectly_general_agent(binning, 0), InputError);
  EXPECT_THROW(perfectly_general_agent(binning, 5), InputError);
}

TEST(PerfectlyGeneralAgent, HigherCutoffDominates) {
  std::vector<std::pair<std::string, double>> items;
  const auto ids = sequential_ids("item", 60);
  for (int k = 0; k < 60; ++k) items.emplace_back(ids[static_cast<std::size_t>(k)], 0.05 * k);
  const auto binning = make_bins(items);
  EXPECT_EQ(dominance(perfectly_general_agent(binning, 5), perfectly_general_agent(binning, 2)),
            Dominance::dominates);
}
