#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace benchirt::cli {

struct GlobalOptions {
  std::string out = ".";
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string format = "csv";
};

struct FitOptions {
  std::string input;
  bool long_format = false;
  std::string normalize = "none";
  std::string binarize;  // empty: pipeline default
  std::string random_ref;
  std::string target_ref;
  std::string dedupe = "none";
  double max_corr = 0.99;
  std::string model = "2PL";
  double tolerance = 1e-4;
  int max_iters = 1000;
  int nodes = 21;
  int seeds = 1;
  bool ability_mle = false;
  std::string scores = "zscore-erf";
  int min_bins = 4;
  int min_per_bin = 10;
};

struct AnalyzeOptions {
  std::string model;
  std::string scores;
  bool long_format = false;
  bool keep_abstruse = false;
  int min_bins = 4;
  int min_per_bin = 10;
};

struct CurvesOptions {
  std::string model;
  std::string scores;  // optional, enables empirical ACCs
  bool long_format = false;
  std::string top_k;   // "", "difficulty" or "discrimination"
  int k = 3;
  bool negative_only = false;
  std::optional<double> discrimination;
  bool keep_abstruse = false;
  int min_bins = 4;
  int min_per_bin = 10;
};

struct ScoreAgentOptions {
  std::string bank;
  std::string responses;
  bool long_format = false;
  int nodes = 21;
  bool ability_mle = false;
};

struct SimulateOptions {
  std::string spec;
  int n = 100;
};

int cmd_fit(const GlobalOptions& g, const FitOptions& o, std::ostream& log);
int cmd_analyze(const GlobalOptions& g, const AnalyzeOptions& o, std::ostream& log);
int cmd_curves(const GlobalOptions& g, const CurvesOptions& o, std::ostream& log);
int cmd_score_agent(const GlobalOptions& g, const ScoreAgentOptions& o, std::ostream& log);
int cmd_simulate(const GlobalOptions& g, const SimulateOptions& o, std::ostream& log);

}  // namespace benchirt::cli
