#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "benchirt/cli.hpp"
#include "benchirt/csv.hpp"
#include "benchirt/errors.hpp"
#include "commands.hpp"

namespace benchirt::cli {

namespace {

/// Appends `--key value` for each config line whose key is not already on
/// the command line, so explicit flags win.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t k = 1; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
    else if (args[k].starts_with("--config=")) path = args[k].substr(9);
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  std::set<std::string> given;
  for (const auto& a : args)
    if (a.starts_with("--")) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = csv::trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw InputError(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = csv::trim(text.substr(0, eq));
    const std::string value = csv::trim(text.substr(eq + 1));
    if (key.empty() || key == "config") throw InputError(path + ":" + std::to_string(lineno) + ": bad key");
    if (given.contains(key)) continue;
    if (value == "true") {
      args.push_back("--" + key);
    } else if (value != "false") {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  GlobalOptions g;
  FitOptions fit;
  AnalyzeOptions analyze;
  CurvesOptions curves;
  ScoreAgentOptions score;
  SimulateOptions simulate;
  std::string config_path;

  CLI::App app{"Item response theory analysis of benchmark result matrices"};
  app.name("benchirt");
  app.require_subcommand(1);
  app.add_option("--out", g.out, "Output directory (created if needed)")->capture_default_str();
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--config", config_path, "File of key=value lines mirroring flags; flags win");

  auto* f = app.add_subcommand("fit", "Normalize, binarize, filter and fit an IRT model")->fallthrough();
  f->add_option("input", fit.input, "Result matrix CSV (trial records for winrate)")->required();
  f->add_flag("--long", fit.long_format, "Input is agent,item,value rows");
  f->add_option("--normalize", fit.normalize, "zscore-erf|reference|winrate|none")->capture_default_str();
  f->add_option("--binarize", fit.binarize,
                "at-or-above=<t>|majority (default: majority for winrate, 0.5 for zscore-erf, else 1)");
  f->add_option("--random-ref", fit.random_ref, "item,value CSV of random-play scores");
  f->add_option("--target-ref", fit.target_ref, "item,value CSV of reference (human) scores");
  f->add_option("--dedupe", fit.dedupe, "exact|correlation|none")->capture_default_str();
  f->add_option("--max-corr", fit.max_corr, "Correlation above which agents are duplicates")->capture_default_str();
  f->add_option("--model", fit.model, "2PL|3PL")->capture_default_str();
  f->add_option("--tolerance", fit.tolerance, "Largest item-parameter change at convergence")->capture_default_str();
  f->add_option("--max-iters", fit.max_iters, "Estimation cycle limit")->capture_default_str();
  f->add_option("--nodes", fit.nodes, "Gauss-Hermite nodes")->capture_default_str();
  f->add_option("--seeds", fit.seeds, "Refit with this many seeds and report consistency")->capture_default_str();
  f->add_flag("--ability-mle", fit.ability_mle, "Maximum-likelihood abilities instead of EAP");
  f->add_option("--scores", fit.scores, "zscore-erf|normalized scores written for analyze")->capture_default_str();
  f->add_option("--min-bins", fit.min_bins, "Binning stored with the model")->capture_default_str();
  f->add_option("--min-per-bin", fit.min_per_bin)->capture_default_str();

  auto* a = app.add_subcommand("analyze", "Indicators, correlations and dominance per agent")->fallthrough();
  a->add_option("--model", analyze.model, "model.json from fit")->required();
  a->add_option("--scores", analyze.scores, "Score matrix CSV")->required();
  a->add_flag("--long", analyze.long_format, "Scores are agent,item,value rows");
  a->add_flag("--keep-abstruse", analyze.keep_abstruse, "Bin negative-discrimination items too");
  a->add_option("--min-bins", analyze.min_bins)->capture_default_str();
  a->add_option("--min-per-bin", analyze.min_per_bin)->capture_default_str();

  auto* c = app.add_subcommand("curves", "ICC, ACC and variance-envelope point series")->fallthrough();
  c->add_option("--model", curves.model, "model.json from fit")->required();
  c->add_option("--scores", curves.scores, "Score matrix CSV for empirical ACCs");
  c->add_flag("--long", curves.long_format);
  c->add_option("--top-k", curves.top_k, "difficulty|discrimination")->check(CLI::IsMember({"difficulty", "discrimination"}));
  c->add_option("--k", curves.k, "Items kept by --top-k")->capture_default_str();
  c->add_flag("--negative-discrimination-only", curves.negative_only);
  c->add_option("--discrimination", curves.discrimination,
                "Slope of theoretical ACCs (default: median positive discrimination)");
  c->add_flag("--keep-abstruse", curves.keep_abstruse);
  c->add_option("--min-bins", curves.min_bins)->capture_default_str();
  c->add_option("--min-per-bin", curves.min_per_bin)->capture_default_str();

  auto* s = app.add_subcommand("score-agent", "Score new agents against a frozen model")->fallthrough();
  s->add_option("--bank", score.bank, "model.json from fit")->required();
  s->add_option("--responses", score.responses, "0/1 response matrix CSV")->required();
  s->add_flag("--long", score.long_format);
  s->add_option("--nodes", score.nodes)->capture_default_str();
  s->add_flag("--ability-mle", score.ability_mle);

  auto* m = app.add_subcommand("simulate", "Sample a score model or a 2PL world")->fallthrough();
  m->add_option("spec", simulate.spec,
                "constant:v | categorical:v:p,... | uniform:lo,hi | mix:w:<m1>:<m2> | random | "
                "2pl:agents=N,items=N,seed=S")
      ->required();
  m->add_option("--n", simulate.n, "Sample size for score models")->capture_default_str();

  try {
    const auto args = merge_config(raw_args);
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ExitCode::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ExitCode::ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::input_error;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::input_error;
  }

  try {
    if (f->parsed()) return cmd_fit(g, fit, err);
    if (a->parsed()) return cmd_analyze(g, analyze, err);
    if (c->parsed()) return cmd_curves(g, curves, err);
    if (s->parsed()) return cmd_score_agent(g, score, err);
    return cmd_simulate(g, simulate, err);
  } catch (const IdMismatchError& e) {
    err << "error: " << e.what() << ":";
    for (const auto& id : e.ids()) err << ' ' << id;
    err << '\n';
    return ExitCode::id_mismatch;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::input_error;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return ExitCode::internal_error;
  }
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr); }

}  // namespace benchirt::cli
