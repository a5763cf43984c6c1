#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "benchirt/cli.hpp"
#include "benchirt/csv.hpp"
#include "benchirt/curves.hpp"
#include "benchirt/dataio.hpp"
#include "benchirt/errors.hpp"
#include "benchirt/indicators.hpp"
#include "benchirt/irt.hpp"
#include "benchirt/model_io.hpp"
#include "benchirt/normalize.hpp"
#include "benchirt/synth.hpp"

namespace benchirt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path out_file(const GlobalOptions& g, std::string_view name) {
  const fs::path dir(g.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir / name;
}

template <class Writer>
void write_with(const fs::path& path, Writer&& w) {
  std::ostringstream os;
  w(os);
  write_text(path, os.str());
}

bool json_format(const GlobalOptions& g) {
  if (g.format != "csv" && g.format != "json") throw InputError("--format must be csv or json");
  return g.format == "json";
}

TableFormat table_format(bool long_format) { return long_format ? TableFormat::long_form : TableFormat::wide; }

std::vector<TrialRecord> load_trials(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<TrialRecord> out;
  const auto rows = csv::read(in, path.string());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = path.string() + ":" + std::to_string(row.line);
    if (row.fields.size() != 3) throw InputError(where + ": expected agent,item,win");
    const auto win = csv::parse_number(row.fields[2]);
    if (!win) {
      if (r == 0) continue;  // header
      throw InputError(where + ": win must be 0 or 1");
    }
    if (*win != 0.0 && *win != 1.0) throw InputError(where + ": win must be 0 or 1");
    out.push_back({csv::trim(row.fields[0]), csv::trim(row.fields[1]), static_cast<int>(*win)});
  }
  if (out.empty()) throw InputError(path.string() + ": no trial records");
  return out;
}

std::map<std::string, double> reference_map(const std::string& path, const char* flag) {
  if (path.empty()) throw InputError(std::string("--normalize reference needs ") + flag);
  std::map<std::string, double> out;
  for (auto& [id, v] : load_reference(path)) out[id] = v;
  return out;
}

/// Drops raw columns with fewer than two distinct observed values.
ResultMatrix drop_constant_columns(const ResultMatrix& rm, FilterReport& report) {
  std::vector<Index> keep;
  for (Index i = 0; i < rm.cols(); ++i) {
    std::set<double> seen;
    for (Index j = 0; j < rm.rows() && seen.size() < 2; ++j)
      if (!rm.is_missing(j, i)) seen.insert(rm.values()(j, i));
    if (seen.size() >= 2)
      keep.push_back(i);
    else
      report.removed_constant_items.push_back(rm.item_ids()[static_cast<std::size_t>(i)]);
  }
  return rm.select_items(keep);
}

BinarizePolicy binarize_policy(const FitOptions& o) {
  if (o.binarize.empty()) {
    if (o.normalize == "winrate") return MajorityWins{};
    if (o.normalize == "zscore-erf") return AtOrAbove{0.5};
    return AtOrAbove{1.0};
  }
  if (o.binarize == "majority") return MajorityWins{};
  constexpr std::string_view prefix = "at-or-above=";
  if (o.binarize.starts_with(prefix)) {
    const auto t = csv::parse_number(std::string_view(o.binarize).substr(prefix.size()));
    if (!t || !std::isfinite(*t)) throw InputError("--binarize threshold must be a finite number");
    return AtOrAbove{*t};
  }
  throw InputError("--binarize must be at-or-above=<t> or majority");
}

ScoreMap agent_scores(const ResultMatrix& rm, Index row) {
  ScoreMap out;
  for (Index i = 0; i < rm.cols(); ++i)
    if (!rm.is_missing(row, i)) out[rm.item_ids()[static_cast<std::size_t>(i)]] = rm.values()(row, i);
  return out;
}

void require_known_items(const std::vector<std::string>& ids, const FittedModel& model, std::string_view what) {
  std::vector<std::string> unknown;
  for (const auto& id : ids)
    if (!model.find_item(id)) unknown.push_back(id);
  if (!unknown.empty())
    throw IdMismatchError(std::string(what) + " lists items unknown to the model", std::move(unknown));
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_fit(const GlobalOptions& g, const FitOptions& o, std::ostream& log) {
  static const std::set<std::string> methods = {"none", "zscore-erf", "reference", "winrate"};
  if (!methods.contains(o.normalize)) throw InputError("--normalize must be zscore-erf, reference, winrate or none");
  if (o.scores != "zscore-erf" && o.scores != "normalized")
    throw InputError("--scores must be zscore-erf or normalized");
  if (o.seeds < 1) throw InputError("--seeds must be at least 1");
  const BinarizePolicy policy = binarize_policy(o);

  ResultMatrix raw = o.normalize == "winrate" ? winrate_aggregate(load_trials(o.input)).as_result_matrix()
                                              : load_results(o.input, table_format(o.long_format));
  FilterReport report;
  if (o.dedupe != "none") {
    if (o.dedupe != "exact" && o.dedupe != "correlation") throw InputError("--dedupe must be exact, correlation or none");
    auto d = dedupe_agents(raw, o.max_corr, o.dedupe == "exact" ? DuplicateRule::exact : DuplicateRule::correlation);
    raw = std::move(d.matrix);
    report = std::move(d.report);
  }
  raw = drop_constant_columns(raw, report);
  if (raw.cols() < 2) throw InputError("fewer than two non-constant items remain");

  const NormalizedMatrix nm = [&] {
    if (o.normalize == "zscore-erf") return zscore_erf(raw);
    if (o.normalize == "reference")
      return reference_scale(raw, reference_map(o.random_ref, "--random-ref"), reference_map(o.target_ref, "--target-ref"));
    if (o.normalize == "winrate")
      return NormalizedMatrix(raw.labels(), raw.values(), raw.missing(), NormalizationMethod::winrate);
    return identity_normalize(raw);
  }();

  auto filtered = filter_constant_items(binarize(nm, policy));
  for (auto& id : filtered.report.removed_constant_items) report.removed_constant_items.push_back(std::move(id));
  const BinaryResponseMatrix& brm = filtered.responses;
  if (brm.cols() < 2) throw InputError("fewer than two non-constant items remain after binarization");

  FitConfig cfg;
  cfg.tolerance = o.tolerance;
  cfg.max_iters = o.max_iters;
  cfg.quadrature_nodes = o.nodes;
  cfg.seed = g.seed;
  cfg.jobs = g.jobs;
  cfg.ability_method = o.ability_mle ? AbilityMethod::mle : AbilityMethod::eap;
  const ModelKind kind = model_kind_from_string(o.model);
  const FittedModel model = fit(brm, kind, cfg);

  ParameterBank bank{model, std::nullopt};
  try {
    bank.binning = binning_from_model(model, false, o.min_bins, o.min_per_bin);
  } catch (const InputError& e) {
    bank.model.warnings.push_back(std::string("no binning stored: ") + e.what());
  }
  for (const auto& w : bank.model.warnings) log << "warning: " << w << '\n';
  if (bank.binning)
    for (const auto& w : bank.binning->warnings) log << "warning: " << w << '\n';

  write_text(out_file(g, "model.json"), dump(to_json(bank)));
  write_text(out_file(g, "filter_report.json"), dump(to_json(report)));
  json conv = to_json(model.convergence, true);
  conv["model_kind"] = std::string(to_string(kind));
  conv["agents"] = brm.rows();
  conv["items"] = brm.cols();
  conv["warnings"] = bank.model.warnings;
  write_text(out_file(g, "convergence.json"), dump(conv));

  const ResultMatrix scores = (o.scores == "zscore-erf" ? zscore_erf(raw).as_result_matrix() : nm.as_result_matrix())
                                  .select_items(filtered.kept_items);
  write_with(out_file(g, "scores.csv"), [&](std::ostream& os) { write_results(os, scores, TableFormat::wide); });

  if (o.seeds > 1) {
    std::vector<std::uint64_t> seeds;
    for (int s = 0; s < o.seeds; ++s) seeds.push_back(g.seed + static_cast<std::uint64_t>(s));
    const auto rep = seed_consistency(brm, kind, cfg, seeds);
    write_text(out_file(g, "seed_consistency.json"), dump(to_json(rep)));
    if (!rep.consistent)
      log << "warning: estimates differ across seeds by up to " << rep.max_item_deviation << " (threshold "
          << rep.threshold << ")\n";
  }

  const auto abstruse = std::count_if(model.items.begin(), model.items.end(), [](const auto& it) { return it.abstruse(); });
  log << "fit " << to_string(kind) << ": " << brm.rows() << " agents, " << brm.cols() << " items ("
      << abstruse << " with negative discrimination), " << report.removed_constant_items.size()
      << " constant items removed, " << model.convergence.iterations << " cycles, "
      << (model.convergence.converged ? "converged" : "NOT converged") << '\n';
  return model.convergence.converged ? ExitCode::ok : ExitCode::not_converged;
}

// ---------------------------------------------------------------------------

int cmd_analyze(const GlobalOptions& g, const AnalyzeOptions& o, std::ostream& log) {
  const bool as_json = json_format(g);
  const ParameterBank bank = load_bank(o.model);
  const ResultMatrix scores = load_results(o.scores, table_format(o.long_format), {.require_population = false});
  require_known_items(scores.item_ids(), bank.model, "score file");
  const DifficultyBinning binning = binning_from_model(bank.model, o.keep_abstruse, o.min_bins, o.min_per_bin);
  for (const auto& w : binning.warnings) log << "warning: " << w << '\n';

  std::vector<AgentIndicators> rows;
  std::vector<ScoreMap> maps;
  for (Index j = 0; j < scores.rows(); ++j) {
    const auto& id = scores.agent_ids()[static_cast<std::size_t>(j)];
    ScoreMap sm = agent_scores(scores, j);
    if (sm.empty()) {
      log << "warning: agent '" << id << "' has no scores; skipped\n";
      continue;
    }
    const AbilityEstimate* ab = bank.model.find_ability(id);
    rows.push_back(compute_indicators(id, sm, binning, ab ? std::optional<double>(ab->theta) : std::nullopt));
    maps.push_back(std::move(sm));
  }
  if (rows.empty()) throw InputError("no agent has any score");

  std::optional<CorrelationTable> corr;
  if (rows.size() >= 3)
    corr = indicator_correlations(rows);
  else
    log << "warning: correlations need at least 3 agents\n";

  // dominance among agents whose generality is unbounded, over shared items
  json dom = json::array();
  std::ostringstream dom_csv;
  dom_csv << "agent_a,agent_b,relation,shared_items\n";
  for (std::size_t p = 0; p < rows.size(); ++p) {
    if (!rows[p].generality.unbounded) continue;
    for (std::size_t q = p + 1; q < rows.size(); ++q) {
      if (!rows[q].generality.unbounded) continue;
      ScoreMap a, b;
      for (const auto& [id, v] : maps[p])
        if (const auto it = maps[q].find(id); it != maps[q].end()) {
          a[id] = v;
          b[id] = it->second;
        }
      if (a.empty()) continue;
      const auto rel = to_string(dominance(a, b));
      dom.push_back({{"agent_a", rows[p].agent_id}, {"agent_b", rows[q].agent_id}, {"relation", rel},
                     {"shared_items", a.size()}});
      dom_csv << csv::quote(rows[p].agent_id) << ',' << csv::quote(rows[q].agent_id) << ',' << rel << ','
              << a.size() << '\n';
    }
  }

  if (as_json) {
    json ind = json::array();
    for (const auto& r : rows) ind.push_back(to_json(r));
    write_text(out_file(g, "indicators.json"), dump({{"binning", to_json(binning)}, {"agents", ind}}));
    if (corr) write_text(out_file(g, "correlations.json"), dump(to_json(*corr)));
    write_text(out_file(g, "dominance.json"), dump(dom));
  } else {
    write_with(out_file(g, "indicators.csv"), [&](std::ostream& os) { write_indicators_csv(os, rows); });
    if (corr) write_with(out_file(g, "correlations.csv"), [&](std::ostream& os) { write_correlations_csv(os, *corr); });
    write_text(out_file(g, "dominance.csv"), dom_csv.str());
  }
  log << "analyze: " << rows.size() << " agents, " << binning.bin_count() << " difficulty bins\n";
  return ExitCode::ok;
}

// ---------------------------------------------------------------------------

int cmd_curves(const GlobalOptions& g, const CurvesOptions& o, std::ostream& log) {
  const bool as_json = json_format(g);
  const ParameterBank bank = load_bank(o.model);
  ItemSelection sel;
  sel.k = o.k;
  sel.negative_only = o.negative_only;
  if (!o.top_k.empty()) {
    if (o.top_k == "difficulty") sel.top_k_by = RankBy::difficulty;
    else if (o.top_k == "discrimination") sel.top_k_by = RankBy::discrimination;
    else throw InputError("--top-k must be difficulty or discrimination");
  }
  const auto items = select_items(bank.model.items, sel);
  if (items.empty()) {
    log << "warning: selection is empty; no curves written\n";
    return ExitCode::ok;
  }

  std::vector<CurveSeries> series;
  const auto grid = icc_grid(items);
  for (const auto& it : items) series.push_back(icc_curve(it, grid));

  const double disc = o.discrimination.value_or(median_positive_discrimination(bank.model.items));
  const auto dgrid = icc_grid(bank.model.items);
  for (const auto& ab : bank.model.abilities) series.push_back(theoretical_acc(ab.id, ab.theta, disc, dgrid));

  if (!o.scores.empty()) {
    const ResultMatrix scores = load_results(o.scores, table_format(o.long_format), {.require_population = false});
    require_known_items(scores.item_ids(), bank.model, "score file");
    const auto binning = binning_from_model(bank.model, o.keep_abstruse, o.min_bins, o.min_per_bin);
    for (Index j = 0; j < scores.rows(); ++j) {
      const auto acc = empirical_acc(agent_scores(scores, j), binning);
      if (!acc.empty()) series.push_back(empirical_acc_curve(scores.agent_ids()[static_cast<std::size_t>(j)], acc));
    }
  }
  series.push_back(variance_envelope());

  if (as_json)
    write_text(out_file(g, "curves.json"), dump(to_json(series)));
  else
    write_with(out_file(g, "curves.csv"), [&](std::ostream& os) { write_curves_csv(os, series); });
  log << "curves: " << items.size() << " items, " << series.size() << " series\n";
  return ExitCode::ok;
}

// ---------------------------------------------------------------------------

int cmd_score_agent(const GlobalOptions& g, const ScoreAgentOptions& o, std::ostream& log) {
  const ParameterBank bank = load_bank(o.bank);
  const ResultMatrix responses = load_results(o.responses, table_format(o.long_format), {.require_population = false});
  require_known_items(responses.item_ids(), bank.model, "response file");
  const auto brm = as_binary(responses, "input");
  const auto abilities = estimate_abilities(brm, bank.model.items, o.nodes,
                                            o.ability_mle ? AbilityMethod::mle : AbilityMethod::eap);

  std::string binning_source = "bank";
  DifficultyBinning binning;
  if (bank.binning) {
    binning = *bank.binning;
  } else {
    binning = binning_from_model(bank.model);
    binning_source = "recomputed";
    log << "warning: bank has no stored binning; recomputed from difficulties\n";
  }

  json agents = json::array();
  for (Index j = 0; j < responses.rows(); ++j) {
    const auto& ab = abilities[static_cast<std::size_t>(j)];
    json entry = {{"id", ab.id}, {"theta", ab.theta}, {"se", ab.standard_error}, {"boundary", ab.boundary}};
    const ScoreMap sm = agent_scores(responses, j);
    try {
      entry["indicators"] = to_json(compute_indicators(ab.id, sm, binning, ab.theta));
    } catch (const InputError& e) {
      entry["indicators"] = nullptr;
      log << "warning: no indicators for '" << ab.id << "': " << e.what() << '\n';
    }
    agents.push_back(std::move(entry));
    if (ab.boundary) log << "warning: agent '" << ab.id << "' has a monotone likelihood; theta capped\n";
  }
  write_text(out_file(g, "score.json"), dump({{"binning_source", binning_source}, {"agents", agents}}));
  log << "score-agent: " << responses.rows() << " agents scored against " << bank.model.items.size()
      << " frozen items\n";
  return ExitCode::ok;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const GlobalOptions& g, const SimulateOptions& o, std::ostream& log) {
  if (o.spec.starts_with("2pl:")) {
    TwoPLSpec spec = parse_2pl_spec(o.spec);
    if (o.spec.find("seed=") == std::string::npos) spec.seed = g.seed;
    const TwoPLWorld world = make_2pl_world(spec);
    const auto brm = sample_2pl_matrix(world);
    write_with(out_file(g, "matrix.csv"), [&](std::ostream& os) { write_binary(os, brm); });
    const Labels labels = world.labels();
    json agents = json::array(), items = json::array();
    for (Index j = 0; j < world.abilities.size(); ++j)
      agents.push_back({{"id", labels.agents[static_cast<std::size_t>(j)]}, {"theta", world.abilities[j]}});
    for (Index i = 0; i < world.difficulties.size(); ++i)
      items.push_back({{"id", labels.items[static_cast<std::size_t>(i)]},
                       {"a", world.discriminations[i]},
                       {"b", world.difficulties[i]},
                       {"c", 0.0}});
    write_text(out_file(g, "truth.json"),
               dump({{"model", "2PL"},
                     {"spec", {{"agents", spec.agents}, {"items", spec.items}, {"seed", spec.seed},
                               {"a_lo", spec.a_lo}, {"a_hi", spec.a_hi}}},
                     {"agents", agents},
                     {"items", items}}));
    log << "simulate: " << spec.agents << " x " << spec.items << " 2PL responses\n";
    return ExitCode::ok;
  }

  const ScoreModel model = parse_score_model(o.spec);
  const auto xs = sample_scores(model, o.n, g.seed);
  Eigen::MatrixXd values = Eigen::Map<const Eigen::RowVectorXd>(xs.data(), static_cast<Index>(xs.size()));
  const ResultMatrix rm({{"agent001"}, sequential_ids("item", static_cast<Index>(xs.size()))}, values);
  write_with(out_file(g, "matrix.csv"), [&](std::ostream& os) { write_results(os, rm, TableFormat::wide); });
  const auto sample = variance_and_regularity(xs);
  const double var = model.variance();
  write_text(out_file(g, "truth.json"),
             dump({{"model", model.describe()},
                   {"n", o.n},
                   {"seed", g.seed},
                   {"analytic_mean", model.mean()},
                   {"analytic_variance", var},
                   {"analytic_regularity", to_json(InverseMeasure::reciprocal(var))},
                   {"sample_mean", sample.mean},
                   {"sample_variance", sample.variance},
                   {"sample_regularity", to_json(sample.regularity)}}));
  log << "simulate: " << o.n << " scores from " << model.describe() << '\n';
  return ExitCode::ok;
}

}  // namespace benchirt::cli
