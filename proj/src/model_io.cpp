#include "benchirt/model_io.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "benchirt/csv.hpp"
#include "benchirt/errors.hpp"

namespace benchirt {

using nlohmann::json;

json to_json(const FitStatistic& f) {
  if (!f.defined) return "undefined";
  return {{"statistic", f.statistic}, {"p_value", f.p_value}, {"df", f.df}, {"groups", f.groups}};
}

json to_json(const Convergence& c, bool with_trace) {
  json j = {{"iterations", c.iterations},
            {"max_param_delta", c.max_param_delta},
            {"log_likelihood", c.log_likelihood},
            {"converged", c.converged}};
  if (with_trace) j["log_likelihood_trace"] = c.log_likelihood_trace;
  return j;
}

json to_json(const DifficultyBinning& b) {
  return {{"min_bins", b.min_bins},     {"min_per_bin", b.min_per_bin},
          {"edges", b.edges},           {"bins", b.bins},
          {"mean_difficulty", b.mean_difficulty}, {"warnings", b.warnings}};
}

json to_json(const SeedConsistencyReport& r) {
  json items = json::array();
  for (std::size_t i = 0; i < r.item_ids.size(); ++i) {
    json dev = json::array();
    for (Index p = 0; p < r.item_deviation.cols(); ++p) dev.push_back(r.item_deviation(static_cast<Index>(i), p));
    items.push_back({{"id", r.item_ids[i]}, {"max_deviation", dev}});
  }
  return {{"seeds", r.seeds},
          {"log_likelihoods", r.log_likelihoods},
          {"converged", r.converged},
          {"items", items},
          {"max_item_deviation", r.max_item_deviation},
          {"max_ability_deviation", r.max_ability_deviation},
          {"threshold", r.threshold},
          {"consistent", r.consistent}};
}

json to_json(const InverseMeasure& m) {
  if (m.unbounded) return "unbounded";
  return m.value;
}

json to_json(const AgentIndicators& ind) {
  json j = {{"agent", ind.agent_id},
            {"mean_score", ind.mean_score},
            {"variance", ind.variance},
            {"regularity", to_json(ind.regularity)},
            {"generality", to_json(ind.generality)},
            {"skipped_bins", ind.skipped_bins}};
  j["acc_slope"] = ind.acc_slope ? json(*ind.acc_slope) : json(nullptr);
  j["acc_slope_extrapolated"] = ind.acc_slope_extrapolated;
  j["ability"] = ind.theta ? json(*ind.theta) : json(nullptr);
  return j;
}

json to_json(const CorrelationTable& t) {
  json rows = json::array();
  for (Index p = 0; p < t.r.rows(); ++p) {
    json row = json::array();
    for (Index q = 0; q < t.r.cols(); ++q)
      row.push_back(std::isnan(t.r(p, q)) ? json(nullptr) : json(t.r(p, q)));
    rows.push_back(row);
  }
  json pairs = json::array(), excluded = json::array();
  for (Index p = 0; p < t.r.rows(); ++p) {
    json pr = json::array(), ex = json::array();
    for (Index q = 0; q < t.r.cols(); ++q) {
      pr.push_back(t.pairs_used(p, q));
      ex.push_back(t.excluded(p, q));
    }
    pairs.push_back(pr);
    excluded.push_back(ex);
  }
  return {{"names", t.names}, {"r", rows}, {"pairs_used", pairs}, {"excluded", excluded}};
}

json to_json(const FittedModel& model, const DifficultyBinning* binning) {
  const auto& cfg = model.config;
  json config = {{"tolerance", cfg.tolerance},
                 {"max_iters", cfg.max_iters},
                 {"quadrature_nodes", cfg.quadrature_nodes},
                 {"seed", cfg.seed},
                 {"ability_method", cfg.ability_method == AbilityMethod::eap ? "eap" : "mle"},
                 {"start_jitter", cfg.start_jitter}};
  json items = json::array();
  for (const auto& it : model.items)
    items.push_back({{"id", it.id},
                     {"a", it.a},
                     {"b", it.b},
                     {"c", it.c},
                     {"slope", it.slope_at_location()},
                     {"fit_stat", to_json(it.fit)},
                     {"abstruse", it.abstruse()},
                     {"fallback_used", it.fallback_used}});
  json abilities = json::array();
  for (const auto& ab : model.abilities)
    abilities.push_back({{"id", ab.id}, {"theta", ab.theta}, {"se", ab.standard_error}, {"boundary", ab.boundary}});
  json j = {{"model_kind", std::string(to_string(model.kind))},
            {"config", config},
            {"items", items},
            {"abilities", abilities},
            {"convergence", to_json(model.convergence)},
            {"warnings", model.warnings}};
  if (binning) j["binning"] = to_json(*binning);
  return j;
}

json to_json(const ParameterBank& bank) {
  return to_json(bank.model, bank.binning ? &*bank.binning : nullptr);
}

namespace {

FitStatistic fit_from_json(const json& j) {
  FitStatistic f;
  if (j.is_string()) return f;
  f.defined = true;
  f.statistic = j.at("statistic").get<double>();
  f.p_value = j.at("p_value").get<double>();
  f.df = j.at("df").get<int>();
  f.groups = j.at("groups").get<int>();
  return f;
}

}  // namespace

ParameterBank bank_from_json(const json& j) {
  ParameterBank bank;
  try {
    auto& m = bank.model;
    m.kind = model_kind_from_string(j.at("model_kind").get<std::string>());
    if (const auto c = j.find("config"); c != j.end()) {
      m.config.tolerance = c->value("tolerance", m.config.tolerance);
      m.config.max_iters = c->value("max_iters", m.config.max_iters);
      m.config.quadrature_nodes = c->value("quadrature_nodes", m.config.quadrature_nodes);
      m.config.seed = c->value("seed", m.config.seed);
      m.config.ability_method = c->value("ability_method", std::string("eap")) == "mle" ? AbilityMethod::mle
                                                                                         : AbilityMethod::eap;
      m.config.start_jitter = c->value("start_jitter", m.config.start_jitter);
    }
    for (const auto& it : j.at("items")) {
      ItemParams p;
      p.id = it.at("id").get<std::string>();
      p.a = it.at("a").get<double>();
      p.b = it.at("b").get<double>();
      p.c = it.value("c", 0.0);
      if (const auto f = it.find("fit_stat"); f != it.end()) p.fit = fit_from_json(*f);
      p.fallback_used = it.value("fallback_used", false);
      if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.c))
        throw InputError("item '" + p.id + "' has non-finite parameters");
      m.items.push_back(std::move(p));
    }
    if (const auto abs = j.find("abilities"); abs != j.end())
      for (const auto& ab : *abs)
        m.abilities.push_back({ab.at("id").get<std::string>(), ab.at("theta").get<double>(),
                               ab.value("se", 0.0), ab.value("boundary", false)});
    if (const auto c = j.find("convergence"); c != j.end()) {
      m.convergence.iterations = c->value("iterations", 0);
      m.convergence.max_param_delta = c->value("max_param_delta", 0.0);
      m.convergence.log_likelihood = c->value("log_likelihood", 0.0);
      m.convergence.converged = c->value("converged", false);
    }
    if (const auto w = j.find("warnings"); w != j.end()) m.warnings = w->get<std::vector<std::string>>();
    if (const auto b = j.find("binning"); b != j.end()) {
      DifficultyBinning bin;
      bin.min_bins = b->at("min_bins").get<int>();
      bin.min_per_bin = b->at("min_per_bin").get<int>();
      bin.edges = b->at("edges").get<std::vector<double>>();
      bin.bins = b->at("bins").get<std::vector<std::vector<std::string>>>();
      bin.mean_difficulty = b->at("mean_difficulty").get<std::vector<double>>();
      bin.warnings = b->value("warnings", std::vector<std::string>{});
      if (bin.bins.empty() || bin.mean_difficulty.size() != bin.bins.size())
        throw InputError("binning has inconsistent bin and difficulty lists");
      bank.binning = std::move(bin);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model file: ") + e.what());
  }
  if (bank.model.items.empty()) throw InputError("model file lists no items");
  return bank;
}

ParameterBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return bank_from_json(j);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

namespace {

std::string cell(const InverseMeasure& m) { return m.unbounded ? "unbounded" : csv::format_number(m.value); }
std::string cell(const std::optional<double>& v) { return v ? csv::format_number(*v) : ""; }

}  // namespace

void write_indicators_csv(std::ostream& out, const std::vector<AgentIndicators>& rows) {
  out << "agent,ability,mean_score,variance,regularity,generality,acc_slope,acc_slope_extrapolated,skipped_bins\n";
  for (const auto& r : rows)
    out << csv::quote(r.agent_id) << ',' << cell(r.theta) << ',' << csv::format_number(r.mean_score) << ','
        << csv::format_number(r.variance) << ',' << cell(r.regularity) << ',' << cell(r.generality) << ','
        << cell(r.acc_slope) << ',' << (r.acc_slope_extrapolated ? "true" : "false") << ',' << r.skipped_bins
        << '\n';
}

void write_correlations_csv(std::ostream& out, const CorrelationTable& t) {
  out << "indicator";
  for (const auto& n : t.names) out << ',' << n;
  out << '\n';
  for (Index p = 0; p < t.r.rows(); ++p) {
    out << t.names[static_cast<std::size_t>(p)];
    for (Index q = 0; q < t.r.cols(); ++q)
      out << ',' << (std::isnan(t.r(p, q)) ? std::string() : csv::format_number(t.r(p, q)));
    out << '\n';
  }
}

}  // namespace benchirt
