#include "benchirt/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "benchirt/csv.hpp"
#include "benchirt/errors.hpp"
#include "benchirt/stats.hpp"

namespace benchirt {

namespace {

std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line) + ": ";
}

bool is_missing_cell(const std::string& cell) { return cell.empty() || cell == "NA"; }

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

ResultMatrix parse_wide(const std::vector<csv::Row>& rows, std::string_view source) {
  if (rows.empty()) throw InputError(std::string(source) + ": empty matrix");
  const auto& header = rows.front();
  if (header.fields.empty() || lower(header.fields[0]) != "agent")
    throw InputError(where(source, header.line) + "wide format header must start with 'agent'");

  Labels labels;
  labels.items.assign(header.fields.begin() + 1, header.fields.end());
  for (std::size_t c = 0; c < labels.items.size(); ++c)
    if (labels.items[c].empty())
      throw InputError(where(source, header.line) + "empty item id in column " + std::to_string(c + 2));

  const Index n = labels.cols();
  const Index m = static_cast<Index>(rows.size()) - 1;
  if (m == 0 || n == 0) throw InputError(std::string(source) + ": empty matrix");

  Eigen::MatrixXd values(m, n);
  MissingMask missing = MissingMask::Zero(m, n);
  for (Index j = 0; j < m; ++j) {
    const auto& row = rows[static_cast<std::size_t>(j) + 1];
    if (static_cast<Index>(row.fields.size()) != n + 1)
      throw InputError(where(source, row.line) + "expected " + std::to_string(n + 1) + " fields, got " +
                       std::to_string(row.fields.size()));
    labels.agents.push_back(row.fields[0]);
    for (Index i = 0; i < n; ++i) {
      const auto& cell = row.fields[static_cast<std::size_t>(i) + 1];
      if (is_missing_cell(cell)) {
        missing(j, i) = true;
        continue;
      }
      const auto v = csv::parse_number(cell);
      if (!v || !std::isfinite(*v))
        throw InputError(where(source, row.line) + "non-numeric value '" + cell + "' in column '" +
                         labels.items[static_cast<std::size_t>(i)] + "'");
      values(j, i) = *v;
    }
  }
  try {
    return ResultMatrix(std::move(labels), std::move(values), std::move(missing));
  } catch (const InputError& e) {
    throw InputError(std::string(source) + ": " + e.what());
  }
}

ResultMatrix parse_long(const std::vector<csv::Row>& rows, std::string_view source) {
  std::size_t first = 0;
  if (!rows.empty() && rows[0].fields.size() == 3 && lower(rows[0].fields[0]) == "agent" &&
      lower(rows[0].fields[1]) == "item")
    first = 1;
  if (rows.size() <= first) throw InputError(std::string(source) + ": empty matrix");

  Labels labels;
  std::map<std::string, Index> agent_pos, item_pos;
  struct Cell {
    Index agent, item;
    double value;
    std::size_t line;
  };
  std::vector<Cell> cells;
  for (std::size_t r = first; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 3)
      throw InputError(where(source, row.line) + "expected 3 fields (agent,item,value), got " +
                       std::to_string(row.fields.size()));
    const auto& agent = row.fields[0];
    const auto& item = row.fields[1];
    if (agent.empty() || item.empty()) throw InputError(where(source, row.line) + "empty agent or item id");
    const auto v = csv::parse_number(row.fields[2]);
    if (!v || !std::isfinite(*v))
      throw InputError(where(source, row.line) + "non-numeric value '" + row.fields[2] + "'");
    auto [a, a_new] = agent_pos.try_emplace(agent, labels.rows());
    if (a_new) labels.agents.push_back(agent);
    auto [i, i_new] = item_pos.try_emplace(item, labels.cols());
    if (i_new) labels.items.push_back(item);
    cells.push_back({a->second, i->second, *v, row.line});
  }

  const Index m = labels.rows(), n = labels.cols();
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(m, n);
  MissingMask missing = MissingMask::Constant(m, n, true);
  for (const auto& c : cells) {
    if (!missing(c.agent, c.item))
      throw InputError(where(source, c.line) + "duplicate cell (" + labels.agents[c.agent] + ", " +
                       labels.items[c.item] + ")");
    missing(c.agent, c.item) = false;
    values(c.agent, c.item) = c.value;
  }
  return ResultMatrix(std::move(labels), std::move(values), std::move(missing));
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

ResultMatrix parse_results(std::istream& in, TableFormat format, std::string_view source, LoadOptions options) {
  const auto rows = csv::read(in, source);
  ResultMatrix rm = format == TableFormat::wide ? parse_wide(rows, source) : parse_long(rows, source);
  if (options.require_population) {
    try {
      rm.require_population();
    } catch (const InputError& e) {
      throw InputError(std::string(source) + ": " + e.what());
    }
  }
  return rm;
}

ResultMatrix load_results(const std::filesystem::path& path, TableFormat format, LoadOptions options) {
  auto in = open_input(path);
  return parse_results(in, format, path.string(), options);
}

void write_results(std::ostream& out, const ResultMatrix& rm, TableFormat format) {
  if (format == TableFormat::wide) {
    out << "agent";
    for (const auto& item : rm.item_ids()) out << ',' << csv::quote(item);
    out << '\n';
    for (Index j = 0; j < rm.rows(); ++j) {
      out << csv::quote(rm.agent_ids()[j]);
      for (Index i = 0; i < rm.cols(); ++i) {
        out << ',';
        if (!rm.is_missing(j, i)) out << csv::format_number(rm.values()(j, i));
      }
      out << '\n';
    }
    return;
  }
  out << "agent,item,value\n";
  for (Index j = 0; j < rm.rows(); ++j)
    for (Index i = 0; i < rm.cols(); ++i)
      if (!rm.is_missing(j, i))
        out << csv::quote(rm.agent_ids()[j]) << ',' << csv::quote(rm.item_ids()[i]) << ','
            << csv::format_number(rm.values()(j, i)) << '\n';
}

void save_results(const std::filesystem::path& path, const ResultMatrix& rm, TableFormat format) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  write_results(out, rm, format);
}

void write_binary(std::ostream& out, const BinaryResponseMatrix& brm) {
  out << "agent";
  for (const auto& item : brm.labels().items) out << ',' << csv::quote(item);
  out << '\n';
  for (Index j = 0; j < brm.rows(); ++j) {
    out << csv::quote(brm.labels().agents[j]);
    for (Index i = 0; i < brm.cols(); ++i) {
      out << ',';
      if (!brm.missing()(j, i)) out << static_cast<int>(brm.values()(j, i));
    }
    out << '\n';
  }
}

BinaryResponseMatrix as_binary(const ResultMatrix& rm, std::string rule) {
  BinaryResponseMatrix::Values v = BinaryResponseMatrix::Values::Zero(rm.rows(), rm.cols());
  for (Index j = 0; j < rm.rows(); ++j)
    for (Index i = 0; i < rm.cols(); ++i) {
      if (rm.is_missing(j, i)) continue;
      const double x = rm.values()(j, i);
      if (x != 0.0 && x != 1.0)
        throw InputError("expected a 0/1 value for agent '" + rm.agent_ids()[j] + "', item '" +
                         rm.item_ids()[i] + "', got " + csv::format_number(x));
      v(j, i) = static_cast<std::int8_t>(x);
    }
  return {rm.labels(), std::move(v), rm.missing(), std::move(rule)};
}

nlohmann::json to_json(const ResultMatrix& rm) {
  nlohmann::json values = nlohmann::json::array();
  nlohmann::json mask = nlohmann::json::array();
  for (Index j = 0; j < rm.rows(); ++j) {
    nlohmann::json vrow = nlohmann::json::array();
    nlohmann::json mrow = nlohmann::json::array();
    for (Index i = 0; i < rm.cols(); ++i) {
      const bool miss = rm.is_missing(j, i);
      vrow.push_back(miss ? nlohmann::json(nullptr) : nlohmann::json(rm.values()(j, i)));
      mrow.push_back(miss);
    }
    values.push_back(std::move(vrow));
    mask.push_back(std::move(mrow));
  }
  return {{"agent_ids", rm.agent_ids()}, {"item_ids", rm.item_ids()}, {"values", values}, {"missing_mask", mask}};
}

ResultMatrix result_matrix_from_json(const nlohmann::json& j) {
  try {
    Labels labels{j.at("agent_ids").get<std::vector<std::string>>(), j.at("item_ids").get<std::vector<std::string>>()};
    const Index m = labels.rows(), n = labels.cols();
    const auto& vals = j.at("values");
    const auto& mask = j.at("missing_mask");
    if (static_cast<Index>(vals.size()) != m || static_cast<Index>(mask.size()) != m)
      throw InputError("matrix JSON: row count does not match agent_ids");
    Eigen::MatrixXd values(m, n);
    MissingMask missing(m, n);
    for (Index r = 0; r < m; ++r) {
      if (static_cast<Index>(vals[r].size()) != n || static_cast<Index>(mask[r].size()) != n)
        throw InputError("matrix JSON: column count does not match item_ids in row " + std::to_string(r));
      for (Index c = 0; c < n; ++c) {
        missing(r, c) = mask[r][c].get<bool>();
        values(r, c) = missing(r, c) ? 0.0 : vals[r][c].get<double>();
      }
    }
    return ResultMatrix(std::move(labels), std::move(values), std::move(missing));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("matrix JSON: ") + e.what());
  }
}

std::vector<std::pair<std::string, double>> parse_reference(std::istream& in, std::string_view source) {
  const auto rows = csv::read(in, source);
  std::vector<std::pair<std::string, double>> out;
  std::map<std::string, bool> seen;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 2) throw InputError(where(source, row.line) + "expected item_id,value");
    const auto v = csv::parse_number(row.fields[1]);
    if (!v) {
      if (r == 0) continue;  // header
      throw InputError(where(source, row.line) + "non-numeric reference value '" + row.fields[1] + "'");
    }
    if (!seen.emplace(row.fields[0], true).second)
      throw InputError(where(source, row.line) + "duplicate reference for item '" + row.fields[0] + "'");
    out.emplace_back(row.fields[0], *v);
  }
  return out;
}

std::vector<std::pair<std::string, double>> load_reference(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_reference(in, path.string());
}

nlohmann::json to_json(const FilterReport& report) {
  nlohmann::json dups = nlohmann::json::array();
  for (const auto& d : report.removed_duplicate_agents)
    dups.push_back({{"kept", d.kept}, {"removed", d.removed}, {"correlation", d.correlation}});
  nlohmann::json thresholds = nlohmann::json::object();
  if (report.duplicate_rule)
    thresholds["duplicate_rule"] = *report.duplicate_rule == DuplicateRule::exact ? "exact" : "correlation";
  if (report.max_corr) thresholds["max_corr"] = *report.max_corr;
  return {{"removed_constant_items", report.removed_constant_items},
          {"removed_duplicate_agents", dups},
          {"thresholds", thresholds}};
}

ConstantFilterResult filter_constant_items(const BinaryResponseMatrix& brm) {
  FilterReport report;
  std::vector<Index> keep;
  for (Index i = 0; i < brm.cols(); ++i) {
    bool seen0 = false, seen1 = false;
    for (Index j = 0; j < brm.rows(); ++j) {
      if (brm.missing()(j, i)) continue;
      (brm.values()(j, i) ? seen1 : seen0) = true;
    }
    if (seen0 && seen1) {
      keep.push_back(i);
    } else {
      report.removed_constant_items.push_back(brm.labels().items[static_cast<std::size_t>(i)]);
    }
  }
  return {brm.select_items(keep), std::move(report), std::move(keep)};
}

namespace {

bool exact_duplicate(const ResultMatrix& rm, Index a, Index b) {
  if (rm.missing().row(a) != rm.missing().row(b)) return false;
  for (Index i = 0; i < rm.cols(); ++i)
    if (!rm.is_missing(a, i) && rm.values()(a, i) != rm.values()(b, i)) return false;
  return true;
}

std::optional<double> shared_correlation(const ResultMatrix& rm, Index a, Index b) {
  std::vector<double> xs, ys;
  for (Index i = 0; i < rm.cols(); ++i) {
    if (rm.is_missing(a, i) || rm.is_missing(b, i)) continue;
    xs.push_back(rm.values()(a, i));
    ys.push_back(rm.values()(b, i));
  }
  return stats::pearson(xs, ys);
}

}  // namespace

DedupeResult dedupe_agents(const ResultMatrix& rm, double max_corr, DuplicateRule rule) {
  if (!(max_corr > 0.0 && max_corr <= 1.0)) throw InputError("max_corr must lie in (0, 1]");
  FilterReport report;
  report.duplicate_rule = rule;
  report.max_corr = max_corr;
  std::vector<Index> keep;
  for (Index j = 0; j < rm.rows(); ++j) {
    std::optional<DuplicatePair> match;
    for (Index k : keep) {
      if (rule == DuplicateRule::exact) {
        if (exact_duplicate(rm, k, j)) {
          match = DuplicatePair{rm.agent_ids()[k], rm.agent_ids()[j], shared_correlation(rm, k, j).value_or(1.0)};
          break;
        }
      } else if (const auto r = shared_correlation(rm, k, j); r && *r > max_corr) {
        match = DuplicatePair{rm.agent_ids()[k], rm.agent_ids()[j], *r};
        break;
      }
    }
    if (match) {
      report.removed_duplicate_agents.push_back(*match);
    } else {
      keep.push_back(j);
    }
  }
  return {rm.select_agents(keep), std::move(report), std::move(keep)};
}

}  // namespace benchirt
