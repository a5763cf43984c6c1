#include "benchirt/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "benchirt/csv.hpp"
#include "benchirt/errors.hpp"
#include "benchirt/logistic.hpp"

namespace benchirt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw InputError(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

ScoreModel ScoreModel::constant(double v) {
  require_unit(v, "constant score");
  return ScoreModel(Constant{v});
}

ScoreModel ScoreModel::categorical(std::vector<double> values, std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size())
    throw InputError("categorical model needs matching, non-empty value and probability lists");
  double total = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    require_unit(values[k], "categorical value");
    require_unit(probs[k], "categorical probability");
    total += probs[k];
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("categorical probabilities must sum to 1");
  return ScoreModel(Categorical{std::move(values), std::move(probs)});
}

ScoreModel ScoreModel::uniform(double lo, double hi) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) throw InputError("uniform model needs 0 <= lo < hi <= 1");
  return ScoreModel(Uniform{lo, hi});
}

ScoreModel ScoreModel::mix(ScoreModel first, ScoreModel second, double weight_first) {
  require_unit(weight_first, "mix weight");
  return ScoreModel(Mix{std::make_shared<const ScoreModel>(std::move(first)),
                        std::make_shared<const ScoreModel>(std::move(second)), weight_first});
}

ScoreModel ScoreModel::random() { return ScoreModel(Random{}); }

double ScoreModel::mean() const {
  return std::visit(overloaded{
                        [](const Constant& c) { return c.value; },
                        [](const Categorical& c) {
                          return std::inner_product(c.values.begin(), c.values.end(), c.probs.begin(), 0.0);
                        },
                        [](const Uniform& u) { return 0.5 * (u.lo + u.hi); },
                        [](const Mix& m) {
                          return m.weight_first * m.first->mean() + (1.0 - m.weight_first) * m.second->mean();
                        },
                        [](const Random&) { return 0.5; },
                    },
                    kind_);
}

double ScoreModel::variance() const {
  return std::visit(overloaded{
                        [](const Constant&) { return 0.0; },
                        [this](const Categorical& c) {
                          const double mu = mean();
                          double v = 0.0;
                          for (std::size_t k = 0; k < c.values.size(); ++k)
                            v += c.probs[k] * (c.values[k] - mu) * (c.values[k] - mu);
                          return v;
                        },
                        [](const Uniform& u) { return (u.hi - u.lo) * (u.hi - u.lo) / 12.0; },
                        [this](const Mix& m) {
                          // law of total variance
                          const double mu = mean();
                          const double w = m.weight_first;
                          const double d1 = m.first->mean() - mu, d2 = m.second->mean() - mu;
                          return w * (m.first->variance() + d1 * d1) + (1.0 - w) * (m.second->variance() + d2 * d2);
                        },
                        [](const Random&) { return 1.0 / 12.0; },
                    },
                    kind_);
}

double ScoreModel::sample(Rng& rng) const {
  return std::visit(overloaded{
                        [](const Constant& c) { return c.value; },
                        [&rng](const Categorical& c) {
                          const double u = rng.uniform();
                          double acc = 0.0;
                          for (std::size_t k = 0; k < c.values.size(); ++k) {
                            acc += c.probs[k];
                            if (u < acc) return c.values[k];
                          }
                          return c.values.back();
                        },
                        [&rng](const Uniform& u) { return rng.uniform(u.lo, u.hi); },
                        [&rng](const Mix& m) {
                          return rng.uniform() < m.weight_first ? m.first->sample(rng) : m.second->sample(rng);
                        },
                        [&rng](const Random&) { return rng.uniform(); },
                    },
                    kind_);
}

std::string ScoreModel::describe() const {
  auto num = [](double v) { return csv::format_number(v); };
  return std::visit(overloaded{
                        [&](const Constant& c) { return "constant:" + num(c.value); },
                        [&](const Categorical& c) {
                          std::string s = "categorical:";
                          for (std::size_t k = 0; k < c.values.size(); ++k)
                            s += (k ? "," : "") + num(c.values[k]) + ":" + num(c.probs[k]);
                          return s;
                        },
                        [&](const Uniform& u) { return "uniform:" + num(u.lo) + "," + num(u.hi); },
                        [&](const Mix& m) {
                          return "mix:" + num(m.weight_first) + ":" + m.first->describe() + ":" + m.second->describe();
                        },
                        [](const Random&) { return std::string("random"); },
                    },
                    kind_);
}

// ---------------------------------------------------------------------------
// Mini-grammar

namespace {

class SpecParser {
 public:
  explicit SpecParser(std::string_view text) : text_(text) {}

  ScoreModel parse_all() {
    ScoreModel m = parse_model();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return m;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw InputError("model spec error at position " + std::to_string(pos_ + 1) + ": " + what + " in '" +
                     std::string(text_) + "'");
  }

  bool peek(char ch) const { return pos_ < text_.size() && text_[pos_] == ch; }

  void expect(char ch) {
    if (!peek(ch)) fail(std::string("expected '") + ch + "'");
    ++pos_;
  }

  std::string_view word() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  double number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const char ch = text_[pos_];
      const bool sign_after_exp = (ch == '-' || ch == '+') && pos_ > start &&
                                  (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E');
      if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.' || ch == 'e' || ch == 'E' ||
          ((ch == '-' || ch == '+') && (pos_ == start || sign_after_exp)))
        ++pos_;
      else
        break;
    }
    const auto v = csv::parse_number(text_.substr(start, pos_ - start));
    if (!v) {
      pos_ = start;
      fail("expected a number");
    }
    return *v;
  }

  ScoreModel parse_model() {
    const std::size_t start = pos_;
    const std::string_view kind = word();
    try {
      if (kind == "random") return ScoreModel::random();
      expect(':');
      if (kind == "constant") return ScoreModel::constant(number());
      if (kind == "uniform") {
        const double lo = number();
        expect(',');
        return ScoreModel::uniform(lo, number());
      }
      if (kind == "categorical") {
        std::vector<double> values, probs;
        do {
          if (!values.empty()) ++pos_;  // ','
          values.push_back(number());
          expect(':');
          probs.push_back(number());
        } while (peek(','));
        return ScoreModel::categorical(std::move(values), std::move(probs));
      }
      if (kind == "mix") {
        const double w = number();
        expect(':');
        ScoreModel first = parse_model();
        expect(':');
        ScoreModel second = parse_model();
        return ScoreModel::mix(std::move(first), std::move(second), w);
      }
    } catch (const InputError& e) {
      if (std::string_view(e.what()).starts_with("model spec error")) throw;
      pos_ = start;
      fail(e.what());
    }
    pos_ = start;
    fail("unknown model '" + std::string(kind) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

ScoreModel parse_score_model(std::string_view text) { return SpecParser(text).parse_all(); }

std::vector<double> sample_scores(const ScoreModel& model, int n, std::uint64_t seed) {
  if (n < 1) throw InputError("sample size must be at least 1");
  Rng rng(seed);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& v : out) v = model.sample(rng);
  return out;
}

// ---------------------------------------------------------------------------
// 2PL worlds

std::vector<std::string> sequential_ids(std::string_view prefix, Index count) {
  const int width = std::max(3, static_cast<int>(std::to_string(count).size()));
  std::vector<std::string> out;
  for (Index k = 1; k <= count; ++k) {
    const std::string digits = std::to_string(k);
    const std::size_t pad = static_cast<std::size_t>(width) - std::min(static_cast<std::size_t>(width), digits.size());
    out.push_back(std::string(prefix) + std::string(pad, '0') + digits);
  }
  return out;
}

Labels TwoPLWorld::labels() const {
  return {sequential_ids("agent", abilities.size()), sequential_ids("item", difficulties.size())};
}

TwoPLSpec parse_2pl_spec(std::string_view text) {
  constexpr std::string_view prefix = "2pl:";
  if (!text.starts_with(prefix)) throw InputError("2PL spec must start with '2pl:'");
  TwoPLSpec spec;
  std::size_t pos = prefix.size();
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const std::string_view kv = text.substr(pos, end - pos);
    const std::size_t eq = kv.find('=');
    if (eq == std::string_view::npos)
      throw InputError("2PL spec error at position " + std::to_string(pos + 1) + ": expected key=value");
    const std::string_view key = kv.substr(0, eq);
    const auto v = csv::parse_number(kv.substr(eq + 1));
    if (!v)
      throw InputError("2PL spec error at position " + std::to_string(pos + eq + 2) + ": expected a number");
    if (key == "agents") spec.agents = static_cast<int>(*v);
    else if (key == "items") spec.items = static_cast<int>(*v);
    else if (key == "seed") spec.seed = static_cast<std::uint64_t>(*v);
    else if (key == "a_lo") spec.a_lo = *v;
    else if (key == "a_hi") spec.a_hi = *v;
    else throw InputError("2PL spec error at position " + std::to_string(pos + 1) + ": unknown key '" + std::string(key) + "'");
    pos = end + 1;
  }
  if (spec.agents < 1 || spec.items < 1) throw InputError("2PL spec needs positive agents and items");
  if (!(spec.a_lo <= spec.a_hi)) throw InputError("2PL spec needs a_lo <= a_hi");
  return spec;
}

TwoPLWorld make_2pl_world(const TwoPLSpec& spec) {
  Rng rng(spec.seed);
  TwoPLWorld w;
  w.seed = spec.seed;
  w.abilities.resize(spec.agents);
  w.difficulties.resize(spec.items);
  w.discriminations.resize(spec.items);
  for (auto& t : w.abilities) t = rng.normal();
  for (Index i = 0; i < spec.items; ++i) {
    w.difficulties[i] = rng.normal();
    w.discriminations[i] = rng.uniform(spec.a_lo, spec.a_hi);
  }
  return w;
}

BinaryResponseMatrix sample_2pl_matrix(const TwoPLWorld& world) {
  Rng rng(derive_seed(world.seed, "responses"));
  const Index m = world.abilities.size(), n = world.difficulties.size();
  BinaryResponseMatrix::Values v(m, n);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i)
      v(j, i) = rng.bernoulli(icc_prob(world.abilities[j], world.discriminations[i], world.difficulties[i]))
                    ? 1
                    : 0;
  return {world.labels(), std::move(v), "2pl_sample"};
}

ScoreMap perfectly_general_agent(const DifficultyBinning& binning, int cutoff_bin) {
  if (cutoff_bin < 1 || cutoff_bin > binning.bin_count())
    throw InputError("cutoff bin must lie in [1, " + std::to_string(binning.bin_count()) + "]");
  ScoreMap out;
  for (int h = 0; h < binning.bin_count(); ++h)
    for (const auto& id : binning.bins[static_cast<std::size_t>(h)]) out[id] = h < cutoff_bin ? 1.0 : 0.0;
  return out;
}

}  // namespace benchirt
