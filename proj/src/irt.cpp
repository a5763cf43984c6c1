#include "benchirt/irt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "benchirt/errors.hpp"
#include "benchirt/logistic.hpp"
#include "benchirt/parallel.hpp"
#include "benchirt/random.hpp"
#include "benchirt/stats.hpp"

namespace benchirt {

std::string_view to_string(ModelKind k) { return k == ModelKind::two_pl ? "2PL" : "3PL"; }

ModelKind model_kind_from_string(std::string_view s) {
  if (s == "2PL" || s == "2pl") return ModelKind::two_pl;
  if (s == "3PL" || s == "3pl") return ModelKind::three_pl;
  throw InputError("unknown model kind '" + std::string(s) + "' (expected 2PL or 3PL)");
}

int parameter_count(ModelKind kind) { return kind == ModelKind::two_pl ? 2 : 3; }

double ItemParams::prob(double theta) const { return icc_prob(theta, a, b, c); }

const ItemParams* FittedModel::find_item(std::string_view id) const {
  for (const auto& it : items)
    if (it.id == id) return &it;
  return nullptr;
}

const AbilityEstimate* FittedModel::find_ability(std::string_view id) const {
  for (const auto& ab : abilities)
    if (ab.id == id) return &ab;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Per-item objective

ItemObjective::ItemObjective(Eigen::VectorXd points, Eigen::VectorXd successes, Eigen::VectorXd trials,
                             ModelKind kind)
    : points_(std::move(points)), successes_(std::move(successes)), trials_(std::move(trials)), kind_(kind) {
  if (points_.size() != successes_.size() || points_.size() != trials_.size())
    throw std::invalid_argument("ItemObjective: length mismatch");
}

namespace {

struct Unpacked {
  double a, b, c;
};

Unpacked unpack(const Eigen::VectorXd& p, ModelKind kind) {
  return {p[0], p[1], kind == ModelKind::three_pl ? p[2] : 0.0};
}

}  // namespace

double ItemObjective::value(const Eigen::VectorXd& params) const {
  const auto [a, b, c] = unpack(params, kind_);
  double q = 0.0;
  for (Index k = 0; k < points_.size(); ++k) {
    const double r = successes_[k];
    const double f = trials_[k] - r;
    const double z = a * (points_[k] - b);
    double log_p, log_q;
    if (c == 0.0) {
      log_p = log_sigmoid(z);
      log_q = log_sigmoid(-z);
    } else {
      log_p = std::log(c + (1.0 - c) * sigmoid(z));
      log_q = std::log1p(-c) + log_sigmoid(-z);
    }
    if (r != 0.0) q += r * log_p;
    if (f != 0.0) q += f * log_q;
  }
  return q;
}

Eigen::VectorXd ItemObjective::gradient(const Eigen::VectorXd& params) const {
  const auto [a, b, c] = unpack(params, kind_);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dimension());
  for (Index k = 0; k < points_.size(); ++k) {
    const double x = points_[k] - b;
    const double z = a * x;
    const double l = sigmoid(z);
    const double r = successes_[k], n = trials_[k];
    if (kind_ == ModelKind::two_pl) {
      const double resid = r - n * l;
      g[0] += resid * x;
      g[1] -= resid * a;
      continue;
    }
    const double d = logistic_variance(z);
    const double p = c + (1.0 - c) * l;
    const double q = std::max((1.0 - c) * sigmoid(-z), 1e-300);
    const double gp = (r != 0.0 ? r / p : 0.0) - (n - r != 0.0 ? (n - r) / q : 0.0);
    g[0] += gp * (1.0 - c) * d * x;
    g[1] -= gp * (1.0 - c) * d * a;
    g[2] += gp * (1.0 - l);
  }
  return g;
}

Eigen::MatrixXd ItemObjective::hessian(const Eigen::VectorXd& params) const {
  const auto [a, b, c] = unpack(params, kind_);
  const Index dim = dimension();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (Index k = 0; k < points_.size(); ++k) {
    const double x = points_[k] - b;
    const double z = a * x;
    const double l = sigmoid(z);
    const double d = logistic_variance(z);
    const double r = successes_[k], n = trials_[k];
    if (kind_ == ModelKind::two_pl) {
      const double resid = r - n * l;
      h(0, 0) -= n * d * x * x;
      h(0, 1) += n * d * x * a - resid;
      h(1, 1) -= n * d * a * a;
      continue;
    }
    const double p = c + (1.0 - c) * l;
    const double q = std::max((1.0 - c) * sigmoid(-z), 1e-300);
    const double gp = (r != 0.0 ? r / p : 0.0) - (n - r != 0.0 ? (n - r) / q : 0.0);
    const double hp = -(r != 0.0 ? r / (p * p) : 0.0) - (n - r != 0.0 ? (n - r) / (q * q) : 0.0);
    const double dd = d * (1.0 - 2.0 * l);  // d/dz of l(1-l)
    Eigen::Vector3d grad_p((1.0 - c) * d * x, -(1.0 - c) * d * a, 1.0 - l);
    Eigen::Matrix3d hess_p;
    hess_p(0, 0) = (1.0 - c) * dd * x * x;
    hess_p(0, 1) = (1.0 - c) * (-dd * x * a - d);
    hess_p(1, 1) = (1.0 - c) * dd * a * a;
    hess_p(0, 2) = -d * x;
    hess_p(1, 2) = d * a;
    hess_p(2, 2) = 0.0;
    hess_p(1, 0) = hess_p(0, 1);
    hess_p(2, 0) = hess_p(0, 2);
    hess_p(2, 1) = hess_p(1, 2);
    h += hp * grad_p * grad_p.transpose() + gp * hess_p;
  }
  if (kind_ == ModelKind::two_pl) h(1, 0) = h(0, 1);
  return h;
}

Eigen::MatrixXd ItemObjective::information(const Eigen::VectorXd& params) const {
  const auto [a, b, c] = unpack(params, kind_);
  const Index dim = dimension();
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(dim, dim);
  for (Index k = 0; k < points_.size(); ++k) {
    const double x = points_[k] - b;
    const double z = a * x;
    const double l = sigmoid(z);
    const double d = logistic_variance(z);
    const double n = trials_[k];
    if (kind_ == ModelKind::two_pl) {
      Eigen::Vector2d gz(x, -a);
      info += n * d * gz * gz.transpose();
      continue;
    }
    const double p = c + (1.0 - c) * l;
    const double q = (1.0 - c) * sigmoid(-z);
    if (!(p * q > 0.0)) continue;
    Eigen::Vector3d grad_p((1.0 - c) * d * x, -(1.0 - c) * d * a, 1.0 - l);
    info += (n / (p * q)) * grad_p * grad_p.transpose();
  }
  return info;
}

double ItemObjective::intercept_value(const Eigen::VectorXd& u) const {
  const double c = kind_ == ModelKind::three_pl ? u[2] : 0.0;
  double q = 0.0;
  for (Index k = 0; k < points_.size(); ++k) {
    const double r = successes_[k];
    const double f = trials_[k] - r;
    const double z = u[0] * points_[k] + u[1];
    const double log_p = c == 0.0 ? log_sigmoid(z) : std::log(c + (1.0 - c) * sigmoid(z));
    const double log_q = (c == 0.0 ? 0.0 : std::log1p(-c)) + log_sigmoid(-z);
    if (r != 0.0) q += r * log_p;
    if (f != 0.0) q += f * log_q;
  }
  return q;
}

Eigen::VectorXd ItemObjective::intercept_gradient(const Eigen::VectorXd& u) const {
  const double c = kind_ == ModelKind::three_pl ? u[2] : 0.0;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dimension());
  for (Index k = 0; k < points_.size(); ++k) {
    const double t = points_[k];
    const double z = u[0] * t + u[1];
    const double l = sigmoid(z);
    const double r = successes_[k], n = trials_[k];
    if (kind_ == ModelKind::two_pl) {
      const double resid = r - n * l;
      g[0] += resid * t;
      g[1] += resid;
      continue;
    }
    const double d = logistic_variance(z);
    const double p = c + (1.0 - c) * l;
    const double q = std::max((1.0 - c) * sigmoid(-z), 1e-300);
    const double gp = (r != 0.0 ? r / p : 0.0) - (n - r != 0.0 ? (n - r) / q : 0.0);
    g[0] += gp * (1.0 - c) * d * t;
    g[1] += gp * (1.0 - c) * d;
    g[2] += gp * (1.0 - l);
  }
  return g;
}

Eigen::MatrixXd ItemObjective::intercept_hessian(const Eigen::VectorXd& u) const {
  const double c = kind_ == ModelKind::three_pl ? u[2] : 0.0;
  const Index dim = dimension();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (Index k = 0; k < points_.size(); ++k) {
    const double t = points_[k];
    const double z = u[0] * t + u[1];
    const double l = sigmoid(z);
    const double d = logistic_variance(z);
    const double r = successes_[k], n = trials_[k];
    if (kind_ == ModelKind::two_pl) {
      const Eigen::Vector2d gz(t, 1.0);
      h -= n * d * gz * gz.transpose();
      continue;
    }
    const double p = c + (1.0 - c) * l;
    const double q = std::max((1.0 - c) * sigmoid(-z), 1e-300);
    const double gp = (r != 0.0 ? r / p : 0.0) - (n - r != 0.0 ? (n - r) / q : 0.0);
    const double hp = -(r != 0.0 ? r / (p * p) : 0.0) - (n - r != 0.0 ? (n - r) / (q * q) : 0.0);
    const double dd = d * (1.0 - 2.0 * l);
    const Eigen::Vector3d gz(t, 1.0, 0.0);
    Eigen::Vector3d grad_p = (1.0 - c) * d * gz;
    grad_p[2] = 1.0 - l;
    Eigen::Matrix3d hess_p = (1.0 - c) * dd * gz * gz.transpose();
    hess_p(0, 2) = hess_p(2, 0) = -d * t;
    hess_p(1, 2) = hess_p(2, 1) = -d;
    h += hp * grad_p * grad_p.transpose() + gp * hess_p;
  }
  return h;
}

Eigen::VectorXd ParameterBox::project(Eigen::VectorXd p) const {
  p[0] = std::clamp(p[0], -max_abs_a, max_abs_a);
  p[1] = std::clamp(p[1], -max_abs_b, max_abs_b);
  if (p.size() > 2) p[2] = std::clamp(p[2], 0.0, max_c);
  return p;
}

// ---------------------------------------------------------------------------
// Item maximization

namespace {

constexpr int max_halvings = 20;
constexpr int max_newton_iters = 200;
constexpr int grid_points = 101;

// Parameters pinned at a bound with the gradient pointing outward are held
// fixed for the step.
std::vector<Index> free_parameters(const Eigen::VectorXd& p, const Eigen::VectorXd& g, const ParameterBox& box) {
  const double lo[3] = {-box.max_abs_a, -box.max_abs_b, 0.0};
  const double hi[3] = {box.max_abs_a, box.max_abs_b, box.max_c};
  std::vector<Index> free;
  for (Index k = 0; k < p.size(); ++k) {
    if (p[k] <= lo[k] && g[k] < 0.0) continue;
    if (p[k] >= hi[k] && g[k] > 0.0) continue;
    free.push_back(k);
  }
  return free;
}

// Newton direction on the free coordinates; `fallback` supplies a positive
// definite matrix when the Hessian is not negative definite there.
template <class Fallback>
Eigen::VectorXd ascent_direction(const Eigen::MatrixXd& h, Fallback&& fallback, const Eigen::VectorXd& g,
                                 const std::vector<Index>& free) {
  const Index nf = static_cast<Index>(free.size());
  Eigen::VectorXd d = Eigen::VectorXd::Zero(g.size());
  if (nf == 0) return d;
  Eigen::MatrixXd neg(nf, nf);
  Eigen::VectorXd gf(nf);
  for (Index r = 0; r < nf; ++r) {
    gf[r] = g[free[r]];
    for (Index s = 0; s < nf; ++s) neg(r, s) = -h(free[r], free[s]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(neg);
  Eigen::VectorXd df;
  if (llt.info() == Eigen::Success) {
    df = llt.solve(gf);
  } else {
    const Eigen::MatrixXd full = fallback();
    Eigen::MatrixXd fi(nf, nf);
    for (Index r = 0; r < nf; ++r)
      for (Index s = 0; s < nf; ++s) fi(r, s) = full(free[r], free[s]);
    fi.diagonal().array() += 1e-8 * (1.0 + fi.diagonal().cwiseAbs().maxCoeff());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(fi);
    df = ldlt.solve(gf);
    if (!df.allFinite()) df = gf;
  }
  for (Index r = 0; r < nf; ++r) d[free[r]] = df[r];
  return d;
}

struct NewtonResult {
  Eigen::VectorXd params;
  double value = 0.0;
  bool stalled = false;  // no ascent step found away from a stationary point
};

template <class Value, class Gradient, class Hessian, class Fallback>
NewtonResult newton_ascent(Value&& value, Gradient&& gradient, Hessian&& hessian, Fallback&& fallback,
                           Eigen::VectorXd p, const ParameterBox& box) {
  double f = value(p);
  if (!std::isfinite(f)) return {p, f, true};
  for (int iter = 0; iter < max_newton_iters; ++iter) {
    const Eigen::VectorXd g = gradient(p);
    const auto free = free_parameters(p, g, box);
    double gmax = 0.0;
    for (Index k : free) gmax = std::max(gmax, std::abs(g[k]));
    if (gmax < 1e-10) break;

    const Eigen::VectorXd d = ascent_direction(hessian(p), [&] { return fallback(p); }, g, free);
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd candidate;
    double fc = f;
    for (int h = 0; h <= max_halvings; ++h, t *= 0.5) {
      candidate = box.project(p + t * d);
      fc = value(candidate);
      if (std::isfinite(fc) && fc >= f) {
        accepted = true;
        break;
      }
    }
    if (!accepted) return {p, f, gmax > 1e-6 * (1.0 + std::abs(f))};
    const double step = (candidate - p).cwiseAbs().maxCoeff();
    p = candidate;
    f = fc;
    if (step < 1e-11) break;
  }
  return {p, f, false};
}

// Smallest shift making -H positive definite.
Eigen::MatrixXd shifted_negative(const Eigen::MatrixXd& h) {
  Eigen::MatrixXd neg = -h;
  const double lowest = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(neg, Eigen::EigenvaluesOnly).eigenvalues()[0];
  if (lowest <= 0.0) neg.diagonal().array() += -lowest + 1e-8 * (1.0 + neg.diagonal().cwiseAbs().maxCoeff());
  return neg;
}

Eigen::VectorXd grid_search(const ItemObjective& obj, const Eigen::VectorXd& center, const ParameterBox& box) {
  const double wa = std::max(2.0, std::abs(center[0]));
  const double wb = std::max(4.0, std::abs(center[1]));
  const double a_lo = std::max(-box.max_abs_a, center[0] - wa), a_hi = std::min(box.max_abs_a, center[0] + wa);
  const double b_lo = std::max(-box.max_abs_b, center[1] - wb), b_hi = std::min(box.max_abs_b, center[1] + wb);
  Eigen::VectorXd best = center;
  double best_value = obj.value(center);
  Eigen::VectorXd trial = center;
  for (int ia = 0; ia < grid_points; ++ia) {
    trial[0] = a_lo + (a_hi - a_lo) * ia / (grid_points - 1);
    for (int ib = 0; ib < grid_points; ++ib) {
      trial[1] = b_lo + (b_hi - b_lo) * ib / (grid_points - 1);
      const double v = obj.value(trial);
      if (v > best_value) {
        best_value = v;
        best = trial;
      }
    }
  }
  return best;
}

}  // namespace

ItemMaximum maximize_item(const ItemObjective& objective, Eigen::VectorXd start, const ParameterBox& box) {
  Eigen::VectorXd p = box.project(std::move(start));

  // Slope-intercept pass: no ridge along a -> 0, b -> infinity to slide into.
  Eigen::VectorXd u = p;
  u[1] = -p[0] * p[1];
  const ParameterBox wide{box.max_abs_a, box.max_abs_a * box.max_abs_b, box.max_c};
  const auto first = newton_ascent([&](const Eigen::VectorXd& v) { return objective.intercept_value(v); },
                                   [&](const Eigen::VectorXd& v) { return objective.intercept_gradient(v); },
                                   [&](const Eigen::VectorXd& v) { return objective.intercept_hessian(v); },
                                   [&](const Eigen::VectorXd& v) { return shifted_negative(objective.intercept_hessian(v)); },
                                   u, wide);
  Eigen::VectorXd back = first.params;
  const double a = back[0], d = back[1];
  back[1] = a != 0.0 ? -d / a : (d > 0.0 ? -box.max_abs_b : box.max_abs_b);
  back = box.project(back);
  if (std::isfinite(objective.value(back)) && objective.value(back) >= objective.value(p)) p = back;

  const auto second = newton_ascent([&](const Eigen::VectorXd& v) { return objective.value(v); },
                                    [&](const Eigen::VectorXd& v) { return objective.gradient(v); },
                                    [&](const Eigen::VectorXd& v) { return objective.hessian(v); },
                                    [&](const Eigen::VectorXd& v) { return objective.information(v); }, p, box);
  if (!second.stalled) return {second.params, false};
  return {grid_search(objective, second.params, box), true};
}

// ---------------------------------------------------------------------------
// Posterior over quadrature nodes

Posterior compute_posterior(const Eigen::MatrixXd& responses, const Eigen::MatrixXd& observed,
                            const std::vector<ItemParams>& items, const NormalQuadrature& quad) {
  const Index n = static_cast<Index>(items.size());
  const Index nodes = quad.size();
  if (responses.cols() != n || observed.cols() != n) throw std::invalid_argument("compute_posterior: shape mismatch");
  Eigen::MatrixXd log_p(n, nodes), log_q(n, nodes);
  Eigen::VectorXd lp(nodes), lq(nodes);
  for (Index i = 0; i < n; ++i) {
    icc_log_probs<double>(quad.nodes, items[i].a, items[i].b, items[i].c, lp, lq);
    log_p.row(i) = lp.transpose();
    log_q.row(i) = lq.transpose();
  }
  Eigen::MatrixXd log_joint = responses * log_p + (observed - responses) * log_q;
  log_joint.rowwise() += quad.weights.array().log().matrix().transpose();

  Posterior post;
  post.weights.resize(log_joint.rows(), nodes);
  post.log_marginal.resize(log_joint.rows());
  for (Index j = 0; j < log_joint.rows(); ++j) {
    const double peak = log_joint.row(j).maxCoeff();
    const Eigen::RowVectorXd e = (log_joint.row(j).array() - peak).exp().matrix();
    const double total = e.sum();
    post.weights.row(j) = e / total;
    post.log_marginal[j] = peak + std::log(total);
  }
  post.log_likelihood = post.log_marginal.sum();
  return post;
}

double marginal_log_likelihood(const BinaryResponseMatrix& brm, const std::vector<ItemParams>& items,
                               const NormalQuadrature& quad) {
  return compute_posterior(brm.responses(), brm.observed(), items, quad).log_likelihood;
}

// ---------------------------------------------------------------------------
// Abilities

namespace {

enum class Monotone { none, increasing, decreasing };

// The likelihood in theta is monotone when every informative response points
// the same way: successes on positive-slope items and failures on
// negative-slope items push theta up; the opposite pushes it down.
Monotone monotone_direction(const Eigen::MatrixXd& y, const Eigen::MatrixXd& o, Index j,
                            const std::vector<ItemParams>& items) {
  bool up = false, down = false;
  for (Index i = 0; i < y.cols(); ++i) {
    if (o(j, i) == 0.0 || items[i].a == 0.0) continue;
    const bool success = y(j, i) != 0.0;
    ((success == (items[i].a > 0.0)) ? up : down) = true;
  }
  if (up && !down) return Monotone::increasing;
  if (down && !up) return Monotone::decreasing;
  return Monotone::none;
}

AbilityEstimate mle_ability(const Eigen::MatrixXd& y, const Eigen::MatrixXd& o, Index j,
                            const std::vector<ItemParams>& items, double start) {
  const double cap = limits::ability_cap;
  auto loglik = [&](double theta) {
    double l = 0.0;
    for (Index i = 0; i < y.cols(); ++i) {
      if (o(j, i) == 0.0) continue;
      const double z = items[i].a * (theta - items[i].b);
      const double c = items[i].c;
      l += y(j, i) != 0.0 ? std::log(c + (1.0 - c) * sigmoid(z)) : std::log1p(-c) + log_sigmoid(-z);
    }
    return l;
  };
  auto score_info = [&](double theta) {
    double s = 0.0, info = 0.0;
    for (Index i = 0; i < y.cols(); ++i) {
      if (o(j, i) == 0.0) continue;
      const auto& it = items[i];
      const double z = it.a * (theta - it.b);
      const double p = it.prob(theta);
      const double q = std::max((1.0 - it.c) * sigmoid(-z), 1e-300);
      const double dp = (1.0 - it.c) * it.a * logistic_variance(z);
      s += (y(j, i) - p) / (p * q) * dp;
      info += dp * dp / (p * q);
    }
    return std::pair{s, info};
  };
  double theta = std::clamp(start, -cap, cap);
  double f = loglik(theta);
  for (int iter = 0; iter < 100; ++iter) {
    const auto [s, info] = score_info(theta);
    if (!(info > 0.0) || std::abs(s) < 1e-10) break;
    const double step = s / info;
    double t = 1.0, cand = theta, fc = f;
    bool ok = false;
    for (int h = 0; h <= max_halvings; ++h, t *= 0.5) {
      cand = std::clamp(theta + t * step, -cap, cap);
      fc = loglik(cand);
      if (fc >= f) {
        ok = true;
        break;
      }
    }
    if (!ok) break;
    const double moved = std::abs(cand - theta);
    theta = cand;
    f = fc;
    if (moved < 1e-10) break;
  }
  const double info = score_info(theta).second;
  return {{}, theta, info > 0.0 ? 1.0 / std::sqrt(info) : std::numeric_limits<double>::infinity(), false};
}

std::vector<AbilityEstimate> abilities_from(const Eigen::MatrixXd& y, const Eigen::MatrixXd& o, const Posterior& post,
                                            const std::vector<std::string>& agent_ids,
                                            const std::vector<ItemParams>& items, const NormalQuadrature& quad,
                                            AbilityMethod method) {
  std::vector<AbilityEstimate> out;
  out.reserve(agent_ids.size());
  for (Index j = 0; j < y.rows(); ++j) {
    const Eigen::RowVectorXd w = post.weights.row(j);
    const double mean = w.dot(quad.nodes);
    const double var = w.dot((quad.nodes.array() - mean).square().matrix());
    AbilityEstimate est{agent_ids[static_cast<std::size_t>(j)], mean, std::sqrt(std::max(var, 0.0)), false};
    const Monotone dir = monotone_direction(y, o, j, items);
    if (dir != Monotone::none) {
      est.theta = dir == Monotone::increasing ? limits::ability_cap : -limits::ability_cap;
      est.boundary = true;
    } else if (method == AbilityMethod::mle) {
      auto mle = mle_ability(y, o, j, items, mean);
      est.theta = mle.theta;
      est.standard_error = mle.standard_error;
    }
    out.push_back(std::move(est));
  }
  return out;
}

}  // namespace

std::vector<AbilityEstimate> estimate_abilities(const BinaryResponseMatrix& brm, const std::vector<ItemParams>& items,
                                                int quadrature_nodes, AbilityMethod method) {
  std::vector<ItemParams> aligned;
  std::vector<std::string> unknown;
  for (const auto& id : brm.labels().items) {
    const auto it = std::find_if(items.begin(), items.end(), [&](const ItemParams& p) { return p.id == id; });
    if (it == items.end()) {
      unknown.push_back(id);
    } else {
      aligned.push_back(*it);
    }
  }
  if (!unknown.empty()) throw IdMismatchError("response items missing from the parameter bank", unknown);
  const Eigen::MatrixXd y = brm.responses(), o = brm.observed();
  for (Index j = 0; j < o.rows(); ++j)
    if (o.row(j).sum() == 0.0)
      throw InputError("agent '" + brm.labels().agents[static_cast<std::size_t>(j)] + "' has no observed responses");
  const auto quad = gauss_hermite_normal(quadrature_nodes);
  const Posterior post = compute_posterior(y, o, aligned, quad);
  return abilities_from(y, o, post, brm.labels().agents, aligned, quad, method);
}

// ---------------------------------------------------------------------------
// Item fit

std::vector<FitStatistic> item_fit(const BinaryResponseMatrix& brm, const FittedModel& model, int min_group) {
  std::vector<FitStatistic> out;
  const int nparams = parameter_count(model.kind);
  std::vector<std::optional<double>> theta(static_cast<std::size_t>(brm.rows()));
  for (Index j = 0; j < brm.rows(); ++j)
    if (const auto* ab = model.find_ability(brm.labels().agents[static_cast<std::size_t>(j)])) theta[j] = ab->theta;

  for (Index i = 0; i < brm.cols(); ++i) {
    const auto* item = model.find_item(brm.labels().items[static_cast<std::size_t>(i)]);
    if (item == nullptr)
      throw IdMismatchError("item missing from model", {brm.labels().items[static_cast<std::size_t>(i)]});
    std::vector<Index> agents;
    for (Index j = 0; j < brm.rows(); ++j)
      if (!brm.missing()(j, i) && theta[j]) agents.push_back(j);
    std::stable_sort(agents.begin(), agents.end(), [&](Index l, Index r) { return *theta[l] < *theta[r]; });

    // Deciles, then merge small groups forward.
    std::vector<std::vector<Index>> groups;
    const std::size_t total = agents.size();
    const std::size_t ndec = std::min<std::size_t>(10, total);
    for (std::size_t g = 0; g < ndec; ++g) {
      const std::size_t lo = g * total / ndec, hi = (g + 1) * total / ndec;
      groups.emplace_back(agents.begin() + static_cast<std::ptrdiff_t>(lo), agents.begin() + static_cast<std::ptrdiff_t>(hi));
    }
    for (std::size_t g = 0; g < groups.size();) {
      if (groups[g].size() < static_cast<std::size_t>(min_group) && g + 1 < groups.size()) {
        groups[g].insert(groups[g].end(), groups[g + 1].begin(), groups[g + 1].end());
        groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(g) + 1);
      } else {
        ++g;
      }
    }
    if (groups.size() > 1 && groups.back().size() < static_cast<std::size_t>(min_group)) {
      auto& prev = groups[groups.size() - 2];
      prev.insert(prev.end(), groups.back().begin(), groups.back().end());
      groups.pop_back();
    }

    FitStatistic fs;
    fs.groups = static_cast<int>(groups.size());
    fs.df = fs.groups - nparams;
    if (fs.groups >= 2) {
      double chi = 0.0;
      for (const auto& g : groups) {
        double observed = 0.0, expected = 0.0;
        for (Index j : g) {
          observed += brm.values()(j, i);
          expected += item->prob(*theta[j]);
        }
        const double size = static_cast<double>(g.size());
        observed /= size;
        expected /= size;
        const double var = std::max(expected * (1.0 - expected), 1e-10);
        chi += size * (observed - expected) * (observed - expected) / var;
      }
      fs.statistic = chi;
      if (fs.df >= 1) {
        fs.defined = true;
        fs.p_value = stats::chi_square_sf(chi, fs.df);
      }
    }
    out.push_back(fs);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

void check_fittable(const BinaryResponseMatrix& brm) {
  if (brm.rows() < 2 || brm.cols() < 1)
    throw InputError("fit needs at least 2 agents and 1 item, got " + std::to_string(brm.rows()) + "x" +
                     std::to_string(brm.cols()));
  std::vector<std::string> constant;
  for (Index i = 0; i < brm.cols(); ++i) {
    bool s0 = false, s1 = false;
    for (Index j = 0; j < brm.rows(); ++j)
      if (!brm.missing()(j, i)) (brm.values()(j, i) ? s1 : s0) = true;
    if (!(s0 && s1)) constant.push_back(brm.labels().items[static_cast<std::size_t>(i)]);
  }
  if (!constant.empty()) {
    std::string list;
    for (const auto& c : constant) list += (list.empty() ? "" : ", ") + c;
    throw InputError("constant items must be filtered before fitting: " + list);
  }
}

void standardize(Eigen::VectorXd& v) {
  const double mean = v.mean();
  v.array() -= mean;
  const double sd = std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
  if (sd > 0.0) v /= sd;
}

Eigen::VectorXd params_of(const ItemParams& it, ModelKind kind) {
  Eigen::VectorXd p(parameter_count(kind));
  p[0] = it.a;
  p[1] = it.b;
  if (kind == ModelKind::three_pl) p[2] = it.c;
  return p;
}

void assign(ItemParams& it, const Eigen::VectorXd& p, ModelKind kind) {
  it.a = p[0];
  it.b = p[1];
  it.c = kind == ModelKind::three_pl ? p[2] : 0.0;
}

}  // namespace

FittedModel fit(const BinaryResponseMatrix& brm, ModelKind kind, const FitConfig& config) {
  check_fittable(brm);
  if (!(config.tolerance > 0.0)) throw InputError("tolerance must be positive");
  if (config.max_iters < 1) throw InputError("max_iters must be at least 1");

  FittedModel model;
  model.kind = kind;
  model.config = config;
  const Index m = brm.rows(), n = brm.cols();
  if (m < 10) model.warnings.push_back("fewer than 10 agents; estimates will be unstable");
  if (n < 5) model.warnings.push_back("fewer than 5 items; estimates will be unstable");

  const Eigen::MatrixXd y = brm.responses();
  const Eigen::MatrixXd o = brm.observed();
  const auto quad = gauss_hermite_normal(config.quadrature_nodes);
  const auto& agent_ids = brm.labels().agents;

  // (1) Starting abilities: standardized proportion correct plus a seeded
  // per-agent perturbation.
  Eigen::VectorXd theta0(m);
  for (Index j = 0; j < m; ++j) {
    const double seen = o.row(j).sum();
    theta0[j] = seen > 0.0 ? y.row(j).sum() / seen : 0.5;
  }
  standardize(theta0);
  for (Index j = 0; j < m; ++j) {
    Rng rng(derive_seed(config.seed, agent_ids[static_cast<std::size_t>(j)]));
    theta0[j] += config.start_jitter * rng.normal();
  }
  standardize(theta0);

  // (2) Starting items given those abilities.
  model.items.resize(static_cast<std::size_t>(n));
  const ParameterBox start_box{4.0, 10.0, 0.5};
  parallel_for(config.jobs, static_cast<std::size_t>(n), [&](std::size_t i) {
    const Index col = static_cast<Index>(i);
    std::vector<double> pts, succ;
    for (Index j = 0; j < m; ++j)
      if (o(j, col) != 0.0) {
        pts.push_back(theta0[j]);
        succ.push_back(y(j, col));
      }
    const Index cnt = static_cast<Index>(pts.size());
    ItemObjective obj(Eigen::Map<Eigen::VectorXd>(pts.data(), cnt), Eigen::Map<Eigen::VectorXd>(succ.data(), cnt),
                      Eigen::VectorXd::Ones(cnt), kind);
    ItemParams& it = model.items[i];
    it.id = brm.labels().items[i];
    Eigen::VectorXd start(parameter_count(kind));
    start.setZero();
    start[0] = 1.0;
    assign(it, maximize_item(obj, start, start_box).params, kind);
  });

  // (3)/(4) Alternate: abilities (posterior over nodes) then items (MML).
  Convergence& conv = model.convergence;
  const ParameterBox box;
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    const Posterior post = compute_posterior(y, o, model.items, quad);
    conv.log_likelihood_trace.push_back(post.log_likelihood);
    const Eigen::MatrixXd expected_successes = y.transpose() * post.weights;  // items x nodes
    const Eigen::MatrixXd expected_trials = o.transpose() * post.weights;

    std::vector<ItemParams> next = model.items;
    parallel_for(config.jobs, static_cast<std::size_t>(n), [&](std::size_t i) {
      const Index row = static_cast<Index>(i);
      ItemObjective obj(quad.nodes, expected_successes.row(row).transpose(), expected_trials.row(row).transpose(),
                        kind);
      const ItemMaximum best = maximize_item(obj, params_of(model.items[i], kind), box);
      assign(next[i], best.params, kind);
      next[i].fallback_used = model.items[i].fallback_used || best.fallback_used;
    });

    double delta = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i)
      delta = std::max(delta, (params_of(next[i], kind) - params_of(model.items[i], kind)).cwiseAbs().maxCoeff());
    model.items = std::move(next);
    conv.iterations = iter;
    conv.max_param_delta = delta;
    if (delta <= config.tolerance) {
      conv.converged = true;
      break;
    }
  }

  const Posterior post = compute_posterior(y, o, model.items, quad);
  conv.log_likelihood = post.log_likelihood;
  conv.log_likelihood_trace.push_back(post.log_likelihood);
  model.abilities = abilities_from(y, o, post, agent_ids, model.items, quad, config.ability_method);
  if (!conv.converged)
    model.warnings.push_back("did not converge within " + std::to_string(config.max_iters) + " cycles");
  for (const auto& it : model.items)
    if (it.fallback_used) model.warnings.push_back("item '" + it.id + "' needed the grid-search fallback");

  const auto fits = item_fit(brm, model);
  for (std::size_t i = 0; i < fits.size(); ++i) model.items[i].fit = fits[i];
  return model;
}

SeedConsistencyReport seed_consistency(const BinaryResponseMatrix& brm, ModelKind kind, const FitConfig& config,
                                       const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() < 2) throw InputError("seed consistency needs at least 2 seeds");
  SeedConsistencyReport report;
  report.seeds = seeds;
  report.threshold = 10.0 * config.tolerance;
  report.item_ids = brm.labels().items;
  std::vector<FittedModel> fits;
  for (auto seed : seeds) {
    FitConfig cfg = config;
    cfg.seed = seed;
    fits.push_back(fit(brm, kind, cfg));
    report.log_likelihoods.push_back(fits.back().convergence.log_likelihood);
    report.converged.push_back(fits.back().convergence.converged);
  }
  const Index n = brm.cols();
  const int np = parameter_count(kind);
  report.item_deviation = Eigen::MatrixXd::Zero(n, np);
  for (std::size_t s = 0; s < fits.size(); ++s)
    for (std::size_t t = s + 1; t < fits.size(); ++t) {
      for (Index i = 0; i < n; ++i) {
        const Eigen::VectorXd d =
            (params_of(fits[s].items[i], kind) - params_of(fits[t].items[i], kind)).cwiseAbs();
        report.item_deviation.row(i) = report.item_deviation.row(i).cwiseMax(d.transpose());
      }
      for (std::size_t j = 0; j < fits[s].abilities.size(); ++j)
        report.max_ability_deviation = std::max(
            report.max_ability_deviation, std::abs(fits[s].abilities[j].theta - fits[t].abilities[j].theta));
    }
  report.max_item_deviation = n > 0 ? report.item_deviation.maxCoeff() : 0.0;
  report.consistent =
      report.max_item_deviation <= report.threshold && report.max_ability_deviation <= report.threshold;
  return report;
}

}  // namespace benchirt
