#pragma once

#include <cmath>

#include <Eigen/Core>

namespace benchirt {

/// Logistic sigmoid 1 / (1 + e^-z), evaluated without overflow.
template <typename Scalar>
Scalar sigmoid(Scalar z) {
  using std::exp;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
  const Scalar e = exp(z);
  return e / (Scalar(1) + e);
}

/// log(sigmoid(z)) = -log(1 + e^-z).
template <typename Scalar>
Scalar log_sigmoid(Scalar z) {
  using std::exp;
  using std::log1p;
  if (z >= Scalar(0)) return -log1p(exp(-z));
  return z - log1p(exp(z));
}

/// sigmoid(z) (1 - sigmoid(z)) = e^-z / (1 + e^-z)^2, symmetric in z.
template <typename Scalar>
Scalar logistic_variance(Scalar z) {
  using std::abs;
  using std::exp;
  const Scalar e = exp(-abs(z));
  return e / ((Scalar(1) + e) * (Scalar(1) + e));
}

/// Probability of success c + (1 - c) / (1 + e^{-a(theta - b)}).
/// Returns the correct limit for arbitrarily large exponents.
template <typename Scalar>
Scalar icc_prob(Scalar theta, Scalar a, Scalar b, Scalar c = Scalar(0)) {
  return c + (Scalar(1) - c) * sigmoid(a * (theta - b));
}

/// log P and log(1 - P) of icc_prob at each ability node.
template <typename Scalar>
void icc_log_probs(const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& nodes, Scalar a, Scalar b,
                   Scalar c, Eigen::Ref<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> log_p,
                   Eigen::Ref<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> log_q) {
  using std::log;
  using std::log1p;
  for (Eigen::Index k = 0; k < nodes.size(); ++k) {
    const Scalar z = a * (nodes[k] - b);
    if (c == Scalar(0)) {
      log_p[k] = log_sigmoid(z);
      log_q[k] = log_sigmoid(-z);
    } else {
      const Scalar l = sigmoid(z);
      log_p[k] = log(c + (Scalar(1) - c) * l);
      log_q[k] = log1p(-c) + log_sigmoid(-z);
    }
  }
}

}  // namespace benchirt
