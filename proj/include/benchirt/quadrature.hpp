#pragma once

#include <Eigen/Core>

namespace benchirt {

/// Nodes and weights approximating E[f(X)] for X ~ N(0, 1):
///   E[f(X)] ~= sum_k weights[k] f(nodes[k]).
/// Built from the Gauss-Hermite rule (weight e^{-x^2}) by x -> sqrt(2) x and
/// w -> w / sqrt(pi). Exact for polynomials of degree < 2 * size.
struct NormalQuadrature {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return nodes.size(); }
};

/// Golub-Welsch: eigen-decomposition of the Hermite Jacobi matrix.
NormalQuadrature gauss_hermite_normal(int n);

}  // namespace benchirt
