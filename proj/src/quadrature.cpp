#include "benchirt/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "benchirt/errors.hpp"

namespace benchirt {

NormalQuadrature gauss_hermite_normal(int n) {
  if (n < 1 || n > 200) throw InputError("quadrature node count must lie in [1, 200]");
  // Probabilists' Hermite recurrence: off-diagonal sqrt(k), zero diagonal.
  // Its eigenvalues are the N(0,1) nodes directly; weights are the squared
  // first eigenvector components.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  NormalQuadrature q;
  q.nodes = solver.eigenvalues();
  q.weights = solver.eigenvectors().row(0).transpose().array().square();
  // Symmetrize: the rule is exactly symmetric about zero.
  for (int k = 0; k < n / 2; ++k) {
    const int r = n - 1 - k;
    const double x = 0.5 * (q.nodes[r] - q.nodes[k]);
    const double w = 0.5 * (q.weights[r] + q.weights[k]);
    q.nodes[k] = -x;
    q.nodes[r] = x;
    q.weights[k] = q.weights[r] = w;
  }
  if (n % 2 == 1) q.nodes[n / 2] = 0.0;
  q.weights /= q.weights.sum();
  return q;
}

}  // namespace benchirt
