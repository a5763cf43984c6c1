#pragma once

#include <optional>
#include <span>

namespace benchirt::stats {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // population (divide by n)
};

/// Two-pass population moments. Empty input gives {NaN, NaN}.
Moments population_moments(std::span<const double> xs);

/// Pearson correlation; nullopt when fewer than two pairs or either side has
/// zero variance.
std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys);

/// Regularized upper incomplete gamma Q(s, x).
double gamma_q(double s, double x);

/// P(X >= x) for X ~ chi-square with df degrees of freedom.
double chi_square_sf(double x, double df);

}  // namespace benchirt::stats
