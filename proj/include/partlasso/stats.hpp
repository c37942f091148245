#pragma once

#include <vector>

namespace partlasso::stats {

/// Standard normal quantile.
double normal_quantile(double probability);
double normal_cdf(double x);

/// Chi-square quantile with `dof` degrees of freedom.
double chi_square_quantile(double probability, double dof);

/// One-sample Kolmogorov-Smirnov statistic against N(0, 1).
double ks_statistic_normal(std::vector<double> sample);

/// Asymptotic p-value for a KS statistic on `n` observations
/// (Kolmogorov series with Stephens' small-sample correction).
double ks_pvalue(double statistic, std::size_t n);

}  // namespace partlasso::stats
