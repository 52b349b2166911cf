#ifndef MCTM_STATS_HPP
#define MCTM_STATS_HPP

#include "mctm/common.hpp"

#include <vector>

namespace mctm {

/// Kolmogorov-Smirnov distance of values in [0, 1] from the uniform distribution.
double ks_uniform_statistic(std::vector<double> u);

/// Asymptotic p-value of the one-sample KS statistic d for sample size n
/// (Kolmogorov series with Stephens' small-sample correction).
double ks_pvalue(double d, int n);

/// Sample Spearman rank correlation (average ranks for ties).
double spearman_rho(const Vector& a, const Vector& b);

/// Kendall's tau-a by merge-sort inversion counting, O(n log n); intended for
/// continuous data without ties.
double kendall_tau(const Vector& a, const Vector& b);

}  // namespace mctm

#endif
