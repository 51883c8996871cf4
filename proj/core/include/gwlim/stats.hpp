#pragma once

// Statistics used by the verification harness: plain and weighted Monte
// Carlo summaries, a censoring-aware Kolmogorov-Smirnov distance,
// chi-square goodness of fit, and the special functions behind them.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace gwlim {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

/// Sample mean and its standard error (unbiased variance / n).
MeanSe mean_se(std::span<const double> values);

/// Importance-sampling summary: mean and standard error of the products
/// weights[i] * values[i]. This is the unnormalised estimator whose
/// expectation under the sampling law equals the target expectation.
MeanSe weighted_mean_se(std::span<const double> values,
                        std::span<const double> weights);

/// Kolmogorov-Smirnov distance between the empirical sub-distribution of
/// `finite_sorted` (ascending, values <= horizon, out of `total_count`
/// draws; the remainder is censored or at +infinity) and the analytic
/// sub-CDF on [0, horizon].
double ks_statistic(std::span<const double> finite_sorted,
                    const std::function<double(double)>& analytic_cdf,
                    double horizon, std::size_t total_count);

struct ChiSquare {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::size_t pooled_cells = 0;
};

/// Pearson chi-square of observed counts against expected probabilities.
/// Cells with expected count below `min_expected` are pooled into their
/// neighbour to keep the asymptotic distribution usable.
ChiSquare chi_square_gof(std::span<const std::uint64_t> observed,
                         std::span<const double> expected_probs,
                         double min_expected = 5.0);

/// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

/// Standard normal CDF and quantile.
double normal_cdf(double x);
double normal_quantile(double p);

/// Two-sided z threshold for `tests` simultaneous comparisons at the
/// familywise level of a single 3-sigma test (Bonferroni).
double bonferroni_z(std::size_t tests);

/// Recursive adaptive Simpson quadrature with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 48);

}  // namespace gwlim
