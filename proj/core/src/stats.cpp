#include "gwlim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gwlim {
namespace {

// Lower incomplete gamma by power series, valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) {
      break;
    }
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper incomplete gamma by Lentz continued fraction, valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) {
      break;
    }
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double simpson_rule(const std::function<double(double)>& f, double a,
                    double fa, double b, double fb, double m, double fm) {
  (void)m;
  (void)f;
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                            double fa, double b, double fb, double m,
                            double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_rule(f, a, fa, m, fm, lm, flm);
  const double right = simpson_rule(f, m, fm, b, fb, rm, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol,
                              depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol,
                              depth - 1);
}

}  // namespace

MeanSe mean_se(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("mean_se: empty sample");
  }
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) {
    const double d = v - mean;
    ss += d * d;
  }
  const double var = values.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n), values.size()};
}

MeanSe weighted_mean_se(std::span<const double> values,
                        std::span<const double> weights) {
  if (values.size() != weights.size()) {
    throw std::invalid_argument("weighted_mean_se: size mismatch");
  }
  std::vector<double> products(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    products[i] = values[i] * weights[i];
  }
  return mean_se(products);
}

double ks_statistic(std::span<const double> finite_sorted,
                    const std::function<double(double)>& analytic_cdf,
                    double horizon, std::size_t total_count) {
  if (total_count == 0) {
    throw std::invalid_argument("ks_statistic: empty sample");
  }
  const double n = static_cast<double>(total_count);
  double sup = 0.0;
  // Compare just before and just after each empirical jump.
  for (std::size_t i = 0; i < finite_sorted.size(); ++i) {
    const double t = finite_sorted[i];
    if (t > horizon) {
      break;
    }
    const double analytic = analytic_cdf(t);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    sup = std::max(sup, std::fabs(analytic - lo));
    sup = std::max(sup, std::fabs(analytic - hi));
  }
  // End of the window (empirical sub-CDF is flat after the last jump).
  double emp_at_horizon = 0.0;
  for (std::size_t i = finite_sorted.size(); i-- > 0;) {
    if (finite_sorted[i] <= horizon) {
      emp_at_horizon = static_cast<double>(i + 1) / n;
      break;
    }
  }
  sup = std::max(sup, std::fabs(analytic_cdf(horizon) - emp_at_horizon));
  sup = std::max(sup, std::fabs(analytic_cdf(0.0) - 0.0));
  return sup;
}

ChiSquare chi_square_gof(std::span<const std::uint64_t> observed,
                         std::span<const double> expected_probs,
                         double min_expected) {
  if (observed.size() != expected_probs.size() || observed.empty()) {
    throw std::invalid_argument("chi_square_gof: bad input sizes");
  }
  std::uint64_t total = 0;
  for (auto c : observed) total += c;
  if (total == 0) {
    throw std::invalid_argument("chi_square_gof: no observations");
  }
  const double n = static_cast<double>(total);

  // Pool low-expectation cells left to right.
  std::vector<double> exp_pooled;
  std::vector<double> obs_pooled;
  double exp_acc = 0.0;
  double obs_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    exp_acc += n * expected_probs[i];
    obs_acc += static_cast<double>(observed[i]);
    if (exp_acc >= min_expected) {
      exp_pooled.push_back(exp_acc);
      obs_pooled.push_back(obs_acc);
      exp_acc = 0.0;
      obs_acc = 0.0;
    }
  }
  if (exp_acc > 0.0 || obs_acc > 0.0) {
    if (!exp_pooled.empty()) {
      exp_pooled.back() += exp_acc;
      obs_pooled.back() += obs_acc;
    } else {
      exp_pooled.push_back(exp_acc);
      obs_pooled.push_back(obs_acc);
    }
  }

  double stat = 0.0;
  for (std::size_t i = 0; i < exp_pooled.size(); ++i) {
    if (exp_pooled[i] <= 0.0) {
      continue;
    }
    const double d = obs_pooled[i] - exp_pooled[i];
    stat += d * d / exp_pooled[i];
  }
  const double dof =
      exp_pooled.size() > 1 ? static_cast<double>(exp_pooled.size() - 1) : 1.0;
  ChiSquare out;
  out.statistic = stat;
  out.dof = dof;
  out.p_value = regularized_gamma_q(0.5 * dof, 0.5 * stat);
  out.pooled_cells = exp_pooled.size();
  return out;
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) {
    throw std::invalid_argument("regularized_gamma_p: domain error");
  }
  if (x == 0.0) {
    return 0.0;
  }
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_cf(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) {
    throw std::invalid_argument("regularized_gamma_q: domain error");
  }
  if (x == 0.0) {
    return 1.0;
  }
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_cf(a, x);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  }
  // Bisection on the CDF; plenty fast for harness use.
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13) {
      break;
    }
  }
  return 0.5 * (lo + hi);
}

double bonferroni_z(std::size_t tests) {
  if (tests == 0) {
    throw std::invalid_argument("bonferroni_z: tests must be >= 1");
  }
  const double familywise = 2.0 * (1.0 - normal_cdf(3.0));  // 3-sigma level
  const double per_test = familywise / static_cast<double>(tests);
  return normal_quantile(1.0 - 0.5 * per_test);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth) {
  if (!(b >= a)) {
    throw std::invalid_argument("adaptive_simpson: b < a");
  }
  if (a == b) {
    return 0.0;
  }
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(m);
  const double whole = simpson_rule(f, a, fa, b, fb, m, fm);
  return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

}  // namespace gwlim
