#pragma once

// Offspring distributions on {0, ..., K} with finite support: generating
// functions, extinction probabilities, the conjugate (sub)critical law
// obtained from a super-critical one, and an exact DP for the law of the
// generation size started from a single ancestor.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace gwlim {

/// Immutable probability vector over child counts 0..K (K finite).
///
/// Construction validates: entries >= 0, sum within 1e-12 of 1, prob of
/// exactly one child < 1, and K <= 2^16. Instances are safe to share
/// across threads.
class OffspringDistribution {
 public:
  explicit OffspringDistribution(std::vector<double> probs);

  static OffspringDistribution point_mass(std::size_t children);

  /// Near-critical binary law {p0 = (1-drift)/2, p2 = (1+drift)/2}.
  static OffspringDistribution binary(double drift);

  /// Geometric(success) on {0,1,2,...} truncated where the remaining tail
  /// mass drops below `tail_bound`, then renormalised.
  static OffspringDistribution truncated_geometric(double success,
                                                   double tail_bound = 1e-14);

  /// Poisson(mean) truncated the same way.
  static OffspringDistribution truncated_poisson(double mean,
                                                 double tail_bound = 1e-14);

  std::span<const double> probs() const { return probs_; }
  std::size_t max_children() const { return probs_.size() - 1; }
  double prob(std::size_t k) const {
    return k < probs_.size() ? probs_[k] : 0.0;
  }

  /// Generating function g(s) = sum_k p_k s^k, s in [0, 1].
  double gf(double s) const;

  /// k-fold iterate of the generating function; gf_iterate(0, s) == s.
  double gf_iterate(std::uint64_t k, double s) const;

  /// Mean number of children m = sum_k k p_k.
  double mean() const;

  bool operator==(const OffspringDistribution&) const = default;

 private:
  std::vector<double> probs_;
};

/// Minimal root of g(s) = s on [0, 1]: the probability that the tree is
/// finite. Monotone iteration from 0 brackets the root, bisection refines
/// it to |g(f) - f| <= tol. Equals 1 iff mean() <= 1.
double extinction_prob(const OffspringDistribution& p, double tol = 1e-14);

/// Conjugate law q_k = f(p)^{k-1} p_k for k >= 1, q_0 = 1 - sum_{k>=1} q_k.
/// Sub-critical whenever p is super-critical; equals p when f(p) = 1.
/// Requires p_0 > 0 (otherwise f(p) = 0 and the conjugate is undefined).
OffspringDistribution conjugate(const OffspringDistribution& p);

/// Exact law of the generation size Y_n from one ancestor, truncated at
/// `cap`. Mass that would land above the cap is accumulated into
/// `escaped_mass` (and never re-enters the recursion), so expectations of
/// bounded functionals can be bracketed. probs.size() == cap + 1.
///
/// The recursion runs in extended precision and log_probs carries the
/// natural logs of the masses, so sub-double-range tails (needed by
/// exponentially weighted expectations) survive; probs itself underflows
/// to 0 below roughly 1e-308. `clipped` reports whether any mass at all
/// crossed the cap, even mass too small for escaped_mass to represent.
///
/// For expectations of x^{Y_n} with a per-individual weight x >= 1 the
/// plain escape mass is useless (the weight of the lost tail is
/// unbounded), so the recursion can also carry the x^size-weighted
/// clipped mass. Whenever g(x) <= x (true for 1 <= x <= the reciprocal
/// extinction probability, by convexity between the two fixed points of
/// g), a population of size z contributes between 1 and x^z per unit of
/// frozen mass, which brackets the truncation error of the weighted
/// expectation by [escaped_mass, exp(tilted_escape_log)].
struct GenerationLaw {
  std::vector<double> probs;
  std::vector<double> log_probs;  // -infinity where the mass is zero
  double escaped_mass = 0.0;
  double tilted_escape_log = -std::numeric_limits<double>::infinity();
  bool clipped = false;
  std::uint64_t generation = 0;
};

GenerationLaw generation_size_distribution(const OffspringDistribution& p,
                                           std::uint64_t n, std::size_t cap,
                                           double tilt_base = 1.0);

/// Laws of Y_0, Y_1, ..., Y_n computed in one incremental sweep.
std::vector<GenerationLaw> generation_size_trajectory(
    const OffspringDistribution& p, std::uint64_t n, std::size_t cap,
    double tilt_base = 1.0);

}  // namespace gwlim
