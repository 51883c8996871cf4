#pragma once

// Scaling families n -> (offspring law, gamma_n) whose rescaled populations
// converge to a CSBP, the discrete Laplace exponent G^(n), and the numeric
// checks that the convergence hypotheses and their consequences hold along
// a grid of n values.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gwlim/mechanism.hpp"
#include "gwlim/offspring.hpp"

namespace gwlim {

/// Integer part as used throughout: floor.
inline std::int64_t integer_part(double x) {
  return static_cast<std::int64_t>(std::floor(x));
}

/// The smallest integer strictly larger than x (so strict_ceil(3) == 4).
/// This is deliberately not std::ceil; it only ever shifts a truncation
/// level by one lattice step.
inline std::int64_t strict_ceil(double x) {
  return static_cast<std::int64_t>(std::floor(x)) + 1;
}

/// A family of offspring laws with its scaling sequence and target
/// mechanism. `target_shift` > 0 marks a family whose target is the
/// shifted mechanism psi_shift (used by conjugate families).
struct ScalingFamily {
  std::string name;
  std::function<OffspringDistribution(std::int64_t)> offspring_for;
  std::function<double(std::int64_t)> gamma_for;
  BranchingMechanism target;
  double target_shift = 0.0;

  double target_psi(double lambda) const {
    return target_shift == 0.0 ? target.psi(lambda)
                               : target.shifted(target_shift).psi(lambda);
  }
};

/// Binary family p^(n) = {(1 - drift/n)/2, 0, (1 + drift/n)/2} with
/// gamma_n = n and target psi(l) = l^2/2 - drift * l. The workhorse family:
/// its extinction probability is the closed form (n - drift)/(n + drift).
ScalingFamily near_critical_binary_family(double drift);

/// Discrete Laplace exponent
///   G^(n)(lambda) = n gamma_n [ g^{p^(n)}(e^{-lambda/n}) - e^{-lambda/n} ].
double discrete_laplace_exponent(const ScalingFamily& family, std::int64_t n,
                                 double lambda);

struct DeviationRow {
  std::int64_t n = 0;
  double sup_deviation = 0.0;
};

struct UniformCheck {
  std::vector<DeviationRow> rows;
  bool decreasing = false;
};

/// Sup over a lambda grid on [0, lambda_max] of |G^(n) - psi| per n, with a
/// monotone-trend verdict across the n list.
UniformCheck check_uniform_convergence(const ScalingFamily& family,
                                       double lambda_max, int grid_size,
                                       std::span<const std::int64_t> n_list);

struct LaplacePoint {
  double log_laplace = 0.0;
  double target = 0.0;
  bool in_domain = true;
};

/// log of the Laplace transform of the [n gamma_n]-fold reproduction-step
/// convolution at lambda,
///   [n gamma_n] * log( e^{lambda/n} G^(n)(lambda) / (n gamma_n) + 1 ),
/// paired with the target psi(lambda). Out-of-domain (nonpositive log
/// argument) is reported, not guessed.
LaplacePoint check_laplace_convergence(const ScalingFamily& family,
                                       std::int64_t n, double lambda);

struct SmallTimeMassRow {
  std::int64_t n = 0;
  std::int64_t iterations = 0;  // [delta * gamma_n]
  double value = 0.0;           // g_[delta gamma_n](0) ^ n
  bool valid = false;           // false when the iteration count is 0
};

/// The small-time extinction masses g_{[delta gamma_n]}(0)^n whose liminf
/// must stay away from 0. Entries with [delta gamma_n] = 0 are flagged
/// invalid rather than reported as 0^n.
std::vector<SmallTimeMassRow> check_small_time_mass(
    const ScalingFamily& family, double delta,
    std::span<const std::int64_t> n_list);

/// Family of conjugate laws with the same scaling sequence; the target is
/// the original mechanism shifted by its largest root.
ScalingFamily conjugate_family(const ScalingFamily& family);

struct SurvivalMassRow {
  std::int64_t n = 0;
  double mass = 0.0;       // f(p^(n)) ^ [n x]
  double deviation = 0.0;  // |mass - exp(-gamma x)|
};

/// Per-n extinction masses f(p^(n))^[nx] against the limit exp(-gamma x).
std::vector<SurvivalMassRow> survival_mass_limit(
    const ScalingFamily& family, double x,
    std::span<const std::int64_t> n_list);

}  // namespace gwlim
