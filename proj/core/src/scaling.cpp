#include "gwlim/scaling.hpp"

#include <cmath>
#include <stdexcept>

#include "gwlim/format.hpp"

namespace gwlim {

ScalingFamily near_critical_binary_family(double drift) {
  return ScalingFamily{
      .name = "near-critical-binary(" + format_double(drift) + ")",
      .offspring_for =
          [drift](std::int64_t n) {
            if (n < 1 || std::fabs(drift) / static_cast<double>(n) >= 1.0) {
              throw std::domain_error(
                  "near_critical_binary_family: n too small for the drift");
            }
            return OffspringDistribution::binary(drift /
                                                 static_cast<double>(n));
          },
      .gamma_for = [](std::int64_t n) { return static_cast<double>(n); },
      .target = BranchingMechanism(-drift, 0.5),
      .target_shift = 0.0};
}

double discrete_laplace_exponent(const ScalingFamily& family, std::int64_t n,
                                 double lambda) {
  if (n < 1) {
    throw std::invalid_argument("discrete_laplace_exponent: n >= 1");
  }
  const OffspringDistribution p = family.offspring_for(n);
  const double nn = static_cast<double>(n);
  const double s = std::exp(-lambda / nn);
  return nn * family.gamma_for(n) * (p.gf(s) - s);
}

namespace {

// gamma_n must be positive and nondecreasing along the evaluation grid.
void validate_scaling_grid(const ScalingFamily& family,
                           std::span<const std::int64_t> n_list) {
  double prev = 0.0;
  for (const std::int64_t n : n_list) {
    const double g = family.gamma_for(n);
    if (!(g > 0.0) || g < prev) {
      throw std::invalid_argument(
          "ScalingFamily: gamma_n must be positive and nondecreasing");
    }
    prev = g;
  }
}

}  // namespace

UniformCheck check_uniform_convergence(const ScalingFamily& family,
                                       double lambda_max, int grid_size,
                                       std::span<const std::int64_t> n_list) {
  if (!(lambda_max > 0.0) || grid_size < 2) {
    throw std::invalid_argument(
        "check_uniform_convergence: need lambda_max > 0 and grid_size >= 2");
  }
  validate_scaling_grid(family, n_list);
  UniformCheck out;
  for (std::int64_t n : n_list) {
    const OffspringDistribution p = family.offspring_for(n);
    const double nn = static_cast<double>(n);
    const double scale = nn * family.gamma_for(n);
    double sup = 0.0;
    for (int i = 0; i < grid_size; ++i) {
      const double lambda =
          lambda_max * static_cast<double>(i) / (grid_size - 1);
      const double s = std::exp(-lambda / nn);
      const double g = scale * (p.gf(s) - s);
      sup = std::max(sup, std::fabs(g - family.target_psi(lambda)));
    }
    out.rows.push_back({n, sup});
  }
  out.decreasing = true;
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    if (out.rows[i].sup_deviation >= out.rows[i - 1].sup_deviation) {
      out.decreasing = false;
    }
  }
  return out;
}

LaplacePoint check_laplace_convergence(const ScalingFamily& family,
                                       std::int64_t n, double lambda) {
  LaplacePoint out;
  out.target = family.target_psi(lambda);
  const double nn = static_cast<double>(n);
  const double scale = nn * family.gamma_for(n);
  const double folds =
      static_cast<double>(integer_part(nn * family.gamma_for(n)));
  const double g = discrete_laplace_exponent(family, n, lambda);
  const double argument = std::exp(lambda / nn) * g / scale + 1.0;
  if (!(argument > 0.0)) {
    out.in_domain = false;
    return out;
  }
  out.log_laplace = folds * std::log(argument);
  return out;
}

std::vector<SmallTimeMassRow> check_small_time_mass(
    const ScalingFamily& family, double delta,
    std::span<const std::int64_t> n_list) {
  if (!(delta > 0.0)) {
    throw std::invalid_argument("check_small_time_mass: delta must be > 0");
  }
  validate_scaling_grid(family, n_list);
  std::vector<SmallTimeMassRow> rows;
  for (std::int64_t n : n_list) {
    SmallTimeMassRow row;
    row.n = n;
    row.iterations = integer_part(delta * family.gamma_for(n));
    if (row.iterations >= 1) {
      const OffspringDistribution p = family.offspring_for(n);
      const double g =
          p.gf_iterate(static_cast<std::uint64_t>(row.iterations), 0.0);
      row.value = std::pow(g, static_cast<double>(n));
      row.valid = true;
    }
    rows.push_back(row);
  }
  return rows;
}

ScalingFamily conjugate_family(const ScalingFamily& family) {
  const auto base = family.offspring_for;
  return ScalingFamily{
      .name = family.name + "-conjugate",
      .offspring_for = [base](std::int64_t n) { return conjugate(base(n)); },
      .gamma_for = family.gamma_for,
      .target = family.target,
      .target_shift = largest_root(family.target)};
}

std::vector<SurvivalMassRow> survival_mass_limit(
    const ScalingFamily& family, double x,
    std::span<const std::int64_t> n_list) {
  if (!(x > 0.0)) {
    throw std::invalid_argument("survival_mass_limit: x must be > 0");
  }
  validate_scaling_grid(family, n_list);
  const double gamma = largest_root(family.target);
  const double limit = std::exp(-gamma * x);
  std::vector<SurvivalMassRow> rows;
  for (std::int64_t n : n_list) {
    const double f = extinction_prob(family.offspring_for(n));
    const double ancestors =
        static_cast<double>(integer_part(static_cast<double>(n) * x));
    SurvivalMassRow row;
    row.n = n;
    row.mass = std::pow(f, ancestors);
    row.deviation = std::fabs(row.mass - limit);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gwlim
