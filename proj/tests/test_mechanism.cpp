#include <doctest.h>

#include <cmath>
#include <vector>

#include "gwlim/io.hpp"
#include "gwlim/mechanism.hpp"

using namespace gwlim;

namespace {

// Closed-form flows for the two quadratic catalog mechanisms.
double u_critical(double t, double lambda) {  // alpha = 0, beta = 1/2
  return 2.0 * lambda / (2.0 + lambda * t);
}

double u_super(double t, double lambda) {  // alpha = -1, beta = 1/2
  return 2.0 * lambda / (lambda + (2.0 - lambda) * std::exp(-t));
}

const BranchingMechanism& critical_mech() {
  static const BranchingMechanism m(0.0, 0.5);
  return m;
}

const BranchingMechanism& super_mech() {
  static const BranchingMechanism m(-1.0, 0.5);
  return m;
}

}  // namespace

TEST_SUITE("mechanism") {
  TEST_CASE("psi values and derivative") {
    const auto& m = super_mech();
    CHECK(m.psi(0.0) == 0.0);
    CHECK(m.psi(2.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(m.psi(1.0) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(m.psi_prime(1.0) == doctest::Approx(0.0).epsilon(1e-15));

    // with jumps: compensator only below size one
    const BranchingMechanism jumpy(0.5, 0.1, {{0.5, 2.0}, {3.0, 0.25}});
    CHECK(jumpy.psi(0.0) == 0.0);
    const double l = 1.7;
    const double by_hand =
        0.5 * l + 0.1 * l * l + 2.0 * (std::exp(-0.5 * l) - 1.0 + 0.5 * l) +
        0.25 * (std::exp(-3.0 * l) - 1.0);
    CHECK(jumpy.psi(l) == doctest::Approx(by_hand).epsilon(1e-14));
    // finite difference cross-check of the analytic derivative
    const double h = 1e-6;
    const double fd = (jumpy.psi(l + h) - jumpy.psi(l - h)) / (2.0 * h);
    CHECK(jumpy.psi_prime(l) == doctest::Approx(fd).epsilon(1e-7));
  }

  TEST_CASE("classification and roots") {
    CHECK(classify(critical_mech()) == Criticality::kCritical);
    CHECK(classify(super_mech()) == Criticality::kSupercritical);
    CHECK(classify(BranchingMechanism(1.0, 0.5)) == Criticality::kSubcritical);

    CHECK(largest_root(critical_mech()) == 0.0);
    CHECK(largest_root(BranchingMechanism(1.0, 0.5)) == 0.0);
    CHECK(largest_root(super_mech()) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(critical_shift(super_mech()) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK_THROWS_AS(critical_shift(critical_mech()), std::domain_error);

    // the a' = 1/2 member of the drift family: roots of l^2/2 - l/2
    const BranchingMechanism half(-0.5, 0.5);
    CHECK(largest_root(half) == doctest::Approx(1.0).epsilon(1e-13));
  }

  TEST_CASE("shifted mechanisms") {
    const auto& m = super_mech();
    const auto id = m.shifted(0.0);
    for (const double l : {0.0, 0.3, 1.0, 5.0}) {
      CHECK(id.psi(l) == doctest::Approx(m.psi(l)).epsilon(1e-15));
    }
    const double gamma = largest_root(m);
    const auto shifted = m.shifted(gamma);
    CHECK(shifted.psi(0.0) == doctest::Approx(0.0).epsilon(1e-14));
    // psi_gamma(l) = l^2/2 + l
    for (const double l : {0.1, 1.0, 2.0, 7.0}) {
      CHECK(shifted.psi(l) ==
            doctest::Approx(0.5 * l * l + l).epsilon(1e-13));
    }
    // the shift by the largest root is (sub)critical
    CHECK(shifted.psi_prime(0.0) >= 0.0);
    CHECK(classify(shifted) == Criticality::kSubcritical);
  }

  TEST_CASE("grey condition") {
    const auto grey = check_grey(super_mech());
    CHECK(grey.verdict == IntegralVerdict::kHolds);
    // closed form: integral over [4, inf) of 1/(l^2/2 - l) = log 2
    CHECK(grey.estimate == doctest::Approx(std::log(2.0)).epsilon(1e-9));

    const auto grey_critical = check_grey(critical_mech());
    CHECK(grey_critical.verdict == IntegralVerdict::kHolds);
    // integral over [1, inf) of 2/l^2 = 2
    CHECK(grey_critical.estimate == doctest::Approx(2.0).epsilon(1e-9));

    const auto no_diffusion = check_grey(BranchingMechanism(-0.5, 0.0, {{1.0, 1.0}}));
    CHECK(no_diffusion.verdict == IntegralVerdict::kInconclusive);
  }

  TEST_CASE("conservativity holds for finite-activity mechanisms") {
    for (const auto* m : {&critical_mech(), &super_mech()}) {
      const auto res = check_conservative(*m);
      CHECK(res.verdict == IntegralVerdict::kHolds);
    }
    const BranchingMechanism jumpy(0.2, 0.3, {{0.5, 1.0}});
    CHECK(check_conservative(jumpy).verdict == IntegralVerdict::kHolds);
  }

  TEST_CASE("flow fixed points") {
    const double gamma = largest_root(super_mech());
    for (const double t : {0.1, 1.0, 10.0, 50.0}) {
      CHECK(u_solve(super_mech(), t, gamma) ==
            doctest::Approx(gamma).epsilon(1e-10));
      CHECK(u_solve(super_mech(), t, 0.0) == 0.0);
    }
  }

  TEST_CASE("flow matches the closed forms to 1e-8") {
    std::vector<double> lambdas;
    for (double l = 0.01; l <= 100.0; l *= std::pow(10000.0, 1.0 / 12.0)) {
      lambdas.push_back(l);
    }
    for (double t = 0.25; t <= 10.0; t += 0.75) {
      for (const double l : lambdas) {
        const double num_c = u_solve(critical_mech(), t, l);
        const double ref_c = u_critical(t, l);
        CHECK(std::fabs(num_c - ref_c) <= 1e-8 * std::max(1.0, ref_c));
        const double num_s = u_solve(super_mech(), t, l);
        const double ref_s = u_super(t, l);
        CHECK(std::fabs(num_s - ref_s) <= 1e-8 * std::max(1.0, ref_s));
      }
    }
    CHECK(u_solve(critical_mech(), 2.0, 1.0) ==
          doctest::Approx(0.5).epsilon(1e-10));
  }

  TEST_CASE("flow semigroup property") {
    for (const auto* m : {&critical_mech(), &super_mech()}) {
      for (const double s : {0.3, 1.2}) {
        for (const double t : {0.5, 2.5}) {
          for (const double l : {0.05, 1.0, 9.0}) {
            const double once = u_solve(*m, s + t, l);
            const double twice = u_solve(*m, s, u_solve(*m, t, l));
            CHECK(std::fabs(once - twice) <= 1e-9 * std::max(1.0, once));
          }
        }
      }
    }
  }

  TEST_CASE("conditioning identity through the shifted flow") {
    const auto& m = super_mech();
    const double gamma = largest_root(m);
    const auto shifted = m.shifted(gamma);
    for (const double t : {0.4, 1.0, 3.0}) {
      for (const double l : {0.1, 0.7, 2.0, 8.0}) {
        const double lhs = u_solve(m, t, l + gamma) - gamma;
        const double rhs = u_solve(shifted, t, l);
        CHECK(std::fabs(lhs - rhs) <= 1e-9 * std::max(1.0, std::fabs(rhs)));
      }
    }
  }

  TEST_CASE("flow over a grid in one sweep") {
    const std::vector<double> times{0.5, 1.0, 2.0, 4.0};
    const auto values = u_solve_grid(super_mech(), times, 3.0);
    REQUIRE(values.size() == times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      CHECK(std::fabs(values[i] - u_super(times[i], 3.0)) <= 1e-8);
    }
    CHECK_THROWS_AS(
        u_solve_grid(super_mech(), std::vector<double>{1.0, 0.5}, 3.0),
        std::invalid_argument);
  }

  TEST_CASE("extinction rate and CDF against the closed forms") {
    // critical: v(t) = 2/t
    CHECK(extinction_rate(critical_mech(), 2.0) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(extinction_cdf(critical_mech(), 1.0, 2.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
    // super-critical: v(t) = 2 / (1 - e^{-t})
    const double t = std::log(2.0);
    CHECK(extinction_rate(super_mech(), t) ==
          doctest::Approx(4.0).epsilon(1e-9));
    CHECK(extinction_cdf(super_mech(), 1.0, t) ==
          doctest::Approx(std::exp(-4.0)).epsilon(1e-8));
    // the t -> infinity limit is exp(-gamma x)
    CHECK(extinction_cdf(super_mech(), 1.0, 50.0) ==
          doctest::Approx(std::exp(-2.0)).epsilon(1e-8));

    // tiny times go through the tail inversion branch
    const double small = extinction_rate(critical_mech(), 1e-4);
    CHECK(small == doctest::Approx(2.0 / 1e-4).epsilon(1e-6));
  }

  TEST_CASE("extinction CDF is nondecreasing in time") {
    std::vector<double> times;
    for (double t = 0.1; t <= 50.0; t *= 1.4) {
      times.push_back(t);
    }
    const auto values = extinction_cdf_grid(super_mech(), 1.0, times);
    for (std::size_t i = 1; i < values.size(); ++i) {
      CHECK(values[i] >= values[i - 1] - 1e-12);
    }
    CHECK(values.back() == doctest::Approx(std::exp(-2.0)).epsilon(1e-8));
  }

  TEST_CASE("quadratic flow coefficients") {
    const auto critical = quadratic_flow(0.0, 0.5, 2.0);
    CHECK(critical.decay == 1.0);
    CHECK(critical.scale == doctest::Approx(1.0).epsilon(1e-15));
    // shifted super-critical catalog mechanism: alpha = 1
    const auto shifted = quadratic_flow(1.0, 0.5, 0.5);
    CHECK(shifted.decay == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(shifted.scale ==
          doctest::Approx(0.5 * (1.0 - std::exp(-0.5))).epsilon(1e-14));
  }

  TEST_CASE("exact transitions: void probability and mean") {
    CounterRng rng(2025);
    const double x = 1.5;
    const double t = 2.0;
    const int reps = 100000;
    int zeros = 0;
    double sum = 0.0;
    for (int i = 0; i < reps; ++i) {
      const double y = feller_sample(0.0, 0.5, x, t, rng);
      if (y == 0.0) {
        ++zeros;
      }
      sum += y;
    }
    const double void_target = std::exp(-2.0 * x / t);
    const double void_freq = static_cast<double>(zeros) / reps;
    const double void_se =
        std::sqrt(void_target * (1.0 - void_target) / reps);
    CHECK(std::fabs(void_freq - void_target) <= 3.0 * void_se);
    // critical mechanisms preserve the mean
    const double mean = sum / reps;
    const double mean_se = std::sqrt(x * t / reps);
    CHECK(std::fabs(mean - x) <= 3.0 * mean_se);

    CHECK(feller_sample(0.0, 0.5, x, 0.0, rng) == x);
    CHECK_THROWS_AS(
        feller_sample(BranchingMechanism(0.0, 0.5, {{1.0, 1.0}}), x, t, rng),
        std::domain_error);
  }

  TEST_CASE("exact transitions: sub-critical mean decay") {
    CounterRng rng(31);
    const double x = 2.0;
    const double t = 0.7;
    const int reps = 100000;
    double sum = 0.0;
    for (int i = 0; i < reps; ++i) {
      sum += feller_sample(1.0, 0.5, x, t, rng);
    }
    const double target = x * std::exp(-t);
    CHECK(std::fabs(sum / reps - target) <= 0.01 * target);
  }

  TEST_CASE("csbp marginals wrap the flow") {
    const CsbpLaw law(super_mech(), 1.0);
    CHECK(law.extinction_probability() ==
          doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(law.extinction_cdf(std::log(2.0)) ==
          doctest::Approx(std::exp(-4.0)).epsilon(1e-8));
    // Laplace functional at the fixed point: exp(-x gamma) for all t
    for (const double t : {0.5, 2.0}) {
      CHECK(law.laplace_functional(t, 2.0) ==
            doctest::Approx(std::exp(-2.0)).epsilon(1e-9));
    }
    // sampled void frequency against the closed form
    const CsbpLaw critical(critical_mech(), 1.5);
    CounterRng rng(808);
    int zeros = 0;
    const int reps = 50000;
    for (int i = 0; i < reps; ++i) {
      if (critical.sample(2.0, rng) == 0.0) {
        ++zeros;
      }
    }
    const double target = std::exp(-2.0 * 1.5 / 2.0);
    const double se = std::sqrt(target * (1.0 - target) / reps);
    CHECK(std::fabs(static_cast<double>(zeros) / reps - target) <= 3.0 * se);
    CHECK_THROWS_AS(CsbpLaw(super_mech(), 0.0), std::invalid_argument);
  }

  TEST_CASE("json round trip") {
    const BranchingMechanism m = mechanism_from_json(
        "{\"alpha\": -1, \"beta\": 0.5, \"atoms\": [[0.5, 2.0]]}");
    CHECK(m.alpha() == -1.0);
    CHECK(m.beta() == 0.5);
    REQUIRE(m.atoms().size() == 1);
    const BranchingMechanism back = mechanism_from_json(mechanism_to_json(m));
    CHECK(back.psi(1.3) == doctest::Approx(m.psi(1.3)).epsilon(1e-15));
    CHECK_THROWS_AS(mechanism_from_json("{\"beta\": 1}"),
                    std::invalid_argument);
    CHECK_THROWS_AS(mechanism_from_json("not json"), std::invalid_argument);
  }
}
