#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gwlim/offspring.hpp"

using namespace gwlim;

namespace {

const OffspringDistribution& super_binary() {
  static const OffspringDistribution p({0.25, 0.0, 0.75});
  return p;
}

}  // namespace

TEST_SUITE("offspring") {
  TEST_CASE("construction validates the probability vector") {
    CHECK_THROWS_AS(OffspringDistribution({0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(OffspringDistribution({-0.1, 1.1}), std::invalid_argument);
    CHECK_THROWS_AS(OffspringDistribution({0.0, 1.0}), std::invalid_argument);
    CHECK_NOTHROW(OffspringDistribution({0.3, 0.2, 0.5}));
    // trailing zeros are trimmed from the support
    CHECK(OffspringDistribution({0.5, 0.0, 0.5, 0.0, 0.0}).max_children() == 2);
  }

  TEST_CASE("generating function basics") {
    const auto& p = super_binary();
    CHECK(p.gf(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.gf(0.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(p.gf(1.0 / 3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(p.gf(1.5), std::domain_error);
    CHECK_THROWS_AS(p.gf(-0.1), std::domain_error);
  }

  TEST_CASE("generating function is nondecreasing and convex on a grid") {
    for (const auto& p :
         {super_binary(), OffspringDistribution({0.3, 0.2, 0.4, 0.1}),
          OffspringDistribution::truncated_geometric(0.4)}) {
      double prev = p.gf(0.0);
      double prev_diff = 0.0;
      for (int i = 1; i <= 64; ++i) {
        const double s = static_cast<double>(i) / 64.0;
        const double g = p.gf(s);
        const double diff = g - prev;
        CHECK(diff >= -1e-15);
        if (i > 1) {
          CHECK(diff >= prev_diff - 1e-12);  // convexity: increments grow
        }
        prev = g;
        prev_diff = diff;
      }
    }
  }

  TEST_CASE("iterates") {
    const auto& p = super_binary();
    CHECK(p.gf_iterate(0, 0.7) == 0.7);
    CHECK(p.gf_iterate(2, 0.0) == doctest::Approx(19.0 / 64.0).epsilon(1e-15));
    // subcritical: iterates increase to 1
    const OffspringDistribution sub({0.75, 0.0, 0.25});
    double prev = 0.0;
    for (int k = 1; k <= 60; ++k) {
      const double v = sub.gf_iterate(k, 0.0);
      CHECK(v >= prev);
      prev = v;
    }
    CHECK(prev > 1.0 - 1e-6);
  }

  TEST_CASE("mean") {
    // the standing assumption p_1 < 1 rules out the pure chain
    CHECK_THROWS_AS(OffspringDistribution::point_mass(1),
                    std::invalid_argument);
    CHECK(OffspringDistribution::point_mass(3).mean() == 3.0);
    CHECK(super_binary().mean() == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(OffspringDistribution::binary(0.1).mean() ==
          doctest::Approx(1.1).epsilon(1e-15));
  }

  TEST_CASE("extinction probability") {
    CHECK(extinction_prob(OffspringDistribution({0.75, 0.0, 0.25})) == 1.0);
    CHECK(extinction_prob(OffspringDistribution::binary(0.0)) == 1.0);
    const double f = extinction_prob(super_binary());
    CHECK(f == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(std::fabs(super_binary().gf(f) - f) <= 1e-14);
    // no deaths: minimal root is 0
    CHECK(extinction_prob(OffspringDistribution({0.0, 0.5, 0.5})) == 0.0);
    // closed form for the near-critical binary family
    const double f10 = extinction_prob(OffspringDistribution::binary(0.1));
    CHECK(f10 == doctest::Approx(9.0 / 11.0).epsilon(1e-13));
  }

  TEST_CASE("extinction probability agrees with the iterate limit") {
    for (const auto& p :
         {super_binary(), OffspringDistribution({0.1, 0.0, 0.9}),
          OffspringDistribution({0.2, 0.3, 0.1, 0.4})}) {
      const double f = extinction_prob(p, 1e-14);
      CHECK(std::fabs(p.gf_iterate(200, 0.0) - f) <= 1e-13);
    }
  }

  TEST_CASE("conjugate of the catalog law") {
    const OffspringDistribution q = conjugate(super_binary());
    REQUIRE(q.probs().size() == 3);
    CHECK(q.prob(0) == doctest::Approx(0.75).epsilon(1e-13));
    CHECK(q.prob(1) == 0.0);
    CHECK(q.prob(2) == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(q.mean() < 1.0);
    // (sub)critical laws are their own conjugates
    const OffspringDistribution sub({0.6, 0.1, 0.3});
    const OffspringDistribution qq = conjugate(sub);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(qq.prob(k) == doctest::Approx(sub.prob(k)).epsilon(1e-14));
    }
    CHECK_THROWS_AS(conjugate(OffspringDistribution({0.0, 0.4, 0.6})),
                    std::domain_error);
  }

  TEST_CASE("conjugate generating function identity on a grid") {
    for (const auto& p :
         {super_binary(), OffspringDistribution({0.2, 0.1, 0.2, 0.5})}) {
      const double f = extinction_prob(p);
      const OffspringDistribution q = conjugate(p);
      CHECK(std::fabs(q.prob(0) - p.prob(0) / f) <= 1e-12);
      for (int i = 0; i <= 32; ++i) {
        const double s = static_cast<double>(i) / 32.0;
        CHECK(std::fabs(q.gf(s) - p.gf(s * f) / f) <= 1e-12);
      }
    }
  }

  TEST_CASE("conjugate iterates: g_k^q(0) = g_k^p(0) / f") {
    const auto& p = super_binary();
    const double f = extinction_prob(p);
    const OffspringDistribution q = conjugate(p);
    for (std::uint64_t k = 1; k <= 50; ++k) {
      const double lhs = q.gf_iterate(k, 0.0);
      const double rhs = p.gf_iterate(k, 0.0) / f;
      CHECK(std::fabs(lhs - rhs) <= 1e-12);
    }
  }

  TEST_CASE("martingale weight sum") {
    const auto& p = super_binary();
    const double f = extinction_prob(p);
    const OffspringDistribution q = conjugate(p);
    double sum = 0.0;
    for (std::size_t k = 0; k < q.probs().size(); ++k) {
      sum += q.prob(k) * std::pow(f, -static_cast<double>(k));
    }
    CHECK(std::fabs(sum - 1.0 / f) <= 1e-12);
  }

  TEST_CASE("generation size law: exact small cases") {
    const auto& p = super_binary();
    const auto law0 = generation_size_distribution(p, 0, 16);
    CHECK(law0.probs[1] == 1.0);
    CHECK(law0.escaped_mass == 0.0);

    const auto law1 = generation_size_distribution(p, 1, 16);
    CHECK(law1.probs[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(law1.probs[2] == doctest::Approx(0.75).epsilon(1e-15));

    const OffspringDistribution sub({0.75, 0.0, 0.25});
    const auto law2 = generation_size_distribution(sub, 2, 16);
    CHECK(law2.probs[0] == doctest::Approx(57.0 / 64.0).epsilon(1e-15));
  }

  TEST_CASE("generation size law conserves mass and matches gf at 0") {
    const auto& p = super_binary();
    for (const std::uint64_t n : {1ULL, 3ULL, 6ULL, 10ULL}) {
      const auto law = generation_size_distribution(p, n, 512);
      double total = law.escaped_mass;
      for (const double m : law.probs) {
        total += m;
      }
      CHECK(std::fabs(total - 1.0) <= 1e-12);
      // P(Y_n = 0) is the n-th iterate at 0
      CHECK(std::fabs(law.probs[0] - p.gf_iterate(n, 0.0)) <= 1e-12);
    }
  }

  TEST_CASE("generation size law: cap escape is tracked, not dropped") {
    const OffspringDistribution doubling({0.01, 0.0, 0.99});
    const auto law = generation_size_distribution(doubling, 8, 64);
    CHECK(law.clipped);
    CHECK(law.escaped_mass > 0.0);
    double total = law.escaped_mass;
    for (const double m : law.probs) {
      total += m;
    }
    CHECK(std::fabs(total - 1.0) <= 1e-12);
  }

  TEST_CASE("martingale through the DP: E[f^{-Y_n}] = 1/f") {
    const auto& p = super_binary();
    const double f = extinction_prob(p);
    const OffspringDistribution q = conjugate(p);
    const auto trajectory = generation_size_trajectory(q, 15, 4096, 1.0 / f);
    for (const auto& law : trajectory) {
      double expectation = 0.0;
      for (std::size_t y = 0; y < law.log_probs.size(); ++y) {
        const double lp = law.log_probs[y];
        if (lp > -std::numeric_limits<double>::infinity()) {
          expectation += std::exp(lp - static_cast<double>(y) * std::log(f));
        }
      }
      // the tilted tail sits far below double range: the log representation
      // must keep it alive, and the weighted escape bound must stay tiny,
      // through generation 15
      CHECK(std::exp(law.tilted_escape_log) <= 1e-10);
      CHECK(std::fabs(expectation - 1.0 / f) <= 1e-9);
    }
    // populations do cross the 4096 cap eventually: from then on the
    // restricted law cannot carry the f^{-Y} weight and the DP says so
    const auto deep = generation_size_distribution(q, 20, 4096, 1.0 / f);
    CHECK(deep.clipped);
    CHECK(deep.escaped_mass == 0.0);  // q-mass of those paths underflows
    CHECK(std::exp(deep.tilted_escape_log) > 0.01);  // but their weight is O(1)
  }

  TEST_CASE("martingale DP certifies 20 generations for a milder law") {
    // mean 1.3: the weighted mass stays far from the cap through n = 20,
    // so the escape bound certifies every generation even though
    // microscopic probability mass does cross
    const OffspringDistribution p({0.35, 0.0, 0.65});
    const double f = extinction_prob(p);
    CHECK(f == doctest::Approx(7.0 / 13.0).epsilon(1e-13));
    const OffspringDistribution q = conjugate(p);
    const auto trajectory = generation_size_trajectory(q, 20, 4096, 1.0 / f);
    for (const auto& law : trajectory) {
      double expectation = 0.0;
      for (std::size_t y = 0; y < law.log_probs.size(); ++y) {
        const double lp = law.log_probs[y];
        if (lp > -std::numeric_limits<double>::infinity()) {
          expectation += std::exp(lp - static_cast<double>(y) * std::log(f));
        }
      }
      const double bracket = std::exp(law.tilted_escape_log);
      CHECK(std::fabs(expectation - 1.0 / f) + bracket <= 1e-9);
    }
  }

  TEST_CASE("kept weight plus tilted escape is conserved exactly") {
    // the restricted weighted expectation and the x^size-weighted frozen
    // mass must reassemble 1/f to rounding, for every generation: the
    // sharpest internal consistency check the capped DP admits
    for (const auto& p : {super_binary(), OffspringDistribution({0.35, 0.0, 0.65})}) {
      const double f = extinction_prob(p);
      const OffspringDistribution q = conjugate(p);
      const auto trajectory = generation_size_trajectory(q, 20, 2048, 1.0 / f);
      for (const auto& law : trajectory) {
        double expectation = 0.0;
        for (std::size_t y = 0; y < law.log_probs.size(); ++y) {
          const double lp = law.log_probs[y];
          if (lp > -std::numeric_limits<double>::infinity()) {
            expectation += std::exp(lp - static_cast<double>(y) * std::log(f));
          }
        }
        const double bracket = std::exp(law.tilted_escape_log);
        CHECK(std::fabs(expectation + bracket - 1.0 / f) <= 1e-12);
      }
    }
  }

  TEST_CASE("tilt validation rejects weights beyond the second fixed point") {
    CHECK_THROWS_AS(generation_size_trajectory(super_binary(), 2, 16, 0.5),
                    std::invalid_argument);
    // for the conjugate law the fixed points are 1 and 1/f = 3
    const OffspringDistribution q = conjugate(super_binary());
    CHECK_NOTHROW(generation_size_trajectory(q, 2, 16, 3.0));
    CHECK_THROWS_AS(generation_size_trajectory(q, 2, 16, 4.0),
                    std::invalid_argument);
  }

  TEST_CASE("tail truncated constructors") {
    const auto geo = OffspringDistribution::truncated_geometric(0.5);
    double total = 0.0;
    for (const double p : geo.probs()) {
      total += p;
    }
    CHECK(std::fabs(total - 1.0) <= 1e-12);
    CHECK(geo.mean() == doctest::Approx(1.0).epsilon(1e-10));

    const auto poi = OffspringDistribution::truncated_poisson(2.5);
    CHECK(poi.mean() == doctest::Approx(2.5).epsilon(1e-10));
  }
}
