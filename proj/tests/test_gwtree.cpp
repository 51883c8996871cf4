#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "gwlim/gwtree.hpp"
#include "gwlim/stats.hpp"

using namespace gwlim;

namespace {

const OffspringDistribution& super_binary() {
  static const OffspringDistribution p({0.25, 0.0, 0.75});
  return p;
}

std::string class_key(const OrderedTree& t) {
  std::string key;
  for (const std::uint32_t c : t.identity_counts()) {
    key += static_cast<char>('0' + c);
  }
  return key;
}

// child counts of the restriction r_h, for projective-consistency checks
std::string restricted_key(const OrderedTree& t, std::uint32_t h) {
  std::string key;
  const auto counts = t.child_counts();
  const auto heights = t.heights();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (heights[i] < h) {
      key += static_cast<char>('0' + counts[i]);
    }
  }
  return key;
}

}  // namespace

TEST_SUITE("gwtree") {
  TEST_CASE("bfs construction checks its input") {
    // root with two leaf children
    const std::vector<std::uint32_t> ok{2, 0, 0};
    const auto t = OrderedTree::from_bfs_counts(ok, std::nullopt);
    CHECK(t.node_count() == 3);
    CHECK(t.leaf_count() == 2);
    CHECK(t.height() == 1);

    CHECK_THROWS_AS(
        OrderedTree::from_bfs_counts(std::vector<std::uint32_t>{2, 0},
                                     std::nullopt),
        std::invalid_argument);
    CHECK_THROWS_AS(
        OrderedTree::from_bfs_counts(std::vector<std::uint32_t>{0, 0},
                                     std::nullopt),
        std::invalid_argument);
  }

  TEST_CASE("node, leaf and generation accounting") {
    const auto root = OrderedTree::single_root();
    CHECK(root.node_count() == 1);
    CHECK(root.leaf_count() == 1);
    CHECK(root.generation_sizes() == std::vector<std::uint64_t>{1});

    // chain of length 2
    const auto chain = OrderedTree::from_bfs_counts(
        std::vector<std::uint32_t>{1, 1, 0}, std::nullopt);
    CHECK(chain.generation_sizes() == std::vector<std::uint64_t>{1, 1, 1});

    // full binary of depth 2: the leaf-count identity
    const auto full = OrderedTree::from_bfs_counts(
        std::vector<std::uint32_t>{2, 2, 2, 0, 0, 0, 0}, std::nullopt);
    CHECK(full.node_count() == 7);
    CHECK(full.leaf_count() == 4);
    std::int64_t sum = 0;
    for (const std::uint32_t c : full.child_counts()) {
      if (c > 0) {
        sum += static_cast<std::int64_t>(c) - 1;
      }
    }
    CHECK(1 + sum == static_cast<std::int64_t>(full.leaf_count()));
  }

  TEST_CASE("leaf count identity holds on every truncated class") {
    for (const auto& cls : enumerate_truncated(super_binary(), 3)) {
      std::int64_t sum = 0;
      for (const std::uint32_t c : cls.tree.child_counts()) {
        if (c > 0) {
          sum += static_cast<std::int64_t>(c) - 1;
        }
      }
      CHECK(1 + sum == static_cast<std::int64_t>(cls.tree.leaf_count()));
    }
  }

  TEST_CASE("sampling trivial laws") {
    CounterRng rng(1);
    const auto dead = sample_truncated(OffspringDistribution::point_mass(0), 5,
                                       rng);
    CHECK(dead.node_count() == 1);
    CHECK(dead.generation_sizes() ==
          std::vector<std::uint64_t>{1, 0, 0, 0, 0, 0});

    const auto height0 = sample_truncated(super_binary(), 0, rng);
    CHECK(height0.node_count() == 1);
    CHECK(height0.truncation_height() == 0);
  }

  TEST_CASE("first generation frequencies") {
    CounterRng rng(314);
    const int reps = 100000;
    int twos = 0;
    for (int i = 0; i < reps; ++i) {
      CounterRng tree_rng = rng.substream(i);
      const auto t = sample_truncated(super_binary(), 1, tree_rng);
      if (t.generation_sizes()[1] == 2) {
        ++twos;
      }
    }
    const double freq = static_cast<double>(twos) / reps;
    const double se = std::sqrt(0.75 * 0.25 / reps);
    CHECK(std::fabs(freq - 0.75) <= 3.0 * se);
  }

  TEST_CASE("sampled class frequencies match the exact enumeration") {
    const auto classes = enumerate_truncated(super_binary(), 3);
    std::map<std::string, std::size_t> index;
    std::vector<double> probs;
    for (const auto& c : classes) {
      index[class_key(c.tree)] = probs.size();
      probs.push_back(c.probability);
    }
    std::vector<std::uint64_t> counts(probs.size(), 0);
    CounterRng rng(2718);
    const int reps = 100000;
    for (int i = 0; i < reps; ++i) {
      CounterRng tree_rng = rng.substream(i);
      const auto t = sample_truncated(super_binary(), 3, tree_rng);
      ++counts[index.at(class_key(t))];
    }
    const auto gof = chi_square_gof(counts, probs);
    CHECK(gof.p_value > 1e-3);
  }

  TEST_CASE("sampling aborts on explosions with the offending generation") {
    const OffspringDistribution doubling({0.0, 0.0, 1.0});
    CounterRng rng(9);
    SampleOptions options;
    options.node_budget = 1000;
    try {
      sample_truncated(doubling, 30, rng, options);
      FAIL("expected ExplosionError");
    } catch (const ExplosionError& e) {
      CHECK(e.generation() >= 9);  // 2^10 - 1 > 1000 after ten levels
      CHECK(e.attempted_nodes() > 1000);
    }
  }

  TEST_CASE("forests: size rule and reproducibility") {
    CounterRng rng(123);
    const auto forest = sample_forest(OffspringDistribution::point_mass(0),
                                      static_cast<std::uint64_t>(10 * 2.5), 2,
                                      rng);
    CHECK(forest.size() == 25);
    CHECK(forest.generation_sizes()[0] == 25);

    CounterRng rng_a(55), rng_b(55);
    const auto fa = sample_forest(super_binary(), 64, 4, rng_a);
    const auto fb = sample_forest(super_binary(), 64, 4, rng_b);
    for (std::size_t i = 0; i < fa.size(); ++i) {
      CHECK(fa.trees()[i] == fb.trees()[i]);
    }
  }

  TEST_CASE("forest mean growth matches m^2") {
    CounterRng rng(4242);
    const std::uint64_t trees = 40000;
    const auto forest = sample_forest(super_binary(), trees, 2, rng);
    const double mean_y2 =
        static_cast<double>(forest.generation_sizes()[2]) /
        static_cast<double>(trees);
    // per-tree variance of Y_2 is 2.8125 for this law
    const double se = std::sqrt(2.8125 / static_cast<double>(trees));
    CHECK(std::fabs(mean_y2 - 2.25) <= 3.0 * se);
  }

  TEST_CASE("enumeration: masses and small catalogs") {
    CHECK(enumerate_truncated(super_binary(), 0).size() == 1);
    CHECK(enumerate_truncated(super_binary(), 0)[0].probability == 1.0);

    const auto a1 = enumerate_truncated(super_binary(), 1);
    REQUIRE(a1.size() == 2);
    double mass1 = 0.0;
    for (const auto& c : a1) {
      mass1 += c.probability;
    }
    CHECK(mass1 == doctest::Approx(1.0).epsilon(1e-15));

    for (const std::uint32_t h : {2u, 3u, 4u}) {
      double mass = 0.0;
      for (const auto& c : enumerate_truncated(super_binary(), h)) {
        mass += c.probability;
      }
      CHECK(std::fabs(mass - 1.0) <= 1e-12);
    }
    // a richer support
    const OffspringDistribution rich({0.3, 0.2, 0.5});
    double mass = 0.0;
    for (const auto& c : enumerate_truncated(rich, 3)) {
      mass += c.probability;
    }
    CHECK(std::fabs(mass - 1.0) <= 1e-12);
  }

  TEST_CASE("enumeration budget is enforced") {
    const OffspringDistribution rich({0.2, 0.2, 0.2, 0.2, 0.2});
    CHECK_THROWS_AS(enumerate_truncated(rich, 4, 1000),
                    EnumerationBudgetError);
  }

  TEST_CASE("projective consistency of truncated enumerations") {
    for (const auto& law :
         {super_binary(), OffspringDistribution({0.3, 0.2, 0.5})}) {
      const auto fine = enumerate_truncated(law, 3);
      const auto coarse = enumerate_truncated(law, 2);
      std::map<std::string, double> marginal;
      for (const auto& c : fine) {
        marginal[restricted_key(c.tree, 2)] += c.probability;
      }
      REQUIRE(marginal.size() == coarse.size());
      for (const auto& c : coarse) {
        CHECK(std::fabs(marginal.at(class_key(c.tree)) - c.probability) <=
              1e-14);
      }
    }
  }

  TEST_CASE("finite-tree enumeration with a node budget") {
    // binary law: full binary trees with <= 7 nodes have 1, 2 or 3 internal
    // nodes -> 1 + 1 + 2 + ... ordered shapes: sizes 1, 3, 5, 7
    const auto finite = enumerate_finite(super_binary(), 7);
    std::map<std::size_t, std::size_t> by_size;
    for (const auto& c : finite) {
      ++by_size[c.tree.node_count()];
    }
    CHECK(by_size.at(1) == 1);
    CHECK(by_size.at(3) == 1);
    CHECK(by_size.at(5) == 2);
    CHECK(by_size.at(7) == 5);  // Catalan(3)
    // probabilities are products over all nodes
    for (const auto& c : finite) {
      if (c.tree.node_count() == 1) {
        CHECK(c.probability == doctest::Approx(0.25).epsilon(1e-15));
      }
    }
  }

  TEST_CASE("population step agrees with the exact generation law") {
    const auto& p = super_binary();
    const auto law = generation_size_distribution(p, 2, 64);
    std::vector<std::uint64_t> counts(65, 0);
    CounterRng rng(808);
    const int reps = 100000;
    for (int i = 0; i < reps; ++i) {
      CounterRng rep = rng.substream(i);
      const std::uint64_t y = population_after(p, 1, 2, rep);
      ++counts[y];
    }
    const auto gof = chi_square_gof(counts, law.probs);
    CHECK(gof.p_value > 1e-3);
  }

  TEST_CASE("population step handles sub-probability edge classes") {
    // law with an interior zero and a heavy tail class
    const OffspringDistribution law({0.5, 0.0, 0.0, 0.5});
    CounterRng rng(6);
    for (int i = 0; i < 1000; ++i) {
      const std::uint64_t kids = offspring_sum(law, 4, rng);
      CHECK(kids % 3 == 0);
      CHECK(kids <= 12);
    }
    CHECK(offspring_sum(law, 0, rng) == 0);
  }

  TEST_CASE("extinction generation bookkeeping") {
    const OffspringDistribution dead = OffspringDistribution::point_mass(0);
    CounterRng rng(11);
    const auto g = extinction_generation(dead, 5, 10, rng);
    REQUIRE(g.has_value());
    CHECK(*g == 1);  // five ancestors, all die in one step

    const auto g0 = extinction_generation(dead, 0, 10, rng);
    REQUIRE(g0.has_value());
    CHECK(*g0 == 0);

    const OffspringDistribution immortal({0.0, 0.5, 0.5});
    CHECK(!extinction_generation(immortal, 3, 50, rng).has_value());
  }
}
