#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gwlim/contour.hpp"
#include "gwlim/gwtree.hpp"

using namespace gwlim;

namespace {

const OffspringDistribution& super_binary() {
  static const OffspringDistribution p({0.25, 0.0, 0.75});
  return p;
}

OrderedTree tree_of(std::vector<std::uint32_t> counts) {
  return OrderedTree::from_bfs_counts(counts, std::nullopt);
}

// Test-only inverse of contour_of: replay the Euler tour from the unit
// lattice and rebuild the breadth-first child counts.
OrderedTree tree_from_contour(const ContourPath& path) {
  const std::size_t steps =
      static_cast<std::size_t>(std::llround(path.raw_active_duration()));
  struct Node {
    std::vector<std::size_t> children;
  };
  std::vector<Node> nodes(1);
  std::vector<std::size_t> stack{0};
  for (std::size_t i = 1; i <= steps; ++i) {
    const double before = path.eval_at(static_cast<double>(i - 1));
    const double after = path.eval_at(static_cast<double>(i));
    if (after > before) {
      nodes.emplace_back();
      nodes[stack.back()].children.push_back(nodes.size() - 1);
      stack.push_back(nodes.size() - 1);
    } else {
      stack.pop_back();
    }
  }
  // breadth-first traversal to emit child counts
  std::vector<std::uint32_t> counts;
  std::vector<std::size_t> queue{0};
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const Node& node = nodes[queue[qi]];
    counts.push_back(static_cast<std::uint32_t>(node.children.size()));
    for (const std::size_t c : node.children) {
      queue.push_back(c);
    }
  }
  return OrderedTree::from_bfs_counts(counts, std::nullopt);
}

bool knots_equal(const ContourPath& a, const ContourPath& b, double tol) {
  if (a.knot_times().size() != b.knot_times().size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.knot_times().size(); ++i) {
    if (std::fabs(a.knot_times()[i] - b.knot_times()[i]) > tol ||
        std::fabs(a.knot_values()[i] - b.knot_values()[i]) > tol) {
      return false;
    }
  }
  return std::fabs(a.raw_active_duration() - b.raw_active_duration()) <= tol;
}

}  // namespace

TEST_SUITE("contour") {
  TEST_CASE("euler tours of the hand catalog") {
    const auto root_only = contour_of(tree_of({0}));
    CHECK(root_only.raw_active_duration() == 0.0);
    CHECK(root_only.sup() == 0.0);

    const auto single_child = contour_of(tree_of({1, 0}));
    CHECK(single_child.raw_active_duration() == 2.0);
    CHECK(single_child.eval_at(1.0) == 1.0);
    CHECK(single_child.eval_at(2.0) == 0.0);

    const auto cherry = contour_of(tree_of({2, 0, 0}));
    CHECK(cherry.raw_active_duration() == 4.0);
    CHECK(cherry.eval_at(1.0) == 1.0);
    CHECK(cherry.eval_at(2.0) == 0.0);
    CHECK(cherry.eval_at(3.0) == 1.0);
    CHECK(cherry.sup() == 1.0);

    const auto chain2 = contour_of(tree_of({1, 1, 0}));
    CHECK(chain2.raw_active_duration() == 4.0);
    CHECK(chain2.eval_at(2.0) == 2.0);
    CHECK(chain2.sup() == 2.0);
  }

  TEST_CASE("duration identity 2(#t - 1) across sampled trees") {
    CounterRng rng(17);
    for (int i = 0; i < 200; ++i) {
      CounterRng tree_rng = rng.substream(i);
      const auto t = sample_truncated(super_binary(), 4, tree_rng);
      const auto c = contour_of(t);
      CHECK(c.raw_active_duration() ==
            2.0 * (static_cast<double>(t.node_count()) - 1.0));
      CHECK(c.sup() == static_cast<double>(t.height()));
    }
  }

  TEST_CASE("eval rejects negative times and is zero past the window") {
    const auto c = contour_of(tree_of({1, 0}));
    CHECK_THROWS_AS(c.eval_at(-0.5), std::domain_error);
    CHECK(c.eval_at(100.0) == 0.0);
  }

  TEST_CASE("concatenation splices active windows") {
    const auto a = contour_of(tree_of({1, 0}));      // (0,1,0)
    const auto b = contour_of(tree_of({2, 0, 0}));   // (0,1,0,1,0)
    std::vector<ContourPath> paths{a, b};
    const auto joined = concat(paths, 6.0);
    CHECK(joined.raw_active_duration() == 6.0);
    CHECK(joined.eval_at(1.0) == 1.0);
    CHECK(joined.eval_at(2.0) == 0.0);
    CHECK(joined.eval_at(3.0) == 1.0);
    CHECK(joined.eval_at(5.0) == 1.0);
    CHECK(joined.eval_at(6.0) == 0.0);
    CHECK(joined.upcrossings(0.5) == 3);

    const auto one = concat(std::vector<ContourPath>{a}, 2.0);
    CHECK(knots_equal(one, a, 0.0));

    std::vector<ContourPath> roots{contour_of(tree_of({0})),
                                   contour_of(tree_of({0}))};
    const auto flat = concat(roots, 0.0);
    CHECK(flat.sup() == 0.0);
  }

  TEST_CASE("padded forest contour runs on the 2 * #nodes clock") {
    CounterRng rng(23);
    const auto forest = sample_forest(super_binary(), 5, 2, rng);
    double clock = 0.0;
    for (const auto& t : forest.trees()) {
      clock += 2.0 * static_cast<double>(t.node_count());
    }
    const auto padded = forest_contour(forest, true);
    CHECK(padded.raw_active_duration() == clock);
    const auto bare = forest_contour(forest, false);
    double tours = 0.0;
    for (const auto& t : forest.trees()) {
      tours += 2.0 * (static_cast<double>(t.node_count()) - 1.0);
    }
    CHECK(bare.raw_active_duration() == tours);
  }

  TEST_CASE("level truncation by hand: the two-step chain") {
    const auto chain2 = contour_of(tree_of({1, 1, 0}));  // 0,1,2,1,0
    const auto cut = truncate_above(chain2, 1.0);
    CHECK(cut.raw_active_duration() == 2.0);
    CHECK(cut.eval_at(0.5) == 0.5);
    CHECK(cut.eval_at(1.0) == 1.0);
    CHECK(cut.eval_at(1.5) == 0.5);
    CHECK(cut.eval_at(2.0) == 0.0);

    // a level at or above the sup leaves the path unchanged
    const auto same = truncate_above(chain2, 2.0);
    CHECK(knots_equal(same, chain2, 0.0));
    const auto zero = truncate_above(ContourPath(), 3.0);
    CHECK(zero.raw_active_duration() == 0.0);
  }

  TEST_CASE("truncation keeps touch points and glues continuously") {
    // up to 2, dip to 1, up to 3, down to 0; cut at 1.5
    const auto w = ContourPath::from_knots({0, 2, 3, 5, 8}, {0, 2, 1, 3, 0},
                                           8.0);
    const auto cut = truncate_above(w, 1.5);
    // kept: climb to 1.5 (1.5), down to 1 (0.5), up to 1.5 (0.5),
    // then the fall 1.5 -> 0 (1.5); total 4 of active time
    CHECK(cut.raw_active_duration() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(cut.sup() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(cut.eval_at(1.5) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(cut.eval_at(2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cut.eval_at(2.5) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(cut.eval_at(4.0) == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("tower property: cutting twice equals cutting once") {
    CounterRng rng(37);
    for (int i = 0; i < 50; ++i) {
      CounterRng tree_rng = rng.substream(i);
      const auto forest = sample_forest(super_binary(), 3, 4, tree_rng);
      const auto path = forest_contour(forest);
      for (const auto& [lo, hi] : std::vector<std::pair<double, double>>{
               {1.0, 2.0}, {1.3, 2.7}, {0.5, 3.5}, {2.0, 2.0}}) {
        const auto direct = truncate_above(path, lo);
        const auto composed = truncate_above(truncate_above(path, hi), lo);
        CHECK(knots_equal(direct, composed, 1e-12));
      }
    }
  }

  TEST_CASE("truncation never increases duration and bounds the sup") {
    CounterRng rng(41);
    for (int i = 0; i < 50; ++i) {
      CounterRng tree_rng = rng.substream(i);
      const auto t = sample_truncated(super_binary(), 5, tree_rng);
      const auto path = contour_of(t);
      for (const double level : {0.0, 0.7, 1.0, 2.5, 4.0}) {
        const auto cut = truncate_above(path, level);
        CHECK(cut.raw_active_duration() <=
              path.raw_active_duration() + 1e-12);
        CHECK(cut.sup() <= level + 1e-12);
      }
    }
  }

  TEST_CASE("occupation times") {
    const auto chain2 = contour_of(tree_of({1, 1, 0}));
    CHECK(chain2.occupation_below(1.0) == doctest::Approx(2.0));
    CHECK(chain2.occupation_below(1e18) ==
          doctest::Approx(chain2.active_duration()));
    CHECK(chain2.occupation_below(0.0) == doctest::Approx(0.0));
    // padded paths count their zero stretches
    const auto padded = pad_active(chain2, 6.0);
    CHECK(padded.occupation_below(1.0) == doctest::Approx(4.0));
  }

  TEST_CASE("up-crossing counts recover generation sizes") {
    CounterRng rng(53);
    for (int i = 0; i < 100; ++i) {
      CounterRng tree_rng = rng.substream(i);
      const auto t = sample_truncated(super_binary(), 4, tree_rng);
      const auto path = contour_of(t);
      const auto sizes = t.generation_sizes();
      for (std::size_t k = 1; k < sizes.size(); ++k) {
        CHECK(path.upcrossings(static_cast<double>(k) - 0.5) == sizes[k]);
      }
    }
  }

  TEST_CASE("rescaling is metadata only") {
    const auto raw = contour_of(tree_of({1, 1, 0}));
    const auto scaled = rescale(raw, 1, 10.0);
    CHECK(scaled.knot_times()[2] == raw.knot_times()[2]);
    CHECK(scaled.time_scale() == 20.0);
    CHECK(scaled.space_scale() == 10.0);
    CHECK(scaled.sup() == doctest::Approx(0.2));  // raw sup 2 over gamma 10
    CHECK(scaled.active_duration() == doctest::Approx(4.0 / 20.0));
    // evaluating at scaled time hits the raw lattice
    CHECK(scaled.eval_at(2.0 / 20.0) == doctest::Approx(0.2));
    // occupation reports scaled time
    CHECK(scaled.occupation_below(0.1) == doctest::Approx(2.0 / 20.0));
    // truncation level is interpreted in scaled units
    const auto cut = truncate_above(scaled, 0.1);
    CHECK(cut.sup() == doctest::Approx(0.1));
    CHECK_THROWS_AS(rescale(raw, 0, 1.0), std::invalid_argument);
  }

  TEST_CASE("round trip: trees are recovered from their contours") {
    for (const auto& cls : enumerate_finite(
             OffspringDistribution({0.3, 0.2, 0.5}), 9)) {
      const auto rebuilt = tree_from_contour(contour_of(cls.tree));
      CHECK(rebuilt == cls.tree);
    }
    CounterRng rng(61);
    for (int i = 0; i < 100; ++i) {
      CounterRng tree_rng = rng.substream(i);
      const auto t = sample_truncated(super_binary(), 4, tree_rng);
      const auto rebuilt = tree_from_contour(contour_of(t));
      CHECK(std::ranges::equal(rebuilt.child_counts(), t.child_counts()));
    }
  }

  TEST_CASE("from_knots validates shape") {
    CHECK_THROWS_AS(ContourPath::from_knots({0, 1}, {1, 0}, 1.0),
                    std::invalid_argument);  // must start at 0
    CHECK_THROWS_AS(ContourPath::from_knots({0, 1}, {0, 0.5}, 1.0),
                    std::invalid_argument);  // slope 1/2
    CHECK_THROWS_AS(ContourPath::from_knots({0, 2}, {0, 2}, 1.0),
                    std::invalid_argument);  // ends above zero
    CHECK_NOTHROW(ContourPath::from_knots({0, 1, 2}, {0, 1, 0}, 2.0));
  }
}
