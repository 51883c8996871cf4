#pragma once

// Galton-Watson trees and forests: breadth-first sampling truncated at a
// fixed height (so super-critical trees stay finite objects), exhaustive
// enumeration of truncated-tree classes with exact probabilities, and the
// generation-size view of the same processes.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwlim/offspring.hpp"
#include "gwlim/random.hpp"

namespace gwlim {

/// Thrown when generation-by-generation sampling exceeds its node budget
/// (a super-critical population explosion).
class ExplosionError : public std::runtime_error {
 public:
  ExplosionError(std::uint32_t generation, std::uint64_t attempted_nodes);
  std::uint32_t generation() const { return generation_; }
  std::uint64_t attempted_nodes() const { return attempted_; }

 private:
  std::uint32_t generation_;
  std::uint64_t attempted_;
};

/// Thrown by the exhaustive enumerators when the class count would exceed
/// the caller's budget.
class EnumerationBudgetError : public std::runtime_error {
 public:
  explicit EnumerationBudgetError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Finite rooted ordered tree stored in breadth-first order.
///
/// Each node carries (height, child_count). When a truncation height `a`
/// is set the tree is the restriction r_a of some larger tree: nodes at
/// height a are frontier leaves and their child counts are not part of the
/// tree's identity (they are stored as 0).
class OrderedTree {
 public:
  /// Build from breadth-first child counts. When `truncation` is set the
  /// counts cover exactly the nodes of height < truncation (frontier nodes
  /// are implied); otherwise they cover every node.
  static OrderedTree from_bfs_counts(std::span<const std::uint32_t> counts,
                                     std::optional<std::uint32_t> truncation);

  static OrderedTree single_root(
      std::optional<std::uint32_t> truncation = std::nullopt);

  std::size_t node_count() const { return child_counts_.size(); }
  std::size_t leaf_count() const;
  std::uint32_t height() const {
    return heights_.empty() ? 0 : heights_.back();
  }
  std::optional<std::uint32_t> truncation_height() const {
    return truncation_;
  }

  /// Per-node child counts in breadth-first order (frontier nodes read 0).
  std::span<const std::uint32_t> child_counts() const { return child_counts_; }
  std::span<const std::uint32_t> heights() const { return heights_; }

  /// Child counts of the nodes that define the tree's identity: all nodes
  /// when untruncated, the nodes below the truncation height otherwise.
  std::vector<std::uint32_t> identity_counts() const;

  /// Generation sizes (Y_0, ..., Y_h) where h is the truncation height if
  /// set (zero-padded if the tree died early) and the tree height otherwise.
  std::vector<std::uint64_t> generation_sizes() const;

  bool operator==(const OrderedTree&) const = default;

 private:
  OrderedTree() = default;
  std::vector<std::uint32_t> child_counts_;
  std::vector<std::uint32_t> heights_;
  std::optional<std::uint32_t> truncation_;
};

/// Ordered collection of independent trees sharing one truncation height.
class Forest {
 public:
  explicit Forest(std::vector<OrderedTree> trees);

  const std::vector<OrderedTree>& trees() const { return trees_; }
  std::size_t size() const { return trees_.size(); }
  std::optional<std::uint32_t> truncation_height() const;

  /// Sum of the member trees' generation sizes.
  std::vector<std::uint64_t> generation_sizes() const;

 private:
  std::vector<OrderedTree> trees_;
};

struct SampleOptions {
  std::uint64_t node_budget = 100'000'000;
};

/// Sample r_height(G^p): breadth-first, one i.i.d. child-count draw per node
/// of height < `height`. Terminates for every offspring law; throws
/// ExplosionError when the node budget is exceeded.
OrderedTree sample_truncated(const OffspringDistribution& p,
                             std::uint32_t height, CounterRng& rng,
                             const SampleOptions& options = {});

/// Independent trees, each drawn from a substream keyed by its index, so
/// the forest is reproducible regardless of evaluation order.
Forest sample_forest(const OffspringDistribution& p, std::uint64_t count,
                     std::uint32_t height, CounterRng& rng,
                     const SampleOptions& options = {});

struct TreeClass {
  OrderedTree tree;
  double probability;
};

/// All equivalence classes of height-`height` truncations together with
/// their exact probabilities (product of p_{k_v} over nodes below the
/// truncation height). Probabilities sum to 1.
std::vector<TreeClass> enumerate_truncated(const OffspringDistribution& p,
                                           std::uint32_t height,
                                           std::size_t class_budget = 1'000'000);

/// All finite trees with at most `max_nodes` nodes and their exact
/// probabilities under G^p (these do not sum to 1; the remainder is the
/// mass of larger or infinite trees).
std::vector<TreeClass> enumerate_finite(const OffspringDistribution& p,
                                        std::size_t max_nodes,
                                        std::size_t class_budget = 1'000'000);

/// One reproduction step of the population process: the total number of
/// children of `parents` i.i.d. individuals. Exact, via a multinomial
/// decomposition into binomial draws, so the cost is O(support size) no
/// matter how large the population is.
std::uint64_t offspring_sum(const OffspringDistribution& p,
                            std::uint64_t parents, CounterRng& rng);

/// Generation size after `generations` steps from `initial` ancestors.
/// Same law as Forest::generation_sizes().back() for a forest of size
/// `initial` truncated at `generations`.
std::uint64_t population_after(const OffspringDistribution& p,
                               std::uint64_t initial,
                               std::uint64_t generations, CounterRng& rng);

/// First generation at which the population started from `initial` hits 0,
/// or nullopt if it is still alive after `max_generations`.
std::optional<std::uint64_t> extinction_generation(
    const OffspringDistribution& p, std::uint64_t initial,
    std::uint64_t max_generations, CounterRng& rng);

}  // namespace gwlim
