#include "gwlim/gwtree.hpp"

#include <algorithm>
#include <cmath>

namespace gwlim {
namespace {

std::string explosion_message(std::uint32_t generation,
                              std::uint64_t attempted) {
  return "sample_truncated: node budget exceeded at generation " +
         std::to_string(generation) + " (would materialize " +
         std::to_string(attempted) + " nodes)";
}

}  // namespace

ExplosionError::ExplosionError(std::uint32_t generation,
                               std::uint64_t attempted_nodes)
    : std::runtime_error(explosion_message(generation, attempted_nodes)),
      generation_(generation),
      attempted_(attempted_nodes) {}

OrderedTree OrderedTree::from_bfs_counts(
    std::span<const std::uint32_t> counts,
    std::optional<std::uint32_t> truncation) {
  OrderedTree t;
  t.truncation_ = truncation;
  t.child_counts_.assign(counts.begin(), counts.end());
  t.heights_.reserve(counts.size());

  // Walk generation by generation, checking the counts are consistent:
  // the number of nodes at height h+1 must equal the sum of child counts
  // at height h, and for truncated trees the counts stop at height a-1.
  std::size_t consumed = 0;
  std::uint64_t current = 1;  // the root
  std::uint32_t h = 0;
  std::uint64_t frontier = 0;
  while (current > 0) {
    if (truncation && h == *truncation) {
      frontier = current;
      break;
    }
    if (consumed + current > counts.size()) {
      throw std::invalid_argument(
          "OrderedTree: child-count list is shorter than the tree it claims");
    }
    std::uint64_t next = 0;
    for (std::uint64_t i = 0; i < current; ++i) {
      t.heights_.push_back(h);
      next += counts[consumed + i];
    }
    consumed += current;
    current = next;
    ++h;
  }
  if (consumed != counts.size()) {
    throw std::invalid_argument(
        "OrderedTree: child-count list is longer than the tree it encodes");
  }
  for (std::uint64_t i = 0; i < frontier; ++i) {
    t.heights_.push_back(h);
    t.child_counts_.push_back(0);
  }
  return t;
}

OrderedTree OrderedTree::single_root(std::optional<std::uint32_t> truncation) {
  if (truncation && *truncation == 0) {
    return from_bfs_counts({}, truncation);  // the root is a frontier node
  }
  // Otherwise the root's zero child count is part of the identity.
  const std::uint32_t zero = 0;
  return from_bfs_counts(std::span(&zero, 1), truncation);
}

std::size_t OrderedTree::leaf_count() const {
  std::size_t leaves = 0;
  for (std::uint32_t c : child_counts_) {
    if (c == 0) {
      ++leaves;
    }
  }
  return leaves;
}

std::vector<std::uint32_t> OrderedTree::identity_counts() const {
  if (!truncation_) {
    return child_counts_;
  }
  std::vector<std::uint32_t> out;
  out.reserve(child_counts_.size());
  for (std::size_t i = 0; i < child_counts_.size(); ++i) {
    if (heights_[i] < *truncation_) {
      out.push_back(child_counts_[i]);
    }
  }
  return out;
}

std::vector<std::uint64_t> OrderedTree::generation_sizes() const {
  const std::uint32_t top = truncation_ ? *truncation_ : height();
  std::vector<std::uint64_t> sizes(static_cast<std::size_t>(top) + 1, 0);
  for (std::uint32_t h : heights_) {
    ++sizes[h];
  }
  return sizes;
}

Forest::Forest(std::vector<OrderedTree> trees) : trees_(std::move(trees)) {
  if (trees_.empty()) {
    throw std::invalid_argument("Forest: needs at least one tree");
  }
  for (const auto& t : trees_) {
    if (t.truncation_height() != trees_.front().truncation_height()) {
      throw std::invalid_argument(
          "Forest: all member trees must share one truncation height");
    }
  }
}

std::optional<std::uint32_t> Forest::truncation_height() const {
  return trees_.front().truncation_height();
}

std::vector<std::uint64_t> Forest::generation_sizes() const {
  std::size_t len = 0;
  for (const auto& t : trees_) {
    len = std::max(len, t.generation_sizes().size());
  }
  std::vector<std::uint64_t> sizes(len, 0);
  for (const auto& t : trees_) {
    const auto ts = t.generation_sizes();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      sizes[i] += ts[i];
    }
  }
  return sizes;
}

OrderedTree sample_truncated(const OffspringDistribution& p,
                             std::uint32_t height, CounterRng& rng,
                             const SampleOptions& options) {
  // Inverse-CDF draw per node; the support is small by construction.
  const auto probs = p.probs();
  std::vector<std::uint32_t> counts;
  std::uint64_t nodes = 1;
  std::uint64_t current = 1;
  for (std::uint32_t h = 0; h < height && current > 0; ++h) {
    std::uint64_t next = 0;
    for (std::uint64_t i = 0; i < current; ++i) {
      double u = rng.next_double();
      std::uint32_t k = 0;
      for (; k + 1 < probs.size(); ++k) {
        if (u < probs[k]) {
          break;
        }
        u -= probs[k];
      }
      counts.push_back(k);
      next += k;
    }
    if (nodes + next > options.node_budget) {
      throw ExplosionError(h + 1, nodes + next);
    }
    nodes += next;
    current = next;
  }
  return OrderedTree::from_bfs_counts(counts, height);
}

Forest sample_forest(const OffspringDistribution& p, std::uint64_t count,
                     std::uint32_t height, CounterRng& rng,
                     const SampleOptions& options) {
  if (count < 1) {
    throw std::invalid_argument("sample_forest: count must be >= 1");
  }
  std::vector<OrderedTree> trees;
  trees.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    CounterRng tree_rng = rng.substream(i);
    trees.push_back(sample_truncated(p, height, tree_rng, options));
  }
  return Forest(std::move(trees));
}

namespace {

void enumerate_truncated_rec(const OffspringDistribution& p,
                             std::uint32_t remaining_levels,
                             std::uint64_t frontier,
                             std::vector<std::uint32_t>& counts, double prob,
                             std::size_t class_budget,
                             std::optional<std::uint32_t> truncation,
                             std::vector<TreeClass>& out) {
  if (remaining_levels == 0 || frontier == 0) {
    if (out.size() >= class_budget) {
      throw EnumerationBudgetError(
          "enumerate_truncated: class budget exceeded");
    }
    out.push_back({OrderedTree::from_bfs_counts(counts, truncation), prob});
    return;
  }
  // Assign child counts to the `frontier` nodes of the current generation,
  // one at a time, depth of recursion = frontier index.
  struct Assigner {
    const OffspringDistribution& p;
    std::uint32_t remaining_levels;
    std::size_t class_budget;
    std::optional<std::uint32_t> truncation;
    std::vector<TreeClass>& out;
    std::vector<std::uint32_t>& counts;

    void assign(std::uint64_t left, std::uint64_t next_frontier, double prob) {
      if (left == 0) {
        enumerate_truncated_rec(p, remaining_levels - 1, next_frontier, counts,
                                prob, class_budget, truncation, out);
        return;
      }
      for (std::uint32_t k = 0; k <= p.max_children(); ++k) {
        const double pk = p.prob(k);
        if (pk == 0.0) {
          continue;
        }
        counts.push_back(k);
        assign(left - 1, next_frontier + k, prob * pk);
        counts.pop_back();
      }
    }
  };
  Assigner a{p, remaining_levels, class_budget, truncation, out, counts};
  a.assign(frontier, 0, prob);
}

}  // namespace

std::vector<TreeClass> enumerate_truncated(const OffspringDistribution& p,
                                           std::uint32_t height,
                                           std::size_t class_budget) {
  std::vector<TreeClass> out;
  std::vector<std::uint32_t> counts;
  enumerate_truncated_rec(p, height, 1, counts, 1.0, class_budget, height,
                          out);
  return out;
}

namespace {

// Trees with at most `budget` nodes: choose the root's child count k, then
// split the remaining node budget across k ordered subtrees.
void enumerate_finite_rec(const OffspringDistribution& p, std::size_t budget,
                          std::vector<std::uint32_t>& counts_deque,
                          std::uint64_t open_slots, double prob,
                          std::size_t class_budget,
                          std::vector<TreeClass>& out, std::size_t used) {
  if (open_slots == 0) {
    if (out.size() >= class_budget) {
      throw EnumerationBudgetError("enumerate_finite: class budget exceeded");
    }
    out.push_back(
        {OrderedTree::from_bfs_counts(counts_deque, std::nullopt), prob});
    return;
  }
  // Fill slots in BFS order: the next open slot takes each feasible count.
  for (std::uint32_t k = 0; k <= p.max_children(); ++k) {
    const double pk = p.prob(k);
    if (pk == 0.0) {
      continue;
    }
    // Every open slot (including the new ones) still needs at least one
    // node; prune branches that cannot fit in the budget.
    const std::size_t need = used + 1 + (open_slots - 1) + k;
    if (need > budget) {
      continue;
    }
    counts_deque.push_back(k);
    enumerate_finite_rec(p, budget, counts_deque, open_slots - 1 + k,
                         prob * pk, class_budget, out, used + 1);
    counts_deque.pop_back();
  }
}

}  // namespace

std::vector<TreeClass> enumerate_finite(const OffspringDistribution& p,
                                        std::size_t max_nodes,
                                        std::size_t class_budget) {
  if (max_nodes == 0) {
    return {};
  }
  std::vector<TreeClass> out;
  std::vector<std::uint32_t> counts;
  enumerate_finite_rec(p, max_nodes, counts, 1, 1.0, class_budget, out, 0);
  return out;
}

std::uint64_t offspring_sum(const OffspringDistribution& p,
                            std::uint64_t parents, CounterRng& rng) {
  if (parents == 0) {
    return 0;
  }
  // Multinomial split of the parents over the support, largest class last.
  const auto probs = p.probs();
  std::uint64_t total = 0;
  std::uint64_t remaining = parents;
  double mass_left = 1.0;
  for (std::size_t k = 0; k + 1 < probs.size() && remaining > 0; ++k) {
    if (probs[k] <= 0.0) {
      continue;
    }
    const double cond = std::min(1.0, probs[k] / mass_left);
    const std::uint64_t taken = sample_binomial(rng, remaining, cond);
    total += taken * static_cast<std::uint64_t>(k);
    remaining -= taken;
    mass_left -= probs[k];
    if (mass_left <= 0.0) {
      remaining = 0;
      break;
    }
  }
  total += remaining * static_cast<std::uint64_t>(probs.size() - 1);
  return total;
}

std::uint64_t population_after(const OffspringDistribution& p,
                               std::uint64_t initial,
                               std::uint64_t generations, CounterRng& rng) {
  std::uint64_t y = initial;
  for (std::uint64_t g = 0; g < generations && y > 0; ++g) {
    y = offspring_sum(p, y, rng);
  }
  return y;
}

std::optional<std::uint64_t> extinction_generation(
    const OffspringDistribution& p, std::uint64_t initial,
    std::uint64_t max_generations, CounterRng& rng) {
  std::uint64_t y = initial;
  for (std::uint64_t g = 1; g <= max_generations; ++g) {
    if (y == 0) {
      return g - 1;
    }
    y = offspring_sum(p, y, rng);
  }
  return y == 0 ? std::optional<std::uint64_t>(max_generations) : std::nullopt;
}

}  // namespace gwlim
