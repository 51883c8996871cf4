#pragma once

// Contour functions of finite trees: the unit-speed Euler-tour height
// profile, concatenation across forests, the level-truncation operator
// that excises time spent strictly above a level, and rescaling metadata
// for the scaling-limit experiments.

#include <cstdint>
#include <span>
#include <vector>

#include "gwlim/gwtree.hpp"

namespace gwlim {

/// Piecewise-linear nonnegative path, stored as raw turning-point knots
/// with slopes +1/-1 (slope 0 may appear only at value 0, from forest
/// padding), zero from the active duration onward.
///
/// time_scale / space_scale are pure metadata: a path rescaled with
/// factors (2 n gamma_n, gamma_n) keeps its raw knots and reports every
/// statistic in scaled coordinates, i.e. eval_at(t) is
/// raw(t * time_scale) / space_scale.
class ContourPath {
 public:
  /// The constant-zero path.
  ContourPath();

  /// Knots must start at (0, 0), be strictly increasing in time, stay
  /// nonnegative, and use slopes in {-1, 0, +1} with 0 only between zero
  /// values. `active_duration` is in raw time.
  static ContourPath from_knots(std::vector<double> times,
                                std::vector<double> values,
                                double active_duration);

  double time_scale() const { return time_scale_; }
  double space_scale() const { return space_scale_; }

  double raw_active_duration() const { return active_; }
  /// Active duration in scaled time.
  double active_duration() const { return active_ / time_scale_; }

  /// Path value at scaled time t >= 0 (0 beyond the active duration).
  double eval_at(double t) const;

  /// Supremum over all time, in scaled space units.
  double sup() const;

  /// Scaled time spent at or below `level` within the active window;
  /// occupation_below(+inf) equals active_duration().
  double occupation_below(double level) const;

  /// Number of strict up-crossings of `level` (scaled units).
  std::size_t upcrossings(double level) const;

  std::span<const double> knot_times() const { return times_; }
  std::span<const double> knot_values() const { return values_; }

 private:
  friend ContourPath rescale(const ContourPath&, std::int64_t, double);
  friend ContourPath truncate_above(const ContourPath&, double);
  friend ContourPath concat(std::span<const ContourPath>, double);
  friend ContourPath pad_active(const ContourPath&, double);

  double raw_eval(double t) const;

  std::vector<double> times_;
  std::vector<double> values_;
  double active_ = 0.0;
  double time_scale_ = 1.0;
  double space_scale_ = 1.0;
};

/// Euler-tour contour of a finite tree: active duration 2(#t - 1),
/// maximum value equal to the tree height.
ContourPath contour_of(const OrderedTree& tree);

/// Splice paths end to end over their active durations and extend with
/// zeros up to `total_duration` (raw time). All paths must carry the same
/// scale metadata.
ContourPath concat(std::span<const ContourPath> paths, double total_duration);

/// Zero-extend a path's active window to `active_duration` (raw time);
/// used for the per-tree padding of forest contours, where each tree
/// occupies a clock interval of length 2 * (its node count).
ContourPath pad_active(const ContourPath& path, double active_duration);

/// Contour of a forest. With `padded` (the default) each tree occupies
/// 2 * #nodes of clock, matching the 2 n gamma_n time normalisation of the
/// rescaled regime; otherwise trees are spliced over their bare Euler
/// tours.
ContourPath forest_contour(const Forest& forest, bool padded = true);

/// The operator pi_level: excise the (open) time set where the path sits
/// strictly above `level` and glue what remains. Touch points are kept.
/// `level` is in scaled space units; never increases the active duration.
ContourPath truncate_above(const ContourPath& path, double level);

/// Attach the scaling metadata of the n-th rescaled regime: time runs at
/// 2 n gamma_n, space at gamma_n. Raw knots are untouched.
ContourPath rescale(const ContourPath& path, std::int64_t n, double gamma_n);

}  // namespace gwlim
