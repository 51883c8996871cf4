#include "gwlim/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gwlim {
namespace {

// Drop exactly duplicated knots and merge collinear runs so that paths
// built along different routes compare knot-for-knot.
void canonicalize(std::vector<double>& times, std::vector<double>& values) {
  std::vector<double> t_out;
  std::vector<double> v_out;
  t_out.reserve(times.size());
  v_out.reserve(values.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!t_out.empty() && times[i] == t_out.back() &&
        values[i] == v_out.back()) {
      continue;
    }
    while (t_out.size() >= 2) {
      const std::size_t m = t_out.size();
      const double dt1 = t_out[m - 1] - t_out[m - 2];
      const double dv1 = v_out[m - 1] - v_out[m - 2];
      const double dt2 = times[i] - t_out[m - 1];
      const double dv2 = values[i] - v_out[m - 1];
      // collinear iff dv1 * dt2 == dv2 * dt1 (within rounding)
      if (std::fabs(dv1 * dt2 - dv2 * dt1) <=
          1e-12 * std::max(1.0, std::fabs(times[i]))) {
        t_out.pop_back();
        v_out.pop_back();
        continue;
      }
      break;
    }
    t_out.push_back(times[i]);
    v_out.push_back(values[i]);
  }
  times.swap(t_out);
  values.swap(v_out);
}

}  // namespace

ContourPath::ContourPath() : times_{0.0}, values_{0.0} {}

ContourPath ContourPath::from_knots(std::vector<double> times,
                                    std::vector<double> values,
                                    double active_duration) {
  if (times.size() != values.size() || times.empty()) {
    throw std::invalid_argument("ContourPath: malformed knot list");
  }
  if (times.front() != 0.0 || values.front() != 0.0) {
    throw std::invalid_argument("ContourPath: path must start at (0, 0)");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(values[i] >= 0.0)) {
      throw std::invalid_argument("ContourPath: values must be >= 0");
    }
    if (i > 0) {
      const double dt = times[i] - times[i - 1];
      const double dv = values[i] - values[i - 1];
      if (!(dt > 0.0)) {
        throw std::invalid_argument("ContourPath: times must increase");
      }
      const double slope = dv / dt;
      const bool unit = std::fabs(std::fabs(slope) - 1.0) <= 1e-9;
      const bool flat_zero = std::fabs(slope) <= 1e-9 &&
                             values[i] <= 1e-9 && values[i - 1] <= 1e-9;
      if (!unit && !flat_zero) {
        throw std::invalid_argument(
            "ContourPath: slopes must be +/-1 (or 0 along zero stretches)");
      }
    }
  }
  if (!(active_duration >= times.back()) || values.back() != 0.0) {
    throw std::invalid_argument(
        "ContourPath: path must end at value 0 inside the active window");
  }
  ContourPath p;
  p.times_ = std::move(times);
  p.values_ = std::move(values);
  p.active_ = active_duration;
  canonicalize(p.times_, p.values_);
  return p;
}

double ContourPath::raw_eval(double t) const {
  if (t >= active_ || t >= times_.back()) {
    return 0.0;
  }
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) {
    return values_.front();
  }
  const std::size_t i = static_cast<std::size_t>(it - times_.begin());
  if (i >= times_.size()) {
    return 0.0;
  }
  const double t0 = times_[i - 1];
  const double t1 = times_[i];
  const double v0 = values_[i - 1];
  const double v1 = values_[i];
  return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
}

double ContourPath::eval_at(double t) const {
  if (!(t >= 0.0)) {
    throw std::domain_error("eval_at: time must be >= 0");
  }
  return raw_eval(t * time_scale_) / space_scale_;
}

double ContourPath::sup() const {
  double m = 0.0;
  for (double v : values_) {
    m = std::max(m, v);
  }
  return m / space_scale_;
}

double ContourPath::occupation_below(double level) const {
  const double raw_level = level * space_scale_;
  if (!(raw_level >= 0.0)) {
    return 0.0;
  }
  double kept = 0.0;
  for (std::size_t i = 1; i < times_.size(); ++i) {
    const double t0 = times_[i - 1];
    const double t1 = times_[i];
    const double v0 = values_[i - 1];
    const double v1 = values_[i];
    const double lo = std::min(v0, v1);
    const double hi = std::max(v0, v1);
    if (hi <= raw_level) {
      kept += t1 - t0;
    } else if (lo < raw_level) {
      // linear segment: the fraction of time below the level
      kept += (t1 - t0) * (raw_level - lo) / (hi - lo);
    }
  }
  // implicit zero tail of the active window
  kept += std::max(0.0, active_ - times_.back());
  return kept / time_scale_;
}

std::size_t ContourPath::upcrossings(double level) const {
  const double raw_level = level * space_scale_;
  std::size_t n = 0;
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i - 1] < raw_level && values_[i] > raw_level) {
      ++n;
    }
  }
  return n;
}

ContourPath contour_of(const OrderedTree& tree) {
  const auto counts = tree.child_counts();
  const std::size_t n = counts.size();

  // BFS layout: the children of node i start right after the children of
  // every node before it.
  std::vector<std::size_t> first_child(n + 1, 0);
  first_child[0] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    first_child[i + 1] = first_child[i] + counts[i];
  }

  // Depth-first Euler tour emitting one height per unit step.
  std::vector<std::uint32_t> heights;
  heights.reserve(2 * n);
  heights.push_back(0);
  struct Frame {
    std::size_t node;
    std::uint32_t next;
  };
  std::vector<Frame> stack{{0, 0}};
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < counts[f.node]) {
      const std::size_t child = first_child[f.node] + f.next;
      ++f.next;
      stack.push_back({child, 0});
      heights.push_back(static_cast<std::uint32_t>(stack.size() - 1));
    } else {
      stack.pop_back();
      if (!stack.empty()) {
        heights.push_back(static_cast<std::uint32_t>(stack.size() - 1));
      }
    }
  }

  // Keep only turning points.
  std::vector<double> times;
  std::vector<double> values;
  times.push_back(0.0);
  values.push_back(0.0);
  for (std::size_t i = 1; i + 1 < heights.size(); ++i) {
    const int before = static_cast<int>(heights[i]) - static_cast<int>(heights[i - 1]);
    const int after = static_cast<int>(heights[i + 1]) - static_cast<int>(heights[i]);
    if (before != after) {
      times.push_back(static_cast<double>(i));
      values.push_back(static_cast<double>(heights[i]));
    }
  }
  if (heights.size() > 1) {
    times.push_back(static_cast<double>(heights.size() - 1));
    values.push_back(static_cast<double>(heights.back()));
  }
  return ContourPath::from_knots(std::move(times), std::move(values),
                                 static_cast<double>(heights.size() - 1));
}

ContourPath concat(std::span<const ContourPath> paths, double total_duration) {
  ContourPath out;
  if (paths.empty()) {
    out.active_ = std::max(0.0, total_duration);
    return out;
  }
  for (const auto& p : paths) {
    if (p.time_scale_ != paths.front().time_scale_ ||
        p.space_scale_ != paths.front().space_scale_) {
      throw std::invalid_argument("concat: mismatched path scales");
    }
  }
  std::vector<double> times;
  std::vector<double> values;
  double offset = 0.0;
  for (const auto& p : paths) {
    for (std::size_t i = 0; i < p.times_.size(); ++i) {
      const double t = offset + p.times_[i];
      if (!times.empty() && t == times.back() && p.values_[i] == values.back()) {
        continue;
      }
      times.push_back(t);
      values.push_back(p.values_[i]);
    }
    offset += p.active_;
  }
  if (times.empty()) {
    times.push_back(0.0);
    values.push_back(0.0);
  }
  if (!(total_duration >= offset - 1e-12)) {
    throw std::invalid_argument(
        "concat: total duration shorter than the spliced paths");
  }
  canonicalize(times, values);
  out.times_ = std::move(times);
  out.values_ = std::move(values);
  out.active_ = std::max(total_duration, offset);
  out.time_scale_ = paths.front().time_scale_;
  out.space_scale_ = paths.front().space_scale_;
  return out;
}

ContourPath pad_active(const ContourPath& path, double active_duration) {
  if (!(active_duration >= path.active_)) {
    throw std::invalid_argument("pad_active: cannot shrink the active window");
  }
  ContourPath out = path;
  out.active_ = active_duration;
  return out;
}

ContourPath forest_contour(const Forest& forest, bool padded) {
  std::vector<ContourPath> pieces;
  pieces.reserve(forest.size());
  double total = 0.0;
  for (const auto& tree : forest.trees()) {
    ContourPath c = contour_of(tree);
    if (padded) {
      c = pad_active(c, 2.0 * static_cast<double>(tree.node_count()));
    }
    total += c.raw_active_duration();
    pieces.push_back(std::move(c));
  }
  return concat(pieces, total);
}

ContourPath truncate_above(const ContourPath& path, double level) {
  if (!(level >= 0.0)) {
    throw std::domain_error("truncate_above: level must be >= 0");
  }
  const double raw_level = level * path.space_scale_;

  std::vector<double> times;
  std::vector<double> values;
  times.push_back(0.0);
  values.push_back(0.0);
  double out_t = 0.0;

  auto emit = [&](double t, double v) {
    if (t == times.back() && v == values.back()) {
      return;
    }
    times.push_back(t);
    values.push_back(v);
  };

  for (std::size_t i = 1; i < path.times_.size(); ++i) {
    const double t0 = path.times_[i - 1];
    const double t1 = path.times_[i];
    const double v0 = path.values_[i - 1];
    const double v1 = path.values_[i];
    if (v0 <= raw_level && v1 <= raw_level) {
      out_t += t1 - t0;
      emit(out_t, v1);
    } else if (v0 <= raw_level && v1 > raw_level) {
      // keep the climb up to the level, excise the rest
      const double keep = (t1 - t0) * (raw_level - v0) / (v1 - v0);
      out_t += keep;
      emit(out_t, raw_level);
    } else if (v0 > raw_level && v1 <= raw_level) {
      // resume at the level; the glue point is the already-emitted knot
      const double keep = (t1 - t0) * (raw_level - v1) / (v0 - v1);
      out_t += keep;
      emit(out_t, v1);
    }
    // both above the level: excised entirely
  }
  const double tail = std::max(0.0, path.active_ - path.times_.back());

  canonicalize(times, values);
  ContourPath out;
  out.times_ = std::move(times);
  out.values_ = std::move(values);
  out.active_ = out_t + tail;
  out.time_scale_ = path.time_scale_;
  out.space_scale_ = path.space_scale_;
  return out;
}

ContourPath rescale(const ContourPath& path, std::int64_t n, double gamma_n) {
  if (n < 1 || !(gamma_n > 0.0)) {
    throw std::invalid_argument("rescale: need n >= 1 and gamma_n > 0");
  }
  ContourPath out = path;
  out.time_scale_ = 2.0 * static_cast<double>(n) * gamma_n;
  out.space_scale_ = gamma_n;
  return out;
}

}  // namespace gwlim
