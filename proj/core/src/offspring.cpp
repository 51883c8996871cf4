#include "gwlim/offspring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gwlim {
namespace {

constexpr std::size_t kMaxSupport = 1u << 16;
constexpr double kSumTol = 1e-12;

void validate_probs(const std::vector<double>& probs) {
  if (probs.empty() || probs.size() > kMaxSupport + 1) {
    throw std::invalid_argument(
        "OffspringDistribution: support must be nonempty and at most 2^16");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument(
          "OffspringDistribution: entries must be finite and >= 0");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > kSumTol) {
    throw std::invalid_argument(
        "OffspringDistribution: entries must sum to 1 within 1e-12");
  }
  if (probs.size() > 1 && probs[1] >= 1.0) {
    throw std::invalid_argument(
        "OffspringDistribution: p_1 must be < 1");
  }
}

}  // namespace

OffspringDistribution::OffspringDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  validate_probs(probs_);
  // drop trailing zero entries so max_children() reports the true support
  while (probs_.size() > 1 && probs_.back() == 0.0) {
    probs_.pop_back();
  }
}

OffspringDistribution OffspringDistribution::point_mass(std::size_t children) {
  std::vector<double> probs(children + 1, 0.0);
  probs[children] = 1.0;
  return OffspringDistribution(std::move(probs));
}

OffspringDistribution OffspringDistribution::binary(double drift) {
  if (!(drift > -1.0 && drift < 1.0)) {
    throw std::invalid_argument("binary: drift must lie in (-1, 1)");
  }
  return OffspringDistribution({(1.0 - drift) / 2.0, 0.0, (1.0 + drift) / 2.0});
}

OffspringDistribution OffspringDistribution::truncated_geometric(
    double success, double tail_bound) {
  if (!(success > 0.0 && success < 1.0)) {
    throw std::invalid_argument("truncated_geometric: success in (0,1)");
  }
  std::vector<double> probs;
  double term = success;
  double tail = 1.0;
  while (tail > tail_bound && probs.size() < kMaxSupport) {
    probs.push_back(term);
    tail -= term;
    term *= 1.0 - success;
  }
  const double total = 1.0 - tail;
  for (double& p : probs) p /= total;
  return OffspringDistribution(std::move(probs));
}

OffspringDistribution OffspringDistribution::truncated_poisson(
    double mean, double tail_bound) {
  if (!(mean > 0.0)) {
    throw std::invalid_argument("truncated_poisson: mean must be > 0");
  }
  std::vector<double> probs;
  double term = std::exp(-mean);
  double tail = 1.0;
  std::size_t k = 0;
  while (tail > tail_bound && probs.size() < kMaxSupport) {
    probs.push_back(term);
    tail -= term;
    ++k;
    term *= mean / static_cast<double>(k);
  }
  const double total = 1.0 - tail;
  for (double& p : probs) p /= total;
  return OffspringDistribution(std::move(probs));
}

double OffspringDistribution::gf(double s) const {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw std::domain_error("gf: argument must lie in [0, 1]");
  }
  // Horner from the top coefficient.
  double acc = 0.0;
  for (std::size_t k = probs_.size(); k-- > 0;) {
    acc = acc * s + probs_[k];
  }
  return acc;
}

double OffspringDistribution::gf_iterate(std::uint64_t k, double s) const {
  double v = s;
  if (!(s >= 0.0 && s <= 1.0)) {
    throw std::domain_error("gf_iterate: argument must lie in [0, 1]");
  }
  for (std::uint64_t i = 0; i < k; ++i) {
    v = gf(v);
  }
  return v;
}

double OffspringDistribution::mean() const {
  double m = 0.0;
  for (std::size_t k = 1; k < probs_.size(); ++k) {
    m += static_cast<double>(k) * probs_[k];
  }
  return m;
}

double extinction_prob(const OffspringDistribution& p, double tol) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("extinction_prob: tol must be > 0");
  }
  if (p.mean() <= 1.0) {
    return 1.0;  // (sub)critical: the minimal root is 1 (p_1 < 1)
  }

  // Monotone iteration s <- g(s) from 0 climbs to the minimal root from
  // below; stop once the increments stall.
  double s = 0.0;
  bool stalled = false;
  for (int i = 0; i < 200000; ++i) {
    const double next = p.gf(s);
    if (next == s) {
      return s;  // exact fixed point (p_0 = 0 gives the root 0)
    }
    if (next - s < 1e-15) {
      s = next;
      stalled = true;
      break;
    }
    s = next;
  }
  if (!stalled && std::fabs(p.gf(s) - s) > tol) {
    throw std::runtime_error("extinction_prob: iteration did not converge");
  }

  // Bracket [lo, hi] with h(lo) >= 0 > h(hi), h(s) = g(s) - s, then bisect.
  // Super-critical means h < 0 just below 1, so expanding from the
  // iteration value always finds a sign change before reaching 1.
  double lo = s;
  double hi = s;
  double step = std::max(1e-12, (1.0 - s) * 0.5);
  for (int i = 0; i < 80 && p.gf(hi) - hi >= 0.0; ++i) {
    hi = std::min(hi + step, 1.0 - 1e-16);
    step *= 2.0;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (p.gf(mid) - mid >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-17) {
      break;
    }
  }
  // Near criticality g(s) - s is extremely flat, so double rounding noise
  // smears the sign change over a band of width ~eps / |g'(f) - 1|; a few
  // extended-precision Newton steps collapse it back to a few ulps.
  long double root = 0.5L * (static_cast<long double>(lo) +
                             static_cast<long double>(hi));
  const auto probs = p.probs();
  for (int i = 0; i < 8; ++i) {
    long double g = 0.0L;
    long double gp = 0.0L;
    for (std::size_t k = probs.size(); k-- > 0;) {
      gp = gp * root + g;
      g = g * root + static_cast<long double>(probs[k]);
    }
    const long double h = g - root;
    const long double hp = gp - 1.0L;
    if (hp == 0.0L) {
      break;
    }
    long double next = root - h / hp;
    if (!(next > 0.0L) || !(next < 1.0L)) {
      break;
    }
    if (next == root) {
      break;
    }
    root = next;
  }
  const double out = static_cast<double>(root);
  if (std::fabs(p.gf(out) - out) > tol) {
    throw std::runtime_error("extinction_prob: residual above tolerance");
  }
  return out;
}

OffspringDistribution conjugate(const OffspringDistribution& p) {
  if (p.prob(0) == 0.0) {
    throw std::domain_error(
        "conjugate: undefined when p_0 = 0 (extinction probability is 0)");
  }
  const double f = extinction_prob(p);
  std::vector<double> q(p.probs().size(), 0.0);
  double tail = 0.0;
  double fpow = 1.0;  // f^{k-1} starting at k = 1
  for (std::size_t k = 1; k < q.size(); ++k) {
    q[k] = fpow * p.prob(k);
    tail += q[k];
    fpow *= f;
  }
  q[0] = 1.0 - tail;

  if (std::fabs(q[0] - p.prob(0) / f) > 1e-12) {
    throw std::runtime_error("conjugate: q_0 disagrees with p_0 / f(p)");
  }
  OffspringDistribution out(std::move(q));
  if (p.mean() > 1.0 && !(out.mean() < 1.0)) {
    throw std::runtime_error("conjugate: expected a sub-critical conjugate");
  }
  return out;
}

GenerationLaw generation_size_distribution(const OffspringDistribution& p,
                                           std::uint64_t n, std::size_t cap,
                                           double tilt_base) {
  return generation_size_trajectory(p, n, cap, tilt_base).back();
}

namespace {

// The recursion runs in long double: exponentially weighted expectations
// of subcritical laws need tail masses far below the double underflow
// threshold, and the 80-bit extended range (~1e-4932) keeps them alive on
// the platforms this toolkit targets.
GenerationLaw snapshot_law(const std::vector<long double>& law,
                           long double escaped, long double tilted_escape,
                           bool clipped, std::uint64_t generation) {
  GenerationLaw out;
  out.generation = generation;
  out.escaped_mass = static_cast<double>(escaped);
  out.tilted_escape_log =
      tilted_escape > 0.0L ? static_cast<double>(std::log(tilted_escape))
                           : -std::numeric_limits<double>::infinity();
  out.clipped = clipped;
  out.probs.resize(law.size());
  out.log_probs.resize(law.size());
  for (std::size_t y = 0; y < law.size(); ++y) {
    out.probs[y] = static_cast<double>(law[y]);
    out.log_probs[y] = law[y] > 0.0L
                           ? static_cast<double>(std::log(law[y]))
                           : -std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace

std::vector<GenerationLaw> generation_size_trajectory(
    const OffspringDistribution& p, std::uint64_t n, std::size_t cap,
    double tilt_base) {
  if (cap < 1) {
    throw std::invalid_argument("generation_size_distribution: cap >= 1");
  }
  if (!(tilt_base >= 1.0)) {
    throw std::invalid_argument(
        "generation_size_distribution: tilt base must be >= 1");
  }
  {
    // the escape bracket is only valid below the second fixed point of g
    double gx = 0.0;
    for (std::size_t k = p.probs().size(); k-- > 0;) {
      gx = gx * tilt_base + p.probs()[k];
    }
    if (gx > tilt_base * (1.0 + 1e-9)) {
      throw std::invalid_argument(
          "generation_size_distribution: g(tilt) must not exceed tilt");
    }
  }
  std::vector<GenerationLaw> trajectory;
  trajectory.reserve(n + 1);

  std::vector<long double> law(cap + 1, 0.0L);
  law[1] = 1.0L;  // one ancestor
  long double escaped = 0.0L;
  long double tilted_escape = 0.0L;
  bool clipped = false;
  trajectory.push_back(snapshot_law(law, escaped, tilted_escape, clipped, 0));

  std::vector<long double> next(cap + 1, 0.0L);
  std::vector<long double> conv(cap + 1, 0.0L);
  std::vector<long double> scratch(cap + 1, 0.0L);
  const auto& pk = p.probs();
  const long double tilt = static_cast<long double>(tilt_base);
  const long double log_tilt = std::log(tilt);

  std::size_t law_last = 1;  // highest index with positive mass
  for (std::uint64_t step = 0; step < n; ++step) {
    std::fill(next.begin(), next.end(), 0.0L);
    std::fill(conv.begin(), conv.end(), 0.0L);
    conv[0] = 1.0L;  // p^{*0}
    std::size_t conv_last = 0;
    long double conv_clipped = 0.0L;  // mass pushed past the cap so far
    // Clip contributions scaled by x^{size - parents consumed at the
    // freeze}, so that pairing with y parents can restore the full weight
    // x^{size} * x^{y - consumed}: the x^{y - consumed} factor accounts
    // for the parents whose children were not yet convolved in when the
    // partial sum crossed the cap (one factor of x bounds each of their
    // progeny lines, since g(x) <= x).
    long double conv_clipped_tilted = 0.0L;
    bool conv_saw_clip = false;
    long double tilt_pow_y = 1.0L;        // x^{y} at pairing time
    long double inv_tilt_pow = 1.0L / tilt;  // x^{-(y+1)} while building

    for (std::size_t y = 0; y <= law_last; ++y) {
      const long double mass = law[y];
      if (mass > 0.0L) {
        for (std::size_t z = 0; z <= conv_last; ++z) {
          next[z] += mass * conv[z];
        }
        escaped += mass * conv_clipped;
        tilted_escape += mass * conv_clipped_tilted * tilt_pow_y;
        clipped = clipped || conv_saw_clip;
      }
      if (y == law_last) {
        break;
      }
      // conv <- conv * p, truncated at cap. Partial sums of nonnegative
      // child counts are nondecreasing, so the truncated convolution of a
      // truncated vector is still the exact restriction to [0, cap]; the
      // clipped mass is accounted term by term, never by subtraction.
      const std::size_t new_last = std::min(conv_last + p.max_children(), cap);
      std::fill(scratch.begin(), scratch.begin() + new_last + 1, 0.0L);
      for (std::size_t z = 0; z <= conv_last; ++z) {
        const long double cz = conv[z];
        if (cz == 0.0L) {
          continue;
        }
        for (std::size_t k = 0; k < pk.size(); ++k) {
          if (pk[k] == 0.0) {
            continue;
          }
          const std::size_t zk = z + k;
          const long double term = cz * static_cast<long double>(pk[k]);
          if (zk <= cap) {
            scratch[zk] += term;
          } else {
            conv_clipped += term;
            conv_clipped_tilted +=
                term *
                std::exp(static_cast<long double>(zk) * log_tilt) *
                inv_tilt_pow;
            conv_saw_clip = true;
          }
        }
      }
      conv.swap(scratch);
      conv_last = new_last;
      tilt_pow_y *= tilt;
      inv_tilt_pow /= tilt;
    }

    law.swap(next);
    law_last = cap;
    while (law_last > 0 && law[law_last] == 0.0L) {
      --law_last;
    }
    trajectory.push_back(
        snapshot_law(law, escaped, tilted_escape, clipped, step + 1));
  }
  return trajectory;
}

}  // namespace gwlim
