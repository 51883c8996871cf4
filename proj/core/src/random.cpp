#include "gwlim/random.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace gwlim {
namespace {

constexpr double kHalfLogTwoPi = 0.91893853320467274178;  // log(2*pi)/2

// ln(k!) for k < 1024, filled once by accumulation so no constant tables
// have to be trusted.
const std::array<double, 1024>& ln_factorial_table() {
  static const std::array<double, 1024> table = [] {
    std::array<double, 1024> t{};
    t[0] = 0.0;
    double acc = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
      acc += std::log(static_cast<double>(k));
      t[k] = acc;
    }
    return t;
  }();
  return table;
}

// ln k! - Stirling approximation evaluated at k+1; the correction term used
// by the BTRS acceptance bound. Exact (table-based) for k < 10.
double stirling_tail(double k) {
  if (k < 10.0) {
    const double kp1 = k + 1.0;
    return ln_factorial(static_cast<std::uint64_t>(k)) -
           ((k + 0.5) * std::log(kp1) - kp1 + kHalfLogTwoPi);
  }
  const double kp1 = k + 1.0;
  const double kp1sq = kp1 * kp1;
  return (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / 1260.0 / kp1sq) / kp1sq) / kp1;
}

std::uint64_t poisson_inversion(CounterRng& rng, double mean) {
  // Multiply uniforms until the product drops below e^{-mean}.
  const double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double prod = rng.next_open();
  while (prod > limit) {
    ++k;
    prod *= rng.next_open();
  }
  return k;
}

// PTRS: transformed rejection with squeeze, exact for mean >= 10.
std::uint64_t poisson_ptrs(CounterRng& rng, double mean) {
  const double log_mean = std::log(mean);
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double u = rng.next_double() - 0.5;
    const double v = rng.next_open();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r && kf >= 0.0) {
      return static_cast<std::uint64_t>(kf);
    }
    if (kf < 0.0 || (us < 0.013 && v > us)) {
      continue;
    }
    const double k = kf;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * log_mean - mean - ln_factorial(static_cast<std::uint64_t>(k))) {
      return static_cast<std::uint64_t>(kf);
    }
  }
}

// Count successes through geometric waiting times; O(trials * p) expected.
std::uint64_t binomial_inversion(CounterRng& rng, std::uint64_t trials,
                                 double p) {
  const double log_q = std::log1p(-p);
  std::uint64_t count = 0;
  double sum = 0.0;
  for (;;) {
    sum += std::floor(std::log(rng.next_open()) / log_q) + 1.0;
    if (sum > static_cast<double>(trials)) {
      return count;
    }
    ++count;
  }
}

// BTRS (Hormann 1993), requires p <= 1/2 and trials * p >= 10.
std::uint64_t binomial_btrs(CounterRng& rng, std::uint64_t trials, double p) {
  const double n = static_cast<double>(trials);
  const double q = 1.0 - p;
  const double stddev = std::sqrt(n * p * q);
  const double b = 1.15 + 2.53 * stddev;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = n * p + 0.5;
  const double v_r = 0.92 - 4.2 / b;
  const double r = p / q;
  const double alpha = (2.83 + 5.1 / b) * stddev;
  const double m = std::floor((n + 1.0) * p);

  for (;;) {
    const double u = rng.next_double() - 0.5;
    double v = rng.next_open();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + c);
    if (kf < 0.0 || kf > n) {
      continue;
    }
    if (us >= 0.07 && v <= v_r) {
      return static_cast<std::uint64_t>(kf);
    }
    const double k = kf;
    v = std::log(v * alpha / (a / (us * us) + b));
    const double bound =
        (m + 0.5) * std::log((m + 1.0) / (r * (n - m + 1.0))) +
        (n + 1.0) * std::log((n - m + 1.0) / (n - k + 1.0)) +
        (k + 0.5) * std::log(r * (n - k + 1.0) / (k + 1.0)) +
        stirling_tail(m) + stirling_tail(n - m) - stirling_tail(k) -
        stirling_tail(n - k);
    if (v <= bound) {
      return static_cast<std::uint64_t>(kf);
    }
  }
}

}  // namespace

CounterRng CounterRng::keyed(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t k = 0x243f6a8885a308d3ULL;  // arbitrary nonzero start
  for (std::uint64_t w : words) {
    k = mix(k ^ mix(w));
  }
  return CounterRng(k);
}

double ln_factorial(std::uint64_t k) {
  if (k < 1024) {
    return ln_factorial_table()[k];
  }
  const double x = static_cast<double>(k);
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return (x + 0.5) * std::log(x) - x + kHalfLogTwoPi +
         inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

double sample_exponential(CounterRng& rng, double mean) {
  return -mean * std::log(rng.next_open());
}

double sample_normal(CounterRng& rng) {
  const double u1 = rng.next_open();
  const double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.2831853071795864769 * u2);
}

std::uint64_t sample_poisson(CounterRng& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw std::invalid_argument("sample_poisson: mean must be finite and >= 0");
  }
  if (mean == 0.0) {
    return 0;
  }
  return mean < 10.0 ? poisson_inversion(rng, mean) : poisson_ptrs(rng, mean);
}

std::uint64_t sample_binomial(CounterRng& rng, std::uint64_t trials, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("sample_binomial: p must lie in [0, 1]");
  }
  if (trials == 0 || p == 0.0) {
    return 0;
  }
  if (p == 1.0) {
    return trials;
  }
  if (p > 0.5) {
    return trials - sample_binomial(rng, trials, 1.0 - p);
  }
  if (static_cast<double>(trials) * p < 10.0) {
    return binomial_inversion(rng, trials, p);
  }
  return binomial_btrs(rng, trials, p);
}

double sample_gamma(CounterRng& rng, double shape, double scale) {
  if (!(shape >= 0.0) || !(scale > 0.0)) {
    throw std::invalid_argument("sample_gamma: need shape >= 0 and scale > 0");
  }
  if (shape == 0.0) {
    return 0.0;
  }
  const bool small_integer =
      shape <= 32.0 && shape == std::floor(shape);
  if (small_integer) {
    double prod = 1.0;
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(shape); ++i) {
      prod *= rng.next_open();
    }
    return -scale * std::log(prod);
  }
  if (shape < 1.0) {
    // Boost with a power of a uniform: Gamma(a) = Gamma(a+1) * U^{1/a}.
    const double boost = std::pow(rng.next_open(), 1.0 / shape);
    return boost * sample_gamma(rng, shape + 1.0, scale);
  }
  // Marsaglia-Tsang.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = sample_normal(rng);
    double v = 1.0 + c * x;
    if (v <= 0.0) {
      continue;
    }
    v = v * v * v;
    const double u = rng.next_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) {
      return scale * d * v;
    }
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return scale * d * v;
    }
  }
}

}  // namespace gwlim
