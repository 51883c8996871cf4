#pragma once

// Counter-based random streams and exact discrete samplers.
//
// Every stream is a pure function of (key, counter), so replicated work can
// derive one substream per (replicate, object) pair and produce identical
// output regardless of how the replicates are scheduled across workers.

#include <cstdint>
#include <initializer_list>

namespace gwlim {

/// Keyed counter stream: output_i = mix64(key + i * gamma), the SplitMix64
/// generator. Substreams are derived by re-keying, never by jumping, so any
/// number of child streams can be split off a parent without coordination.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key = 0) noexcept : key_(key) {}

  /// Build a key from a tuple of identifying words (seed, experiment id,
  /// replicate index, ...). Order-sensitive.
  static CounterRng keyed(std::initializer_list<std::uint64_t> words) noexcept;

  /// 64-bit finalizer (SplitMix64 / Murmur3-style avalanche).
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() noexcept {
    counter_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = key_ + counter_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53 random bits.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1); safe as a log() argument.
  double next_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Independent child stream keyed by (this stream's key, a, b, c).
  /// Does not advance this stream.
  CounterRng substream(std::uint64_t a, std::uint64_t b = 0,
                       std::uint64_t c = 0) const noexcept {
    std::uint64_t k = mix(key_ ^ 0x6a09e667f3bcc908ULL);
    k = mix(k ^ mix(a));
    k = mix(k ^ mix(b + 0xbb67ae8584caa73bULL));
    k = mix(k ^ mix(c + 0x3c6ef372fe94f82bULL));
    return CounterRng(k);
  }

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// ln(k!) via a cached table for small k and a Stirling series beyond it.
double ln_factorial(std::uint64_t k);

double sample_exponential(CounterRng& rng, double mean);

/// Standard normal via Box-Muller (two uniforms per call, no cached spare).
double sample_normal(CounterRng& rng);

/// Exact Poisson draw. Product-of-uniforms inversion below mean 10, and
/// the PTRS transformed-rejection sampler (Hormann 1993) above.
std::uint64_t sample_poisson(CounterRng& rng, double mean);

/// Exact binomial draw. Geometric-waiting-time inversion when
/// trials * min(p, 1-p) < 10, BTRS transformed rejection otherwise.
std::uint64_t sample_binomial(CounterRng& rng, std::uint64_t trials, double p);

/// Gamma(shape, scale). Sum of exponentials for small integer shapes,
/// Marsaglia-Tsang squeeze for everything else. shape == 0 returns 0.
double sample_gamma(CounterRng& rng, double shape, double scale);

}  // namespace gwlim
