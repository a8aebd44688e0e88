#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace graphldp {

// Deterministic generator used everywhere randomness is needed.  One instance
// per (seed, stream) pair; streams are named so that independent consumers of
// the same seed do not share a sequence and results are replayable across
// platforms and thread counts.  Core step is splitmix64.
class Rng {
 public:
  static constexpr const char* kName = "splitmix64";

  Rng(std::uint64_t seed, std::string_view stream) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the stream tag
    for (unsigned char c : stream) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    state_ = seed ^ scramble(h);
    // burn a few states so nearby seeds decorrelate
    next_u64();
    next_u64();
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return scramble(state_);
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), bound > 0.  Rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Inversion by summed pmf; fine for the modest n used here.
  long long binomial(long long n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    double u = uniform01();
    double logq = std::log1p(-p), logit = std::log(p) - logq;
    double logpmf = n * logq;  // k = 0 term
    double cdf = 0.0;
    for (long long k = 0; k <= n; ++k) {
      cdf += std::exp(logpmf);
      if (u < cdf) return k;
      logpmf += logit + std::log((double)(n - k) / (double)(k + 1));
    }
    return n;
  }

 private:
  static std::uint64_t scramble(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace graphldp
