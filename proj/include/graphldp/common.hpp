#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace graphldp {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kFormatVersion = 1;

// All entropies and rate values are in nats.
inline constexpr const char* kLogBase = "e";

// x*log(x) with the 0*log(0) = 0 convention.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Round to nearest integer, ties to even.
inline long long round_half_even(double x) {
  double f = std::floor(x);
  double frac = x - f;
  if (frac > 0.5) return static_cast<long long>(f) + 1;
  if (frac < 0.5) return static_cast<long long>(f);
  long long lo = static_cast<long long>(f);
  return (lo % 2 == 0) ? lo : lo + 1;
}

inline long long pair_count(long long n) { return n * (n - 1) / 2; }

// ln C(n, k) via lgamma.
inline double log_binomial(double n, double k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Exact C(n,k) in unsigned 64-bit; throws on overflow.
inline unsigned long long binomial_u64(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 r = 1;
  for (unsigned i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;  // prefix products are themselves binomials, so exact
    if (r > std::numeric_limits<unsigned long long>::max())
      throw std::overflow_error("binomial_u64 overflow");
  }
  return static_cast<unsigned long long>(r);
}

// Sign of num/den - x with no float rounding at the boundary: x = mant*2^(e-53)
// exactly, then cross-multiply in 128-bit integers. Intended for |x| < 2^60.
inline int frac_cmp(unsigned long long num, unsigned long long den, double x) {
  if (den == 0) throw std::domain_error("frac_cmp: zero denominator");
  if (x < 0.0) return 1;
  if (x == 0.0) return num == 0 ? 0 : 1;
  if (num == 0) return -1;
  int e;
  double f = std::frexp(x, &e);
  auto mant = static_cast<unsigned long long>(std::ldexp(f, 53));
  int shift = 53 - e;
  unsigned __int128 lhs, rhs;
  if (shift >= 0) {
    int nb = 64 - std::countl_zero(num);
    if (nb + shift >= 118) return 1;  // lhs >= 2^117 > mant*den
    lhs = (unsigned __int128)num << shift;
    rhs = (unsigned __int128)mant * den;
  } else {
    if (shift < -10) return -1;  // x >= 2^63, beyond any ratio this codebase forms
    lhs = num;
    rhs = ((unsigned __int128)mant * den) << (-shift);
  }
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

inline bool frac_at_least(unsigned long long num, unsigned long long den, double x) {
  return frac_cmp(num, den, x) >= 0;
}

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Raised when a requested constraint set is provably empty (distinct from bad
// input so callers can map it to a dedicated exit code).
struct InfeasibleError : DomainError {
  using DomainError::DomainError;
};

}  // namespace graphldp
