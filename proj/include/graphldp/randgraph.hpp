#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "common.hpp"
#include "graphon.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace graphldp {

// lexicographic index of pair (u,v), u < v, among the n(n-1)/2 pairs
inline long long pair_index(int u, int v, int n) {
  return (long long)u * n - (long long)u * (u + 1) / 2 + (v - u - 1);
}

inline std::vector<std::pair<int, int>> all_pairs(int n) {
  std::vector<std::pair<int, int>> ps;
  ps.reserve((std::size_t)pair_count(n));
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) ps.emplace_back(u, v);
  return ps;
}

// Exact test hom / n^k >= r with no float boundary error.
inline bool t_at_least(unsigned long long hom, int n, int k_h, double r) {
  unsigned long long npow = 1;
  for (int i = 0; i < k_h; ++i) {
    if (npow > std::numeric_limits<unsigned long long>::max() / (unsigned)n)
      throw DomainError("t_at_least: n^k overflows");
    npow *= (unsigned)n;
  }
  return frac_at_least(hom, npow, r);
}

// ---------------------------------------------------------------------------
// Samplers.

inline FiniteGraph sample_gnp(int n, double p, std::uint64_t seed, const std::string& stream = "gnp") {
  if (n < 1 || !(p >= 0.0 && p <= 1.0)) throw DomainError("sample_gnp: bad parameters");
  Rng rng(seed, stream);
  FiniteGraph g(n);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.bernoulli(p)) g.add_edge(u, v);
  return g;
}

inline FiniteGraph sample_gnm(int n, long long m, std::uint64_t seed, const std::string& stream = "gnm") {
  if (n < 1 || m < 0 || m > pair_count(n)) throw DomainError("sample_gnm: m out of range");
  Rng rng(seed, stream);
  long long cp = pair_count(n);
  std::vector<long long> idx(cp);
  std::iota(idx.begin(), idx.end(), 0);
  // partial Fisher-Yates: first m entries become the uniform m-subset
  for (long long i = 0; i < m; ++i) {
    long long j = i + (long long)rng.below((std::uint64_t)(cp - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::pair<int, int>> ps = all_pairs(n);
  FiniteGraph g(n);
  for (long long i = 0; i < m; ++i) g.add_edge(ps[idx[i]].first, ps[idx[i]].second);
  return g;
}

// ---------------------------------------------------------------------------
// Coupling of G(n,m) with the edge-density-conditioned binomial model.

struct CouplingTrace {
  FiniteGraph g_uniform;      // the G(n, m) draw
  FiniteGraph g_conditioned;  // after the edit step: law G(n,p) given the density window
  long long e_target = 0;     // conditioned binomial edge count M_n
  long long d_n = 0;          // M_n - m
  long long xor_size = 0;     // |E symmetric difference|
  bool added_only = false;
  bool deleted_only = false;
};

inline CouplingTrace couple(int n, long long m, double p, double eta, std::uint64_t seed) {
  if (!(p > 0 && p < 1) || !(eta > 0)) throw DomainError("couple: bad p or eta");
  if (m < 0 || m > pair_count(n)) throw DomainError("couple: m out of range");
  if (!(std::fabs(2.0 * m / ((double)n * n) - p) < eta))
    throw DomainError("couple: 2m/n^2 must lie inside the eta window");
  CouplingTrace tr;
  tr.g_uniform = sample_gnm(n, m, seed, "couple/gnm");
  long long cp = pair_count(n);
  Rng rng(seed, "couple/binomial");
  long long e = 0;
  for (;;) {
    e = rng.binomial(cp, p);
    if (std::fabs(2.0 * e / ((double)n * n) - p) < eta) break;
  }
  tr.e_target = e;
  tr.d_n = e - m;
  tr.g_conditioned = tr.g_uniform;
  Rng edit(seed, "couple/edit");
  if (tr.d_n >= 0) {
    // add |d_n| uniformly chosen absent pairs
    std::vector<std::pair<int, int>> absent;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (!tr.g_uniform.has_edge(u, v)) absent.emplace_back(u, v);
    for (long long i = 0; i < tr.d_n; ++i) {
      long long j = i + (long long)edit.below((std::uint64_t)((long long)absent.size() - i));
      std::swap(absent[i], absent[j]);
      tr.g_conditioned.add_edge(absent[i].first, absent[i].second);
    }
  } else {
    std::vector<std::pair<int, int>> present = tr.g_uniform.edges();
    long long del = -tr.d_n;
    for (long long i = 0; i < del; ++i) {
      long long j = i + (long long)edit.below((std::uint64_t)((long long)present.size() - i));
      std::swap(present[i], present[j]);
      tr.g_conditioned.remove_edge(present[i].first, present[i].second);
    }
  }
  // an empty edit is one-sided in both directions
  tr.added_only = tr.d_n >= 0;
  tr.deleted_only = tr.d_n <= 0;
  tr.xor_size = std::llabs(tr.d_n);
  return tr;
}

struct LipschitzCheck {
  double lhs = 0, rhs = 0;
  long long xor_size = 0;
  bool ok = false;
};

inline LipschitzCheck lipschitz_check(const Motif& h, const FiniteGraph& g1, const FiniteGraph& g2) {
  if (g1.n != g2.n) throw DomainError("lipschitz_check: vertex counts differ");
  LipschitzCheck c;
  for (int u = 0; u < g1.n; ++u)
    for (int w = 0; w < g1.words; ++w) {
      std::uint64_t x = g1.row(u)[w] ^ g2.row(u)[w];
      c.xor_size += std::popcount(x);
    }
  c.xor_size /= 2;
  c.lhs = std::fabs(t_density_graph(h, g1) - t_density_graph(h, g2));
  c.rhs = 2.0 * h.edge_count() * (double)c.xor_size / ((double)g1.n * g1.n);
  c.ok = c.lhs <= c.rhs + 1e-12;
  return c;
}

// ---------------------------------------------------------------------------
// Tail counting.

enum class TailMethod { ExactEnum, MonteCarlo };

struct TailEstimate {
  int n = 0;
  long long m = 0;
  double r = 0;
  TailMethod method = TailMethod::ExactEnum;
  unsigned long long count = 0;  // graphs in the tail (exact), or MC hits
  unsigned long long total = 0;  // C(C(n,2), m) for exact, trials for MC
  double log_prob_rate = 0;      // n^{-2} log(count/total)
  double std_error = std::numeric_limits<double>::quiet_NaN();  // MC only
};

namespace detail {

// colex unranking: the idx-th m-subset of bit positions in increasing numeric
// order of masks (Gosper's sequence order)
inline std::uint64_t unrank_colex(unsigned long long idx, int m) {
  std::uint64_t mask = 0;
  for (int i = m; i >= 1; --i) {
    unsigned v = (unsigned)i - 1;  // largest v with C(v, i) <= idx
    while (binomial_u64(v + 1, (unsigned)i) <= idx) ++v;
    mask |= 1ULL << v;
    idx -= binomial_u64(v, (unsigned)i);
  }
  return mask;
}

}  // namespace detail

// Exhaustive count over all graphs with n vertices and m edges of those with
// t_H >= r; thresholds decided in exact integer arithmetic.
inline TailEstimate enumerate_tail(int n, long long m, const Motif& h, double r) {
  if (n < 2 || n > 8) throw DomainError("enumerate_tail: exact path needs 2 <= n <= 8");
  long long cp = pair_count(n);
  if (m < 0 || m > cp) throw DomainError("enumerate_tail: m out of range");
  TailEstimate est;
  est.n = n;
  est.m = m;
  est.r = r;
  est.method = TailMethod::ExactEnum;
  est.total = binomial_u64((unsigned)cp, (unsigned)m);
  std::vector<std::pair<int, int>> ps = all_pairs(n);

  bool tri = h.is_cycle() && h.vertices == 3;
  std::vector<std::uint64_t> triples;
  if (tri) {
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        for (int c = b + 1; c < n; ++c)
          triples.push_back((1ULL << pair_index(a, b, n)) | (1ULL << pair_index(a, c, n)) |
                            (1ULL << pair_index(b, c, n)));
  }
  std::vector<unsigned long long> partial(16, 0);
  parallel_chunks((std::size_t)est.total, [&](std::size_t lo, std::size_t hi, std::size_t chunk) {
    unsigned long long local = 0;
    std::uint64_t mask = (m == 0) ? 0 : detail::unrank_colex(lo, (int)m);
    for (std::size_t i = lo; i < hi; ++i) {
      unsigned long long hom;
      if (tri) {
        unsigned long long t3 = 0;
        for (std::uint64_t tm : triples) t3 += (mask & tm) == tm;
        hom = 6 * t3;
      } else {
        FiniteGraph g(n);
        std::uint64_t rem = mask;
        while (rem) {
          int b = std::countr_zero(rem);
          rem &= rem - 1;
          g.add_edge(ps[b].first, ps[b].second);
        }
        hom = hom_count(h, g);
      }
      if (t_at_least(hom, n, h.vertices, r)) ++local;
      if (i + 1 < hi && m > 0) {
        // Gosper: next mask with the same popcount
        std::uint64_t c = mask & (0 - mask);
        std::uint64_t rr = mask + c;
        mask = (((rr ^ mask) >> 2) / c) | rr;
      }
    }
    partial[chunk] = local;
  });
  for (unsigned long long c : partial) est.count += c;
  est.log_prob_rate =
      est.count == 0 ? -std::numeric_limits<double>::infinity()
                     : (std::log((double)est.count) - std::log((double)est.total)) / ((double)n * n);
  if (est.count == est.total) est.log_prob_rate = 0.0;
  return est;
}

inline TailEstimate enumerate_tail_mc(int n, long long m, const Motif& h, double r,
                                      unsigned long long trials, std::uint64_t seed) {
  if (trials == 0) throw DomainError("enumerate_tail_mc: need trials > 0");
  TailEstimate est;
  est.n = n;
  est.m = m;
  est.r = r;
  est.method = TailMethod::MonteCarlo;
  est.total = trials;
  for (unsigned long long i = 0; i < trials; ++i) {
    FiniteGraph g = sample_gnm(n, m, seed, "mc/" + std::to_string(i));
    if (t_at_least(hom_count(h, g), n, h.vertices, r)) ++est.count;
  }
  double phat = (double)est.count / (double)trials;
  est.log_prob_rate = est.count == 0 ? -std::numeric_limits<double>::infinity()
                                     : std::log(phat) / ((double)n * n);
  if (est.count == est.total) est.log_prob_rate = 0.0;
  if (est.count > 0)
    est.std_error = std::sqrt((1.0 - phat) / ((double)est.count)) / ((double)n * n);
  return est;
}

// ---------------------------------------------------------------------------
// Edge-swap Metropolis chain on {|E| = m, t_H >= r}.

struct McmcOptions {
  long long steps = 1000000;
  long long burnin = 200000;
  long long thin = 100000;  // one emitted sample per this many steps, after burnin
  int chains = 8;
  std::uint64_t seed = 0;
  bool assert_invariants = false;
};

struct McmcChain {
  std::vector<FiniteGraph> samples;
  double accept_rate = 0;
  double mean_t = 0;
  double var_t = 0;
};

struct McmcResult {
  std::vector<McmcChain> chains;
  double spread = 0;  // between-chain vs within-chain dispersion of t, Gelman-Rubin style
};

// Colex edge fill maximizes clique-style density (Kruskal-Katona direction),
// so if this start misses the threshold the constrained family is empty or
// near-empty for clique motifs.
inline FiniteGraph densest_seed_graph(int n, long long m) {
  FiniteGraph g(n);
  long long placed = 0;
  for (int v = 1; v < n && placed < m; ++v)
    for (int u = 0; u < v && placed < m; ++u) {
      g.add_edge(u, v);
      ++placed;
    }
  return g;
}

inline McmcResult mcmc_conditioned(int n, long long m, const Motif& h, double r,
                                   const McmcOptions& opt) {
  bool tri = h.is_cycle() && h.vertices == 3;
  FiniteGraph seed_graph = densest_seed_graph(n, m);
  if (!t_at_least(hom_count(h, seed_graph), n, h.vertices, r))
    throw InfeasibleError("mcmc_conditioned: no feasible start at this (n, m, r)");
  McmcResult res;
  res.chains.resize(opt.chains);
  std::vector<double> chain_mean(opt.chains, 0.0), chain_var(opt.chains, 0.0);
  for (int c = 0; c < opt.chains; ++c) {
    Rng rng(opt.seed, "mcmc/chain/" + std::to_string(c));
    FiniteGraph g = seed_graph;
    long long tri_count = tri ? (long long)(hom_count(h, g) / 6) : 0;
    std::vector<std::pair<int, int>> present = g.edges(), absent;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (!g.has_edge(u, v)) absent.emplace_back(u, v);
    // scatter chains: attempt a chain-dependent number of pre-burnin moves
    long long accepted = 0, proposed = 0;
    double sum_t = 0, sum_t2 = 0;
    long long measured = 0;
    McmcChain& ch = res.chains[c];
    long long warm_moves = 5000LL * c;
    long long total = warm_moves + opt.steps;
    for (long long step = 0; step < total; ++step) {
      bool counting = step >= warm_moves;
      if (present.empty() || absent.empty()) break;  // m = 0 or complete graph: nothing to swap
      std::size_t ei = (std::size_t)rng.below(present.size());
      std::size_t ai = (std::size_t)rng.below(absent.size());
      auto [eu, ev] = present[ei];
      auto [au, av] = absent[ai];
      bool ok;
      long long new_tri = 0;
      if (tri) {
        long long delta = -(long long)g.common_neighbors(eu, ev);
        g.remove_edge(eu, ev);
        delta += (long long)g.common_neighbors(au, av);
        new_tri = tri_count + delta;
        ok = t_at_least((unsigned long long)(6 * new_tri), n, 3, r);
        if (!ok) g.add_edge(eu, ev);
      } else {
        g.remove_edge(eu, ev);
        g.add_edge(au, av);
        ok = t_at_least(hom_count(h, g), n, h.vertices, r);
        if (!ok) {
          g.remove_edge(au, av);
          g.add_edge(eu, ev);
        }
      }
      if (counting) ++proposed;
      if (ok) {
        if (tri) {
          g.add_edge(au, av);
          tri_count = new_tri;
        }
        std::swap(present[ei], absent[ai]);
        if (counting) ++accepted;
      }
      if (opt.assert_invariants) {
        if (g.edge_count != m) throw std::logic_error("mcmc: edge count drifted");
        if (!t_at_least(hom_count(h, g), n, h.vertices, r))
          throw std::logic_error("mcmc: constraint violated");
      }
      if (counting) {
        long long k = step - warm_moves;
        double tval = tri ? 6.0 * (double)tri_count / std::pow((double)n, 3.0)
                          : t_density_graph(h, g);
        if (k >= opt.burnin) {
          sum_t += tval;
          sum_t2 += tval * tval;
          ++measured;
          if ((k - opt.burnin) % std::max<long long>(1, opt.thin) == 0) ch.samples.push_back(g);
        }
      }
    }
    ch.accept_rate = proposed ? (double)accepted / (double)proposed : 0.0;
    if (measured) {
      ch.mean_t = sum_t / (double)measured;
      ch.var_t = std::max(0.0, sum_t2 / (double)measured - ch.mean_t * ch.mean_t);
    }
    chain_mean[c] = ch.mean_t;
    chain_var[c] = ch.var_t;
  }
  double mbar = 0, wvar = 0, bvar = 0;
  for (int c = 0; c < opt.chains; ++c) mbar += chain_mean[c];
  mbar /= std::max(1, opt.chains);
  for (int c = 0; c < opt.chains; ++c) {
    wvar += chain_var[c];
    bvar += (chain_mean[c] - mbar) * (chain_mean[c] - mbar);
  }
  wvar /= std::max(1, opt.chains);
  bvar /= std::max(1, opt.chains - 1);
  res.spread = wvar > 0 ? std::sqrt(1.0 + bvar / wvar) : 1.0;
  return res;
}

// ---------------------------------------------------------------------------
// Rate table: exact or Monte Carlo tail rates joined against a solver value.

struct RateRow {
  int n = 0;
  long long m = 0;
  double r = 0;
  TailEstimate est;
  double neg_psi = 0;      // the solver's -psi for comparison
  double he_shift = 0;     // rate + n^{-2} log C(C(n,2), m)
  bool excluded = false;   // curve looks discontinuous near r; skip in comparisons
};

inline std::vector<RateRow> empirical_rate(const std::vector<int>& ns,
                                           const std::function<long long(int)>& m_of_n,
                                           const Motif& h, double r, double psi_value,
                                           unsigned long long mc_budget, std::uint64_t seed,
                                           double psi_left = std::numeric_limits<double>::quiet_NaN(),
                                           double psi_right = std::numeric_limits<double>::quiet_NaN()) {
  bool discont = std::isfinite(psi_left) && std::isfinite(psi_right) &&
                 std::fabs(psi_left - psi_right) > 1e-3;
  std::vector<RateRow> rows;
  for (int n : ns) {
    RateRow row;
    row.n = n;
    row.m = m_of_n(n);
    row.r = r;
    row.est = (n <= 8) ? enumerate_tail(n, row.m, h, r)
                       : enumerate_tail_mc(n, row.m, h, r, mc_budget, seed);
    row.neg_psi = -psi_value;
    row.he_shift = row.est.log_prob_rate +
                   log_binomial((double)pair_count(n), (double)row.m) / ((double)n * n);
    row.excluded = discont;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace graphldp
