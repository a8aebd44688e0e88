#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "common.hpp"
#include "graphon.hpp"
#include "randgraph.hpp"
#include "rates.hpp"
#include "rng.hpp"

namespace graphldp {

struct Partition {
  int n = 0;
  std::vector<std::vector<int>> parts;

  Partition() = default;
  Partition(int n_, std::vector<std::vector<int>> parts_) : n(n_), parts(std::move(parts_)) {
    validate();
  }

  int size() const { return (int)parts.size(); }

  void validate() const {
    std::vector<char> seen(n, 0);
    for (const auto& part : parts) {
      if (part.empty()) throw DomainError("Partition: empty part");
      for (int v : part) {
        if (v < 0 || v >= n || seen[v]) throw DomainError("Partition: not a disjoint cover");
        seen[v] = 1;
      }
    }
    for (char s : seen)
      if (!s) throw DomainError("Partition: vertex not covered");
  }

  std::vector<int> part_of() const {
    std::vector<int> owner(n, -1);
    for (int i = 0; i < size(); ++i)
      for (int v : parts[i]) owner[v] = i;
    return owner;
  }

  static Partition trivial(int n) {
    std::vector<int> all(n);
    for (int v = 0; v < n; ++v) all[v] = v;
    return Partition(n, {all});
  }
};

// Ordered-pair density #{(x,y) in X x Y : xy edge} / (|X||Y|); an edge inside
// X counts twice when X = Y, and the denominator keeps the diagonal pairs.
inline double pair_density(const FiniteGraph& g, const std::vector<int>& a,
                           const std::vector<int>& b) {
  if (a.empty() || b.empty()) throw DomainError("pair_density: empty vertex set");
  long long hits = 0;
  for (int u : a)
    for (int v : b)
      if (u != v && g.has_edge(u, v)) ++hits;
  return (double)hits / ((double)a.size() * (double)b.size());
}

inline StepGraphon quotient(const FiniteGraph& g, const Partition& p) {
  int s = p.size();
  StepGraphon q;
  q.weights.resize(s);
  q.values.assign((std::size_t)s * s, 0.0);
  for (int i = 0; i < s; ++i) q.weights[i] = (double)p.parts[i].size() / (double)g.n;
  for (int i = 0; i < s; ++i)
    for (int j = i; j < s; ++j) q.set(i, j, pair_density(g, p.parts[i], p.parts[j]));
  return q;
}

struct RegularityOptions {
  int restarts = 12;
  int max_sweeps = 60;
  int round_cap = -1;  // default ceil(1/eps^2)
  std::uint64_t seed = 0x7e90ULL;
};

struct RegularityResult {
  Partition partition;
  int rounds = 0;
  double final_violation = 0;  // best cut value the search still finds
  bool certified = false;      // search found no violation above eps
};

namespace detail {

struct CutSearchHit {
  double value = 0;  // |sum over S x T of residual| / n^2
  std::vector<char> s, t;
};

// Alternating maximization of |sum_{S x T} R| over vertex subsets.
inline CutSearchHit residual_cut_search(const std::vector<std::vector<double>>& r, int n,
                                        const RegularityOptions& opt) {
  CutSearchHit best;
  best.s.assign(n, 0);
  best.t.assign(n, 0);
  Rng rng(opt.seed, "regularity/cut");
  std::vector<char> t(n), s(n);
  std::vector<double> col(n);
  for (int restart = 0; restart < opt.restarts; ++restart) {
    for (int sign = -1; sign <= 1; sign += 2) {
      for (int v = 0; v < n; ++v) t[v] = restart == 0 ? 1 : (rng.next_u64() & 1) != 0;
      double val = -1;
      for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        for (int u = 0; u < n; ++u) {
          double acc = 0;
          for (int v = 0; v < n; ++v)
            if (t[v]) acc += r[u][v];
          s[u] = sign * acc > 0;
        }
        for (int v = 0; v < n; ++v) {
          double acc = 0;
          for (int u = 0; u < n; ++u)
            if (s[u]) acc += r[u][v];
          col[v] = acc;
          t[v] = sign * acc > 0;
        }
        double now = 0;
        for (int v = 0; v < n; ++v)
          if (t[v]) now += col[v];
        now = std::fabs(now);
        if (now <= val + 1e-15) break;
        val = now;
      }
      if (val > best.value) {
        best.value = val;
        best.s = s;
        best.t = t;
      }
    }
  }
  best.value /= (double)n * (double)n;
  return best;
}

}  // namespace detail

// Frieze-Kannan style weak regularity: refine while the residual kernel has a
// cut above eps. The energy argument keeps the number of successful rounds
// within ceil(1/eps^2), and each round splits parts by the two witness sets.
inline RegularityResult weak_regularity(const FiniteGraph& g, double eps,
                                        const RegularityOptions& opt = {}) {
  if (!(eps > 0) || eps >= 1) throw DomainError("weak_regularity: need 0 < eps < 1");
  int n = g.n;
  int cap = opt.round_cap >= 0 ? opt.round_cap : (int)std::ceil(1.0 / (eps * eps));
  RegularityResult res;
  res.partition = Partition::trivial(n);
  std::vector<std::vector<double>> r(n, std::vector<double>(n, 0.0));
  for (int round = 0;; ++round) {
    std::vector<int> owner = res.partition.part_of();
    StepGraphon q = quotient(g, res.partition);
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        r[u][v] = (u != v && g.has_edge(u, v) ? 1.0 : 0.0) - q.at(owner[u], owner[v]);
    detail::CutSearchHit hit = detail::residual_cut_search(r, n, opt);
    res.final_violation = hit.value;
    res.rounds = round;
    if (hit.value <= eps) {
      res.certified = true;
      return res;
    }
    if (round >= cap) {
      res.certified = false;
      return res;
    }
    // split every part by membership in S and in T
    std::vector<std::vector<int>> next;
    for (const auto& part : res.partition.parts) {
      std::vector<int> cell[4];
      for (int v : part) cell[(hit.s[v] ? 2 : 0) + (hit.t[v] ? 1 : 0)].push_back(v);
      for (auto& c : cell)
        if (!c.empty()) next.push_back(std::move(c));
    }
    res.partition = Partition(n, std::move(next));
  }
}

struct CountingCheck {
  double t_graph = 0;
  double t_quotient = 0;
  double bound = 0;
  bool ok = false;
};

inline CountingCheck counting_check(const FiniteGraph& g, const Partition& p, const Motif& h,
                                    double eps) {
  CountingCheck c;
  c.t_graph = t_density_graph(h, g);
  c.t_quotient = t_density(h, quotient(g, p));
  c.bound = (double)h.edge_count() * eps + 1e-12;
  c.ok = std::fabs(c.t_graph - c.t_quotient) <= c.bound;
  return c;
}

// Push every block value up to the next multiple of eps (capped at one).
// Homomorphism densities are monotone in the kernel, so t never drops, and the
// edge density rises by at most eps.
inline StepGraphon round_up_densities(const StepGraphon& w, double eps) {
  if (!(eps > 0)) throw DomainError("round_up_densities: need eps > 0");
  StepGraphon out = w;
  for (double& x : out.values) x = std::max(x, std::min(1.0, std::ceil(x / eps - 1e-12) * eps));
  return out;
}

// ---------------------------------------------------------------------------
// Log-probability of block density events under G(n, m).

enum class EventSide { Upper, Lower, Both };
enum class LogprobMethod { Exact, Bound };

struct BlockEventResult {
  double lo = 0, hi = 0;  // bracket for n^{-2} log P(event)
  bool exact = false;
  double ip_target = 0;       // relative-entropy rate of the target step graphon
  double eps_lo = 0, eps_hi = 0;  // lo = -ip_target - eps_lo, hi = -ip_target + eps_hi
  bool normalized = false;    // whether sum of a_ij N_ij matches m (consistency of a with p)
  unsigned long long count = 0, total = 0;  // exact path only
};

namespace detail {

struct CellInfo {
  long long cap = 0;  // pairs inside the cell
  long long lo = 0, hi = 0;  // admissible edge-count range for the event
};

// Per-cell admissible edge counts for the event: cells with target above the
// reference density demand at least that density, cells below demand at most,
// matches at the reference are unconstrained.
inline std::vector<CellInfo> event_cells(const Partition& p, const std::vector<std::vector<double>>& a,
                                         double pref, EventSide side) {
  int s = p.size();
  std::vector<CellInfo> cells;
  for (int i = 0; i < s; ++i)
    for (int j = i; j < s; ++j) {
      CellInfo c;
      long long ni = (long long)p.parts[i].size();
      c.cap = i == j ? ni * (ni - 1) / 2 : ni * (long long)p.parts[j].size();
      c.lo = 0;
      c.hi = c.cap;
      double aij = a[i][j];
      bool upper = aij > pref && (side == EventSide::Upper || side == EventSide::Both);
      bool lower = aij < pref && (side == EventSide::Lower || side == EventSide::Both);
      if (upper && c.cap > 0) {
        long long k = 0;  // smallest k with k/cap >= a
        while (k <= c.cap && frac_cmp((unsigned long long)k, (unsigned long long)c.cap, aij) < 0)
          ++k;
        c.lo = k;
      }
      if (lower && c.cap > 0) {
        long long k = c.cap;  // largest k with k/cap <= a
        while (k > 0 && frac_cmp((unsigned long long)k, (unsigned long long)c.cap, aij) > 0) --k;
        c.hi = k;
      }
      cells.push_back(c);
    }
  return cells;
}

}  // namespace detail

inline BlockEventResult block_event_logprob(int n, long long m, const Partition& p,
                                            const std::vector<std::vector<double>>& a,
                                            LogprobMethod method,
                                            EventSide side = EventSide::Both) {
  if (p.n != n) throw DomainError("block_event_logprob: partition size mismatch");
  int s = p.size();
  if ((int)a.size() != s) throw DomainError("block_event_logprob: target matrix shape");
  for (const auto& rowv : a) {
    if ((int)rowv.size() != s) throw DomainError("block_event_logprob: target matrix shape");
    for (double x : rowv)
      if (!(x >= 0.0 && x <= 1.0)) throw DomainError("block_event_logprob: target outside [0,1]");
  }
  long long cp = pair_count(n);
  if (m < 0 || m > cp) throw DomainError("block_event_logprob: m out of range");
  if (!(m > 0 && m < cp)) throw DomainError("block_event_logprob: need 0 < m < C(n,2)");
  double pref = (double)m / (double)cp;

  for (int i = 0; i < s; ++i)
    for (int j = i; j < s; ++j)
      if (std::fabs(a[i][j] - a[j][i]) > 1e-12)
        throw DomainError("block_event_logprob: target matrix not symmetric");

  BlockEventResult res;
  StepGraphon target;
  target.weights.resize(s);
  for (int i = 0; i < s; ++i) target.weights[i] = (double)p.parts[i].size() / (double)n;
  target.values.assign((std::size_t)s * s, 0.0);
  for (int i = 0; i < s; ++i)
    for (int j = i; j < s; ++j) target.set(i, j, a[i][j]);
  res.ip_target = i_p_graphon(pref, target);

  std::vector<detail::CellInfo> cells = detail::event_cells(p, a, pref, side);
  double mass = 0;
  {
    std::size_t idx = 0;
    for (int i = 0; i < s; ++i)
      for (int j = i; j < s; ++j, ++idx) mass += a[i][j] * (double)cells[idx].cap;
  }
  res.normalized = std::fabs(mass - (double)m) <= 0.5;

  if (method == LogprobMethod::Exact) {
    if (n > 8) throw DomainError("block_event_logprob: exact path needs n <= 8");
    std::vector<int> owner = p.part_of();
    std::vector<std::pair<int, int>> ps = all_pairs(n);
    std::vector<int> cell_of(ps.size());
    std::vector<int> cell_index(s * s, -1);
    for (int i = 0, idx = 0; i < s; ++i)
      for (int j = i; j < s; ++j, ++idx) cell_index[i * s + j] = cell_index[j * s + i] = idx;
    for (std::size_t b = 0; b < ps.size(); ++b) {
      int i = owner[ps[b].first], j = owner[ps[b].second];
      cell_of[b] = cell_index[i * s + j];
    }
    res.total = binomial_u64((unsigned)cp, (unsigned)m);
    std::vector<unsigned long long> partial(16, 0);
    parallel_chunks((std::size_t)res.total, [&](std::size_t lo, std::size_t hi, std::size_t chunk) {
      unsigned long long local = 0;
      std::vector<long long> e(cells.size());
      std::uint64_t mask = (m == 0) ? 0 : detail::unrank_colex(lo, (int)m);
      for (std::size_t it = lo; it < hi; ++it) {
        std::fill(e.begin(), e.end(), 0);
        std::uint64_t rem = mask;
        while (rem) {
          int b = std::countr_zero(rem);
          rem &= rem - 1;
          ++e[cell_of[b]];
        }
        bool ok = true;
        for (std::size_t c = 0; c < cells.size(); ++c)
          if (e[c] < cells[c].lo || e[c] > cells[c].hi) {
            ok = false;
            break;
          }
        if (ok) ++local;
        if (it + 1 < hi && m > 0) {
          std::uint64_t cbit = mask & (0 - mask);
          std::uint64_t rr = mask + cbit;
          mask = (((rr ^ mask) >> 2) / cbit) | rr;
        }
      }
      partial[chunk] = local;
    });
    for (unsigned long long c : partial) res.count += c;
    double logp = res.count == 0 ? -std::numeric_limits<double>::infinity()
                                 : std::log((double)res.count) - std::log((double)res.total);
    res.lo = res.hi = logp / ((double)n * n);
    res.exact = true;
  } else {
    // Lower bound: a single admissible edge allocation summing to m.
    std::vector<long long> alloc(cells.size(), 0);
    long long total = 0;
    {
      std::size_t idx = 0;
      for (int i = 0; i < s; ++i)
        for (int j = i; j < s; ++j, ++idx) {
          long long guess = round_half_even(a[i][j] * (double)cells[idx].cap);
          alloc[idx] = std::clamp(guess, cells[idx].lo, cells[idx].hi);
          total += alloc[idx];
        }
    }
    for (std::size_t c = 0; c < cells.size() && total != m; ++c) {
      while (total < m && alloc[c] < cells[c].hi) {
        ++alloc[c];
        ++total;
      }
      while (total > m && alloc[c] > cells[c].lo) {
        --alloc[c];
        --total;
      }
    }
    double log_cpm = log_binomial((double)cp, (double)m);
    if (total != m) {
      res.lo = -std::numeric_limits<double>::infinity();
    } else {
      double acc = 0;
      for (std::size_t c = 0; c < cells.size(); ++c)
        acc += log_binomial((double)cells[c].cap, (double)alloc[c]);
      res.lo = (acc - log_cpm) / ((double)n * n);
    }
    // Upper bound: per-cell sums over all admissible counts, total-edge tie dropped.
    double acc = 0;
    for (const auto& c : cells) {
      if (c.lo > c.hi) {
        acc = -std::numeric_limits<double>::infinity();
        break;
      }
      double lse = -std::numeric_limits<double>::infinity();
      for (long long k = c.lo; k <= c.hi; ++k) {
        double lb = log_binomial((double)c.cap, (double)k);
        double mx = std::max(lse, lb);
        lse = mx + std::log(std::exp(lse - mx) + std::exp(lb - mx));
      }
      acc += lse;
    }
    res.hi = std::min(0.0, (acc - log_cpm) / ((double)n * n));
    res.exact = false;
  }
  res.eps_lo = -res.ip_target - res.lo;
  res.eps_hi = res.hi + res.ip_target;
  return res;
}

}  // namespace graphldp
