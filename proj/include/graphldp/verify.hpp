#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "graphon.hpp"
#include "parallel.hpp"
#include "randgraph.hpp"
#include "rates.hpp"
#include "regularity.hpp"
#include "rng.hpp"
#include "varsolve.hpp"

namespace graphldp {

struct Check {
  std::string name;
  std::string group;
  std::function<bool(std::uint64_t, std::string&)> fn;
};

namespace checks {

inline bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// brute-force cut norm over all sign patterns, small k only
inline double cut_norm_brute(const StepKernel& d) {
  int k = d.blocks();
  double best = 0;
  for (std::uint64_t sm = 0; sm < (1ULL << k); ++sm)
    for (std::uint64_t tm = 0; tm < (1ULL << k); ++tm) {
      double v = 0;
      for (int a = 0; a < k; ++a)
        if ((sm >> a) & 1)
          for (int b = 0; b < k; ++b)
            if ((tm >> b) & 1) v += d.weights[a] * d.weights[b] * d.at(a, b);
      best = std::max(best, std::fabs(v));
    }
  return best;
}

inline StepGraphon random_graphon(Rng& rng, int k) {
  StepGraphon w;
  std::vector<double> raw(k);
  double s = 0;
  for (double& x : raw) {
    x = 0.2 + rng.uniform01();
    s += x;
  }
  w.weights.resize(k);
  for (int i = 0; i < k; ++i) w.weights[i] = raw[i] / s;
  w.values.assign((std::size_t)k * k, 0.0);
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b) w.set(a, b, rng.uniform01());
  return w;
}

// weights on the 1/denom grid so common refinements stay small
inline StepGraphon random_graphon_grid(Rng& rng, int k, int denom) {
  std::vector<int> units(k, 1);
  for (int i = 0; i < denom - k; ++i) units[(int)rng.below((std::uint64_t)k)]++;
  StepGraphon w;
  w.weights.resize(k);
  for (int i = 0; i < k; ++i) w.weights[i] = (double)units[i] / denom;
  w.values.assign((std::size_t)k * k, 0.0);
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b) w.set(a, b, rng.uniform01());
  return w;
}

inline bool density_embed_consistency(std::uint64_t seed, std::string& detail) {
  for (int rep = 0; rep < 6; ++rep) {
    FiniteGraph g = sample_gnp(9, 0.4 + 0.05 * rep, seed, "chk/g1/" + std::to_string(rep));
    for (const Motif& h : {Motif::edge(), Motif::triangle(), Motif::cycle(4), Motif::clique(4)}) {
      double via_graph = t_density_graph(h, g);
      double via_embed = t_density(h, embed(g));
      if (!close(via_graph, via_embed, 1e-12 * std::max(1.0, std::fabs(via_graph)))) {
        std::ostringstream os;
        os << h.name << ": graph " << via_graph << " vs embed " << via_embed;
        detail = os.str();
        return false;
      }
    }
  }
  return true;
}

inline bool gradient_matches_fd(std::uint64_t seed, std::string& detail) {
  Rng rng(seed, "chk/g2");
  for (const Motif& h : {Motif::triangle(), Motif::cycle(4), Motif::clique(4)}) {
    StepGraphon w = random_graphon(rng, 3);
    for (double& v : w.values) v = 0.2 + 0.6 * v;  // keep FD steps interior
    std::vector<double> grad = t_gradient(h, w);
    int k = w.blocks();
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) {
        double h0 = 1e-6;
        StepGraphon wp = w, wm = w;
        wp.set(a, b, w.at(a, b) + h0);
        wm.set(a, b, w.at(a, b) - h0);
        double fd = (t_density(h, wp) - t_density(h, wm)) / (2 * h0);
        double an = grad[(std::size_t)a * k + b];
        if (!close(fd, an, 2e-5 * std::max(1.0, std::fabs(fd)))) {
          std::ostringstream os;
          os << h.name << " cell (" << a << "," << b << "): fd " << fd << " analytic " << an;
          detail = os.str();
          return false;
        }
      }
  }
  return true;
}

inline bool cut_norm_vs_brute(std::uint64_t seed, std::string& detail) {
  Rng rng(seed, "chk/g3");
  for (int rep = 0; rep < 20; ++rep) {
    StepGraphon w = random_graphon(rng, 5);
    StepKernel d = difference_kernel(w, StepGraphon::constant(0.5, 1));
    double brute = cut_norm_brute(d);
    CutNormResult res = cut_norm(d, {});
    if (!res.exact || !close(res.value, brute, 1e-12)) {
      std::ostringstream os;
      os << "rep " << rep << ": exact " << res.value << " brute " << brute;
      detail = os.str();
      return false;
    }
  }
  return true;
}

inline bool cut_norm_witness_attains(std::uint64_t seed, std::string& detail) {
  Rng rng(seed, "chk/g4");
  for (int rep = 0; rep < 10; ++rep) {
    StepGraphon w = random_graphon(rng, 6);
    StepKernel d = difference_kernel(w, StepGraphon::constant(0.4, 1));
    CutNormResult res = cut_norm(d, {});
    double v = 0;
    for (int a : res.s)
      for (int b : res.t) v += d.weights[a] * d.weights[b] * d.at(a, b);
    if (!close(std::fabs(v), res.value, 1e-12)) {
      std::ostringstream os;
      os << "witness value " << std::fabs(v) << " reported " << res.value;
      detail = os.str();
      return false;
    }
  }
  return true;
}

inline bool cut_distance_metric_properties(std::uint64_t seed, std::string& detail) {
  Rng rng(seed, "chk/g5");
  StepGraphon a = random_graphon_grid(rng, 3, 8), b = random_graphon_grid(rng, 3, 8),
              c = random_graphon_grid(rng, 2, 8);
  CutDistanceOptions o;
  double dab = cut_distance(a, b, o).value, dba = cut_distance(b, a, o).value;
  double dac = cut_distance(a, c, o).value, dbc = cut_distance(b, c, o).value;
  if (!close(dab, dba, 1e-9)) {
    detail = "asymmetric";
    return false;
  }
  if (dab > dac + dbc + 1e-9) {
    detail = "triangle inequality fails";
    return false;
  }
  // relabeling blocks is free
  StepGraphon perm;
  perm.weights = {a.weights[2], a.weights[0], a.weights[1]};
  perm.values.assign(9, 0.0);
  int map[3] = {2, 0, 1};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) perm.values[(std::size_t)i * 3 + j] = a.at(map[i], map[j]);
  if (cut_distance(a, perm, o).value > 1e-9) {
    detail = "relabeled copy not at distance zero";
    return false;
  }
  return true;
}

inline bool motif_validation_rejects(std::uint64_t, std::string& detail) {
  try {
    Motif::from_edges(3, {{0, 0}}, "loop");
    detail = "loop accepted";
    return false;
  } catch (const DomainError&) {
  }
  try {
    Motif::from_edges(4, {{0, 1}, {2, 3}, {0, 1}}, "dupe");
    detail = "duplicate edge accepted";
    return false;
  } catch (const DomainError&) {
  }
  try {
    Motif::from_edges(4, {{0, 1}, {1, 2}}, "disconnected");
    detail = "disconnected motif accepted";
    return false;
  } catch (const DomainError&) {
  }
  return true;
}

inline bool rate_scalar_shape(std::uint64_t, std::string& detail) {
  for (double p : {0.3, 0.5, 0.7}) {
    if (!close(i_p_scalar(p, p), 0.0, 1e-15)) {
      detail = "I_p(p) != 0";
      return false;
    }
    double prev = i_p_scalar(p, 0.0);
    for (int i = 1; i * 0.005 < p; ++i) {
      double cur = i_p_scalar(p, i * 0.005);
      if (cur > prev + 1e-15) {
        detail = "not decreasing left of p";
        return false;
      }
      prev = cur;
    }
    prev = 0.0;  // I_p(p)
    for (int i = 1; p + i * 0.005 <= 1.0 + 1e-9; ++i) {
      double cur = i_p_scalar(p, std::min(p + i * 0.005, 1.0));
      if (cur < prev - 1e-15) {
        detail = "not increasing right of p";
        return false;
      }
      prev = cur;
    }
  }
  return true;
}

inline bool entropy_shape(std::uint64_t, std::string& detail) {
  if (!close(h_e(0.5), 0.5 * std::log(2.0), 1e-15)) {
    detail = "h_e(1/2) != log(2)/2";
    return false;
  }
  for (double x = 0.0; x <= 0.5 + 1e-9; x += 0.01)
    if (!close(h_e(x), h_e(1.0 - x), 1e-14)) {
      detail = "h_e not symmetric";
      return false;
    }
  if (!(h_e(0.0) == 0.0 && h_e(1.0) == 0.0)) {
    detail = "h_e endpoint";
    return false;
  }
  return true;
}

inline bool gradient_clamp_bounded(std::uint64_t, std::string& detail) {
  StepGraphon w = StepGraphon::constant(1e-14, 2);
  w.set(1, 1, 1.0 - 1e-14);
  std::vector<double> g = i_p_gradient(0.5, w);
  for (double x : g)
    if (std::fabs(x) > kGradClamp + 1e-9) {
      detail = "clamp exceeded";
      return false;
    }
  return true;
}

inline bool entropy_identity_small(std::uint64_t seed, std::string& detail) {
  // F(r) = h_e(p) - psi_eq(r) on a mesh where both solves converge
  ProblemSpec ps;
  ps.p = 0.5;
  ps.r = 0.17;
  ps.blocks = 4;
  ps.kind = ProblemKind::Psi;
  ps.mode = ConstraintMode::Equality;
  SolverOptions opt;
  opt.restarts = 8;
  opt.seed = seed;
  SolveResult psi = solve(ps, opt);
  ps.kind = ProblemKind::FEntropy;
  SolveResult f = solve(ps, opt);
  double lhs = f.value, rhs = h_e(0.5) - psi.value;
  if (psi.status == SolveStatus::Infeasible || f.status == SolveStatus::Infeasible) {
    detail = "unexpected infeasible";
    return false;
  }
  if (!close(lhs, rhs, 5e-6)) {
    std::ostringstream os;
    os << "F " << lhs << " vs h_e(p) - psi " << rhs;
    detail = os.str();
    return false;
  }
  return true;
}

inline bool phi_constant_region(std::uint64_t seed, std::string& detail) {
  ProblemSpec ps;
  ps.kind = ProblemKind::Phi;
  ps.p = 0.5;
  ps.r = 0.1;  // below p^3: constraint slack at the constant p
  ps.blocks = 3;
  SolverOptions opt;
  opt.restarts = 6;
  opt.seed = seed;
  SolveResult res = solve(ps, opt);
  if (res.value > 1e-10) {
    std::ostringstream os;
    os << "value " << res.value << " expected 0";
    detail = os.str();
    return false;
  }
  for (int a = 0; a < res.optimizer.blocks(); ++a)
    for (int b = 0; b < res.optimizer.blocks(); ++b)
      if (!close(res.optimizer.at(a, b), 0.5, 1e-4)) {
        detail = "optimizer not the constant p";
        return false;
      }
  return true;
}

inline bool value_recompute_invariant(std::uint64_t seed, std::string& detail) {
  ProblemSpec ps;
  ps.kind = ProblemKind::Psi;
  ps.p = 0.5;
  ps.r = 0.21;
  ps.blocks = 6;
  SolverOptions opt;
  opt.restarts = 6;
  opt.seed = seed;
  SolveResult res = solve(ps, opt);
  double again = i_p_graphon(0.5, res.optimizer);
  if (!close(res.value, again, 1e-12)) {
    std::ostringstream os;
    os << "reported " << res.value << " recomputed " << again;
    detail = os.str();
    return false;
  }
  return true;
}

inline bool infeasible_detected(std::uint64_t seed, std::string& detail) {
  ProblemSpec ps;
  ps.kind = ProblemKind::Psi;
  ps.p = 0.5;
  ps.r = 1.5;  // above the all-ones density
  ps.blocks = 4;
  SolverOptions opt;
  opt.restarts = 2;
  opt.seed = seed;
  SolveResult res = solve(ps, opt);
  if (res.status != SolveStatus::Infeasible) {
    detail = "r beyond the all-ones graphon not flagged";
    return false;
  }
  return true;
}

inline bool solver_thread_invariance(std::uint64_t seed, std::string& detail) {
  ProblemSpec ps;
  ps.kind = ProblemKind::Psi;
  ps.p = 0.5;
  ps.r = 0.19;
  ps.blocks = 5;
  SolverOptions opt;
  opt.restarts = 8;
  opt.seed = seed;
  int saved = thread_cap();
  set_thread_cap(1);
  SolveResult a = solve(ps, opt);
  set_thread_cap(4);
  SolveResult b = solve(ps, opt);
  set_thread_cap(saved);
  if (std::memcmp(&a.value, &b.value, sizeof(double)) != 0 ||
      a.optimizer.values != b.optimizer.values || a.optimizer.weights != b.optimizer.weights) {
    detail = "results differ across thread caps";
    return false;
  }
  return true;
}

inline bool gnm_marginals(std::uint64_t seed, std::string& detail) {
  int n = 5;
  long long m = 3;
  int draws = 4000;
  long long cp = pair_count(n);
  std::vector<long long> hits(cp, 0);
  for (int i = 0; i < draws; ++i) {
    FiniteGraph g = sample_gnm(n, m, seed, "chk/n1/" + std::to_string(i));
    if (g.edge_count != m) {
      detail = "edge count off";
      return false;
    }
    for (auto [u, v] : g.edges()) ++hits[pair_index(u, v, n)];
  }
  double expect = (double)draws * m / cp;
  double sd = std::sqrt((double)draws * ((double)m / cp) * (1.0 - (double)m / cp));
  for (long long c : hits)
    if (std::fabs(c - expect) > 4.5 * sd) {
      std::ostringstream os;
      os << "pair frequency " << c << " expect " << expect << " sd " << sd;
      detail = os.str();
      return false;
    }
  return true;
}

inline bool coupling_invariants(std::uint64_t seed, std::string& detail) {
  int n = 40;
  long long m = pair_count(n) / 2;
  double p = (double)(2 * m) / ((double)n * n) + 0.001;
  for (int rep = 0; rep < 25; ++rep) {
    CouplingTrace tr = couple(n, m, p, 0.05, seed + rep);
    long long xr = 0;
    for (int u = 0; u < n; ++u)
      for (int w = 0; w < tr.g_uniform.words; ++w)
        xr += std::popcount(tr.g_uniform.row(u)[w] ^ tr.g_conditioned.row(u)[w]);
    xr /= 2;
    if (xr != tr.xor_size || tr.xor_size != std::llabs(tr.d_n)) {
      detail = "xor bookkeeping";
      return false;
    }
    if (tr.g_conditioned.edge_count != tr.e_target) {
      detail = "conditioned edge count";
      return false;
    }
    if (std::fabs(2.0 * tr.e_target / ((double)n * n) - p) >= 0.05) {
      detail = "target outside window";
      return false;
    }
    FiniteGraph again = sample_gnm(n, m, seed + rep, "couple/gnm");
    if (again.adj != tr.g_uniform.adj) {
      detail = "uniform marginal disturbed by the conditioned stream";
      return false;
    }
  }
  return true;
}

inline bool enumerate_fixtures(std::uint64_t, std::string& detail) {
  TailEstimate k4 = enumerate_tail(4, 6, Motif::clique(4), 1.0 * 24 / 256);
  if (k4.count != 1 || k4.total != 1) {
    detail = "complete graph fixture";
    return false;
  }
  TailEstimate tri = enumerate_tail(5, 4, Motif::triangle(), 6.0 / 125 - 1e-12);
  if (tri.count != 70) {
    std::ostringstream os;
    os << "triangle tail fixture: " << tri.count << " expected 70";
    detail = os.str();
    return false;
  }
  TailEstimate all = enumerate_tail(5, 4, Motif::triangle(), 0.0);
  if (all.count != all.total || all.log_prob_rate != 0.0) {
    detail = "r=0 should count everything at rate exactly 0";
    return false;
  }
  return true;
}

inline bool threshold_compare_exact(std::uint64_t, std::string& detail) {
  // thresholds chosen exactly representable in binary: 3/64 and 1/2
  if (!t_at_least(6, 5, 3, 0.046875) || t_at_least(5, 5, 3, 0.046875)) {
    detail = "boundary at 3/64";
    return false;
  }
  if (!t_at_least(4, 2, 3, 0.5) || t_at_least(3, 2, 3, 0.5)) {
    detail = "boundary at 1/2";
    return false;
  }
  // the nearest double to 1/3 sits strictly below the rational 1/3
  if (frac_cmp(1, 3, 1.0 / 3) <= 0 || frac_cmp(1, 4, 0.25) != 0 || frac_cmp(3, 4, 0.75) != 0) {
    detail = "frac_cmp rational boundaries";
    return false;
  }
  if (!frac_at_least(2, 4, 0.5) || frac_at_least(1, 8, 0.2)) {
    detail = "frac_at_least";
    return false;
  }
  return true;
}

inline bool mcmc_preserves_constraint(std::uint64_t seed, std::string& detail) {
  McmcOptions opt;
  opt.steps = 4000;
  opt.burnin = 500;
  opt.thin = 1000;
  opt.chains = 2;
  opt.seed = seed;
  opt.assert_invariants = true;
  try {
    McmcResult res = mcmc_conditioned(12, 33, Motif::triangle(), 0.09, opt);
    for (const auto& ch : res.chains)
      for (const auto& g : ch.samples) {
        if (g.edge_count != 33) {
          detail = "sample edge count";
          return false;
        }
        if (!t_at_least(hom_count(Motif::triangle(), g), 12, 3, 0.09)) {
          detail = "sample violates threshold";
          return false;
        }
      }
  } catch (const std::logic_error& e) {
    detail = e.what();
    return false;
  }
  return true;
}

inline bool pair_density_fixture(std::uint64_t, std::string& detail) {
  FiniteGraph k3 = FiniteGraph::complete(3);
  std::vector<int> all{0, 1, 2};
  if (!close(pair_density(k3, all, all), 2.0 / 3.0, 1e-15)) {
    detail = "K3 self-density should be 2/3";
    return false;
  }
  FiniteGraph g(4);
  g.add_edge(0, 1);
  g.add_edge(2, 3);
  g.add_edge(0, 2);
  std::vector<int> a{0, 1}, b{2, 3};
  if (!close(pair_density(g, a, a), 0.5, 1e-15)) {  // one edge inside, counted twice, over 4
    detail = "diagonal density";
    return false;
  }
  if (!close(pair_density(g, a, b), 0.25, 1e-15)) {
    detail = "off-diagonal density";
    return false;
  }
  return true;
}

inline bool regularity_certificate(std::uint64_t seed, std::string& detail) {
  for (int rep = 0; rep < 3; ++rep) {
    FiniteGraph g = sample_gnp(60, 0.5, seed, "chk/q2/" + std::to_string(rep));
    double eps = 0.22;
    RegularityResult res = weak_regularity(g, eps);
    if (!res.certified) {
      detail = "no certificate";
      return false;
    }
    double cap = std::pow(4.0, std::ceil(1.0 / (eps * eps)));
    double bound = std::min({(double)g.n, std::pow(4.0, (double)res.rounds), cap});
    if ((double)res.partition.size() > bound + 1e-9) {
      std::ostringstream os;
      os << "parts " << res.partition.size() << " bound " << bound;
      detail = os.str();
      return false;
    }
  }
  return true;
}

inline bool counting_lemma_holds(std::uint64_t seed, std::string& detail) {
  for (int rep = 0; rep < 3; ++rep) {
    FiniteGraph g = sample_gnp(50, 0.45, seed, "chk/q3/" + std::to_string(rep));
    double eps = 0.2;
    RegularityResult res = weak_regularity(g, eps);
    CountingCheck c = counting_check(g, res.partition, Motif::triangle(), eps);
    if (!c.ok) {
      std::ostringstream os;
      os << "gap " << std::fabs(c.t_graph - c.t_quotient) << " bound " << c.bound;
      detail = os.str();
      return false;
    }
  }
  return true;
}

inline bool rounding_helper_monotone(std::uint64_t seed, std::string& detail) {
  Rng rng(seed, "chk/q4");
  for (int rep = 0; rep < 5; ++rep) {
    StepGraphon w = random_graphon(rng, 4);
    StepGraphon up = round_up_densities(w, 0.05);
    if (t_density(Motif::triangle(), up) + 1e-15 < t_density(Motif::triangle(), w)) {
      detail = "t dropped";
      return false;
    }
    if (edge_density(up) > edge_density(w) + 0.05 + 1e-12) {
      detail = "mass overshoot";
      return false;
    }
    for (std::size_t i = 0; i < w.values.size(); ++i)
      if (up.values[i] + 1e-15 < w.values[i]) {
        detail = "pointwise decrease";
        return false;
      }
  }
  return true;
}

inline bool block_event_bracket(std::uint64_t, std::string& detail) {
  Partition p(6, {{0, 1, 2}, {3, 4, 5}});
  std::vector<std::vector<double>> a{{0.9, 0.3}, {0.3, 0.9}};
  BlockEventResult ex = block_event_logprob(6, 7, p, a, LogprobMethod::Exact);
  BlockEventResult bd = block_event_logprob(6, 7, p, a, LogprobMethod::Bound);
  if (!ex.exact || ex.count == 0) {
    detail = "exact path empty";
    return false;
  }
  if (!(bd.lo <= ex.lo + 1e-12 && ex.hi <= bd.hi + 1e-12)) {
    std::ostringstream os;
    os << "bracket [" << bd.lo << ", " << bd.hi << "] misses exact " << ex.lo;
    detail = os.str();
    return false;
  }
  return true;
}

}  // namespace checks

inline std::vector<Check> all_checks() {
  return {
      {"density_embed_consistency", "graphon", checks::density_embed_consistency},
      {"gradient_matches_fd", "graphon", checks::gradient_matches_fd},
      {"motif_validation_rejects", "graphon", checks::motif_validation_rejects},
      {"cut_norm_vs_brute", "cutnorm", checks::cut_norm_vs_brute},
      {"cut_norm_witness_attains", "cutnorm", checks::cut_norm_witness_attains},
      {"cut_distance_metric_properties", "cutnorm", checks::cut_distance_metric_properties},
      {"rate_scalar_shape", "rates", checks::rate_scalar_shape},
      {"entropy_shape", "rates", checks::entropy_shape},
      {"gradient_clamp_bounded", "rates", checks::gradient_clamp_bounded},
      {"entropy_identity_small", "varsolve", checks::entropy_identity_small},
      {"phi_constant_region", "varsolve", checks::phi_constant_region},
      {"value_recompute_invariant", "varsolve", checks::value_recompute_invariant},
      {"infeasible_detected", "varsolve", checks::infeasible_detected},
      {"solver_thread_invariance", "varsolve", checks::solver_thread_invariance},
      {"gnm_marginals", "randgraph", checks::gnm_marginals},
      {"coupling_invariants", "randgraph", checks::coupling_invariants},
      {"enumerate_fixtures", "randgraph", checks::enumerate_fixtures},
      {"threshold_compare_exact", "randgraph", checks::threshold_compare_exact},
      {"mcmc_preserves_constraint", "randgraph", checks::mcmc_preserves_constraint},
      {"pair_density_fixture", "regularity", checks::pair_density_fixture},
      {"regularity_certificate", "regularity", checks::regularity_certificate},
      {"counting_lemma_holds", "regularity", checks::counting_lemma_holds},
      {"rounding_helper_monotone", "regularity", checks::rounding_helper_monotone},
      {"block_event_bracket", "regularity", checks::block_event_bracket},
  };
}

}  // namespace graphldp
