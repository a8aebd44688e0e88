#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "graphldp/randgraph.hpp"

using namespace graphldp;

TEST_CASE("pair indexing is a bijection") {
  int n = 9;
  std::map<long long, std::pair<int, int>> seen;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      long long idx = pair_index(u, v, n);
      REQUIRE(idx >= 0);
      REQUIRE(idx < pair_count(n));
      REQUIRE(!seen.count(idx));
      seen[idx] = {u, v};
    }
  REQUIRE((long long)seen.size() == pair_count(n));
}

TEST_CASE("threshold comparisons are decided in integer arithmetic") {
  // t = 24/256 meets the dyadic threshold exactly
  REQUIRE(t_at_least(24, 4, 4, 0.09375));
  // double(6/125) rounds above the true rational, so equality fails there
  REQUIRE(!t_at_least(6, 5, 3, 6.0 / 125.0));
  REQUIRE(t_at_least(6, 5, 3, 0.046875));
  REQUIRE(t_at_least(0, 5, 3, 0.0));
  REQUIRE(!t_at_least(0, 5, 3, 1e-300));
}

TEST_CASE("fixed-edge-count sampling hits the exact count and uniform pair marginals") {
  int n = 6;
  long long m = 5;
  const int trials = 3000;
  std::map<std::pair<int, int>, int> freq;
  for (int t = 0; t < trials; ++t) {
    FiniteGraph g = sample_gnm(n, m, 1000 + t);
    REQUIRE(g.edge_count == m);
    for (auto e : g.edges()) freq[e]++;
  }
  // each pair appears with probability m / C(n,2) = 1/3
  double mean = trials / 3.0, sd = std::sqrt(trials * (1.0 / 3) * (2.0 / 3));
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      REQUIRE(std::fabs(freq[{u, v}] - mean) <= 4 * sd);
}

TEST_CASE("sampling is seed-deterministic and stream-separated") {
  FiniteGraph a = sample_gnm(20, 60, 5), b = sample_gnm(20, 60, 5), c = sample_gnm(20, 60, 6);
  REQUIRE(a.adj == b.adj);
  REQUIRE(a.adj != c.adj);
  FiniteGraph p1 = sample_gnp(20, 0.4, 5), p2 = sample_gnp(20, 0.4, 5);
  REQUIRE(p1.adj == p2.adj);
  REQUIRE(p1.adj != a.adj);
}

TEST_CASE("coupling trace invariants") {
  int n = 40;
  long long m = 390;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    CouplingTrace tr = couple(n, m, 0.5, 0.1, seed);
    REQUIRE(tr.g_uniform.edge_count == m);
    REQUIRE(tr.g_conditioned.edge_count == tr.e_target);
    REQUIRE(tr.d_n == tr.e_target - m);
    REQUIRE(tr.xor_size == std::llabs(tr.d_n));
    REQUIRE(std::fabs(2.0 * tr.e_target / ((double)n * n) - 0.5) < 0.1);
    REQUIRE(tr.added_only == (tr.d_n >= 0));
    REQUIRE(tr.deleted_only == (tr.d_n <= 0));
    // one-sided edit: the smaller graph is contained in the larger
    const FiniteGraph& small = tr.d_n >= 0 ? tr.g_uniform : tr.g_conditioned;
    const FiniteGraph& large = tr.d_n >= 0 ? tr.g_conditioned : tr.g_uniform;
    long long sym_diff = 0;
    for (std::size_t w = 0; w < small.adj.size(); ++w) {
      REQUIRE((small.adj[w] & ~large.adj[w]) == 0);
      sym_diff += std::popcount(small.adj[w] ^ large.adj[w]);
    }
    REQUIRE(sym_diff / 2 == tr.xor_size);
  }
  REQUIRE_THROWS_AS(couple(10, 5, 0.9, 0.01, 1), DomainError);
}

TEST_CASE("density difference bound for subgraph counts") {
  // toggling j edges moves t_H by at most 2 * |E(H)| * j / n^2
  int n = 30;
  for (const Motif& h : {Motif::triangle(), Motif::cycle(4)}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      FiniteGraph g1 = sample_gnp(n, 0.5, seed, "lip-base");
      FiniteGraph g2 = g1;
      Rng rng(seed, "lip-edit");
      int edits = 1 + (int)(rng.next_u64() % 20);
      for (int e = 0; e < edits; ++e) {
        int u = (int)rng.below(n), v = (int)rng.below(n);
        if (u == v) continue;
        if (g2.has_edge(u, v)) g2.remove_edge(u, v);
        else g2.add_edge(u, v);
      }
      LipschitzCheck chk = lipschitz_check(h, g1, g2);
      REQUIRE(chk.ok);
      REQUIRE(chk.lhs <= chk.rhs + 1e-12);
    }
  }
}

TEST_CASE("exhaustive tail counts on frozen fixtures") {
  // only K4 itself among the C(6,6)=1 graphs
  TailEstimate k4 = enumerate_tail(4, 6, Motif::clique(4), 0.09375);
  REQUIRE(k4.count == 1);
  REQUIRE(k4.total == 1);
  REQUIRE(k4.log_prob_rate == 0.0);

  // 4 edges on 5 vertices holding a triangle: choose the triangle, then the
  // spare edge among the 7 remaining pairs
  TailEstimate tri = enumerate_tail(5, 4, Motif::triangle(), 0.046875);
  REQUIRE(tri.count == 70);
  REQUIRE(tri.total == 210);

  // half-density fixtures near the typical triangle count
  TailEstimate t7 = enumerate_tail(7, 10, Motif::triangle(), 0.15);
  REQUIRE(t7.count == 21);  // exactly the K5-plus-isolated-vertices family
  REQUIRE(t7.total == 352716);
  TailEstimate t8 = enumerate_tail(8, 14, Motif::triangle(), 0.15);
  REQUIRE(t8.count == 22260);
  REQUIRE(t8.total == 40116600ULL);

  // empty tail: no 10-edge graph on 7 vertices reaches density 0.2
  TailEstimate empty = enumerate_tail(7, 10, Motif::triangle(), 0.2);
  REQUIRE(empty.count == 0);
  REQUIRE(std::isinf(empty.log_prob_rate));

  // r = 0 is the whole space, rate exactly zero
  TailEstimate all = enumerate_tail(6, 7, Motif::triangle(), 0.0);
  REQUIRE(all.count == all.total);
  REQUIRE(all.log_prob_rate == 0.0);

  REQUIRE_THROWS_AS(enumerate_tail(9, 10, Motif::triangle(), 0.1), DomainError);
}

TEST_CASE("Monte Carlo tail estimate brackets the exact probability") {
  double exact = 253155.0 / 352716.0;  // enumerate_tail(7, 10, triangle, 0.05)
  TailEstimate mc = enumerate_tail_mc(7, 10, Motif::triangle(), 0.05, 20000, 99);
  REQUIRE(mc.method == TailMethod::MonteCarlo);
  REQUIRE(mc.total == 20000);
  double phat = (double)mc.count / (double)mc.total;
  REQUIRE(std::fabs(phat - exact) <= 4 * std::sqrt(exact * (1 - exact) / 20000.0));
  REQUIRE(std::isfinite(mc.std_error));
}

TEST_CASE("conditioned sampler stays inside the constraint set") {
  McmcOptions opt;
  opt.steps = 20000;
  opt.burnin = 5000;
  opt.thin = 5000;
  opt.chains = 3;
  opt.seed = 17;
  opt.assert_invariants = true;
  Motif tri = Motif::triangle();
  McmcResult res = mcmc_conditioned(12, 33, tri, 0.15, opt);
  REQUIRE((int)res.chains.size() == 3);
  for (const McmcChain& ch : res.chains) {
    REQUIRE(!ch.samples.empty());
    REQUIRE(ch.accept_rate > 0.0);
    REQUIRE(ch.accept_rate <= 1.0);
    for (const FiniteGraph& g : ch.samples) {
      REQUIRE(g.edge_count == 33);
      REQUIRE(t_density_graph(tri, g) >= 0.15);
    }
  }
  REQUIRE(std::isfinite(res.spread));
  REQUIRE(res.spread >= 1.0);

  // unreachable density: the colex-densest start already fails
  REQUIRE_THROWS_AS(mcmc_conditioned(8, 14, tri, 0.9, opt), InfeasibleError);
}

TEST_CASE("colex seed graph maximizes early triangle density") {
  FiniteGraph g = densest_seed_graph(6, 8);
  REQUIRE(g.edge_count == 8);
  // K4 plus edges 04, 14: triangles 012 013 023 123 014
  REQUIRE(t_density_graph(Motif::triangle(), g) == Catch::Approx(30.0 / 216.0).epsilon(1e-12));
}

TEST_CASE("empirical rate rows carry the count identity and exclusion flag") {
  auto m_of_n = [](int n) { return round_half_even(0.5 * (double)pair_count(n)); };
  Motif tri = Motif::triangle();
  std::vector<RateRow> rows = empirical_rate({6, 7}, m_of_n, tri, 0.15, 0.05, 1000, 3);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].m == 8);
  REQUIRE(rows[1].m == 10);
  REQUIRE(rows[0].est.count == 0);
  REQUIRE(rows[1].est.count == 21);
  double shift = rows[1].est.log_prob_rate + log_binomial(21, 10) / 49.0;
  REQUIRE(rows[1].he_shift == Catch::Approx(shift).margin(1e-12));
  REQUIRE(rows[1].he_shift == Catch::Approx(std::log(21.0) / 49.0).margin(1e-12));
  REQUIRE(!rows[0].excluded);

  std::vector<RateRow> flagged = empirical_rate({6}, m_of_n, tri, 0.15, 0.05, 1000, 3, 0.04, 0.06);
  REQUIRE(flagged[0].excluded);
}
