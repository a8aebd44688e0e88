#include <catch2/catch_amalgamated.hpp>

#include "graphldp/randgraph.hpp"
#include "graphldp/regularity.hpp"

using namespace graphldp;

TEST_CASE("partition validation") {
  REQUIRE_NOTHROW(Partition(4, {{0, 1}, {2, 3}}));
  REQUIRE_THROWS_AS(Partition(4, {{0, 1}, {1, 2, 3}}), DomainError);  // overlap
  REQUIRE_THROWS_AS(Partition(4, {{0, 1}, {2}}), DomainError);        // 3 uncovered
  REQUIRE_THROWS_AS(Partition(4, {{0, 1, 2, 3}, {}}), DomainError);   // empty part
  REQUIRE(Partition::trivial(5).size() == 1);
  std::vector<int> owner = Partition(4, {{0, 2}, {1, 3}}).part_of();
  REQUIRE(owner == std::vector<int>{0, 1, 0, 1});
}

TEST_CASE("ordered pair density keeps the diagonal in the denominator") {
  FiniteGraph tri(3);
  tri.add_edge(0, 1);
  tri.add_edge(1, 2);
  tri.add_edge(0, 2);
  std::vector<int> all = {0, 1, 2};
  // 6 ordered adjacent pairs over 9 ordered pairs including (x,x)
  REQUIRE(pair_density(tri, all, all) == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
  std::vector<int> left = {0}, right = {1, 2};
  REQUIRE(pair_density(tri, left, right) == Catch::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("quotient graphon carries part masses and pair densities") {
  FiniteGraph tri(3);
  tri.add_edge(0, 1);
  tri.add_edge(1, 2);
  tri.add_edge(0, 2);
  StepGraphon q1 = quotient(tri, Partition::trivial(3));
  REQUIRE(q1.blocks() == 1);
  REQUIRE(q1.at(0, 0) == Catch::Approx(2.0 / 3.0).epsilon(1e-15));

  StepGraphon q3 = quotient(tri, Partition(3, {{0}, {1}, {2}}));
  REQUIRE(q3.blocks() == 3);
  REQUIRE(q3.at(0, 0) == 0.0);
  REQUIRE(q3.at(0, 1) == 1.0);
  REQUIRE(q3.weights[0] == Catch::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("random graphs certify immediately and satisfy the counting bound") {
  for (double p : {0.2, 0.5}) {
    FiniteGraph g = sample_gnp(80, p, 31, "reg-test");
    RegularityResult reg = weak_regularity(g, 0.12);
    REQUIRE(reg.certified);
    REQUIRE(reg.final_violation <= 0.12);
    REQUIRE(reg.partition.size() <= 80);
    CountingCheck chk = counting_check(g, reg.partition, Motif::triangle(), 0.12);
    REQUIRE(chk.ok);
    REQUIRE(std::fabs(chk.t_graph - chk.t_quotient) <= 3 * 0.12 + 1e-9);
  }
}

TEST_CASE("structured graphs split into the planted parts") {
  // complete bipartite: one split reaches a quotient that is cut-close
  int half = 20;
  FiniteGraph g(2 * half);
  for (int u = 0; u < half; ++u)
    for (int v = half; v < 2 * half; ++v) g.add_edge(u, v);
  RegularityResult reg = weak_regularity(g, 0.1);
  REQUIRE(reg.certified);
  REQUIRE(reg.partition.size() <= 16);
  CountingCheck chk = counting_check(g, reg.partition, Motif::cycle(4), 0.1);
  REQUIRE(chk.ok);
}

TEST_CASE("certified partitions approximate the graph in cut norm") {
  // the certificate is exactly: the cut search finds no violating rectangle
  FiniteGraph g = sample_gnm(60, 885, 71, "reg-gnm");
  double eps = 0.15;
  RegularityResult reg = weak_regularity(g, eps);
  REQUIRE(reg.certified);
  // recompute the residual violation on the returned partition
  StepGraphon q = quotient(g, reg.partition);
  std::vector<int> owner = reg.partition.part_of();
  std::vector<std::vector<double>> resid(g.n, std::vector<double>(g.n, 0.0));
  for (int u = 0; u < g.n; ++u)
    for (int v = 0; v < g.n; ++v) {
      if (u == v) continue;
      resid[u][v] = (g.has_edge(u, v) ? 1.0 : 0.0) - q.at(owner[u], owner[v]);
    }
  detail::CutSearchHit hit = detail::residual_cut_search(resid, g.n, RegularityOptions{});
  REQUIRE(hit.value <= eps + 1e-9);
}

TEST_CASE("rounding densities up never lowers counts") {
  StepGraphon w;
  w.weights = {0.5, 0.5};
  w.values.assign(4, 0.0);
  w.set(0, 0, 0.23);
  w.set(0, 1, 0.61);
  w.set(1, 1, 0.98);
  double eps = 0.1;
  StepGraphon up = round_up_densities(w, eps);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      REQUIRE(up.at(a, b) >= w.at(a, b));
      REQUIRE(up.at(a, b) <= 1.0);
      double scaled = up.at(a, b) / eps;
      REQUIRE(std::fabs(scaled - std::round(scaled)) < 1e-9);
    }
  REQUIRE(up.at(1, 1) == 1.0);
  REQUIRE(t_density(Motif::triangle(), up) >= t_density(Motif::triangle(), w));
  REQUIRE(edge_density(up) <= edge_density(w) + eps + 1e-12);
  REQUIRE_THROWS_AS(round_up_densities(w, 0.0), DomainError);
}

TEST_CASE("block event probability: exact state count vs combinatorial bracket") {
  int n = 8;
  long long m = 14;
  Partition part(n, {{0, 1, 2, 3}, {4, 5, 6, 7}});
  // masses: 0.75*6 + 0.35*16 + 0.65*6 = 14 = m, so the target is consistent
  std::vector<std::vector<double>> a = {{0.75, 0.35}, {0.35, 0.65}};
  BlockEventResult exact = block_event_logprob(n, m, part, a, LogprobMethod::Exact);
  REQUIRE(exact.exact);
  REQUIRE(exact.normalized);
  REQUIRE(exact.total == 40116600ULL);
  REQUIRE(exact.count > 0);
  REQUIRE(exact.lo == exact.hi);
  double direct = std::log((double)exact.count / (double)exact.total) / (n * n);
  REQUIRE(exact.lo == Catch::Approx(direct).margin(1e-12));

  BlockEventResult bound = block_event_logprob(n, m, part, a, LogprobMethod::Bound);
  REQUIRE(!bound.exact);
  REQUIRE(bound.lo <= exact.lo + 1e-12);
  REQUIRE(bound.hi >= exact.hi - 1e-12);
  REQUIRE(bound.hi <= 1e-12);  // log probabilities stay nonpositive
  // bracket endpoints are the rate plus explicit finite-n corrections
  REQUIRE(bound.lo == Catch::Approx(-bound.ip_target - bound.eps_lo).margin(1e-12));
  REQUIRE(bound.hi == Catch::Approx(-bound.ip_target + bound.eps_hi).margin(1e-12));
}

TEST_CASE("one-sided events are supersets of the two-sided event") {
  int n = 8;
  long long m = 14;
  Partition part(n, {{0, 1, 2, 3}, {4, 5, 6, 7}});
  std::vector<std::vector<double>> a = {{0.8, 0.3}, {0.3, 0.7}};
  BlockEventResult both = block_event_logprob(n, m, part, a, LogprobMethod::Exact, EventSide::Both);
  BlockEventResult up = block_event_logprob(n, m, part, a, LogprobMethod::Exact, EventSide::Upper);
  BlockEventResult dn = block_event_logprob(n, m, part, a, LogprobMethod::Exact, EventSide::Lower);
  REQUIRE(both.count <= up.count);
  REQUIRE(both.count <= dn.count);
  REQUIRE(both.normalized);  // 0.8*6 + 0.3*16 + 0.7*6 = 13.8, within half an edge of 14

  // a target mass two edges away from m is flagged
  std::vector<std::vector<double>> off = {{0.9, 0.2}, {0.2, 0.6}};
  BlockEventResult skew = block_event_logprob(n, m, part, off, LogprobMethod::Exact);
  REQUIRE(!skew.normalized);
}

TEST_CASE("block event rejects malformed input") {
  Partition part(6, {{0, 1, 2}, {3, 4, 5}});
  std::vector<std::vector<double>> a = {{0.5, 0.5}, {0.5, 0.5}};
  REQUIRE_THROWS_AS(block_event_logprob(5, 3, part, a, LogprobMethod::Exact), DomainError);
  REQUIRE_THROWS_AS(block_event_logprob(6, 0, part, a, LogprobMethod::Exact), DomainError);
  REQUIRE_THROWS_AS(block_event_logprob(6, 15, part, a, LogprobMethod::Exact), DomainError);
  std::vector<std::vector<double>> bad = {{0.5, 0.4}, {0.6, 0.5}};
  REQUIRE_THROWS_AS(block_event_logprob(6, 7, part, bad, LogprobMethod::Exact), DomainError);
  std::vector<std::vector<double>> oob = {{1.5, 0.5}, {0.5, 0.5}};
  REQUIRE_THROWS_AS(block_event_logprob(6, 7, part, oob, LogprobMethod::Exact), DomainError);
}
