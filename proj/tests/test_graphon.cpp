#include <catch2/catch_amalgamated.hpp>

#include "graphldp/graphon.hpp"
#include "graphldp/rng.hpp"

using namespace graphldp;

namespace {

StepGraphon random_graphon(Rng& rng, int k) {
  StepGraphon w;
  w.weights.assign(k, 1.0 / k);
  w.values.assign((std::size_t)k * k, 0.0);
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b) w.set(a, b, rng.uniform01());
  return w;
}

}  // namespace

TEST_CASE("FiniteGraph edge bookkeeping") {
  FiniteGraph g(5);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(0, 2);
  REQUIRE(g.edge_count == 3);
  REQUIRE(g.has_edge(2, 0));
  REQUIRE(g.degree(1) == 2);
  REQUIRE(g.common_neighbors(0, 1) == 1);
  g.add_edge(0, 1);  // idempotent
  REQUIRE(g.edge_count == 3);
  g.remove_edge(0, 1);
  REQUIRE(g.edge_count == 2);
  REQUIRE(!g.has_edge(0, 1));
  REQUIRE_THROWS_AS(g.add_edge(3, 3), DomainError);
  REQUIRE(FiniteGraph::complete(6).edge_count == 15);
}

TEST_CASE("Motif validation") {
  REQUIRE(Motif::triangle().edge_count() == 3);
  REQUIRE(Motif::cycle(4).name == "c4");
  REQUIRE(Motif::clique(4).edge_count() == 6);
  REQUIRE(Motif::edge().vertices == 2);
  REQUIRE_THROWS_AS(Motif::from_edges(3, {{0, 1}}, "disconnected"), DomainError);
  REQUIRE_THROWS_AS(Motif::from_edges(3, {{0, 0}, {1, 2}}, "loop"), DomainError);
  REQUIRE_THROWS_AS(Motif::from_edges(3, {{0, 1}, {1, 0}, {1, 2}}, "dup"), DomainError);
  REQUIRE(Motif::cycle(4).is_cycle());
  REQUIRE(!Motif::clique(4).is_cycle());
}

TEST_CASE("StepGraphon validate catches malformed input") {
  StepGraphon w = StepGraphon::constant(0.3, 4);
  REQUIRE_NOTHROW(w.validate());
  StepGraphon bad = w;
  bad.weights[0] = -0.1;
  REQUIRE_THROWS_AS(bad.validate(), DomainError);
  bad = w;
  bad.values[1] = 0.9;  // breaks symmetry
  REQUIRE_THROWS_AS(bad.validate(), DomainError);
  bad = w;
  bad.values[0] = 1.5;
  REQUIRE_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("density on constant graphon is a power") {
  for (double p : {0.2, 0.5, 0.9}) {
    StepGraphon w = StepGraphon::constant(p, 3);
    REQUIRE(t_density(Motif::edge(), w) == Catch::Approx(p).epsilon(1e-12));
    REQUIRE(t_density(Motif::triangle(), w) == Catch::Approx(p * p * p).epsilon(1e-12));
    REQUIRE(t_density(Motif::cycle(4), w) == Catch::Approx(std::pow(p, 4)).epsilon(1e-12));
    REQUIRE(t_density(Motif::clique(4), w) == Catch::Approx(std::pow(p, 6)).epsilon(1e-12));
  }
}

TEST_CASE("homomorphism counts on small graphs") {
  // triangle graph: 6 triangle homs out of 27 maps
  FiniteGraph tri(3);
  tri.add_edge(0, 1);
  tri.add_edge(1, 2);
  tri.add_edge(0, 2);
  REQUIRE(t_density_graph(Motif::triangle(), tri) == Catch::Approx(6.0 / 27.0).epsilon(1e-12));
  REQUIRE(t_density_graph(Motif::edge(), tri) == Catch::Approx(6.0 / 9.0).epsilon(1e-12));

  // complete graph K5: hom(K4, K5) = 5*4*3*2
  FiniteGraph k5 = FiniteGraph::complete(5);
  REQUIRE(t_density_graph(Motif::clique(4), k5) == Catch::Approx(120.0 / 625.0).epsilon(1e-12));

  // path on 3 vertices: C4 homs = trace(A^4) = 8
  FiniteGraph path(3);
  path.add_edge(0, 1);
  path.add_edge(1, 2);
  REQUIRE(t_density_graph(Motif::cycle(4), path) == Catch::Approx(8.0 / 81.0).epsilon(1e-12));
}

TEST_CASE("graph density equals embedded graphon density") {
  Rng rng(42, "test/embed");
  for (int trial = 0; trial < 5; ++trial) {
    int n = 6 + (int)(rng.next_u64() % 5);
    FiniteGraph g(n);
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (rng.bernoulli(0.4)) g.add_edge(u, v);
    for (const Motif& h : {Motif::edge(), Motif::triangle(), Motif::cycle(4), Motif::clique(4)}) {
      REQUIRE(t_density_graph(h, g) ==
              Catch::Approx(t_density(h, embed(g))).margin(1e-12));
    }
  }
}

TEST_CASE("cycle fast path agrees with generic enumeration") {
  Rng rng(9, "test/cycle");
  for (int trial = 0; trial < 10; ++trial) {
    StepGraphon w = random_graphon(rng, 4);
    Motif c4 = Motif::cycle(4);
    REQUIRE(detail::t_cycle(c4, w) == Catch::Approx(detail::t_generic(c4, w)).margin(1e-12));
    Motif c5 = Motif::cycle(5);
    REQUIRE(detail::t_cycle(c5, w) == Catch::Approx(detail::t_generic(c5, w)).margin(1e-12));
  }
}

TEST_CASE("t_gradient matches finite differences") {
  Rng rng(17, "test/grad");
  for (const Motif& h : {Motif::edge(), Motif::triangle(), Motif::cycle(4)}) {
    StepGraphon w = random_graphon(rng, 5);
    // keep interior so central differences stay in range
    for (double& v : w.values) v = 0.1 + 0.8 * v;
    std::vector<double> grad = t_gradient(h, w);
    int k = w.blocks();
    const double step = 1e-5;
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) {
        double orig = w.at(a, b);
        w.set(a, b, orig + step);
        double up = t_density(h, w);
        w.set(a, b, orig - step);
        double dn = t_density(h, w);
        w.set(a, b, orig);
        // set() writes both cells; grad folds both partials into entry (a,b)
        double fd = (up - dn) / (2 * step);
        REQUIRE(grad[(std::size_t)a * k + b] == Catch::Approx(fd).margin(1e-6));
      }
  }
}

TEST_CASE("edge density conventions") {
  StepGraphon w = StepGraphon::constant(0.25, 2);
  REQUIRE(edge_density(w) == Catch::Approx(0.25).epsilon(1e-12));
  // graph-side density follows the embedding: 2m/n^2, no diagonal mass
  FiniteGraph g = FiniteGraph::complete(4);
  REQUIRE(edge_density(g) == Catch::Approx(0.75).epsilon(1e-12));
  REQUIRE(edge_density(g) == Catch::Approx(t_density_graph(Motif::edge(), g)).epsilon(1e-12));
}
