#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "graphldp/io.hpp"

using namespace graphldp;

TEST_CASE("graphon JSON round trip is bit exact") {
  StepGraphon w;
  w.weights = {0.6875, 0.3125};
  w.values.assign(4, 0.0);
  w.set(0, 0, 0.8190999999999999);
  w.set(0, 1, 0.23480000000000001);
  w.set(1, 1, 0.1225);
  io::Meta meta;
  meta.command = "solve";
  std::ostringstream os;
  io::write_graphon(os, w, meta);
  std::istringstream is(os.str());
  StepGraphon back = io::read_graphon(is);
  REQUIRE(back.weights == w.weights);
  REQUIRE(back.values == w.values);
}

TEST_CASE("graphon JSON shape: value matrix nests one row per block") {
  StepGraphon w = StepGraphon::constant(0.25, 3);
  io::json j = io::graphon_to_json(w);
  REQUIRE(j["weights"].size() == 3);
  REQUIRE(j["values"].size() == 3);
  REQUIRE(j["values"][0].size() == 3);
  REQUIRE(j["values"][2][1].get<double>() == 0.25);
  io::json bad = j;
  bad["values"][0] = {0.25, 0.25};  // ragged row
  REQUIRE_THROWS_AS(io::graphon_from_json(bad), DomainError);
}

TEST_CASE("graph edge list round trip") {
  FiniteGraph g(6);
  g.add_edge(0, 3);
  g.add_edge(2, 5);
  g.add_edge(1, 4);
  io::Meta meta;
  meta.command = "sample";
  meta.seed = "42";
  std::ostringstream os;
  io::write_graph(os, g, meta);
  std::istringstream is(os.str());
  FiniteGraph back = io::read_graph(is);
  REQUIRE(back.n == 6);
  REQUIRE(back.edge_count == 3);
  REQUIRE(back.adj == g.adj);

  std::istringstream trunc("3 2\n0 1\n");
  REQUIRE_THROWS_AS(io::read_graph(trunc), DomainError);
  std::istringstream oob("3 1\n0 7\n");
  REQUIRE_THROWS_AS(io::read_graph(oob), DomainError);
}

TEST_CASE("headers pin version, format, log base and generator") {
  io::Meta meta;
  meta.command = "sweep";
  meta.config = "p=0.5";
  meta.seed = "7";
  std::vector<std::string> ls = io::header_lines(meta);
  REQUIRE(ls[0] == "# graphldp 0.1.0 format_version=1 log_base=e rng=splitmix64");
  REQUIRE(ls[1] == "# command: sweep");
  REQUIRE(ls[2] == "# config: p=0.5");
  REQUIRE(ls[3] == "# seed: 7");

  io::json mj = io::meta_json(meta);
  REQUIRE(mj["version"] == "0.1.0");
  REQUIRE(mj["format_version"] == 1);
  REQUIRE(mj["log_base"] == "e");
  REQUIRE(mj["rng"] == "splitmix64");
}

TEST_CASE("curve CSV header is stable") {
  CurveResult curve;
  CurvePoint pt;
  pt.r = 0.2;
  pt.psi.value = 0.099;
  pt.psi.status = SolveStatus::Converged;
  pt.phi.value = 0.007;
  pt.f.value = 0.24;
  curve.points.push_back(pt);
  std::ostringstream os;
  io::write_curve_csv(os, curve, io::Meta{});
  std::istringstream is(os.str());
  std::string line, header;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] == '#') continue;
    header = line;
    break;
  }
  REQUIRE(header == "r,psi,phi,F,t_residual,mass_residual,status,blocks_used");
  std::getline(is, line);
  REQUIRE(line.find("CONVERGED") != std::string::npos);

  // infeasible points serialize as signed infinities
  curve.points[0].psi.status = SolveStatus::Infeasible;
  curve.points[0].f.status = SolveStatus::Infeasible;
  std::ostringstream os2;
  io::write_curve_csv(os2, curve, io::Meta{});
  REQUIRE(os2.str().find("inf") != std::string::npos);
  REQUIRE(os2.str().find("INFEASIBLE") != std::string::npos);
}

TEST_CASE("solve result JSON exposes the resolved problem and diagnostics") {
  ProblemSpec ps;
  ps.motif = Motif::triangle();
  ps.kind = ProblemKind::Psi;
  ps.p = 0.5;
  ps.r = 0.2;
  SolveResult res;
  res.optimizer = StepGraphon::constant(0.5, 1);
  res.value = 0.0996;
  res.status = SolveStatus::Converged;
  res.blocks_used = 1;
  res.restarts.resize(2);
  io::json j = io::solve_result_to_json(ps, res, io::Meta{});
  REQUIRE(j["problem"]["kind"] == "psi");
  REQUIRE(j["problem"]["motif"]["name"] == "triangle");
  REQUIRE(j["problem"]["p"].get<double>() == 0.5);
  REQUIRE(j["problem"]["mode"] == "inequality");
  REQUIRE(j["status"] == "CONVERGED");
  REQUIRE(j["value"].get<double>() == 0.0996);
  REQUIRE(j["restarts"].size() == 2);
  REQUIRE(j["optimizer"]["weights"].size() == 1);
  REQUIRE(j.contains("meta"));
}

TEST_CASE("number formatting survives text round trips") {
  for (double x : {0.1, 1.0 / 3.0, 0.09959854713252265, 1e-17, 12345.6789}) {
    REQUIRE(std::stod(io::fmt(x)) == x);
  }
}
