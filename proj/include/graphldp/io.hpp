#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "graphon.hpp"
#include "randgraph.hpp"
#include "varsolve.hpp"

namespace graphldp::io {

using nlohmann::json;

inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Meta {
  std::string command;
  std::string config;  // resolved key=value pairs, space separated
  std::string seed = "none";
};

inline std::vector<std::string> header_lines(const Meta& meta) {
  std::vector<std::string> ls;
  ls.push_back(std::string("# graphldp ") + kVersion + " format_version=" +
               std::to_string(kFormatVersion) + " log_base=" + kLogBase + " rng=" + Rng::kName);
  if (!meta.command.empty()) ls.push_back("# command: " + meta.command);
  ls.push_back("# config: " + (meta.config.empty() ? std::string("(defaults)") : meta.config));
  ls.push_back("# seed: " + meta.seed);
  return ls;
}

inline void write_header(std::ostream& os, const Meta& meta) {
  for (const auto& l : header_lines(meta)) os << l << "\n";
}

inline json meta_json(const Meta& meta) {
  json j;
  j["version"] = kVersion;
  j["format_version"] = kFormatVersion;
  j["log_base"] = kLogBase;
  j["rng"] = Rng::kName;
  j["command"] = meta.command;
  j["config"] = meta.config;
  j["seed"] = meta.seed;
  return j;
}

// ---------------------------------------------------------------------------
// Step graphons: JSON object with block masses and the symmetric value matrix.

inline json graphon_to_json(const StepGraphon& w) {
  json j;
  j["weights"] = w.weights;
  json rows = json::array();
  int k = w.blocks();
  for (int a = 0; a < k; ++a) {
    json rowj = json::array();
    for (int b = 0; b < k; ++b) rowj.push_back(w.at(a, b));
    rows.push_back(std::move(rowj));
  }
  j["values"] = rows;
  return j;
}

inline StepGraphon graphon_from_json(const json& j) {
  StepGraphon w;
  if (!j.contains("weights") || !j.contains("values"))
    throw DomainError("graphon json needs weights and values");
  w.weights = j.at("weights").get<std::vector<double>>();
  auto rows = j.at("values").get<std::vector<std::vector<double>>>();
  int k = w.blocks();
  if ((int)rows.size() != k) throw DomainError("graphon json: values shape");
  w.values.assign((std::size_t)k * k, 0.0);
  for (int a = 0; a < k; ++a) {
    if ((int)rows[a].size() != k) throw DomainError("graphon json: values shape");
    for (int b = 0; b < k; ++b) w.values[(std::size_t)a * k + b] = rows[a][b];
  }
  w.validate();
  return w;
}

inline void write_graphon(std::ostream& os, const StepGraphon& w, const Meta& meta) {
  json j = graphon_to_json(w);
  j["meta"] = meta_json(meta);
  os << j.dump(2) << "\n";
}

inline StepGraphon read_graphon(std::istream& is) {
  json j = json::parse(is);
  return graphon_from_json(j);
}

// ---------------------------------------------------------------------------
// Graphs: '#' comment headers, an "n m" line, then one "u v" edge per line,
// vertices 0-indexed.

inline void write_graph(std::ostream& os, const FiniteGraph& g, const Meta& meta) {
  write_header(os, meta);
  os << g.n << " " << g.edge_count << "\n";
  for (auto [u, v] : g.edges()) os << u << " " << v << "\n";
}

inline FiniteGraph read_graph(std::istream& is) {
  std::string line;
  long long n = -1, m = -1;
  FiniteGraph g;
  long long seen = 0;
  while (std::getline(is, line)) {
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line.substr(start));
    if (n < 0) {
      if (!(ls >> n >> m) || n < 1 || m < 0) throw DomainError("graph file: bad size line");
      g = FiniteGraph((int)n);
      continue;
    }
    long long u, v;
    if (!(ls >> u >> v)) throw DomainError("graph file: bad edge line");
    if (u < 0 || v < 0 || u >= n || v >= n) throw DomainError("graph file: vertex out of range");
    g.add_edge((int)u, (int)v);
    ++seen;
  }
  if (n < 0) throw DomainError("graph file: empty");
  if (seen != m) throw DomainError("graph file: edge count mismatch");
  return g;
}

// ---------------------------------------------------------------------------
// Solver output.

inline json motif_to_json(const Motif& h) {
  json j;
  j["name"] = h.name;
  j["vertices"] = h.vertices;
  json es = json::array();
  for (auto [a, b] : h.edges) es.push_back({a, b});
  j["edges"] = es;
  return j;
}

inline json solve_result_to_json(const ProblemSpec& ps, const SolveResult& res, const Meta& meta) {
  json j;
  j["meta"] = meta_json(meta);
  j["problem"] = {{"kind", to_string(ps.kind)},
                  {"motif", motif_to_json(ps.motif)},
                  {"p", ps.p},
                  {"r", ps.r},
                  {"mode", to_string(ps.mode)},
                  {"blocks", ps.blocks}};
  if (ps.kind == ProblemKind::PsiHat) {
    j["problem"]["n"] = ps.n;
    j["problem"]["m"] = ps.m;
    j["problem"]["b"] = ps.b;
    j["problem"]["mass_convention"] = to_string(ps.mass_convention);
  }
  j["status"] = to_string(res.status);
  j["value"] = res.value;
  j["t_residual"] = res.t_residual;
  j["mass_residual"] = res.mass_residual;
  j["kkt_residual"] = res.kkt_residual;
  j["iterations"] = res.iterations;
  json rs = json::array();
  for (const auto& rec : res.restarts)
    rs.push_back({{"value", rec.value},
                  {"t_residual", rec.t_residual},
                  {"kkt_residual", rec.kkt_residual},
                  {"status", to_string(rec.status)}});
  j["restarts"] = rs;
  j["blocks_used"] = res.blocks_used;
  j["optimizer"] = graphon_to_json(res.optimizer);
  return j;
}

// Column layout is part of the output contract; keep it byte-stable. An
// infeasible mass-constrained point prints as inf (infimum over an empty set).
inline void write_curve_csv(std::ostream& os, const CurveResult& curve, const Meta& meta) {
  write_header(os, meta);
  os << "r,psi,phi,F,t_residual,mass_residual,status,blocks_used\n";
  for (const auto& pt : curve.points) {
    bool infeas = pt.psi.status == SolveStatus::Infeasible;
    double inf = std::numeric_limits<double>::infinity();
    os << fmt(pt.r) << "," << fmt(infeas ? inf : pt.psi.value) << "," << fmt(pt.phi.value) << ","
       << fmt(pt.f.status == SolveStatus::Infeasible ? -inf : pt.f.value) << ","
       << fmt(pt.psi.t_residual) << "," << fmt(pt.psi.mass_residual) << ","
       << to_string(pt.psi.status) << "," << pt.psi.blocks_used << "\n";
  }
}

inline json tail_to_json(const TailEstimate& est, const Meta& meta) {
  json j;
  j["meta"] = meta_json(meta);
  j["n"] = est.n;
  j["m"] = est.m;
  j["r"] = est.r;
  j["method"] = est.method == TailMethod::ExactEnum ? "exact" : "monte_carlo";
  j["count"] = est.count;
  j["total"] = est.total;
  j["log_prob_rate"] = est.log_prob_rate;
  if (est.method == TailMethod::MonteCarlo) j["std_error"] = est.std_error;
  return j;
}

inline json coupling_to_json(const CouplingTrace& tr, const Meta& meta) {
  json j;
  j["meta"] = meta_json(meta);
  j["e_target"] = tr.e_target;
  j["d_n"] = tr.d_n;
  j["xor_size"] = tr.xor_size;
  j["added_only"] = tr.added_only;
  j["deleted_only"] = tr.deleted_only;
  return j;
}

}  // namespace graphldp::io
