// Command-line front end: solve / sweep / sample / couple / enumerate / mcmc /
// rate / verify. Outputs carry '#' or meta headers with the resolved config
// and seed; identical (config, seed) pairs give byte-identical files.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <graphldp/io.hpp>
#include <graphldp/verify.hpp>

using namespace graphldp;

namespace {

Motif parse_motif(const std::string& s) {
  if (s == "edge" || s == "k2") return Motif::edge();
  if (s == "triangle" || s == "c3" || s == "k3") return Motif::triangle();
  if (s.size() >= 2 && (s[0] == 'c' || s[0] == 'k') &&
      s.find_first_not_of("0123456789", 1) == std::string::npos) {
    int k = std::stoi(s.substr(1));
    if (s[0] == 'c') {
      if (k < 3 || k > 12) throw DomainError("motif: cycle length out of range");
      return Motif::cycle(k);
    }
    if (k < 2 || k > 10) throw DomainError("motif: clique size out of range");
    return Motif::clique(k);
  }
  if (s.find('-') != std::string::npos) {
    // explicit edge list "0-1,1-2,2-0"
    std::vector<std::pair<int, int>> es;
    int maxv = -1;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      auto dash = tok.find('-');
      if (dash == std::string::npos) throw DomainError("motif: bad edge token " + tok);
      int a = std::stoi(tok.substr(0, dash)), b = std::stoi(tok.substr(dash + 1));
      es.emplace_back(a, b);
      maxv = std::max({maxv, a, b});
    }
    return Motif::from_edges(maxv + 1, es, s);
  }
  throw DomainError("motif: unknown preset " + s);
}

struct OutFile {
  std::ofstream file;
  std::ostream& os;
  explicit OutFile(const std::string& path)
      : file(), os(path == "-" ? std::cout : (file.open(path), file)) {
    if (path != "-" && !file) throw DomainError("cannot open output file " + path);
  }
};

std::string kv(const std::string& k, const std::string& v) { return k + "=" + v + " "; }
std::string kv(const std::string& k, double v) { return k + "=" + io::fmt(v) + " "; }
std::string kv(const std::string& k, long long v) { return k + "=" + std::to_string(v) + " "; }

std::string trim(std::string s) {
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

int run(int argc, char** argv) {
  CLI::App app{"rate functions and optimizer graphons for subgraph-count tails"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "cap worker threads (0 = machine/env default)");

  // ---- solve
  auto* solve_cmd = app.add_subcommand("solve", "one variational solve");
  std::string s_kind = "psi", s_motif = "triangle", s_mode = "ineq", s_mass = "edge_density";
  double s_p = 0.5, s_r = 0.2, s_b = -1;
  long long s_n = 0, s_m = -1;
  int s_blocks = 16, s_restarts = 32;
  std::uint64_t s_seed = 0;
  std::string s_out = "-";
  solve_cmd->add_option("--kind", s_kind, "phi|psi|entropy|psi_hat")->capture_default_str();
  solve_cmd->add_option("--motif", s_motif, "edge|triangle|cN|kN|edge list a-b,...")->capture_default_str();
  solve_cmd->add_option("--p", s_p, "reference density")->capture_default_str();
  solve_cmd->add_option("--r", s_r, "density target")->capture_default_str();
  solve_cmd->add_option("--mode", s_mode, "ineq|eq")->capture_default_str();
  solve_cmd->add_option("--blocks", s_blocks, "mesh blocks")->capture_default_str();
  solve_cmd->add_option("--restarts", s_restarts, "multistart count")->capture_default_str();
  solve_cmd->add_option("--n", s_n, "vertices (psi_hat)");
  solve_cmd->add_option("--m", s_m, "edges (psi_hat; default round(p*C(n,2)))");
  solve_cmd->add_option("--b", s_b, "threshold factor (psi_hat: t >= b p_n^k)");
  solve_cmd->add_option("--mass-convention", s_mass, "edge_density|pair_average")->capture_default_str();
  solve_cmd->add_option("--seed", s_seed, "rng seed")->required();
  solve_cmd->add_option("--out", s_out, "output path or -")->capture_default_str();
  solve_cmd->set_config("--config");

  // ---- sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "psi/phi/entropy curve over an r grid");
  std::string w_motif = "triangle", w_grid, w_out = "-";
  double w_p = 0.5, w_rmin = 0.13, w_rmax = 0.42;
  int w_steps = 30, w_blocks = 16, w_restarts = 32;
  std::uint64_t w_seed = 0;
  sweep_cmd->add_option("--motif", w_motif)->capture_default_str();
  sweep_cmd->add_option("--p", w_p)->capture_default_str();
  sweep_cmd->add_option("--r-min", w_rmin)->capture_default_str();
  sweep_cmd->add_option("--r-max", w_rmax)->capture_default_str();
  sweep_cmd->add_option("--steps", w_steps, "grid points, endpoints included")->capture_default_str();
  sweep_cmd->add_option("--r-grid", w_grid, "explicit comma list overriding min/max/steps");
  sweep_cmd->add_option("--blocks", w_blocks)->capture_default_str();
  sweep_cmd->add_option("--restarts", w_restarts)->capture_default_str();
  sweep_cmd->add_option("--seed", w_seed)->required();
  sweep_cmd->add_option("--out", w_out)->capture_default_str();
  sweep_cmd->set_config("--config");

  // ---- sample
  auto* sample_cmd = app.add_subcommand("sample", "draw one graph");
  std::string a_model = "gnm", a_out = "-";
  long long a_n = 0, a_m = 0;
  double a_p = 0.5;
  std::uint64_t a_seed = 0;
  sample_cmd->add_option("--model", a_model, "gnm|gnp")->capture_default_str();
  sample_cmd->add_option("--n", a_n)->required();
  sample_cmd->add_option("--m", a_m, "edges (gnm)");
  sample_cmd->add_option("--p", a_p, "edge probability (gnp)")->capture_default_str();
  sample_cmd->add_option("--seed", a_seed)->required();
  sample_cmd->add_option("--out", a_out)->capture_default_str();
  sample_cmd->set_config("--config");

  // ---- couple
  auto* couple_cmd = app.add_subcommand("couple", "uniform/conditioned coupling trace");
  long long c_n = 0, c_m = 0;
  double c_p = 0.5, c_eta = 0.05;
  std::uint64_t c_seed = 0;
  std::string c_out = "-", c_prefix;
  couple_cmd->add_option("--n", c_n)->required();
  couple_cmd->add_option("--m", c_m)->required();
  couple_cmd->add_option("--p", c_p)->capture_default_str();
  couple_cmd->add_option("--eta", c_eta, "density window half-width")->capture_default_str();
  couple_cmd->add_option("--seed", c_seed)->required();
  couple_cmd->add_option("--out", c_out, "trace JSON path or -")->capture_default_str();
  couple_cmd->add_option("--graphs-prefix", c_prefix, "also write PREFIX.uniform/.conditioned edge lists");
  couple_cmd->set_config("--config");

  // ---- enumerate
  auto* enum_cmd = app.add_subcommand("enumerate", "tail probability by exhaustion or Monte Carlo");
  std::string e_motif = "triangle", e_out = "-";
  long long e_n = 0, e_m = 0;
  double e_r = 0.0;
  bool e_mc = false;
  unsigned long long e_trials = 100000;
  std::uint64_t e_seed = 0;
  bool e_seed_set = false;
  enum_cmd->add_option("--n", e_n)->required();
  enum_cmd->add_option("--m", e_m)->required();
  enum_cmd->add_option("--motif", e_motif)->capture_default_str();
  enum_cmd->add_option("--r", e_r)->required();
  enum_cmd->add_flag("--mc", e_mc, "Monte Carlo instead of exhaustive (needed for n > 8)");
  enum_cmd->add_option("--trials", e_trials)->capture_default_str();
  enum_cmd->add_option("--seed", e_seed)->each([&](const std::string&) { e_seed_set = true; });
  enum_cmd->add_option("--out", e_out)->capture_default_str();
  enum_cmd->set_config("--config");

  // ---- mcmc
  auto* mcmc_cmd = app.add_subcommand("mcmc", "edge-swap sampler conditioned on the tail event");
  std::string m_motif = "triangle", m_out = "-", m_prefix;
  long long m_n = 0, m_m = 0, m_steps = 1000000, m_burnin = 200000, m_thin = 100000;
  double m_r = 0.0;
  int m_chains = 8;
  std::uint64_t m_seed = 0;
  mcmc_cmd->add_option("--n", m_n)->required();
  mcmc_cmd->add_option("--m", m_m)->required();
  mcmc_cmd->add_option("--motif", m_motif)->capture_default_str();
  mcmc_cmd->add_option("--r", m_r)->required();
  mcmc_cmd->add_option("--steps", m_steps)->capture_default_str();
  mcmc_cmd->add_option("--burnin", m_burnin)->capture_default_str();
  mcmc_cmd->add_option("--thin", m_thin)->capture_default_str();
  mcmc_cmd->add_option("--chains", m_chains)->capture_default_str();
  mcmc_cmd->add_option("--seed", m_seed)->required();
  mcmc_cmd->add_option("--out", m_out, "summary CSV path or -")->capture_default_str();
  mcmc_cmd->add_option("--samples-prefix", m_prefix, "write PREFIX.chainC.sampleI.edges files");
  mcmc_cmd->set_config("--config");

  // ---- rate
  auto* rate_cmd = app.add_subcommand("rate", "finite-n tail rates against the variational value");
  std::string r_motif = "triangle", r_ns = "6,7,8", r_out = "-";
  double r_p = 0.5, r_r = 0.2, r_psi = std::numeric_limits<double>::quiet_NaN();
  int r_blocks = 16, r_restarts = 32;
  unsigned long long r_trials = 200000;
  std::uint64_t r_seed = 0;
  rate_cmd->add_option("--motif", r_motif)->capture_default_str();
  rate_cmd->add_option("--p", r_p)->capture_default_str();
  rate_cmd->add_option("--r", r_r)->capture_default_str();
  rate_cmd->add_option("--n", r_ns, "comma list of sizes")->capture_default_str();
  rate_cmd->add_option("--psi", r_psi, "reference value; solved here when omitted");
  rate_cmd->add_option("--blocks", r_blocks)->capture_default_str();
  rate_cmd->add_option("--restarts", r_restarts)->capture_default_str();
  rate_cmd->add_option("--trials", r_trials, "Monte Carlo budget for n > 8")->capture_default_str();
  rate_cmd->add_option("--seed", r_seed)->required();
  rate_cmd->add_option("--out", r_out)->capture_default_str();
  rate_cmd->set_config("--config");

  // ---- verify
  auto* verify_cmd = app.add_subcommand("verify", "run named invariant checks");
  std::string v_suite = "all";
  std::uint64_t v_seed = 0;
  verify_cmd->add_option("--suite", v_suite, "all|graphon|cutnorm|rates|varsolve|randgraph|regularity")
      ->capture_default_str();
  verify_cmd->add_option("--seed", v_seed)->required();
  verify_cmd->set_config("--config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help/version exit clean, any usage failure is 1
  }
  if (threads > 0) set_thread_cap(threads);

  if (solve_cmd->parsed()) {
    ProblemSpec ps;
    ps.motif = parse_motif(s_motif);
    if (s_kind == "phi") ps.kind = ProblemKind::Phi;
    else if (s_kind == "psi") ps.kind = ProblemKind::Psi;
    else if (s_kind == "entropy") ps.kind = ProblemKind::FEntropy;
    else if (s_kind == "psi_hat") ps.kind = ProblemKind::PsiHat;
    else throw DomainError("solve: unknown kind " + s_kind);
    if (s_mode == "ineq") ps.mode = ConstraintMode::Inequality;
    else if (s_mode == "eq") ps.mode = ConstraintMode::Equality;
    else throw DomainError("solve: unknown mode " + s_mode);
    ps.p = s_p;
    ps.r = s_r;
    ps.blocks = s_blocks;
    if (ps.kind == ProblemKind::PsiHat) {
      if (s_n < 2) throw DomainError("solve: psi_hat needs --n");
      ps.n = s_n;
      ps.m = s_m >= 0 ? s_m : round_half_even(s_p * (double)pair_count(s_n));
      if (s_b < 0) throw DomainError("solve: psi_hat needs --b");
      ps.b = s_b;
      ps.blocks = (int)s_n;
      if (s_mass == "edge_density") ps.mass_convention = MassConvention::EdgeDensity;
      else if (s_mass == "pair_average") ps.mass_convention = MassConvention::PairAverage;
      else throw DomainError("solve: unknown mass convention " + s_mass);
    }
    SolverOptions opt;
    opt.restarts = s_restarts;
    opt.seed = s_seed;
    SolveResult res = solve(ps, opt);
    io::Meta meta;
    meta.command = "solve";
    std::string cfg = kv("kind", s_kind) + kv("motif", s_motif) + kv("p", s_p) + kv("r", s_r) +
                      kv("mode", s_mode) + kv("blocks", (long long)ps.blocks) +
                      kv("restarts", (long long)s_restarts);
    if (ps.kind == ProblemKind::PsiHat)
      cfg += kv("n", ps.n) + kv("m", ps.m) + kv("b", s_b) + kv("mass_convention", s_mass);
    meta.config = trim(cfg);
    meta.seed = std::to_string(s_seed);
    OutFile out(s_out);
    out.os << io::solve_result_to_json(ps, res, meta).dump(2) << "\n";
    return res.status == SolveStatus::Infeasible ? 2 : 0;
  }

  if (sweep_cmd->parsed()) {
    std::vector<double> grid;
    if (!w_grid.empty()) {
      std::stringstream ss(w_grid);
      std::string tok;
      while (std::getline(ss, tok, ',')) grid.push_back(std::stod(tok));
    } else {
      if (w_steps < 2) throw DomainError("sweep: need at least 2 steps");
      for (int i = 0; i < w_steps; ++i)
        grid.push_back(w_rmin + (w_rmax - w_rmin) * i / (w_steps - 1));
    }
    SolverOptions opt;
    opt.restarts = w_restarts;
    opt.seed = w_seed;
    CurveResult curve = psi_curve(parse_motif(w_motif), w_p, grid, w_blocks, opt);
    io::Meta meta;
    meta.command = "sweep";
    meta.config = trim(kv("motif", w_motif) + kv("p", w_p) +
                       (w_grid.empty() ? kv("r_min", w_rmin) + kv("r_max", w_rmax) +
                                             kv("steps", (long long)w_steps)
                                       : kv("r_grid", w_grid)) +
                       kv("blocks", (long long)w_blocks) + kv("restarts", (long long)w_restarts));
    meta.seed = std::to_string(w_seed);
    OutFile out(w_out);
    io::write_curve_csv(out.os, curve, meta);
    return curve.r_feasible_max < 0 ? 2 : 0;
  }

  if (sample_cmd->parsed()) {
    FiniteGraph g;
    std::string cfg;
    if (a_model == "gnm") {
      g = sample_gnm((int)a_n, a_m, a_seed);
      cfg = kv("model", a_model) + kv("n", a_n) + kv("m", a_m);
    } else if (a_model == "gnp") {
      g = sample_gnp((int)a_n, a_p, a_seed);
      cfg = kv("model", a_model) + kv("n", a_n) + kv("p", a_p);
    } else {
      throw DomainError("sample: unknown model " + a_model);
    }
    io::Meta meta;
    meta.command = "sample";
    meta.config = trim(cfg);
    meta.seed = std::to_string(a_seed);
    OutFile out(a_out);
    io::write_graph(out.os, g, meta);
    return 0;
  }

  if (couple_cmd->parsed()) {
    CouplingTrace tr = couple((int)c_n, c_m, c_p, c_eta, c_seed);
    io::Meta meta;
    meta.command = "couple";
    meta.config = trim(kv("n", c_n) + kv("m", c_m) + kv("p", c_p) + kv("eta", c_eta));
    meta.seed = std::to_string(c_seed);
    OutFile out(c_out);
    out.os << io::coupling_to_json(tr, meta).dump(2) << "\n";
    if (!c_prefix.empty()) {
      std::ofstream fu(c_prefix + ".uniform.edges"), fc(c_prefix + ".conditioned.edges");
      if (!fu || !fc) throw DomainError("couple: cannot open graph output files");
      io::write_graph(fu, tr.g_uniform, meta);
      io::write_graph(fc, tr.g_conditioned, meta);
    }
    return 0;
  }

  if (enum_cmd->parsed()) {
    if (e_mc && !e_seed_set) throw DomainError("enumerate: --mc needs --seed");
    Motif h = parse_motif(e_motif);
    TailEstimate est = e_mc ? enumerate_tail_mc((int)e_n, e_m, h, e_r, e_trials, e_seed)
                            : enumerate_tail((int)e_n, e_m, h, e_r);
    io::Meta meta;
    meta.command = "enumerate";
    meta.config = trim(kv("n", e_n) + kv("m", e_m) + kv("motif", e_motif) + kv("r", e_r) +
                       kv("method", std::string(e_mc ? "mc" : "exact")) +
                       (e_mc ? kv("trials", (long long)e_trials) : std::string{}));
    meta.seed = e_seed_set ? std::to_string(e_seed) : "none";
    OutFile out(e_out);
    out.os << io::tail_to_json(est, meta).dump(2) << "\n";
    return 0;
  }

  if (mcmc_cmd->parsed()) {
    McmcOptions opt;
    opt.steps = m_steps;
    opt.burnin = m_burnin;
    opt.thin = m_thin;
    opt.chains = m_chains;
    opt.seed = m_seed;
    McmcResult res = mcmc_conditioned((int)m_n, m_m, parse_motif(m_motif), m_r, opt);
    io::Meta meta;
    meta.command = "mcmc";
    meta.config = trim(kv("n", m_n) + kv("m", m_m) + kv("motif", m_motif) + kv("r", m_r) +
                       kv("steps", m_steps) + kv("burnin", m_burnin) + kv("thin", m_thin) +
                       kv("chains", (long long)m_chains));
    meta.seed = std::to_string(m_seed);
    OutFile out(m_out);
    io::write_header(out.os, meta);
    out.os << "chain,samples,accept_rate,mean_t,var_t,spread\n";
    for (std::size_t c = 0; c < res.chains.size(); ++c) {
      const McmcChain& ch = res.chains[c];
      out.os << c << "," << ch.samples.size() << "," << io::fmt(ch.accept_rate) << ","
             << io::fmt(ch.mean_t) << "," << io::fmt(ch.var_t) << "," << io::fmt(res.spread)
             << "\n";
    }
    if (!m_prefix.empty())
      for (std::size_t c = 0; c < res.chains.size(); ++c)
        for (std::size_t i = 0; i < res.chains[c].samples.size(); ++i) {
          std::ofstream f(m_prefix + ".chain" + std::to_string(c) + ".sample" + std::to_string(i) +
                          ".edges");
          if (!f) throw DomainError("mcmc: cannot open sample output file");
          io::write_graph(f, res.chains[c].samples[i], meta);
        }
    return 0;
  }

  if (rate_cmd->parsed()) {
    Motif h = parse_motif(r_motif);
    std::vector<int> ns;
    {
      std::stringstream ss(r_ns);
      std::string tok;
      while (std::getline(ss, tok, ',')) ns.push_back(std::stoi(tok));
    }
    double psi_value = r_psi;
    if (!std::isfinite(psi_value)) {
      ProblemSpec ps;
      ps.motif = h;
      ps.p = r_p;
      ps.r = r_r;
      ps.blocks = r_blocks;
      SolverOptions opt;
      opt.restarts = r_restarts;
      opt.seed = r_seed;
      SolveResult res = solve(ps, opt);
      if (res.status == SolveStatus::Infeasible) return 2;
      psi_value = res.value;
    }
    auto m_of_n = [&](int n) { return round_half_even(r_p * (double)pair_count(n)); };
    std::vector<RateRow> rows = empirical_rate(ns, m_of_n, h, r_r, psi_value, r_trials, r_seed);
    io::Meta meta;
    meta.command = "rate";
    meta.config = trim(kv("motif", r_motif) + kv("p", r_p) + kv("r", r_r) + kv("n", r_ns) +
                       kv("psi", psi_value) + kv("trials", (long long)r_trials));
    meta.seed = std::to_string(r_seed);
    OutFile out(r_out);
    io::write_header(out.os, meta);
    out.os << "n,m,method,count,total,log_prob_rate,std_error,neg_psi,he_shift,excluded\n";
    for (const RateRow& row : rows)
      out.os << row.n << "," << row.m << ","
             << (row.est.method == TailMethod::ExactEnum ? "exact" : "mc") << "," << row.est.count
             << "," << row.est.total << "," << io::fmt(row.est.log_prob_rate) << ","
             << io::fmt(row.est.std_error) << "," << io::fmt(row.neg_psi) << ","
             << io::fmt(row.he_shift) << "," << (row.excluded ? 1 : 0) << "\n";
    return 0;
  }

  if (verify_cmd->parsed()) {
    int failures = 0, ran = 0;
    for (const Check& c : all_checks()) {
      if (v_suite != "all" && v_suite != c.group) continue;
      ++ran;
      std::string detail;
      bool ok;
      try {
        ok = c.fn(v_seed, detail);
      } catch (const std::exception& e) {
        ok = false;
        detail = std::string("exception: ") + e.what();
      }
      if (ok) {
        std::printf("PASS %s/%s\n", c.group.c_str(), c.name.c_str());
      } else {
        std::printf("FAIL %s/%s: %s\n", c.group.c_str(), c.name.c_str(), detail.c_str());
        ++failures;
      }
    }
    if (ran == 0) throw DomainError("verify: unknown suite " + v_suite);
    std::printf("%d/%d checks passed\n", ran - failures, ran);
    return failures ? 1 : 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
