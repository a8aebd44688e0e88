#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "common.hpp"
#include "graphon.hpp"
#include "parallel.hpp"
#include "rates.hpp"
#include "rng.hpp"

namespace graphldp {

enum class ProblemKind { Phi, Psi, FEntropy, PsiHat };
enum class ConstraintMode { Inequality, Equality };
enum class SolveStatus { Converged, MaxIter, Infeasible };

// How the discrete problem's mass budget is read: either the embedded step
// graphon has edge density p_n, or the plain average of the n(n-1)/2 upper
// cells equals p_n.  The two differ by a factor (n-1)/n.
enum class MassConvention { EdgeDensity, PairAverage };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "CONVERGED";
    case SolveStatus::MaxIter: return "MAX_ITER";
    case SolveStatus::Infeasible: return "INFEASIBLE";
  }
  return "?";
}

inline const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Phi: return "phi";
    case ProblemKind::Psi: return "psi";
    case ProblemKind::FEntropy: return "entropy";
    case ProblemKind::PsiHat: return "psi_hat";
  }
  return "?";
}

inline const char* to_string(ConstraintMode m) {
  return m == ConstraintMode::Inequality ? "inequality" : "equality";
}

inline const char* to_string(MassConvention c) {
  return c == MassConvention::EdgeDensity ? "edge_density" : "pair_average";
}

struct ProblemSpec {
  Motif motif = Motif::triangle();
  double p = 0.5;
  double r = 0.0;
  ProblemKind kind = ProblemKind::Psi;
  ConstraintMode mode = ConstraintMode::Inequality;
  int blocks = 16;
  // discrete problem only
  long long n = 0, m = 0;
  double b = 0.0;
  MassConvention mass_convention = MassConvention::EdgeDensity;

  double effective_p() const {
    if (kind == ProblemKind::PsiHat) {
      if (n < 2 || m < 0 || m > pair_count(n)) throw DomainError("ProblemSpec: bad n/m");
      return (double)m / (double)pair_count(n);
    }
    if (!(p > 0 && p < 1)) throw DomainError("ProblemSpec: need 0 < p < 1");
    return p;
  }

  double target_density() const {
    if (kind == ProblemKind::PsiHat)
      return b * std::pow(effective_p(), (double)motif.edge_count());
    return r;
  }
};

struct RestartRecord {
  double value = 0;
  double t_residual = 0;
  double kkt_residual = 0;
  SolveStatus status = SolveStatus::MaxIter;
};

struct SolveResult {
  StepGraphon optimizer;        // canonical form (near-identical rows merged, sorted)
  StepGraphon mesh;             // raw mesh-level minimizer, for warm starts
  double value = 0;             // I_p integral (h_e integral for the entropy problem)
  double t_residual = 0;        // t_H(optimizer) - target
  double mass_residual = 0;     // edge density - mass target (0 when unconstrained)
  double kkt_residual = 0;
  long long iterations = 0;
  int blocks_used = 0;          // distinct blocks after tolerant merge
  std::vector<RestartRecord> restarts;
  SolveStatus status = SolveStatus::MaxIter;
};

struct SolverOptions {
  int restarts = 32;
  long long max_inner_total = 5000;
  double feas_tol = 1e-7;
  double kkt_tol = 1e-6;
  int kkt_streak = 10;
  double grad_clamp = kGradClamp;
  std::uint64_t seed = 0;
  std::vector<StepGraphon> warm_starts;  // tried before the standard family
};

namespace detail {

struct WorkProblem {
  Motif motif;
  int k = 0;
  std::vector<double> w;        // block masses
  std::vector<double> mu;       // cell measures (2 - [a==b]) w_a w_b
  std::vector<char> pinned;     // cells fixed at zero (discrete diagonal)
  double p_ref = 0;             // reference density inside the rate integrand
  double r_t = 0;               // t_H target
  bool has_mass = false;
  double mass_target = 0;       // target for sum mu_ab x_ab over free cells
  bool entropy = false;         // maximize h_e instead of minimizing I_p
  ConstraintMode mode = ConstraintMode::Inequality;

  std::size_t cell(int a, int b) const { return (std::size_t)a * k + b; }

  StepGraphon wrap(const std::vector<double>& x) const {
    StepGraphon g;
    g.weights = w;
    g.values = x;
    return g;
  }

  double objective(const std::vector<double>& x) const {
    StepGraphon g = wrap(x);
    return entropy ? -h_e_graphon(g) : i_p_graphon(p_ref, g);
  }

  std::vector<double> objective_grad(const std::vector<double>& x, double clamp) const {
    StepGraphon g = wrap(x);
    std::vector<double> gr = entropy ? h_e_gradient(g, clamp) : i_p_gradient(p_ref, g, clamp);
    if (entropy)
      for (double& v : gr) v = -v;
    return gr;
  }

  double t_value(const std::vector<double>& x) const { return t_density(motif, wrap(x)); }

  std::vector<double> t_grad(const std::vector<double>& x) const { return t_gradient(motif, wrap(x)); }

  double mass_of(const std::vector<double>& x) const {
    double s = 0;
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b)
        if (!pinned[cell(a, b)]) s += mu[cell(a, b)] * x[cell(a, b)];
    return s;
  }

  // project onto {0 <= x <= 1, pinned cells = 0, [sum mu x = mass_target]};
  // the shift form x = clip(y + tau) is the exact projection in the
  // mu-weighted metric, found by bisection on tau
  void project(std::vector<double>& y) const {
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) {
        std::size_t c = cell(a, b);
        if (pinned[c]) {
          y[c] = 0;
          y[cell(b, a)] = 0;
        }
      }
    if (!has_mass) {
      for (int a = 0; a < k; ++a)
        for (int b = a; b < k; ++b) {
          std::size_t c = cell(a, b);
          if (!pinned[c]) {
            double v = std::clamp(y[c], 0.0, 1.0);
            y[c] = v;
            y[cell(b, a)] = v;
          }
        }
      return;
    }
    // phi(tau) = sum mu clip(y + tau) is piecewise linear and nondecreasing;
    // sweep its breakpoints (each cell entering the interior at -y, saturating
    // at 1-y) and solve the linear segment containing the target
    struct Event {
      double tau;
      double dmu, dmuy, dsat;
    };
    std::vector<Event> ev;
    ev.reserve((std::size_t)k * (k + 1));
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) {
        std::size_t c = cell(a, b);
        if (pinned[c]) continue;
        ev.push_back({-y[c], mu[c], mu[c] * y[c], 0.0});
        ev.push_back({1.0 - y[c], -mu[c], -mu[c] * y[c], mu[c]});
      }
    std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.tau < b.tau; });
    double slope_mu = 0, muy = 0, saturated = 0;
    double tau = 0;
    bool found = false;
    std::size_t i = 0;
    while (i < ev.size() && !found) {
      double t_i = ev[i].tau;
      // phi at the left limit of t_i under the sums accumulated so far
      double phi_end = saturated + muy + slope_mu * t_i;
      if (phi_end >= mass_target) {
        tau = slope_mu > 0 ? t_i - (phi_end - mass_target) / slope_mu : t_i;
        found = true;
        break;
      }
      while (i < ev.size() && ev[i].tau == t_i) {
        slope_mu += ev[i].dmu;
        muy += ev[i].dmuy;
        saturated += ev[i].dsat;
        ++i;
      }
    }
    if (!found) tau = ev.empty() ? 0.0 : ev.back().tau;
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) {
        std::size_t c = cell(a, b);
        if (!pinned[c]) {
          double v = std::clamp(y[c] + tau, 0.0, 1.0);
          y[c] = v;
          y[cell(b, a)] = v;
        }
      }
  }
};

inline WorkProblem make_work(const ProblemSpec& spec) {
  WorkProblem wp;
  wp.motif = spec.motif;
  wp.mode = spec.mode;
  wp.p_ref = spec.effective_p();
  wp.r_t = spec.target_density();
  if (spec.kind == ProblemKind::PsiHat) {
    wp.k = (int)spec.n;
    if (wp.k < 2) throw DomainError("solve: discrete problem needs n >= 2");
  } else {
    wp.k = spec.blocks;
    if (wp.k < 1) throw DomainError("solve: blocks >= 1");
  }
  wp.w.assign(wp.k, 1.0 / wp.k);
  wp.mu.resize((std::size_t)wp.k * wp.k);
  wp.pinned.assign((std::size_t)wp.k * wp.k, 0);
  for (int a = 0; a < wp.k; ++a)
    for (int b = 0; b < wp.k; ++b) wp.mu[wp.cell(a, b)] = (a == b ? 1.0 : 2.0) * wp.w[a] * wp.w[b];
  switch (spec.kind) {
    case ProblemKind::Phi:
      break;
    case ProblemKind::Psi:
      wp.has_mass = true;
      wp.mass_target = wp.p_ref;
      break;
    case ProblemKind::FEntropy:
      wp.has_mass = true;
      wp.mass_target = wp.p_ref;
      wp.entropy = true;
      break;
    case ProblemKind::PsiHat: {
      for (int a = 0; a < wp.k; ++a) wp.pinned[wp.cell(a, a)] = 1;
      wp.has_mass = true;
      // EdgeDensity: integral of the embedded graphon equals p_n;
      // PairAverage: mean of the off-diagonal cells equals p_n
      wp.mass_target = spec.mass_convention == MassConvention::EdgeDensity
                           ? wp.p_ref
                           : wp.p_ref * (double)(wp.k - 1) / (double)wp.k;
      break;
    }
  }
  if (wp.has_mass) {
    double free_measure = 0;
    for (int a = 0; a < wp.k; ++a)
      for (int b = a; b < wp.k; ++b)
        if (!wp.pinned[wp.cell(a, b)]) free_measure += wp.mu[wp.cell(a, b)];
    if (wp.mass_target > free_measure + 1e-12 || wp.mass_target < -1e-12)
      throw DomainError("solve: mass target outside attainable range");
  }
  return wp;
}

struct RestartOutcome {
  std::vector<double> x;
  double value = 0;  // reported-sense value (entropy problems flip sign)
  double obj = 0;    // minimized objective, used for the reduction
  double t_res = 0;
  double kkt = 0;
  long long iters = 0;
  SolveStatus status = SolveStatus::MaxIter;
  bool feasible = false;
};

// augmented-Lagrangian value and gradient at multiplier lam, penalty rho
struct AlEval {
  double L;
  std::vector<double> grad;
};

inline AlEval al_eval(const WorkProblem& wp, const std::vector<double>& x, double lam, double rho,
                      double clamp) {
  AlEval e;
  double f = wp.objective(x);
  double t = wp.t_value(x);
  std::vector<double> gf = wp.objective_grad(x, clamp);
  if (wp.mode == ConstraintMode::Inequality) {
    double s = lam + rho * (wp.r_t - t);  // multiplier estimate for t >= r_t
    if (s > 0) {
      e.L = f + (s * s - lam * lam) / (2 * rho);
      std::vector<double> gt = wp.t_grad(x);
      e.grad = std::move(gf);
      for (std::size_t i = 0; i < e.grad.size(); ++i) e.grad[i] -= s * gt[i];
    } else {
      e.L = f - lam * lam / (2 * rho);
      e.grad = std::move(gf);
    }
  } else {
    double c = t - wp.r_t;
    e.L = f + lam * c + 0.5 * rho * c * c;
    std::vector<double> gt = wp.t_grad(x);
    e.grad = std::move(gf);
    double coef = lam + rho * c;
    for (std::size_t i = 0; i < e.grad.size(); ++i) e.grad[i] += coef * gt[i];
  }
  return e;
}

// infinity norm of x - Proj(x - precond grad): stationarity measure
inline double pg_residual(const WorkProblem& wp, const std::vector<double>& x,
                          const std::vector<double>& grad) {
  std::vector<double> y = x;
  for (int a = 0; a < wp.k; ++a)
    for (int b = a; b < wp.k; ++b) {
      std::size_t c = wp.cell(a, b);
      if (!wp.pinned[c]) y[c] = y[wp.cell(b, a)] = x[c] - grad[c] / wp.mu[c];
    }
  wp.project(y);
  double r = 0;
  for (int a = 0; a < wp.k; ++a)
    for (int b = a; b < wp.k; ++b) r = std::max(r, std::fabs(y[wp.cell(a, b)] - x[wp.cell(a, b)]));
  return r;
}

inline RestartOutcome run_restart(const WorkProblem& wp, std::vector<double> x,
                                  const SolverOptions& opt, double lam0 = 0.0,
                                  double rho0 = 10.0) {
  RestartOutcome out;
  wp.project(x);
  // start fingerprint: keeps stall escapes distinct across restarts
  std::uint64_t h0 = 1469598103934665603ULL;
  for (double v : x) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h0 = (h0 ^ bits) * 1099511628211ULL;
  }
  std::vector<double> x_round = x;
  double lam = lam0, rho = rho0;
  const double rho_cap = 1e9;
  double prev_viol = 1e300;
  long long used = 0;
  int streak = 0;
  int kicks = 0;
  int stalls = 0;
  double kkt = 1e300;
  std::vector<double> xprev, gprev;
  bool converged = false;
  for (int outer = 0; outer < 40 && !converged && used < opt.max_inner_total; ++outer) {
    double step = 1.0;
    AlEval cur = al_eval(wp, x, lam, rho, opt.grad_clamp);
    long long slice = std::min<long long>(400, opt.max_inner_total - used);
    for (long long it = 0; it < slice; ++it, ++used) {
      // preconditioned descent direction with exact projection
      std::vector<double> y = x;
      for (int a = 0; a < wp.k; ++a)
        for (int bb = a; bb < wp.k; ++bb) {
          std::size_t c = wp.cell(a, bb);
          if (!wp.pinned[c]) y[c] = y[wp.cell(bb, a)] = x[c] - step * cur.grad[c] / wp.mu[c];
        }
      wp.project(y);
      double gdx = 0;
      for (int a = 0; a < wp.k; ++a)
        for (int bb = a; bb < wp.k; ++bb) {
          std::size_t c = wp.cell(a, bb);
          gdx += cur.grad[c] * (y[c] - x[c]);
        }
      AlEval nxt = al_eval(wp, y, lam, rho, opt.grad_clamp);
      int halvings = 0;
      while (nxt.L > cur.L + 1e-4 * gdx && halvings < 40) {
        step *= 0.5;
        ++halvings;
        y = x;
        for (int a = 0; a < wp.k; ++a)
          for (int bb = a; bb < wp.k; ++bb) {
            std::size_t c = wp.cell(a, bb);
            if (!wp.pinned[c]) y[c] = y[wp.cell(bb, a)] = x[c] - step * cur.grad[c] / wp.mu[c];
          }
        wp.project(y);
        gdx = 0;
        for (int a = 0; a < wp.k; ++a)
          for (int bb = a; bb < wp.k; ++bb) {
            std::size_t c = wp.cell(a, bb);
            gdx += cur.grad[c] * (y[c] - x[c]);
          }
        nxt = al_eval(wp, y, lam, rho, opt.grad_clamp);
      }
      // Barzilai-Borwein step for the next iterate, in the mu metric
      double num = 0, den = 0;
      for (int a = 0; a < wp.k; ++a)
        for (int bb = a; bb < wp.k; ++bb) {
          std::size_t c = wp.cell(a, bb);
          double dx = y[c] - x[c];
          double dg = (nxt.grad[c] - cur.grad[c]) / wp.mu[c];
          num += wp.mu[c] * dx * dx;
          den += wp.mu[c] * dx * dg;
        }
      x.swap(y);
      cur = std::move(nxt);
      step = (den > 1e-300) ? std::clamp(num / den, 1e-8, 1e4) : std::min(step * 2, 1e4);
      kkt = pg_residual(wp, x, cur.grad);
      double t = wp.t_value(x);
      double viol = wp.mode == ConstraintMode::Inequality ? std::max(0.0, wp.r_t - t)
                                                         : std::fabs(t - wp.r_t);
      if (kkt < opt.kkt_tol) ++streak;
      else streak = 0;
      // one-sided constraints also need complementary slackness: a stationary
      // point of the augmented model with t past the target but a still-active
      // multiplier is an artifact of the current (lam, rho), not a solution
      bool comp_ok = true;
      if (wp.mode == ConstraintMode::Inequality && t - wp.r_t > opt.feas_tol)
        comp_ok = std::max(0.0, lam + rho * (wp.r_t - t)) <= opt.feas_tol;
      if (streak >= opt.kkt_streak && viol <= opt.feas_tol && comp_ok) {
        converged = true;
        break;
      }
      if (streak >= opt.kkt_streak) break;  // stationary for this rho; go update multipliers
    }
    double t = wp.t_value(x);
    double viol = wp.mode == ConstraintMode::Inequality ? std::max(0.0, wp.r_t - t)
                                                        : std::fabs(t - wp.r_t);
    if (converged) break;
    if (wp.mode == ConstraintMode::Inequality) lam = std::max(0.0, lam + rho * (wp.r_t - t));
    else lam = lam + rho * (t - wp.r_t);
    if (viol > 0.25 * prev_viol && rho < rho_cap) rho *= 3.0;
    prev_viol = viol;
    // At block-constant points the density gradient is parallel to the mass
    // direction, so the projected gradient vanishes identically while the
    // constraint stays violated, and no multiplier or penalty can move the
    // iterate. Detect rounds where the point is literally frozen with a
    // macroscopic violation and break the symmetry by hand, which restores a
    // usable descent direction at second order.
    double dx_round = 0;
    for (std::size_t c = 0; c < x.size(); ++c)
      dx_round = std::max(dx_round, std::fabs(x[c] - x_round[c]));
    x_round = x;
    if (streak >= opt.kkt_streak && dx_round < 1e-9 &&
        viol > std::max(1e3 * opt.feas_tol, 1e-4))
      ++stalls;
    else
      stalls = 0;
    if (stalls >= 2) {
      stalls = 0;
      ++kicks;
      // bump a seeded subset of blocks; the start fingerprint varies the
      // escape across restarts, the kick counter varies it across retries
      Rng kr(h0 + 0x9e3779b97f4a7c15ULL * (std::uint64_t)kicks, "alkick");
      double delta = 0.02 * kicks;
      std::vector<char> in((std::size_t)wp.k, 0);
      int cnt = 0;
      for (int a = 0; a < wp.k; ++a) {
        in[a] = (char)(kr.next_u64() & 1);
        cnt += in[a];
      }
      if (cnt == 0 || cnt == wp.k)
        for (int a = 0; a < wp.k; ++a) in[a] = a < (wp.k + 1) / 2;
      for (int a = 0; a < wp.k; ++a)
        for (int b = a; b < wp.k; ++b) {
          std::size_t c = wp.cell(a, b);
          if (in[a] && in[b] && !wp.pinned[c]) x[c] = x[wp.cell(b, a)] = x[c] + delta;
        }
      wp.project(x);
      streak = 0;
    }
  }
  double t = wp.t_value(x);
  double viol = wp.mode == ConstraintMode::Inequality ? std::max(0.0, wp.r_t - t)
                                                      : std::fabs(t - wp.r_t);
  out.x = std::move(x);
  out.obj = wp.objective(out.x);
  out.value = wp.entropy ? -out.obj : out.obj;
  out.t_res = t - wp.r_t;
  out.kkt = kkt;
  out.iters = used;
  out.feasible = viol <= opt.feas_tol;
  if (converged) out.status = SolveStatus::Converged;
  else if (!out.feasible) out.status = SolveStatus::Infeasible;
  else out.status = SolveStatus::MaxIter;
  return out;
}

inline std::vector<std::vector<double>> build_starts(const WorkProblem& wp, const SolverOptions& opt) {
  int k = wp.k;
  double kappa = (double)wp.motif.edge_count();
  std::vector<std::vector<double>> starts;
  auto full = [&](double v) {
    std::vector<double> x((std::size_t)k * k, v);
    return x;
  };
  for (const StepGraphon& warm : opt.warm_starts) {
    if (warm.blocks() == k) starts.push_back(warm.values);
  }
  double free_measure = 0;
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b)
      if (!wp.pinned[wp.cell(a, b)]) free_measure += wp.mu[wp.cell(a, b)];
  double flat = wp.has_mass ? wp.mass_target / free_measure : wp.p_ref;
  starts.push_back(full(std::clamp(flat, 0.0, 1.0)));
  starts.push_back(full(std::clamp(std::pow(std::max(wp.r_t, 0.0), 1.0 / kappa), 0.0, 1.0)));
  // clique-plus-sea family at a range of clique masses
  for (int j = 2; j <= 9; ++j) {
    int u = std::max(1, (int)std::lround((double)k * j / 16.0));
    if (u >= k) continue;
    std::vector<double> x = full(0.0);
    double clique_mass = 0, rest = 0;
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) {
        std::size_t c = wp.cell(a, b);
        if (wp.pinned[c]) continue;
        if (a < u && b < u) clique_mass += wp.mu[c];
        else rest += wp.mu[c];
      }
    double sea = wp.has_mass ? std::clamp((wp.mass_target - clique_mass) / std::max(rest, 1e-300), 0.0, 1.0)
                             : 0.2;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) x[wp.cell(a, b)] = (a < u && b < u) ? 1.0 : sea;
    starts.push_back(std::move(x));
  }
  // smooth rank-one bumps around the flat level
  int idx = 0;
  for (double amp : {0.35, -0.35, 0.5, -0.2}) {
    std::vector<double> x = full(0.0);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        double va = (idx % 2 == 0) ? std::cos(3.14159265358979 * (a + 0.5) / k)
                                   : 2.0 * (a + 0.5) / k - 1.0;
        double vb = (idx % 2 == 0) ? std::cos(3.14159265358979 * (b + 0.5) / k)
                                   : 2.0 * (b + 0.5) / k - 1.0;
        x[wp.cell(a, b)] = std::clamp(flat + amp * va * vb, 0.0, 1.0);
      }
    starts.push_back(std::move(x));
    ++idx;
  }
  while ((int)starts.size() < (int)opt.warm_starts.size() + opt.restarts) {
    Rng rng(opt.seed, "start/" + std::to_string(starts.size()));
    std::vector<double> x((std::size_t)k * k, 0.0);
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) {
        double v = rng.uniform01();
        x[wp.cell(a, b)] = x[wp.cell(b, a)] = v;
      }
    starts.push_back(std::move(x));
  }
  return starts;
}

// merge blocks whose rows agree within tol everywhere; weights add, values
// are measure-weighted averages
inline StepGraphon merge_blocks(const StepGraphon& g, double tol) {
  int k = g.blocks();
  std::vector<int> group(k, -1);
  int ng = 0;
  for (int a = 0; a < k; ++a) {
    if (group[a] >= 0) continue;
    group[a] = ng;
    for (int b = a + 1; b < k; ++b) {
      if (group[b] >= 0) continue;
      bool same = std::fabs(g.at(a, a) - g.at(b, b)) <= tol && std::fabs(g.at(a, b) - g.at(a, a)) <= tol;
      for (int c = 0; c < k && same; ++c) {
        if (c == a || c == b) continue;
        if (std::fabs(g.at(a, c) - g.at(b, c)) > tol) same = false;
      }
      if (same) group[b] = ng;
    }
    ++ng;
  }
  StepGraphon out;
  out.weights.assign(ng, 0.0);
  out.values.assign((std::size_t)ng * ng, 0.0);
  for (int a = 0; a < k; ++a) out.weights[group[a]] += g.weights[a];
  std::vector<double> norm((std::size_t)ng * ng, 0.0);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      double m = g.weights[a] * g.weights[b];
      out.values[(std::size_t)group[a] * ng + group[b]] += m * g.at(a, b);
      norm[(std::size_t)group[a] * ng + group[b]] += m;
    }
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] /= norm[i];
  return out;
}

inline StepGraphon canonical_sort(const StepGraphon& g) {
  int k = g.blocks();
  std::vector<int> ord(k);
  std::iota(ord.begin(), ord.end(), 0);
  std::vector<double> deg(k, 0.0);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) deg[a] += g.weights[b] * g.at(a, b);
  std::stable_sort(ord.begin(), ord.end(), [&](int x, int y) {
    if (std::fabs(deg[x] - deg[y]) > 1e-12) return deg[x] > deg[y];
    if (std::fabs(g.weights[x] - g.weights[y]) > 1e-12) return g.weights[x] > g.weights[y];
    for (int c = 0; c < k; ++c)
      if (std::fabs(g.at(x, c) - g.at(y, c)) > 1e-12) return g.at(x, c) > g.at(y, c);
    return false;
  });
  StepGraphon out;
  out.weights.resize(k);
  out.values.resize((std::size_t)k * k);
  for (int a = 0; a < k; ++a) {
    out.weights[a] = g.weights[ord[a]];
    for (int b = 0; b < k; ++b) out.values[(std::size_t)a * k + b] = g.at(ord[a], ord[b]);
  }
  return out;
}

}  // namespace detail

inline SolveResult solve(const ProblemSpec& spec, const SolverOptions& opt = {}) {
  detail::WorkProblem wp = detail::make_work(spec);
  // the t constraint can never bind above the box maximum; detect upfront
  {
    std::vector<double> ones((std::size_t)wp.k * wp.k, 1.0);
    for (int a = 0; a < wp.k; ++a)
      for (int b = 0; b < wp.k; ++b)
        if (wp.pinned[wp.cell(a, b)]) ones[wp.cell(a, b)] = 0.0;
    if (!wp.has_mass && wp.t_value(ones) < wp.r_t - 1e-12) {
      SolveResult res;
      res.status = SolveStatus::Infeasible;
      res.optimizer = wp.wrap(ones);
      res.mesh = res.optimizer;
      res.value = wp.entropy ? -wp.objective(ones) : wp.objective(ones);
      res.t_residual = wp.t_value(ones) - wp.r_t;
      return res;
    }
  }
  std::vector<std::vector<double>> starts = detail::build_starts(wp, opt);
  std::vector<detail::RestartOutcome> outs(starts.size());
  parallel_chunks(starts.size(), [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t i = lo; i < hi; ++i) outs[i] = detail::run_restart(wp, starts[i], opt);
  });

  SolveResult res;
  long long total_iters = 0;
  for (const auto& o : outs) {
    total_iters += o.iters;
    res.restarts.push_back({o.value, o.t_res, o.kkt, o.status});
  }
  res.iterations = total_iters;

  // deterministic reduction: feasible-and-converged first, then feasible;
  // value ties broken by fewer merged blocks, then lexicographic values
  auto better = [&](const detail::RestartOutcome& a, const detail::RestartOutcome& b) {
    if (a.feasible != b.feasible) return a.feasible;
    bool ca = a.status == SolveStatus::Converged, cb = b.status == SolveStatus::Converged;
    if (a.feasible) {
      if (std::fabs(a.obj - b.obj) > 1e-8) return a.obj < b.obj;
      if (ca != cb) return ca;
      int ba = detail::merge_blocks(wp.wrap(a.x), 1e-6).blocks(),
          bb = detail::merge_blocks(wp.wrap(b.x), 1e-6).blocks();
      if (ba != bb) return ba < bb;
      return a.x < b.x;
    }
    // both infeasible: least violation
    return std::fabs(a.t_res) < std::fabs(b.t_res);
  };
  std::size_t win = 0;
  for (std::size_t i = 1; i < outs.size(); ++i)
    if (better(outs[i], outs[win])) win = i;
  detail::RestartOutcome w = outs[win];

  // Active inequality optima sit in a nearly flat valley where the one-sided
  // multiplier update can stall just short of the minimum; a pinned-constraint
  // polish from the winning point descends the valley floor when it helps.
  if (wp.mode == ConstraintMode::Inequality && w.feasible && std::fabs(w.t_res) <= 1e-3) {
    detail::WorkProblem wp_eq = wp;
    wp_eq.mode = ConstraintMode::Equality;
    // high initial penalty keeps the polish on the constraint surface instead
    // of letting the first subproblem slide into a different basin
    detail::RestartOutcome pol = detail::run_restart(wp_eq, w.x, opt, 0.0, 1e5);
    if (pol.feasible && pol.obj < w.obj - 1e-12) {
      total_iters += pol.iters;
      res.iterations = total_iters;
      w = pol;
    }
  }

  res.mesh = wp.wrap(w.x);
  StepGraphon merged = detail::canonical_sort(detail::merge_blocks(res.mesh, 1e-9));
  res.optimizer = merged;
  res.blocks_used = detail::merge_blocks(res.mesh, 1e-6).blocks();
  res.kkt_residual = w.kkt;
  res.status = w.status;
  // recompute everything on the returned optimizer so reported numbers are
  // reproducible from the artifact alone
  res.value = wp.entropy ? h_e_graphon(merged) : i_p_graphon(wp.p_ref, merged);
  res.t_residual = t_density(spec.motif, merged) - wp.r_t;
  res.mass_residual = wp.has_mass ? (edge_density(merged) - wp.mass_target) : 0.0;
  if (res.status == SolveStatus::Converged) {
    bool feas_ok = wp.mode == ConstraintMode::Inequality ? res.t_residual >= -opt.feas_tol
                                                         : std::fabs(res.t_residual) <= opt.feas_tol;
    if (!feas_ok || std::fabs(res.mass_residual) > 1e-9) res.status = SolveStatus::MaxIter;
  }
  return res;
}

inline SolveResult solve_phi(ProblemSpec spec, const SolverOptions& opt = {}) {
  spec.kind = ProblemKind::Phi;
  return solve(spec, opt);
}
inline SolveResult solve_psi(ProblemSpec spec, const SolverOptions& opt = {}) {
  spec.kind = ProblemKind::Psi;
  return solve(spec, opt);
}
inline SolveResult solve_f_entropy(ProblemSpec spec, const SolverOptions& opt = {}) {
  spec.kind = ProblemKind::FEntropy;
  return solve(spec, opt);
}
inline SolveResult solve_psi_hat(ProblemSpec spec, const SolverOptions& opt = {}) {
  spec.kind = ProblemKind::PsiHat;
  return solve(spec, opt);
}

// ---------------------------------------------------------------------------
// Warm-started sweep over an ascending r grid; solves the mass-constrained
// problem in both constraint modes plus the unconstrained-mass and entropy
// variants at every point.

struct CurvePoint {
  double r = 0;
  SolveResult psi;       // inequality mode
  SolveResult psi_eq;    // equality mode
  SolveResult phi;
  SolveResult f;
  bool eq_agree = false;
  double jump_from_prev = 0;
};

struct CurveResult {
  std::vector<CurvePoint> points;
  double r_feasible_max = -1;  // last grid r with a feasible mass-constrained solve
};

inline CurveResult psi_curve(const Motif& motif, double p, const std::vector<double>& r_grid,
                             int blocks, const SolverOptions& opt = {}) {
  for (std::size_t i = 1; i < r_grid.size(); ++i)
    if (r_grid[i] <= r_grid[i - 1]) throw DomainError("psi_curve: grid must ascend");
  CurveResult curve;
  StepGraphon prev_mesh;
  bool have_prev = false;
  for (double r : r_grid) {
    ProblemSpec ps;
    ps.motif = motif;
    ps.p = p;
    ps.r = r;
    ps.blocks = blocks;
    CurvePoint pt;
    pt.r = r;
    SolverOptions o = opt;
    if (have_prev) o.warm_starts.insert(o.warm_starts.begin(), prev_mesh);
    ps.kind = ProblemKind::Psi;
    ps.mode = ConstraintMode::Inequality;
    pt.psi = solve(ps, o);
    if (pt.psi.status != SolveStatus::Infeasible) {
      prev_mesh = pt.psi.mesh;
      have_prev = true;
      curve.r_feasible_max = r;
    }
    SolverOptions o2 = opt;
    o2.warm_starts.insert(o2.warm_starts.begin(), pt.psi.mesh);
    ps.mode = ConstraintMode::Equality;
    pt.psi_eq = solve(ps, o2);
    ps.mode = ConstraintMode::Inequality;
    ps.kind = ProblemKind::Phi;
    pt.phi = solve(ps, o2);
    ps.kind = ProblemKind::FEntropy;
    ps.mode = ConstraintMode::Equality;  // the entropy problem pins t exactly
    pt.f = solve(ps, o2);
    pt.eq_agree = pt.psi.status == SolveStatus::Converged && pt.psi_eq.status == SolveStatus::Converged &&
                  std::fabs(pt.psi.value - pt.psi_eq.value) <= 1e-6;
    pt.jump_from_prev = curve.points.empty() ? 0.0 : pt.psi.value - curve.points.back().psi.value;
    curve.points.push_back(std::move(pt));
  }
  return curve;
}

}  // namespace graphldp
