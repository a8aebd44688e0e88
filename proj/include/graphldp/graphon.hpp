#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace graphldp {

// ---------------------------------------------------------------------------
// Step graphon: symmetric block-constant function on [0,1]^2 with block
// masses w (positive, summing to 1) and values in [0,1].

struct StepGraphon {
  std::vector<double> weights;
  std::vector<double> values;  // k*k row-major, symmetric

  int blocks() const { return (int)weights.size(); }
  double at(int a, int b) const { return values[(std::size_t)a * weights.size() + b]; }
  void set(int a, int b, double v) {
    values[(std::size_t)a * weights.size() + b] = v;
    values[(std::size_t)b * weights.size() + a] = v;
  }

  static StepGraphon constant(double p, int k = 1) {
    StepGraphon w;
    w.weights.assign(k, 1.0 / k);
    w.values.assign((std::size_t)k * k, p);
    return w;
  }

  void validate() const {
    int k = blocks();
    if (k == 0 || values.size() != (std::size_t)k * k)
      throw DomainError("StepGraphon: shape mismatch");
    double s = 0;
    for (double w : weights) {
      if (!(w > 0)) throw DomainError("StepGraphon: weights must be positive");
      s += w;
    }
    if (std::fabs(s - 1.0) > 1e-9) throw DomainError("StepGraphon: weights must sum to 1");
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        double v = at(a, b);
        if (!(v >= -1e-12 && v <= 1.0 + 1e-12)) throw DomainError("StepGraphon: values outside [0,1]");
        if (std::fabs(v - at(b, a)) > 1e-12) throw DomainError("StepGraphon: not symmetric");
      }
  }
};

// Signed step kernel (difference of graphons lives here); values in [-1,1].
struct StepKernel {
  std::vector<double> weights;
  std::vector<double> values;
  int blocks() const { return (int)weights.size(); }
  double at(int a, int b) const { return values[(std::size_t)a * weights.size() + b]; }
};

// ---------------------------------------------------------------------------
// Finite simple graph with bitset adjacency rows.

struct FiniteGraph {
  int n = 0;
  int words = 0;
  std::vector<std::uint64_t> adj;  // n rows of `words` 64-bit words
  long long edge_count = 0;

  explicit FiniteGraph(int n_ = 0) : n(n_), words((n_ + 63) / 64), adj((std::size_t)n_ * ((n_ + 63) / 64), 0) {}

  const std::uint64_t* row(int u) const { return adj.data() + (std::size_t)u * words; }
  std::uint64_t* row(int u) { return adj.data() + (std::size_t)u * words; }

  bool has_edge(int u, int v) const { return (row(u)[v >> 6] >> (v & 63)) & 1u; }

  void add_edge(int u, int v) {
    if (u == v) throw DomainError("FiniteGraph: no loops");
    if (has_edge(u, v)) return;
    row(u)[v >> 6] |= 1ULL << (v & 63);
    row(v)[u >> 6] |= 1ULL << (u & 63);
    ++edge_count;
  }

  void remove_edge(int u, int v) {
    if (!has_edge(u, v)) return;
    row(u)[v >> 6] &= ~(1ULL << (v & 63));
    row(v)[u >> 6] &= ~(1ULL << (u & 63));
    --edge_count;
  }

  int degree(int u) const {
    int d = 0;
    for (int w = 0; w < words; ++w) d += std::popcount(row(u)[w]);
    return d;
  }

  int common_neighbors(int u, int v) const {
    int c = 0;
    const std::uint64_t *ru = row(u), *rv = row(v);
    for (int w = 0; w < words; ++w) c += std::popcount(ru[w] & rv[w]);
    return c;
  }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> e;
    e.reserve((std::size_t)edge_count);
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (has_edge(u, v)) e.emplace_back(u, v);
    return e;
  }

  static FiniteGraph complete(int n) {
    FiniteGraph g(n);
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) g.add_edge(u, v);
    return g;
  }
};

// ---------------------------------------------------------------------------
// Motif: small connected simple graph whose homomorphism density we track.

struct Motif {
  int vertices = 0;
  std::vector<std::pair<int, int>> edges;
  std::string name;

  int edge_count() const { return (int)edges.size(); }

  static Motif from_edges(int k, std::vector<std::pair<int, int>> e, std::string label = "custom") {
    Motif m;
    m.vertices = k;
    m.name = std::move(label);
    if (k < 2) throw DomainError("Motif: need at least 2 vertices");
    std::vector<std::vector<char>> seen(k, std::vector<char>(k, 0));
    for (auto& [u, v] : e) {
      if (u == v) throw DomainError("Motif: loops not allowed");
      if (u < 0 || v < 0 || u >= k || v >= k) throw DomainError("Motif: vertex out of range");
      if (u > v) std::swap(u, v);
      if (seen[u][v]) throw DomainError("Motif: duplicate edge");
      seen[u][v] = 1;
    }
    std::sort(e.begin(), e.end());
    m.edges = std::move(e);
    // connectivity
    std::vector<int> stack{0}, mark(k, 0);
    mark[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (auto [a, b] : m.edges) {
        int other = (a == u) ? b : (b == u ? a : -1);
        if (other >= 0 && !mark[other]) {
          mark[other] = 1;
          ++reached;
          stack.push_back(other);
        }
      }
    }
    if (reached != k) throw DomainError("Motif: must be connected");
    return m;
  }

  static Motif edge() { return from_edges(2, {{0, 1}}, "edge"); }
  static Motif triangle() { return cycle(3); }
  static Motif cycle(int len) {
    if (len < 3) throw DomainError("Motif: cycle length >= 3");
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < len; ++i) e.emplace_back(i, (i + 1) % len);
    return from_edges(len, std::move(e), len == 3 ? "triangle" : "c" + std::to_string(len));
  }
  static Motif clique(int k) {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < k; ++u)
      for (int v = u + 1; v < k; ++v) e.emplace_back(u, v);
    return from_edges(k, std::move(e), "k" + std::to_string(k));
  }

  // Cycle detection (every vertex degree 2, connected, k edges = k vertices).
  bool is_cycle() const {
    if ((int)edges.size() != vertices) return false;
    std::vector<int> deg(vertices, 0);
    for (auto [u, v] : edges) ++deg[u], ++deg[v];
    return std::all_of(deg.begin(), deg.end(), [](int d) { return d == 2; });
  }

  // Visit order for assignment enumeration: each vertex after the first has
  // at least one earlier neighbor (H is connected so this exists).
  std::vector<int> connected_order() const {
    std::vector<int> order{0}, placed(vertices, 0);
    placed[0] = 1;
    while ((int)order.size() < vertices) {
      for (int v = 0; v < vertices; ++v) {
        if (placed[v]) continue;
        bool linked = false;
        for (auto [a, b] : edges)
          if ((a == v && placed[b]) || (b == v && placed[a])) linked = true;
        if (linked) {
          placed[v] = 1;
          order.push_back(v);
          break;
        }
      }
    }
    return order;
  }
};

// ---------------------------------------------------------------------------
// Densities.

inline double edge_density(const StepGraphon& w) {
  double s = 0;
  int k = w.blocks();
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) s += w.weights[a] * w.weights[b] * w.at(a, b);
  return s;
}

inline double edge_density(const FiniteGraph& g) {
  if (g.n == 0) return 0;
  return 2.0 * (double)g.edge_count / ((double)g.n * g.n);
}

namespace detail {

// k x k matrix product, row-major.
inline void matmul(const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& out, int k) {
  out.assign((std::size_t)k * k, 0.0);
  for (int i = 0; i < k; ++i)
    for (int l = 0; l < k; ++l) {
      double ail = a[(std::size_t)i * k + l];
      if (ail == 0.0) continue;
      const double* brow = b.data() + (std::size_t)l * k;
      double* orow = out.data() + (std::size_t)i * k;
      for (int j = 0; j < k; ++j) orow[j] += ail * brow[j];
    }
}

// (D X) with D = diag(weights).
inline std::vector<double> weight_scaled(const StepGraphon& w) {
  int k = w.blocks();
  std::vector<double> m((std::size_t)k * k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) m[(std::size_t)a * k + b] = w.weights[a] * w.at(a, b);
  return m;
}

inline double t_cycle(const Motif& h, const StepGraphon& w) {
  int k = w.blocks(), len = h.vertices;
  std::vector<double> dx = weight_scaled(w), acc = dx, tmp;
  for (int i = 1; i < len; ++i) {
    matmul(acc, dx, tmp, k);
    acc.swap(tmp);
  }
  double tr = 0;
  for (int a = 0; a < k; ++a) tr += acc[(std::size_t)a * k + a];
  return tr;
}

inline double t_generic(const Motif& h, const StepGraphon& w) {
  int k = w.blocks();
  std::vector<int> order = h.connected_order();
  // edges incident to order[i] whose other end appears earlier in the order
  std::vector<int> pos(h.vertices);
  for (int i = 0; i < h.vertices; ++i) pos[order[i]] = i;
  std::vector<std::vector<int>> back(h.vertices);
  for (auto [u, v] : h.edges) {
    int pu = pos[u], pv = pos[v];
    if (pu > pv) back[pu].push_back(order[pv]);
    else back[pv].push_back(order[pu]);
  }
  std::vector<int> assign(h.vertices, -1);
  double total = 0;
  // iterative DFS over assignments with running product
  std::vector<double> prefix(h.vertices + 1);
  prefix[0] = 1.0;
  std::vector<int> cursor(h.vertices, 0);
  int depth = 0;
  while (depth >= 0) {
    if (depth == h.vertices) {
      total += prefix[depth];
      --depth;
      continue;
    }
    int b = cursor[depth];
    if (b == k) {
      cursor[depth] = 0;
      --depth;
      continue;
    }
    ++cursor[depth];
    int hv = order[depth];
    assign[hv] = b;
    double f = w.weights[b];
    for (int prev : back[depth]) f *= w.at(assign[prev], b);
    if (f == 0.0) continue;
    prefix[depth + 1] = prefix[depth] * f;
    ++depth;
  }
  return total;
}

}  // namespace detail

// Homomorphism density t_H(W) for a step graphon.
inline double t_density(const Motif& h, const StepGraphon& w) {
  if (h.vertices == 2) return edge_density(w);
  if (h.is_cycle()) return detail::t_cycle(h, w);
  return detail::t_generic(h, w);
}

// Exact homomorphism count hom(H, G) over all n^{k_H} maps.
inline unsigned long long hom_count(const Motif& h, const FiniteGraph& g) {
  int n = g.n;
  if (n == 0) return 0;
  if ((double)h.vertices * std::log2((double)n) > 62.0)
    throw std::overflow_error("hom_count: n^k exceeds 64-bit range");
  if (h.vertices == 2) return 2ULL * (unsigned long long)g.edge_count;
  if (h.is_cycle() && h.vertices == 3) {
    unsigned long long paths = 0;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (g.has_edge(u, v)) paths += (unsigned long long)g.common_neighbors(u, v);
    return 2ULL * paths;  // each triangle hits 3 edges; hom = 6 * triangles
  }
  std::vector<int> order = h.connected_order();
  std::vector<int> pos(h.vertices);
  for (int i = 0; i < h.vertices; ++i) pos[order[i]] = i;
  std::vector<std::vector<int>> back(h.vertices);
  for (auto [u, v] : h.edges) {
    int pu = pos[u], pv = pos[v];
    if (pu > pv) back[pu].push_back(pv);
    else back[pv].push_back(pu);
  }
  int words = g.words;
  std::vector<std::uint64_t> masks((std::size_t)h.vertices * words);
  std::vector<int> choice(h.vertices, -1);
  unsigned long long total = 0;
  int depth = 0;
  std::vector<int> cursor(h.vertices, 0);
  auto candidate_mask = [&](int d, std::uint64_t* out) {
    // intersection of adjacency rows of earlier-assigned neighbors; full set if none
    if (back[d].empty()) {
      for (int w = 0; w < words; ++w) out[w] = ~0ULL;
      if (n & 63) out[words - 1] = (~0ULL) >> (64 - (n & 63));
      return;
    }
    const std::uint64_t* first = g.row(choice[back[d][0]]);
    for (int w = 0; w < words; ++w) out[w] = first[w];
    for (std::size_t i = 1; i < back[d].size(); ++i) {
      const std::uint64_t* r = g.row(choice[back[d][i]]);
      for (int w = 0; w < words; ++w) out[w] &= r[w];
    }
  };
  candidate_mask(0, masks.data());
  while (depth >= 0) {
    std::uint64_t* mask = masks.data() + (std::size_t)depth * words;
    if (depth == h.vertices - 1) {
      int c = 0;
      for (int w = 0; w < words; ++w) c += std::popcount(mask[w]);
      total += (unsigned long long)c;
      --depth;
      continue;
    }
    // advance cursor to next set bit at this depth
    int v = -1;
    for (int w = cursor[depth] >> 6; w < words; ++w) {
      std::uint64_t bits = mask[w];
      if (w == cursor[depth] >> 6) bits &= ~0ULL << (cursor[depth] & 63);
      if (bits) {
        v = (w << 6) + std::countr_zero(bits);
        break;
      }
    }
    if (v < 0 || v >= n) {
      cursor[depth] = 0;
      --depth;
      continue;
    }
    cursor[depth] = v + 1;
    choice[depth] = v;
    ++depth;
    cursor[depth] = 0;
    candidate_mask(depth, masks.data() + (std::size_t)depth * words);
  }
  return total;
}

// t_H(G) = hom(H, G) / n^{k_H}.
inline double t_density_graph(const Motif& h, const FiniteGraph& g) {
  if (g.n == 0) throw DomainError("t_density_graph: empty graph");
  return (double)hom_count(h, g) / std::pow((double)g.n, (double)h.vertices);
}

// Embedding W_G: n equal blocks, 0/1 values, zero diagonal.
inline StepGraphon embed(const FiniteGraph& g) {
  if (g.n == 0) throw DomainError("embed: empty graph");
  StepGraphon w;
  w.weights.assign(g.n, 1.0 / g.n);
  w.values.assign((std::size_t)g.n * g.n, 0.0);
  for (int u = 0; u < g.n; ++u)
    for (int v = 0; v < g.n; ++v)
      if (u != v && g.has_edge(u, v)) w.values[(std::size_t)u * g.n + v] = 1.0;
  return w;
}

// ---------------------------------------------------------------------------
// Gradient of t_H with respect to the free cells x_ab (a <= b); the returned
// matrix is stored full-symmetric with entry (a,b) = dt/dx_ab for the single
// free parameter controlling both (a,b) and (b,a).

inline std::vector<double> t_gradient(const Motif& h, const StepGraphon& w) {
  int k = w.blocks();
  std::vector<double> grad((std::size_t)k * k, 0.0);
  if (h.vertices == 2) {
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) grad[(std::size_t)a * k + b] = (a == b ? 1.0 : 2.0) * w.weights[a] * w.weights[b];
    return grad;
  }
  if (h.is_cycle()) {
    int len = h.vertices;
    // dt/dx_uv = (2 - [u==v]) * len * w_u w_v (X (D X)^{len-2})_{uv}
    std::vector<double> dx = detail::weight_scaled(w), acc, tmp;
    acc = dx;
    for (int i = 2; i < len; ++i) {
      detail::matmul(acc, dx, tmp, k);
      acc.swap(tmp);
    }  // acc = (D X)^{len-1}; we need X (D X)^{len-2} = D^{-1} (D X)^{len-1}
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        double m = acc[(std::size_t)a * k + b] / w.weights[a];
        grad[(std::size_t)a * k + b] = (a == b ? 1.0 : 2.0) * (double)len * w.weights[a] * w.weights[b] * m;
      }
    return grad;
  }
  // generic: enumerate assignments once; for each, distribute the product of
  // all-but-one edge factor onto that edge's cell via prefix/suffix products
  std::vector<int> order = h.connected_order();
  int ne = h.edge_count();
  std::vector<int> assign(h.vertices, -1), cursor(h.vertices, 0);
  std::vector<double> wprefix(h.vertices + 1);
  wprefix[0] = 1.0;
  std::vector<double> efac(ne), pre(ne + 1), suf(ne + 1);
  int depth = 0;
  while (depth >= 0) {
    if (depth == h.vertices) {
      double wprod = wprefix[depth];
      if (wprod != 0.0) {
        for (int e = 0; e < ne; ++e) efac[e] = w.at(assign[h.edges[e].first], assign[h.edges[e].second]);
        pre[0] = 1.0;
        for (int e = 0; e < ne; ++e) pre[e + 1] = pre[e] * efac[e];
        suf[ne] = 1.0;
        for (int e = ne - 1; e >= 0; --e) suf[e] = suf[e + 1] * efac[e];
        for (int e = 0; e < ne; ++e) {
          int a = assign[h.edges[e].first], b = assign[h.edges[e].second];
          grad[(std::size_t)a * k + b] += wprod * pre[e] * suf[e + 1];
        }
      }
      --depth;
      continue;
    }
    int b = cursor[depth];
    if (b == k) {
      cursor[depth] = 0;
      --depth;
      continue;
    }
    ++cursor[depth];
    assign[order[depth]] = b;
    wprefix[depth + 1] = wprefix[depth] * w.weights[b];
    ++depth;
  }
  // fold (a,b) and (b,a) contributions onto the shared free parameter
  std::vector<double> out((std::size_t)k * k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      out[(std::size_t)a * k + b] = (a == b) ? grad[(std::size_t)a * k + a]
                                             : grad[(std::size_t)a * k + b] + grad[(std::size_t)b * k + a];
  return out;
}

// ---------------------------------------------------------------------------
// Cut norm of a signed step kernel.

struct CutNormResult {
  double value = 0;
  bool exact = false;
  std::vector<int> s, t;  // witness block sets
};

struct CutNormOptions {
  int exact_max_blocks = 22;
  int restarts = 50;
  std::uint64_t seed = 0x5eedbea7ULL;
};

namespace detail {

// Exact scan: Gray-code walk over row subsets S; for each S the best T is
// read off the sign pattern of the column sums.
inline CutNormResult cut_norm_exact(const std::vector<double>& r, int k) {
  std::uint64_t total = 1ULL << k;
  struct Best { double v = 0; std::uint64_t mask = 0; bool tpos = true; };
  std::vector<Best> best(16);
  parallel_chunks((std::size_t)total, [&](std::size_t lo, std::size_t hi, std::size_t chunk) {
    std::vector<double> c(k, 0.0);
    std::uint64_t mask0 = (std::uint64_t)lo ^ ((std::uint64_t)lo >> 1);
    for (int a = 0; a < k; ++a)
      if ((mask0 >> a) & 1)
        for (int b = 0; b < k; ++b) c[b] += r[(std::size_t)a * k + b];
    Best loc;
    auto consider = [&](std::uint64_t mask) {
      double vp = 0, vn = 0;
      for (int b = 0; b < k; ++b) {
        if (c[b] > 0) vp += c[b];
        else vn -= c[b];
      }
      if (vp > loc.v) loc = {vp, mask, true};
      if (vn > loc.v) loc = {vn, mask, false};
    };
    consider(mask0);
    for (std::uint64_t g = lo + 1; g < hi; ++g) {
      int j = std::countr_zero(g);
      std::uint64_t mask = g ^ (g >> 1);
      double sign = ((mask >> j) & 1) ? 1.0 : -1.0;
      for (int b = 0; b < k; ++b) c[b] += sign * r[(std::size_t)j * k + b];
      consider(mask);
    }
    best[chunk] = loc;
  });
  Best win;
  for (const auto& b : best)
    if (b.v > win.v) win = b;
  CutNormResult res;
  res.value = win.v;
  res.exact = true;
  std::vector<double> c(k, 0.0);
  for (int a = 0; a < k; ++a)
    if ((win.mask >> a) & 1) {
      res.s.push_back(a);
      for (int b = 0; b < k; ++b) c[b] += r[(std::size_t)a * k + b];
    }
  for (int b = 0; b < k; ++b)
    if (win.tpos ? c[b] > 0 : c[b] < 0) res.t.push_back(b);
  return res;
}

inline CutNormResult cut_norm_heuristic(const std::vector<double>& r, int k, const CutNormOptions& opt) {
  CutNormResult best;
  std::vector<char> s(k), t(k);
  std::vector<double> c(k), d(k);
  for (int restart = 0; restart < opt.restarts; ++restart) {
    Rng rng(opt.seed, "cutnorm/" + std::to_string(restart));
    for (double sign : {1.0, -1.0}) {
      for (int a = 0; a < k; ++a) s[a] = restart == 0 ? 1 : (rng.next_u64() & 1);
      double prev = -1;
      for (int sweep = 0; sweep < 200; ++sweep) {
        std::fill(c.begin(), c.end(), 0.0);
        for (int a = 0; a < k; ++a)
          if (s[a])
            for (int b = 0; b < k; ++b) c[b] += sign * r[(std::size_t)a * k + b];
        double val = 0;
        for (int b = 0; b < k; ++b) {
          t[b] = c[b] > 0;
          if (t[b]) val += c[b];
        }
        std::fill(d.begin(), d.end(), 0.0);
        for (int b = 0; b < k; ++b)
          if (t[b])
            for (int a = 0; a < k; ++a) d[a] += sign * r[(std::size_t)a * k + b];
        for (int a = 0; a < k; ++a) s[a] = d[a] > 0;
        if (val <= prev + 1e-15) break;
        prev = val;
      }
      if (prev > best.value) {
        best.value = prev;
        best.s.clear();
        best.t.clear();
        for (int a = 0; a < k; ++a)
          if (s[a]) best.s.push_back(a);
        for (int b = 0; b < k; ++b)
          if (t[b]) best.t.push_back(b);
      }
    }
  }
  best.exact = false;
  return best;
}

}  // namespace detail

inline CutNormResult cut_norm(const StepKernel& ker, const CutNormOptions& opt = {}) {
  int k = ker.blocks();
  if (k == 0) throw DomainError("cut_norm: empty kernel");
  std::vector<double> r((std::size_t)k * k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) r[(std::size_t)a * k + b] = ker.weights[a] * ker.weights[b] * ker.at(a, b);
  if (k <= opt.exact_max_blocks) return detail::cut_norm_exact(r, k);
  return detail::cut_norm_heuristic(r, k, opt);
}

// ---------------------------------------------------------------------------
// Common refinements and L1 distance.

namespace detail {

inline std::vector<double> boundaries(const StepGraphon& w) {
  std::vector<double> b{0.0};
  double acc = 0;
  for (double x : w.weights) {
    acc += x;
    b.push_back(acc);
  }
  b.back() = 1.0;
  return b;
}

inline std::vector<double> merged_boundaries(const StepGraphon& w1, const StepGraphon& w2) {
  std::vector<double> b = boundaries(w1), b2 = boundaries(w2);
  b.insert(b.end(), b2.begin(), b2.end());
  std::sort(b.begin(), b.end());
  std::vector<double> out;
  for (double x : b)
    if (out.empty() || x - out.back() > 1e-12) out.push_back(x);
  return out;
}

// index of the block of w containing position x
inline int block_of(const StepGraphon& w, double x) {
  double acc = 0;
  for (int a = 0; a < w.blocks(); ++a) {
    acc += w.weights[a];
    if (x < acc) return a;
  }
  return w.blocks() - 1;
}

}  // namespace detail

inline StepKernel difference_kernel(const StepGraphon& w1, const StepGraphon& w2) {
  std::vector<double> b = detail::merged_boundaries(w1, w2);
  int m = (int)b.size() - 1;
  StepKernel ker;
  ker.weights.resize(m);
  ker.values.resize((std::size_t)m * m);
  std::vector<int> i1(m), i2(m);
  for (int i = 0; i < m; ++i) {
    ker.weights[i] = b[i + 1] - b[i];
    double mid = 0.5 * (b[i] + b[i + 1]);
    i1[i] = detail::block_of(w1, mid);
    i2[i] = detail::block_of(w2, mid);
  }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      ker.values[(std::size_t)i * m + j] = w1.at(i1[i], i1[j]) - w2.at(i2[i], i2[j]);
  return ker;
}

inline double l1_distance(const StepGraphon& w1, const StepGraphon& w2) {
  StepKernel d = difference_kernel(w1, w2);
  double s = 0;
  int m = d.blocks();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) s += d.weights[i] * d.weights[j] * std::fabs(d.at(i, j));
  return s;
}

// Refine to L equal-measure blocks; valid when every block boundary of w sits
// on the grid j/L (within tolerance).
inline std::vector<double> refine_equal(const StepGraphon& w, int L) {
  std::vector<double> m((std::size_t)L * L);
  std::vector<int> idx(L);
  for (int i = 0; i < L; ++i) idx[i] = detail::block_of(w, (i + 0.5) / L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) m[(std::size_t)i * L + j] = w.at(idx[i], idx[j]);
  return m;
}

// Average w over an L x L uniform grid (always valid; loses information when
// boundaries are off-grid).
inline std::vector<double> resample_grid(const StepGraphon& w, int L) {
  std::vector<double> b = detail::boundaries(w);
  // overlap lengths of grid cell i with each block
  std::vector<std::vector<std::pair<int, double>>> cover(L);
  for (int i = 0; i < L; ++i) {
    double lo = (double)i / L, hi = (double)(i + 1) / L;
    for (int a = 0; a < w.blocks(); ++a) {
      double s = std::max(lo, b[a]), e = std::min(hi, b[a + 1]);
      if (e > s + 1e-15) cover[i].emplace_back(a, (e - s) * L);
    }
  }
  std::vector<double> m((std::size_t)L * L, 0.0);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      double v = 0;
      for (auto [a, la] : cover[i])
        for (auto [c, lc] : cover[j]) v += la * lc * w.at(a, c);
      m[(std::size_t)i * L + j] = v;
    }
  return m;
}

// ---------------------------------------------------------------------------
// Cut distance: refine both graphons to a common equal-measure partition and
// minimize the cut norm of the difference over block permutations.  Exact
// search when the refined count is small, simulated annealing on an L2
// surrogate (plus swap polish) otherwise.  Always an upper bound on delta_box.

struct CutDistanceOptions {
  int refine_cap = 128;
  int exact_perm_cap = 8;
  int sa_restarts = 3;
  long sa_iters = 30000;
  bool resample_fallback = false;  // off-grid boundaries: average onto a fixed grid
  int resample_blocks = 64;
  std::uint64_t seed = 0x9c0ffeeULL;
  CutNormOptions cut;
};

struct CutDistanceResult {
  double value = 0;
  bool exact = false;
  int refined_blocks = 0;
  bool resampled = false;
};

namespace detail {

inline double perm_cut_norm(const std::vector<double>& a, const std::vector<double>& b,
                            const std::vector<int>& sigma, int L, const CutNormOptions& copt,
                            bool* exact_out = nullptr) {
  StepKernel ker;
  ker.weights.assign(L, 1.0 / L);
  ker.values.resize((std::size_t)L * L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j)
      ker.values[(std::size_t)i * L + j] = a[(std::size_t)i * L + j] - b[(std::size_t)sigma[i] * L + sigma[j]];
  CutNormResult r = cut_norm(ker, copt);
  if (exact_out) *exact_out = r.exact;
  return r.value;
}

inline double l2_cost(const std::vector<double>& a, const std::vector<double>& b,
                      const std::vector<int>& sigma, int L) {
  double s = 0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      double d = a[(std::size_t)i * L + j] - b[(std::size_t)sigma[i] * L + sigma[j]];
      s += d * d;
    }
  return s;
}

// squared-error contribution of the rows and columns indexed i or j
inline double l2_touch(const std::vector<double>& a, const std::vector<double>& b,
                       const std::vector<int>& sigma, int L, int i, int j) {
  double s = 0;
  for (int t = 0; t < L; ++t) {
    double d1 = a[(std::size_t)i * L + t] - b[(std::size_t)sigma[i] * L + sigma[t]];
    double d2 = a[(std::size_t)j * L + t] - b[(std::size_t)sigma[j] * L + sigma[t]];
    s += d1 * d1 + d2 * d2;
    if (t != i && t != j) {
      double d3 = a[(std::size_t)t * L + i] - b[(std::size_t)sigma[t] * L + sigma[i]];
      double d4 = a[(std::size_t)t * L + j] - b[(std::size_t)sigma[t] * L + sigma[j]];
      s += d3 * d3 + d4 * d4;
    }
  }
  return s;
}

// descending (row sum, lexicographic row) order; aligns graphons that are
// relabelings of each other before any search runs
inline std::vector<int> canonical_order(const std::vector<double>& m, int L) {
  std::vector<int> ord(L);
  std::iota(ord.begin(), ord.end(), 0);
  std::vector<double> rowsum(L, 0.0);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) rowsum[i] += m[(std::size_t)i * L + j];
  std::stable_sort(ord.begin(), ord.end(), [&](int x, int y) {
    if (std::fabs(rowsum[x] - rowsum[y]) > 1e-12) return rowsum[x] > rowsum[y];
    std::vector<double> rx(L), ry(L);
    for (int j = 0; j < L; ++j) rx[j] = m[(std::size_t)x * L + j], ry[j] = m[(std::size_t)y * L + j];
    std::sort(rx.begin(), rx.end());
    std::sort(ry.begin(), ry.end());
    return rx > ry;
  });
  return ord;
}

}  // namespace detail

inline CutDistanceResult cut_distance(const StepGraphon& w1, const StepGraphon& w2,
                                      const CutDistanceOptions& opt = {}) {
  std::vector<double> bnd = detail::merged_boundaries(w1, w2);
  int L = 0;
  for (int cand = 1; cand <= opt.refine_cap && L == 0; ++cand) {
    bool ok = true;
    for (double b : bnd) {
      double scaled = b * cand;
      if (std::fabs(scaled - std::llround(scaled)) > 1e-9 * cand) {
        ok = false;
        break;
      }
    }
    if (ok) L = cand;
  }
  CutDistanceResult res;
  std::vector<double> a, b;
  if (L > 0) {
    a = refine_equal(w1, L);
    b = refine_equal(w2, L);
  } else if (opt.resample_fallback) {
    L = opt.resample_blocks;
    a = resample_grid(w1, L);
    b = resample_grid(w2, L);
    res.resampled = true;
  } else {
    throw DomainError("cut_distance: common refinement exceeds block cap");
  }
  res.refined_blocks = L;

  std::vector<int> sigma(L);
  if (L <= opt.exact_perm_cap && !res.resampled) {
    std::iota(sigma.begin(), sigma.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> perm = sigma;
    bool all_exact = true;
    do {
      bool ex = false;
      double v = detail::perm_cut_norm(a, b, perm, L, opt.cut, &ex);
      all_exact = all_exact && ex;
      best = std::min(best, v);
    } while (std::next_permutation(perm.begin(), perm.end()));
    res.value = best;
    res.exact = all_exact;
    return res;
  }

  // canonical alignment, then annealed transpositions on the L2 surrogate
  std::vector<int> orda = detail::canonical_order(a, L), ordb = detail::canonical_order(b, L);
  std::vector<int> best_sigma(L);
  for (int i = 0; i < L; ++i) best_sigma[orda[i]] = ordb[i];
  double best_cost = detail::l2_cost(a, b, best_sigma, L);
  for (int restart = 0; restart < opt.sa_restarts && best_cost > 1e-18; ++restart) {
    Rng rng(opt.seed, "cutdist/" + std::to_string(restart));
    std::vector<int> cur = best_sigma;
    if (restart > 0)
      for (int i = L - 1; i > 0; --i) std::swap(cur[i], cur[rng.below((std::uint64_t)i + 1)]);
    double cost = detail::l2_cost(a, b, cur, L);
    double t0 = std::max(1e-6, cost / L);
    for (long it = 0; it < opt.sa_iters; ++it) {
      double temp = t0 * std::pow(1e-6, (double)it / (double)opt.sa_iters);
      int i = (int)rng.below(L), j = (int)rng.below(L);
      if (i == j) continue;
      double before = detail::l2_touch(a, b, cur, L, i, j);
      std::swap(cur[i], cur[j]);
      double cand = cost - before + detail::l2_touch(a, b, cur, L, i, j);
      if (cand <= cost || rng.uniform01() < std::exp((cost - cand) / std::max(temp, 1e-300))) {
        cost = cand;
        if (cost < best_cost) {
          best_cost = cost;
          best_sigma = cur;
        }
      } else {
        std::swap(cur[i], cur[j]);
      }
    }
  }
  // greedy swap polish
  bool improved = true;
  for (int pass = 0; pass < 50 && improved; ++pass) {
    improved = false;
    for (int i = 0; i < L; ++i)
      for (int j = i + 1; j < L; ++j) {
        double before = detail::l2_touch(a, b, best_sigma, L, i, j);
        std::swap(best_sigma[i], best_sigma[j]);
        double cand = best_cost - before + detail::l2_touch(a, b, best_sigma, L, i, j);
        if (cand < best_cost - 1e-15) {
          best_cost = cand;
          improved = true;
        } else {
          std::swap(best_sigma[i], best_sigma[j]);
        }
      }
  }
  best_cost = detail::l2_cost(a, b, best_sigma, L);  // refresh against drift
  res.value = detail::perm_cut_norm(a, b, best_sigma, L, opt.cut);
  res.exact = false;
  return res;
}

}  // namespace graphldp
