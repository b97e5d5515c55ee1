#include "plateau/integral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <stdexcept>

#include "plateau/hungarian.hpp"

namespace plateau {

namespace {

using EdgeList = std::vector<std::array<int, 2>>;

// Full Steiner topologies on t terminals (terminals 0..t-1, Steiner t..2t-3),
// built by inserting each new terminal into every edge.  (2t-5)!! of them.
std::vector<EdgeList> topologies_for(int t) {
  std::vector<EdgeList> cur = {{{0, 1}}};
  for (int m = 3; m <= t; ++m) {
    std::vector<EdgeList> nxt;
    for (const auto& topo : cur) {
      EdgeList shifted = topo;  // Steiner ids m-1.. become m..
      for (auto& e : shifted)
        for (int& v : e)
          if (v >= m - 1) ++v;
      for (size_t i = 0; i < shifted.size(); ++i) {
        EdgeList next = shifted;
        int snew = 2 * m - 3;
        auto [u, v] = next[i];
        next[i] = {u, snew};
        next.push_back({snew, v});
        next.push_back({snew, m - 1});
        nxt.push_back(std::move(next));
      }
    }
    cur = std::move(nxt);
  }
  return cur;
}

struct Segment {
  Eigen::Vector2d a, b;
  Eigen::VectorXi m;
};

struct TreeSolution {
  double value = std::numeric_limits<double>::infinity();
  std::vector<Segment> segs;
  long topology_id = std::numeric_limits<long>::max();
  int iterations = 0;
};

// Kirchhoff-forced multiplicities: orient every edge parent -> child, the
// multiplicity is the subtree terminal sum.  Empty result = zero-mult edge
// (the topology decomposes and is covered by a finer partition).
std::vector<Eigen::VectorXi> forced_multiplicities(const EdgeList& edges, int t,
                                                   const std::vector<Eigen::VectorXi>& mu,
                                                   std::vector<std::array<int, 2>>& oriented) {
  int N = 0;
  for (const auto& e : edges) N = std::max({N, e[0] + 1, e[1] + 1});
  std::vector<std::vector<int>> adj(N);
  for (size_t i = 0; i < edges.size(); ++i) {
    adj[edges[i][0]].push_back(static_cast<int>(i));
    adj[edges[i][1]].push_back(static_cast<int>(i));
  }
  const int k = static_cast<int>(mu[0].size());
  std::vector<Eigen::VectorXi> sub(N, Eigen::VectorXi::Zero(k));
  std::vector<int> parent_edge(N, -1), order;
  std::vector<char> seen(N, 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (int e : adj[v]) {
      int w = edges[e][0] == v ? edges[e][1] : edges[e][0];
      if (!seen[w]) {
        seen[w] = 1;
        parent_edge[w] = e;
        stack.push_back(w);
      }
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    if (v < t) sub[v] += mu[v];
    if (parent_edge[v] >= 0) {
      int pe = parent_edge[v];
      int par = edges[pe][0] + edges[pe][1] - v;
      sub[par] += sub[v];
    }
  }
  std::vector<Eigen::VectorXi> mult(edges.size());
  oriented.resize(edges.size());
  for (int v = 0; v < N; ++v) {
    int pe = parent_edge[v];
    if (pe < 0) continue;
    int par = edges[pe][0] + edges[pe][1] - v;
    oriented[pe] = {par, v};
    mult[pe] = sub[v];
    if (sub[v].isZero()) return {};
  }
  return mult;
}

// sequential single-point Weiszfeld sweeps; returns iterations used
int weiszfeld(const EdgeList& edges, const std::vector<double>& w, int t,
              std::vector<Eigen::Vector2d>& x, double diam, int max_iters) {
  const double eps = 1e-9 * diam, tol = 1e-10 * diam;
  int N = static_cast<int>(x.size());
  std::vector<std::vector<std::pair<int, double>>> nbr(N);  // node, weight
  for (size_t i = 0; i < edges.size(); ++i) {
    nbr[edges[i][0]].push_back({edges[i][1], w[i]});
    nbr[edges[i][1]].push_back({edges[i][0], w[i]});
  }
  auto objective = [&] {
    double o = 0;
    for (size_t i = 0; i < edges.size(); ++i)
      o += w[i] * (x[edges[i][0]] - x[edges[i][1]]).norm();
    return o;
  };
  double prev = objective();
  int it = 0;
  for (; it < max_iters; ++it) {
    double move = 0;
    for (int s = t; s < N; ++s) {
      Eigen::Vector2d num = Eigen::Vector2d::Zero();
      double den = 0;
      for (auto [j, wj] : nbr[s]) {
        double d = std::max((x[s] - x[j]).norm(), eps);
        num += wj / d * x[j];
        den += wj / d;
      }
      if (den <= 0) continue;
      Eigen::Vector2d xn = num / den;
      move = std::max(move, (xn - x[s]).norm());
      x[s] = xn;
    }
    double cur = objective();
    if (cur > prev + 1e-9 * (1.0 + prev))
      throw std::logic_error("weiszfeld objective increased");
    prev = cur;
    if (move < tol) break;
  }
  return it + 1;
}

TreeSolution best_tree(const std::vector<Eigen::Vector2d>& pos,
                       const std::vector<Eigen::VectorXi>& mu, const Exponent& p,
                       long id_base, const IntegralOptions& opts, double diam) {
  const int t = static_cast<int>(pos.size());
  TreeSolution best;
  if (t < 2) return best;
  auto topos = topologies_for(t);
  std::vector<TreeSolution> cands(topos.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t ti = 0; ti < topos.size(); ++ti) {
    const auto& edges = topos[ti];
    std::vector<std::array<int, 2>> oriented;
    auto mult = forced_multiplicities(edges, t, mu, oriented);
    if (mult.empty()) continue;
    std::vector<double> w(edges.size());
    for (size_t i = 0; i < edges.size(); ++i)
      w[i] = lp_norm(Eigen::VectorXd(mult[i].cast<double>()), p);
    int N = t + std::max(0, t - 2);
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& q : pos) centroid += q / t;
    TreeSolution cand;
    for (int r = 0; r <= opts.restarts; ++r) {
      std::vector<Eigen::Vector2d> x(pos.begin(), pos.end());
      std::mt19937_64 rng(opts.seed * 0x9e3779b97f4a7c15ull + id_base + ti * 131 + r);
      std::uniform_real_distribution<double> jit(-0.25, 0.25);
      for (int s = t; s < N; ++s) {
        Eigen::Vector2d o = r == 0 ? Eigen::Vector2d::Zero()
                                   : Eigen::Vector2d(jit(rng) * diam, jit(rng) * diam);
        x.push_back(centroid + o);
      }
      int iters = weiszfeld(edges, w, t, x, diam, opts.max_iters);
      double val = 0;
      for (size_t i = 0; i < edges.size(); ++i)
        val += w[i] * (x[oriented[i][0]] - x[oriented[i][1]]).norm();
      if (val < cand.value - 1e-12 * (1.0 + val)) {
        cand.value = val;
        cand.iterations = iters;
        cand.topology_id = id_base + static_cast<long>(ti);
        cand.segs.clear();
        for (size_t i = 0; i < edges.size(); ++i)
          cand.segs.push_back({x[oriented[i][0]], x[oriented[i][1]], mult[i]});
      }
    }
    cands[ti] = std::move(cand);
  }
  for (auto& c : cands)
    if (c.value < best.value - 1e-12 * (1.0 + std::abs(c.value)) ||
        (c.value < best.value + 1e-12 * (1.0 + std::abs(c.value)) &&
         c.topology_id < best.topology_id))
      best = std::move(c);
  return best;
}

}  // namespace

IntegralSolution solve_integral(const PointBoundary& S, const Exponent& p,
                                const IntegralOptions& opts) {
  S.validate();
  const int t = static_cast<int>(S.atoms.size());
  if (t > opts.max_terminals)
    throw std::invalid_argument("solve_integral: terminal-count overflow");
  if (S.k > 8) throw std::invalid_argument("solve_integral: k > 8 unsupported");
  double diam = S.diameter();
  const int full = (1 << t) - 1;

  // per-subset optimal single trees (only zero-sum subsets can stand alone)
  std::vector<TreeSolution> tree(full + 1);
  for (int mask = 1; mask <= full; ++mask) {
    Eigen::VectorXi sum = Eigen::VectorXi::Zero(S.k);
    std::vector<Eigen::Vector2d> pos;
    std::vector<Eigen::VectorXi> mu;
    for (int a = 0; a < t; ++a)
      if (mask >> a & 1) {
        sum += S.atoms[a].mult;
        pos.push_back(S.atoms[a].pos);
        mu.push_back(S.atoms[a].mult);
      }
    if (!sum.isZero() || pos.size() < 2) continue;
    tree[mask] = best_tree(pos, mu, p, static_cast<long>(mask) * 100000, opts, diam);
  }

  // forest = partition into zero-sum blocks
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(full + 1, inf);
  std::vector<int> choice(full + 1, 0);
  best[0] = 0;
  for (int mask = 1; mask <= full; ++mask) {
    int low = mask & -mask;
    for (int sub = mask; sub; sub = (sub - 1) & mask) {
      if (!(sub & low) || tree[sub].value >= inf || best[mask ^ sub] >= inf) continue;
      double v = tree[sub].value + best[mask ^ sub];
      if (v < best[mask] - 1e-15) {
        best[mask] = v;
        choice[mask] = sub;
      }
    }
  }
  if (best[full] >= inf)
    throw std::runtime_error("solve_integral: no admissible forest found");

  IntegralSolution sol;
  sol.topology_id = std::numeric_limits<long>::max();
  std::vector<Segment> segs;
  for (int mask = full; mask;) {
    int sub = choice[mask];
    const auto& ts = tree[sub];
    segs.insert(segs.end(), ts.segs.begin(), ts.segs.end());
    sol.topology_id = std::min(sol.topology_id, ts.topology_id);
    sol.iterations += ts.iterations;
    mask ^= sub;
  }

  // embed: merge coincident nodes (collapsed Steiner points), drop 0-length edges
  PolyCurrent net;
  net.k = S.k;
  net.integer_ring = true;
  double merge_tol = 1e-6 * std::max(diam, 1e-30);
  auto vertex_id = [&](const Eigen::Vector2d& q) {
    for (size_t i = 0; i < net.vertices.size(); ++i)
      if ((net.vertices[i] - q).norm() < merge_tol) return static_cast<int>(i);
    net.vertices.push_back(q);
    return static_cast<int>(net.vertices.size()) - 1;
  };
  for (const auto& s : segs) {
    int a = vertex_id(s.a), b = vertex_id(s.b);
    if (a == b) continue;
    net.edges.push_back({a, b, s.m.cast<double>()});
  }
  canonicalize(net);
  sol.network = std::move(net);
  sol.value = mass_p_current(sol.network, p);
  return sol;
}

namespace {

// directed Dijkstra with an arc-cost functional cost(edge, sign)
template <class Cost>
double route_unit(const GridGraph& g, int src, int dst, const Cost& cost,
                  std::vector<std::pair<int, int>>& path) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(g.nodes(), inf);
  std::vector<std::pair<int, int>> par(g.nodes(), {-1, 0});
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[src] = 0;
  pq.push({0.0, src});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (v == dst) break;
    if (d > dist[v] + 1e-15) continue;
    for (int e : g.incident[v]) {
      int s = g.edges[e].a == v ? 1 : -1;
      int w = s > 0 ? g.edges[e].b : g.edges[e].a;
      double nd = d + cost(e, s);
      if (nd < dist[w] - 1e-15) {
        dist[w] = nd;
        par[w] = {e, s};
        pq.push({nd, w});
      }
    }
  }
  path.clear();
  for (int v = dst; par[v].first >= 0;) {
    path.push_back(par[v]);
    auto [e, s] = par[v];
    v = s > 0 ? g.edges[e].a : g.edges[e].b;
  }
  std::reverse(path.begin(), path.end());
  return dist[dst];
}

}  // namespace

double grid_local_search_oracle(const PointBoundary& S, const Exponent& p,
                                GridGraph g) {
  S.validate();
  auto snapped = snap_atoms(S, g);
  const int k = S.k, E = static_cast<int>(g.edges.size());
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(k, E);
  // per-component unit (source, sink) pairs via optimal assignment
  std::vector<std::vector<std::pair<int, int>>> pairs(k);
  for (int i = 0; i < k; ++i) {
    std::vector<int> src, dst;
    for (size_t a = 0; a < S.atoms.size(); ++a) {
      int m = S.atoms[a].mult[i];
      for (int u = 0; u < m; ++u) src.push_back(snapped[a]);
      for (int u = 0; u < -m; ++u) dst.push_back(snapped[a]);
    }
    if (src.empty()) continue;
    std::map<int, std::pair<std::vector<double>, std::vector<int>>> trees;
    for (int s : src)
      if (!trees.count(s)) shortest_paths(g, s, trees[s].first, trees[s].second);
    const int U = static_cast<int>(src.size());
    std::vector<std::vector<double>> cost(U, std::vector<double>(U));
    for (int a = 0; a < U; ++a)
      for (int b = 0; b < U; ++b) cost[a][b] = trees[src[a]].first[dst[b]];
    std::vector<int> asg;
    hungarian(cost, asg);
    for (int a = 0; a < U; ++a) {
      pairs[i].push_back({src[a], dst[asg[a]]});
      // boundary convention: +m at the head, so current flows sink -> source
      for (auto [e, sign] : extract_path(g, trees[src[a]].second, dst[asg[a]]))
        z(i, e) -= sign;
    }
  }
  auto total = [&] {
    double c = 0;
    for (int e = 0; e < E; ++e) c += g.edges[e].len * lp_norm(Eigen::VectorXd(z.col(e)), p);
    return c;
  };
  double cur = total();
  // local moves: reroute one component at a time against the others, with
  // marginal edge costs (non-negative once the component's own flow is removed)
  for (int round = 0; round < 6; ++round) {
    for (int i = 0; i < k; ++i) {
      if (pairs[i].empty()) continue;
      z.row(i).setZero();
      for (auto [src, dst] : pairs[i]) {
        auto cost = [&](int e, int s) {
          Eigen::VectorXd m = z.col(e);
          double before = lp_norm(Eigen::VectorXd(m), p);
          m[i] += s;
          return g.edges[e].len * std::max(0.0, lp_norm(Eigen::VectorXd(m), p) - before);
        };
        std::vector<std::pair<int, int>> path;
        route_unit(g, src, dst, cost, path);
        for (auto [e, s] : path) z(i, e) += s;
      }
    }
    double next = total();
    if (next > cur - 1e-12 * (1.0 + cur)) {
      cur = std::min(cur, next);
      break;
    }
    cur = next;
  }
  return cur;
}

TheoremEReport verify_theoremE(const PointBoundary& S, const Exponent& p,
                               const GridGraph& g, const NormalOptions& nopts,
                               const IntegralOptions& iopts) {
  TheoremEReport rep;
  auto nsol = solve_normal(S, p, g, nopts);
  auto isol = solve_integral(S, p, iopts);
  rep.p_integral = isol.value;
  rep.p_normal = nsol.value;
  rep.factor = std::min(2.0 * p.k_factor(S.k) - 1.0, static_cast<double>(S.k));
  rep.ratio = nsol.value > 0 ? isol.value / nsol.value : 0.0;
  // snapping moves atoms by up to spacing/sqrt(2) each, which can shorten the
  // grid problem relative to the exact integral one
  double snap = 0.0;
  for (const auto& a : S.atoms)
    snap += lp_norm(Eigen::VectorXd(a.mult.cast<double>()), p) *
            nsol.grid.spacing() / std::sqrt(2.0);
  rep.tolerance = rep.factor * (nsol.distortion_band + nsol.gap + snap) + 1e-9;
  rep.ok = isol.value <= rep.factor * nsol.value + rep.tolerance;
  return rep;
}

}  // namespace plateau
