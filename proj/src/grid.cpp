#include "plateau/grid.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>

namespace plateau {

Eigen::Vector2d GridGraph::pos(int v) const {
  int ix = v % n, iy = v / n;
  double hx = (hi.x() - lo.x()) / (n - 1), hy = (hi.y() - lo.y()) / (n - 1);
  return {lo.x() + hx * ix, lo.y() + hy * iy};
}

int GridGraph::snap(const Eigen::Vector2d& x) const {
  double hx = (hi.x() - lo.x()) / (n - 1), hy = (hi.y() - lo.y()) / (n - 1);
  int ix = static_cast<int>(std::lround((x.x() - lo.x()) / hx));
  int iy = static_cast<int>(std::lround((x.y() - lo.y()) / hy));
  ix = std::min(std::max(ix, 0), n - 1);
  iy = std::min(std::max(iy, 0), n - 1);
  return node(ix, iy);
}

double GridGraph::distortion() const {
  // worst direction is the bisector of adjacent stencil rays:
  // 4: 1/cos(pi/4), 8: 1/cos(pi/8), 16: cos(atan(1/2) - pi/4)/cos(pi/4) graded
  switch (stencil) {
    case 4:
      return std::sqrt(2.0);
    case 8:
      return 1.0824;
    case 16:
      return 1.0196;
    default:
      throw std::invalid_argument("stencil must be 4, 8 or 16");
  }
}

GridGraph make_grid(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi, int n,
                    int stencil) {
  if (n < 2) throw std::invalid_argument("grid needs n >= 2");
  if (stencil != 4 && stencil != 8 && stencil != 16)
    throw std::invalid_argument("stencil must be 4, 8 or 16");
  GridGraph g;
  g.lo = lo;
  g.hi = hi;
  g.n = n;
  g.stencil = stencil;
  static const int offs4[][2] = {{1, 0}, {0, 1}};
  static const int offs8[][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  static const int offs16[][2] = {{1, 0},  {0, 1},  {1, 1},  {1, -1},
                                  {2, 1},  {1, 2},  {2, -1}, {1, -2}};
  const int(*offs)[2] = stencil == 4 ? offs4 : stencil == 8 ? offs8 : offs16;
  const int noffs = stencil == 4 ? 2 : stencil == 8 ? 4 : 8;
  g.incident.resize(g.nodes());
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      for (int o = 0; o < noffs; ++o) {
        int jx = ix + offs[o][0], jy = iy + offs[o][1];
        if (jx < 0 || jx >= n || jy < 0 || jy >= n) continue;
        int a = g.node(ix, iy), b = g.node(jx, jy);
        double len = (g.pos(a) - g.pos(b)).norm();
        g.incident[a].push_back(static_cast<int>(g.edges.size()));
        g.incident[b].push_back(static_cast<int>(g.edges.size()));
        g.edges.push_back({a, b, len});
      }
  return g;
}

GridGraph grid_for(const PointBoundary& S, int n, int stencil) {
  double diam = S.diameter();
  if (diam <= 0) diam = 1.0;
  Eigen::Vector2d mn = S.atoms.front().pos, mx = mn;
  for (const auto& a : S.atoms) {
    mn = mn.cwiseMin(a.pos);
    mx = mx.cwiseMax(a.pos);
  }
  double side = std::max(mx.x() - mn.x(), mx.y() - mn.y()) + diam / 2;
  Eigen::Vector2d c = 0.5 * (mn + mx);
  Eigen::Vector2d half(side / 2, side / 2);
  return make_grid(c - half, c + half, n, stencil);
}

std::vector<int> snap_atoms(const PointBoundary& S, GridGraph& g) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<int> snapped;
    bool ok = true;
    for (const auto& a : S.atoms) {
      int v = g.snap(a.pos);
      for (int w : snapped)
        if (w == v) ok = false;
      snapped.push_back(v);
    }
    if (ok) return snapped;
    g = make_grid(g.lo, g.hi, 2 * g.n - 1, g.stencil);
  }
  throw std::runtime_error("atoms collide after snapping at maximal refinement");
}

void shortest_paths(const GridGraph& g, int src, std::vector<double>& dist,
                    std::vector<int>& parent_edge) {
  const double inf = std::numeric_limits<double>::infinity();
  dist.assign(g.nodes(), inf);
  parent_edge.assign(g.nodes(), -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[src] = 0;
  pq.push({0.0, src});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[v] + 1e-15) continue;
    for (int e : g.incident[v]) {
      int w = g.edges[e].a == v ? g.edges[e].b : g.edges[e].a;
      double nd = d + g.edges[e].len;
      if (nd < dist[w] - 1e-15) {
        dist[w] = nd;
        parent_edge[w] = e;
        pq.push({nd, w});
      }
    }
  }
}

std::vector<std::pair<int, int>> extract_path(const GridGraph& g,
                                              const std::vector<int>& parent_edge,
                                              int v) {
  std::vector<std::pair<int, int>> path;
  while (parent_edge[v] >= 0) {
    int e = parent_edge[v];
    int sign = g.edges[e].b == v ? 1 : -1;  // traversed a -> b toward v
    path.push_back({e, sign});
    v = sign > 0 ? g.edges[e].a : g.edges[e].b;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace plateau
