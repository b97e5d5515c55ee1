#pragma once

#include <Eigen/Dense>
#include <vector>

#include "plateau/currents.hpp"

namespace plateau {

// Uniform n x n grid graph on a box with a 4/8/16-neighbor stencil.
struct GridGraph {
  Eigen::Vector2d lo = {0, 0}, hi = {1, 1};
  int n = 0;        // nodes per side
  int stencil = 8;  // 4, 8 or 16

  struct Edge {
    int a = 0, b = 0;
    double len = 0;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<int>> incident;  // node -> incident edge ids

  int nodes() const { return n * n; }
  int node(int ix, int iy) const { return iy * n + ix; }
  Eigen::Vector2d pos(int v) const;
  int snap(const Eigen::Vector2d& x) const;  // nearest node
  double spacing() const { return (hi.x() - lo.x()) / (n - 1); }
  // worst-case graph-distance / Euclidean-distance ratio of the stencil
  double distortion() const;
};

GridGraph make_grid(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi, int n,
                    int stencil);

// Square box containing S with margin >= diameter/4 on every side.
GridGraph grid_for(const PointBoundary& S, int n, int stencil);

// Snap atoms to nearest nodes; doubles the resolution until nodes are distinct.
std::vector<int> snap_atoms(const PointBoundary& S, GridGraph& g);

// Dijkstra; parent_edge[v] = edge id leading to v in the shortest-path tree.
void shortest_paths(const GridGraph& g, int src, std::vector<double>& dist,
                    std::vector<int>& parent_edge);

// Walk the shortest-path tree from v back to the root; appends (edge id, sign)
// with sign +1 when the edge is traversed tail->head (a -> b) root-to-v.
std::vector<std::pair<int, int>> extract_path(const GridGraph& g,
                                              const std::vector<int>& parent_edge,
                                              int v);

}  // namespace plateau
