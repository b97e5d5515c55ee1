#pragma once

#include <cstdint>

#include "plateau/normal.hpp"

namespace plateau {

struct IntegralOptions {
  int max_terminals = 8;
  int restarts = 2;        // perturbed Weiszfeld restarts per topology
  std::uint64_t seed = 1;
  int max_iters = 2000;    // Weiszfeld sweeps
};

struct IntegralSolution {
  PolyCurrent network;  // integer ring; boundary(network) = S exactly
  double value = 0;
  long topology_id = -1;  // lexicographically smallest among ties
  int iterations = 0;
};

// Exact small-instance solver: zero-sum terminal partitions x full Steiner
// topologies with Kirchhoff-forced multiplicities, Weiszfeld branch placement.
IntegralSolution solve_integral(const PointBoundary& S, const Exponent& p,
                                const IntegralOptions& opts = {});

// Integer flow upper bound on the grid: per-component shortest-path routing
// followed by rounds of single-component rerouting against the others.
double grid_local_search_oracle(const PointBoundary& S, const Exponent& p,
                                GridGraph g);

struct TheoremEReport {
  double p_integral = 0;
  double p_normal = 0;
  double ratio = 0;      // p_integral / p_normal
  double factor = 0;     // min(2 k^{1-1/p} - 1, k)
  double tolerance = 0;  // distortion band + solver gap, scaled by the factor
  bool ok = false;
};

// Checks P_Z <= min(2 k^{1-1/p} - 1, k) * P_R + combined tolerance.
TheoremEReport verify_theoremE(const PointBoundary& S, const Exponent& p,
                               const GridGraph& g,
                               const NormalOptions& nopts = {},
                               const IntegralOptions& iopts = {});

}  // namespace plateau
