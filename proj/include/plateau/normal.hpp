#pragma once

#include <array>
#include <string>
#include <vector>

#include "plateau/grid.hpp"
#include "plateau/norms.hpp"

namespace plateau {

struct NormalOptions {
  double tol = 1e-4;      // relative primal-dual gap target (grid problem)
  int max_iters = 200000;
  int check_every = 200;  // gap evaluation cadence
  bool parallel = true;   // OpenMP kernels; false = serial reference
  bool throw_on_gap = true;
  bool force_splitting = false;  // skip the exact p=1 / k=1 path (cross-checks)
};

// min sum_e len_e ||z_e||_p  s.t.  div z = snapped atom multiplicities.
struct FlowSolution {
  Eigen::MatrixXd z;  // k x E edge multiplicities
  double value = 0;   // certified primal value (after feasibility repair)
  double lower = 0;   // dual lower bound (grid problem)
  double gap = 0;     // value - lower
  double residual = 0;           // max divergence residual per node/component
  double distortion_band = 0;    // value * (stencil distortion - 1)
  int iterations = 0;
  std::vector<int> snapped;  // node index per atom
  GridGraph grid;            // possibly refined copy used for the solve
};

FlowSolution solve_normal(const PointBoundary& S, const Exponent& p,
                          const GridGraph& g, const NormalOptions& opts = {});

// Piecewise-constant k-valued 1-form on a triangulation, candidate calibration
// for the target current.
struct CalibrationForm {
  std::vector<std::array<Eigen::Vector2d, 3>> triangles;
  std::vector<Eigen::MatrixXd> omega;  // k x 2 per triangle
  PolyCurrent target;
  Exponent p;
};

struct CalibrationReport {
  bool valid = false;
  double certified_value = 0;  // mass_p of the target when valid
  std::string violation;       // empty when valid
  int location = -1;           // edge / face / triangle index of the violation
  double magnitude = 0;
};

// (i) <omega; tau, m> = ||m||_p along the target, (ii) matching tangential
// traces across interior faces, (iii) comass_p(omega) <= 1 per triangle.
CalibrationReport check_calibration(const CalibrationForm& cal);

struct SweepRow {
  Exponent p;
  double value = 0;
  double gap = 0;
};

// Values per p; asserts monotone decrease and the sandwich
// P_inf <= P_p <= k^{1/p} P_inf (throws std::logic_error on violation).
std::vector<SweepRow> sweep_p(const PointBoundary& S,
                              const std::vector<Exponent>& plist,
                              const GridGraph& g, const NormalOptions& opts = {});

}  // namespace plateau
