#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plateau/currents.hpp"
#include "plateau/exponent.hpp"
#include "plateau/normal.hpp"

namespace plateau {

// Configuration for a named verification suite.  A fixed (suite, seed, config)
// triple determines every random instance and therefore every artifact byte.
struct SuiteConfig {
  std::string suite;  // theoremA | theoremB | theoremC | theoremE |
                      // monotonicity | pentagon | bcl_dipoles | norms_props |
                      // mollifier
  std::uint64_t seed = 42;
  int trials = 10;
  int k = 2;
  int atoms = 4;  // boundary atoms per random instance
  std::vector<Exponent> plist = {Exponent::rational(1, 1),
                                 Exponent::rational(3, 2), Exponent(),
                                 Exponent::rational(3, 1),
                                 Exponent::infinity()};
  int grid_n = 33;
  int stencil = 16;
  double tol = 1e-3;              // solver relative gap target
  std::string out_dir = "artifacts";
  bool parallel = true;           // parallelize across trials

  // throws std::invalid_argument on an unknown suite or out-of-range field
  void validate() const;
};

struct SuiteAssertion {
  std::string name;
  bool pass = false;
  double value = 0.0;  // the measured quantity behind the assertion
};

struct SuiteResult {
  std::string suite;
  bool passed = false;
  int trials = 0;
  int failures = 0;
  std::vector<SuiteAssertion> assertions;
  std::vector<std::string> artifacts;  // paths written under cfg.out_dir
};

// Documented instance generator (all randomness through std::mt19937_64 with
// explicit integer-to-double conversion): atom positions uniform in the unit
// square, multiplicities i.i.d. uniform in {-2,...,2}^k rejection-sampled
// until every component sums to zero and no atom is the zero vector.
PointBoundary random_boundary(std::uint64_t seed, int k, int atoms);

// k = 1 dipole set: `pairs` +1 atoms and `pairs` -1 atoms, uniform positions.
PointBoundary random_dipoles(std::uint64_t seed, int pairs);

// Regular pentagon with circumradius 1: e_i at the first four vertices,
// -(1,1,1,1) at the fifth.
PointBoundary pentagon_boundary();

// Movement slack introduced by snapping atoms to grid nodes:
// sum_a ||m_a||_p * spacing / sqrt(2).
double snap_band(const PointBoundary& S, const Exponent& p, const GridGraph& g);

// Runs one suite: solves the seeded instances, evaluates the suite's
// assertions (module invariants only), and writes <suite>_rows.csv,
// <suite>_summary.json and suite-specific SVG figures into cfg.out_dir.
SuiteResult run_suite(const SuiteConfig& cfg);

// Stable-order, stable-format JSON rendering of a suite result.
std::string summary_json(const SuiteResult& r);

// Deterministic SVG: boundary atoms as labeled dots, optional network with
// per-component color layers and width ~ ||m||_p, optional per-component
// heatmap of a grid flow solution.
std::string render_solution(const PointBoundary& S, const PolyCurrent* T,
                            const FlowSolution* flow, const Exponent& p);

}  // namespace plateau
