#pragma once

#include <Eigen/Dense>

#include "plateau/currents.hpp"
#include "plateau/exponent.hpp"
#include "plateau/integral.hpp"
#include "plateau/normal.hpp"
#include "plateau/norms.hpp"

namespace plateau {

// Torus-valued map built from a segment network T with boundary S.  Each edge
// (A,B) with multiplicity m contributes the subtended-angle phase
// m * (arg(x-B) - arg(x-A)), which jumps by 2*pi*m exactly across the segment.
// For eps > 0 the phase is composed with a linear ramp that is active only
// where the subtended angle exceeds pi - delta_e (delta_e = 2*eps/len_e), so
// the map spirals across a band of width eps around each edge, winds around
// the endpoints inside a wedge of opening delta_e, and is constant outside an
// eps-neighbourhood of the network: the far-field tail of every energy is
// exactly zero.  For eps = 0 the raw subtended-angle phase is used (values and
// gradients are defined away from the segments; energies require eps > 0).
struct TorusMapSpec {
  PolyCurrent T;
  double eps = 0.0;

  int k() const { return T.k; }
  // throws std::invalid_argument when eps >= shortest edge length / 4
  void validate() const;
};

struct MapValue {
  Eigen::VectorXd theta;       // phases theta_i(x); jump 2*pi*m across cuts
  Eigen::VectorXcd u;          // u_i = exp(i theta_i), |u_i| = 1
  Eigen::MatrixXd grad_theta;  // k x 2
  Eigen::MatrixXcd grad_u;     // k x 2, grad u_i = i u_i grad theta_i
};

MapValue evaluate_map(const TorusMapSpec& spec, const Eigen::Vector2d& x);

struct QuadratureOptions {
  double rel_tol = 1e-3;  // target relative quadrature error
  int max_cells = 400000;
  int max_depth = 26;
  bool parallel = true;
  bool check_identity = true;  // nuclear-vs-star pointwise check at each node
};

struct EnergyReport {
  double value = 0.0;
  double quad_error = 0.0;        // estimated from embedded-rule differences
  double tail_bound = 0.0;        // exact: the map is constant off the band
  double identity_max_dev = 0.0;  // max |nuclear_p - mass_p(star j)| seen
  long long cells = 0;
  long long evals = 0;
};

// H_p(u) = int ||(|grad u_1|, ..., |grad u_k|)||_p
EnergyReport harmonic_energy(const TorusMapSpec& spec, const Exponent& p,
                             const QuadratureOptions& opts = {});

// E_p(u) = int |grad u|_{nucl,p}; asserts the pointwise identity
// |grad u|_{nucl,p} = |star j(u)|_{mass,p} at every quadrature node (1e-6)
EnergyReport nuclear_energy(const TorusMapSpec& spec, const Exponent& p,
                            const QuadratureOptions& opts = {});

// A BV lifting of the base map given by a branch-cut system with the same
// boundary: the lifting jumps by 2*pi*m_e across each cut edge.
struct LiftingSpec {
  PolyCurrent cuts;
  TorusMapSpec base;
};

// Sum over cut edges of 2*pi*||m_e||_p*length(e) = 2*pi*mass_p(cuts);
// throws std::invalid_argument when boundary(cuts) != boundary(base.T)
double jump_cost(const LiftingSpec& lift, const Exponent& p);

struct TheoremBReport {
  double h_p = 0.0;        // H_p(u) by quadrature
  double jump = 0.0;       // jump cost of the supplied cut system
  double sbv_norm = 0.0;   // |theta|_{SBV,p} = h_p + jump
  double bound = 0.0;      // 2 k^{1-1/p} h_p
  double tolerance = 0.0;  // quadrature error budget
  double fd_max_err = 0.0; // worst |grad theta_j| vs |grad u_j| mismatch
  bool ok = false;
};

// |theta|_{SBV,p} <= 2 k^{1-1/p} H_p(u), plus the finite-difference identity
// |grad theta_j| = |grad u_j| at off-cut sample points
TheoremBReport verify_theoremB(const TorusMapSpec& spec, const LiftingSpec& lift,
                               const Exponent& p,
                               const QuadratureOptions& opts = {},
                               int fd_points = 1000, unsigned seed = 7);

struct TheoremDReport {
  double p_normal = 0.0;    // grid value of the real-coefficient problem
  double p_integral = 0.0;  // value of the integer problem
  double factor = 0.0;      // (inf H_p + min jump)/inf H_p = 1 + P_Z/P_R
  double band = 0.0;        // combined solver tolerance
  double h_p_quad = 0.0;    // quadrature H_p of the eps-family over the
                            // optimal integer network (-> 2 pi P_Z)
  bool factor_two = false;  // 2 pi P_Z == inf H_p within the band
};

// Reports the empirical best lifting factor; does not assert (the theorem's
// equivalence ranges over all maps)
TheoremDReport verify_theoremD(const PointBoundary& S, const Exponent& p,
                               const GridGraph& g,
                               const NormalOptions& nopts = {},
                               const IntegralOptions& iopts = {});

}  // namespace plateau
