#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "plateau/exponent.hpp"

namespace plateau {

// Thrown when the primal-dual mass computation cannot close its gap.
struct NonconvergenceError : std::runtime_error {
  double gap;
  explicit NonconvergenceError(double g)
      : std::runtime_error("mass norm: primal-dual gap " + std::to_string(g) +
                           " did not reach tolerance"),
        gap(g) {}
};

// lp norm over block Euclidean magnitudes.  block=1 is the plain lp norm;
// block=2 treats consecutive pairs of entries as complex scalars.
double lp_norm(const Eigen::VectorXd& x, const Exponent& p, int block = 1);
double lp_norm(const Eigen::VectorXcd& z, const Exponent& p);

// Per-block magnitudes of x (length = x.size()/block).
Eigen::VectorXd block_magnitudes(const Eigen::VectorXd& x, int block);

// Projection of x onto the ball {y : lp_norm(y, q, block) <= r}, in place.
void project_lq_ball(Eigen::VectorXd& x, const Exponent& q, double r, int block = 1);

// Moreau: prox of sigma * lp_norm(., p, block).
Eigen::VectorXd prox_lp_norm(const Eigen::VectorXd& x, const Exponent& p, double sigma,
                             int block = 1);

struct ComassResult {
  double value;           // certified upper bound
  double lower;           // best sampled/refined value
  Eigen::VectorXd tau;    // maximizing direction
};

// p-comass of a (k*block) x d matrix W: sup over Euclidean-unit tau of the
// block-lq norm of W tau, q conjugate to p.  d in {2, 3}.
ComassResult comass(const Eigen::MatrixXd& W, const Exponent& p, int block = 1,
                    int samples = 0);

struct RankOneTerm {
  Eigen::VectorXd z;    // coefficient vector in R^{k*block}
  Eigen::VectorXd tau;  // unit direction in R^d
};

struct MassResult {
  double value;   // midpoint of [lower, upper]
  double lower;   // from the dual certificate
  double upper;   // from the primal decomposition
  Eigen::MatrixXd dual;                   // W with comass <= 1, <W,v> = lower
  std::vector<RankOneTerm> decomposition; // sum z_j (x) tau_j = v, cost = upper
  int iterations = 0;
};

struct MassOptions {
  double tol = 1e-6;     // relative gap target
  bool throw_on_gap = true;
  const Eigen::MatrixXd* warm_dual = nullptr;
};

// p-mass of a (k*block) x d matrix v (an R^k- or C^k-valued 1-vector).
// Closed form for p in {1, 2}; primal-dual computation otherwise.
MassResult mass(const Eigen::MatrixXd& v, const Exponent& p, int block = 1,
                const MassOptions& opts = {});

// p-nuclear norm of a k x d complex matrix, via the 2k x d real embedding
// with block size 2.
MassResult nuclear_norm(const Eigen::MatrixXcd& A, const Exponent& p,
                        const MassOptions& opts = {});

// ---- Hodge star ------------------------------------------------------------

// Componentwise multivector: k rows, C(d,m) columns (multi-indices in
// lexicographic order).
struct Multivector {
  int d = 2;
  int m = 1;
  bool covector = false;
  Eigen::MatrixXd comp;  // k x C(d,m)
};

// Hodge star with the sign convention star dx_I = sigma(I,I') e_{I'};
// maps covectors to vectors and vice versa, d in {2,3}.
Multivector hodge_star(const Multivector& x);

// Convenience for d=2 1-covectors stored as k x 2 rows: returns the k x 2
// matrix of star-ed rows (row (a,b) -> (-b, a) as a vector).
Eigen::MatrixXd hodge_star_rows_2d(const Eigen::MatrixXd& w);

}  // namespace plateau
