#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "plateau/exponent.hpp"

namespace plateau {

// The boundary datum S: finite atoms with Z^k multiplicities, zero-sum per
// component.
struct Atom {
  Eigen::Vector2d pos;
  Eigen::VectorXi mult;
};

struct PointBoundary {
  int k = 1;
  std::vector<Atom> atoms;

  // throws std::invalid_argument on a nonzero component sum or coinciding atoms
  void validate() const;
  double diameter() const;
  Eigen::Vector2d center() const;
};

struct CurrentEdge {
  int tail = 0, head = 0;
  Eigen::VectorXd mult;  // integral entries when the ring is integer
};

// Segment network with Z^k or R^k edge multiplicities.
struct PolyCurrent {
  int k = 1;
  bool integer_ring = true;
  std::vector<Eigen::Vector2d> vertices;
  std::vector<CurrentEdge> edges;

  double total_length() const;
};

// Signed endpoint sums; zero atoms omitted.
PointBoundary boundary(const PolyCurrent& T, double merge_tol = 1e-9);

// M_p(T) = sum_e length(e) * ||m_e||_p
double mass_p_current(const PolyCurrent& T, const Exponent& p);

// Orient edges tail < head (negating multiplicity), merge parallel edges,
// drop zero-multiplicity edges.
void canonicalize(PolyCurrent& T);

struct Connection {
  double length = 0.0;
  std::vector<int> matching;  // matching[i] = index into N assigned to P[i]
};

// min over permutations of sum |P_i - N_{sigma(i)}| (Hungarian algorithm)
Connection minimal_connection(const std::vector<Eigen::Vector2d>& P,
                              const std::vector<Eigen::Vector2d>& N);

// Radial bump rho(t) = c (1 - t^2)^2 on [0,1], scaled to rho_eps; the
// associated divergence field R_eps has closed form.
struct RadialMollifier {
  double epsilon = 1.0;
  int d = 2;

  double rho(double t) const;        // unscaled profile
  double rho_eps_at(double r) const; // rho_eps as a function of |x|
  double xi(double t) const;         // t^{-d} int_t^1 s^{d-1} rho(s) ds
  double field_l1() const;           // ||R_eps||_{L^1}
};

// R_eps(x) = eps^{-d+1} xi(|x/eps|) (x/eps); zero for |x| >= eps.
// Throws std::domain_error at x = 0.
Eigen::Vector2d mollifier_field(const RadialMollifier& mol, const Eigen::Vector2d& x);

struct TestFunction {
  std::function<double(const Eigen::Vector2d&)> value;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> gradient;
};

// | -int R_eps . grad(phi) - phi(0) + int rho_eps phi |, by polar quadrature.
double check_divergence_identity(const RadialMollifier& mol, const TestFunction& phi);

// ---- JSON / SVG ------------------------------------------------------------

PointBoundary boundary_from_json(const std::string& text);
std::string boundary_to_json(const PointBoundary& S);
PolyCurrent current_from_json(const std::string& text);
std::string current_to_json(const PolyCurrent& T);

PointBoundary load_boundary(const std::string& path);
PolyCurrent load_current(const std::string& path);

// Deterministic SVG: atoms as labeled dots, edges with width ~ ||m||_p and
// one color layer per component.
std::string render_svg(const PointBoundary& S, const PolyCurrent* T, const Exponent& p);

}  // namespace plateau
