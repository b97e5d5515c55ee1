#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <plateau/torusmaps.hpp>
#include <random>

using namespace plateau;

namespace {

constexpr double kPi = 3.14159265358979323846;

PolyCurrent segment1(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                     double mult = 1.0) {
  PolyCurrent T;
  T.k = 1;
  T.vertices = {a, b};
  T.edges = {{0, 1, Eigen::VectorXd::Constant(1, mult)}};
  return T;
}

// Fermat network of the equilateral triangle with k = 2 multiplicities
// (1,0), (0,1), (-1,-1) at the leaves
PolyCurrent fermat2() {
  PolyCurrent T;
  T.k = 2;
  Eigen::Vector2d v0(0.0, 0.0), v1(1.0, 0.0), v2(0.5, std::sqrt(3.0) / 2.0);
  Eigen::Vector2d c = (v0 + v1 + v2) / 3.0;
  T.vertices = {v0, v1, v2, c};
  Eigen::VectorXd m0(2), m1(2), m2(2);
  m0 << 1, 0;
  m1 << 0, 1;
  m2 << -1, -1;
  // edges oriented leaf -> center carry the negated leaf multiplicity so the
  // boundary at each leaf equals its datum
  T.edges = {{0, 3, -m0}, {1, 3, -m1}, {2, 3, -m2}};
  return T;
}

}  // namespace

TEST_CASE("map values lie on the torus and far field is constant") {
  TorusMapSpec spec;
  spec.T = segment1({0.0, 0.0}, {1.0, 0.0});
  spec.eps = 0.05;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 3.0);
  for (int t = 0; t < 50; ++t) {
    Eigen::Vector2d x(u(rng), u(rng));
    auto mv = evaluate_map(spec, x);
    for (int i = 0; i < spec.k(); ++i)
      CHECK(std::abs(std::abs(mv.u[i]) - 1.0) < 1e-12);
  }
  // outside the band the map is exactly the base point
  auto far = evaluate_map(spec, {0.5, 0.4});
  CHECK(std::abs(far.u[0] - std::complex<double>(1.0, 0.0)) < 1e-12);
  CHECK(far.grad_theta.norm() == 0.0);
  // raw phase (eps = 0) only decays algebraically
  spec.eps = 0.0;
  double a1 = std::abs(std::arg(evaluate_map(spec, {0.5, 10.0}).u[0]));
  double a2 = std::abs(std::arg(evaluate_map(spec, {0.5, 20.0}).u[0]));
  CHECK(a1 > 0.0);
  CHECK(a2 < 0.75 * a1);
}

TEST_CASE("winding around an endpoint equals the boundary multiplicity") {
  TorusMapSpec spec;
  spec.T = segment1({0.0, 0.0}, {1.0, 0.0}, 2.0);
  // boundary convention: head carries +m, tail carries -m
  for (double eps : {0.0, 0.1}) {
    spec.eps = eps;
    for (auto [cx, expect] : {std::pair(0.0, -2.0), std::pair(1.0, 2.0)}) {
      const int n = eps > 0.0 ? 32000 : 4000;
      const double r = 0.3;
      double wind = 0.0;
      for (int j = 0; j < n; ++j) {
        double t = 2.0 * kPi * (j + 0.5) / n;
        Eigen::Vector2d x(cx + r * std::cos(t), r * std::sin(t));
        Eigen::Vector2d tang(-std::sin(t), std::cos(t));
        auto mv = evaluate_map(spec, x);
        wind += mv.grad_theta.row(0).dot(tang) * (2.0 * kPi * r / n);
      }
      CHECK(wind / (2.0 * kPi) == doctest::Approx(expect).epsilon(1e-3));
    }
  }
}

TEST_CASE("weak Jacobian identity against a smooth test function") {
  TorusMapSpec spec;
  spec.T = fermat2();
  spec.eps = 0.04;
  // phi = gaussian bump centered near a leaf, grad computed analytically
  Eigen::Vector2d c(0.1, 0.05);
  const double s2 = 0.6 * 0.6;
  auto phi = [&](const Eigen::Vector2d& x) {
    return std::exp(-(x - c).squaredNorm() / s2);
  };
  auto gphi = [&](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(-2.0 / s2 * (x - c) * phi(x));
  };
  // int j(u_i) . grad^perp phi / (2 pi) = sum_atoms m_i phi(P)
  auto geo_s = spec;
  const int n = 700;
  const double lo = -1.0, hi = 2.0, h = (hi - lo) / n;
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Eigen::Vector2d x(lo + (a + 0.5) * h, lo + (b + 0.5) * h);
      auto mv = evaluate_map(geo_s, x);
      if (mv.grad_theta.norm() == 0.0) continue;
      Eigen::Vector2d gp = gphi(x);
      Eigen::Vector2d gperp(gp.y(), -gp.x());
      for (int i = 0; i < 2; ++i)
        acc[i] += mv.grad_theta.row(i).dot(gperp) * h * h;
    }
  PointBoundary S = boundary(spec.T);
  Eigen::Vector2d expect = Eigen::Vector2d::Zero();
  for (const auto& at : S.atoms)
    for (int i = 0; i < 2; ++i) expect[i] += at.mult[i] * phi(at.pos);
  for (int i = 0; i < 2; ++i)
    CHECK(acc[i] / (2.0 * kPi) == doctest::Approx(expect[i]).epsilon(0.02));
}

TEST_CASE("lifting jump across a cut is 2 pi m") {
  TorusMapSpec spec;
  spec.T = segment1({0.0, 0.0}, {1.0, 0.0}, 3.0);
  for (double eps : {0.0, 0.08}) {
    spec.eps = eps;
    double above = evaluate_map(spec, {0.5, 1e-9}).theta[0];
    double below = evaluate_map(spec, {0.5, -1e-9}).theta[0];
    CHECK(above - below == doctest::Approx(2.0 * kPi * 3.0).epsilon(1e-6));
  }
}

TEST_CASE("energies of the mollified dipole concentrate on the band") {
  TorusMapSpec spec;
  spec.T = segment1({0.0, 0.0}, {1.0, 0.0});
  spec.eps = 0.05;
  // exact band energy via the coarea formula: the level sets of the subtended
  // angle are circular arcs, giving 2 pi len (1 + delta^2/18 + O(delta^4))
  double delta = 2.0 * spec.eps;
  double exact = 2.0 * kPi * (1.0 + delta * delta / 18.0);
  auto h1 = harmonic_energy(spec, Exponent::rational(1, 1));
  CHECK(h1.tail_bound == 0.0);
  CHECK(h1.value == doctest::Approx(exact).epsilon(0.01));
  CHECK(h1.quad_error < 0.01 * h1.value);
  // k = 1: all exponents agree
  auto hi = harmonic_energy(spec, Exponent::infinity());
  CHECK(hi.value == doctest::Approx(h1.value).epsilon(1e-6));
  auto e2 = nuclear_energy(spec, Exponent());
  CHECK(e2.value == doctest::Approx(h1.value).epsilon(0.01));
  CHECK(e2.identity_max_dev <= 1e-6);
}

TEST_CASE("nuclear energy converges to 2 pi mass as eps shrinks") {
  TorusMapSpec spec;
  spec.T = segment1({0.2, -0.1}, {1.0, 0.5});
  double len = (spec.T.vertices[1] - spec.T.vertices[0]).norm();
  double target = 2.0 * kPi * len;
  QuadratureOptions qo;
  qo.rel_tol = 2e-4;
  double prev_err = std::numeric_limits<double>::infinity();
  double prev_quad = 0.0;
  for (double f : {0.04, 0.02, 0.01}) {
    spec.eps = f * len;
    auto e = nuclear_energy(spec, Exponent(), qo);
    double err = std::abs(e.value - target) / target;
    CHECK(err <= 0.05);
    // the eps bias shrinks like eps^2; allow the quadrature error bands
    CHECK(err <= prev_err + (e.quad_error + prev_quad) / target + 1e-6);
    prev_err = err;
    prev_quad = e.quad_error;
  }
  CHECK(prev_err <= 0.01);
}

TEST_CASE("energy chain on the Fermat network") {
  TorusMapSpec spec;
  spec.T = fermat2();
  spec.eps = 0.03;
  const int k = 2;
  for (const Exponent& p :
       {Exponent::rational(3, 2), Exponent(), Exponent::infinity()}) {
    auto hp = harmonic_energy(spec, p);
    auto ep = nuclear_energy(spec, p);
    auto h1 = harmonic_energy(spec, Exponent::rational(1, 1));
    double slack = hp.quad_error + ep.quad_error + h1.quad_error + 1e-9;
    CHECK(hp.value <= ep.value + slack);
    CHECK(ep.value <= h1.value + slack);
    CHECK(h1.value <= p.k_factor(k) * hp.value + p.k_factor(k) * slack);
  }
}

TEST_CASE("jump cost is 2 pi mass and boundary mismatch throws") {
  TorusMapSpec spec;
  spec.T = segment1({0.0, 0.0}, {1.0, 0.0});
  spec.eps = 0.05;
  LiftingSpec lift{spec.T, spec};
  CHECK(jump_cost(lift, Exponent()) == doctest::Approx(2.0 * kPi));
  CHECK(jump_cost(lift, Exponent::infinity()) == doctest::Approx(2.0 * kPi));
  LiftingSpec bad{segment1({0.0, 0.0}, {2.0, 0.0}), spec};
  CHECK_THROWS_AS(jump_cost(bad, Exponent()), std::invalid_argument);
  // a different cut system with the same boundary costs at least 2 pi P_Z
  PolyCurrent detour;
  detour.k = 1;
  detour.vertices = {{0.0, 0.0}, {0.5, 0.4}, {1.0, 0.0}};
  detour.edges = {{0, 1, Eigen::VectorXd::Constant(1, 1.0)},
                  {1, 2, Eigen::VectorXd::Constant(1, 1.0)}};
  LiftingSpec alt{detour, spec};
  CHECK(jump_cost(alt, Exponent()) > 2.0 * kPi);
}

TEST_CASE("theorem B bound and gradient identity") {
  TorusMapSpec spec;
  spec.T = segment1({0.0, 0.0}, {1.0, 0.0});
  spec.eps = 0.05;
  LiftingSpec lift{spec.T, spec};
  auto rb = verify_theoremB(spec, lift, Exponent(), {}, 400);
  CHECK(rb.ok);
  CHECK(rb.fd_max_err <= 1e-6);
  // k = 1: jump = H_p in the small-eps limit, bound = 2 H_p
  CHECK(rb.jump == doctest::Approx(2.0 * kPi));
  CHECK(rb.sbv_norm <= rb.bound + rb.tolerance);

  TorusMapSpec spec2;
  spec2.T = fermat2();
  spec2.eps = 0.03;
  LiftingSpec lift2{spec2.T, spec2};
  auto rb2 = verify_theoremB(spec2, lift2, Exponent::infinity(), {}, 400);
  CHECK(rb2.ok);
  CHECK(rb2.fd_max_err <= 1e-6);
}

TEST_CASE("theorem D factor report") {
  PointBoundary D;
  D.k = 1;
  Atom a, b;
  a.pos = {0.0, 0.0};
  b.pos = {0.9, 0.2};
  a.mult = Eigen::VectorXi::Constant(1, 1);
  b.mult = Eigen::VectorXi::Constant(1, -1);
  D.atoms = {a, b};
  auto gd = grid_for(D, 65, 16);
  auto rd = verify_theoremD(D, Exponent(), gd);
  CHECK(rd.factor == doctest::Approx(2.0).epsilon(0.03));
  CHECK(rd.factor_two);
  CHECK(rd.h_p_quad == doctest::Approx(2.0 * kPi * rd.p_integral).epsilon(0.02));

  // p = 1: factor 2 for any k
  PointBoundary S;
  S.k = 2;
  Atom u, v, w;
  u.pos = {0.0, 0.0};
  v.pos = {1.0, 0.0};
  w.pos = {0.5, std::sqrt(3.0) / 2.0};
  u.mult = Eigen::Vector2i(1, 0);
  v.mult = Eigen::Vector2i(0, 1);
  w.mult = Eigen::Vector2i(-1, -1);
  S.atoms = {u, v, w};
  auto g = grid_for(S, 49, 16);
  auto r1 = verify_theoremD(S, Exponent::rational(1, 1), g);
  CHECK(r1.factor == doctest::Approx(2.0).epsilon(0.05));
  CHECK(r1.factor_two);
}
