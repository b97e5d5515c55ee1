#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "plateau/integral.hpp"
#include "plateau/normal.hpp"

using namespace plateau;

namespace {

PointBoundary dipole1(Eigen::Vector2d a, Eigen::Vector2d b) {
  PointBoundary S;
  S.k = 1;
  Atom P, N;
  P.pos = a;
  P.mult = Eigen::VectorXi::Constant(1, 1);
  N.pos = b;
  N.mult = Eigen::VectorXi::Constant(1, -1);
  S.atoms = {P, N};
  return S;
}

// equilateral triangle side 1: sources e1, e2, sink -(e1+e2)
PointBoundary triangle2() {
  PointBoundary S;
  S.k = 2;
  Atom A, B, C;
  A.pos = {0.0, 0.0};
  B.pos = {1.0, 0.0};
  C.pos = {0.5, std::sqrt(3.0) / 2};
  A.mult = Eigen::Vector2i(1, 0);
  B.mult = Eigen::Vector2i(0, 1);
  C.mult = Eigen::Vector2i(-1, -1);
  S.atoms = {A, B, C};
  return S;
}

// regular pentagon, circumradius 1: e_i at P_i, -(1,1,1,1) at P_5
PointBoundary pentagon4() {
  PointBoundary S;
  S.k = 4;
  for (int i = 0; i < 5; ++i) {
    Atom a;
    double th = M_PI / 2 + 2 * M_PI * i / 5;
    a.pos = {std::cos(th), std::sin(th)};
    a.mult = Eigen::VectorXi::Zero(4);
    if (i < 4)
      a.mult[i] = 1;
    else
      a.mult = Eigen::VectorXi::Constant(4, -1);
    S.atoms.push_back(a);
  }
  return S;
}

}  // namespace

TEST_CASE("grid basics") {
  auto g = make_grid({0, 0}, {1, 1}, 5, 8);
  CHECK(g.nodes() == 25);
  CHECK(g.spacing() == doctest::Approx(0.25));
  CHECK(g.snap(Eigen::Vector2d(0.26, 0.74)) == g.node(1, 3));
  CHECK(make_grid({0, 0}, {1, 1}, 5, 4).distortion() == doctest::Approx(std::sqrt(2.0)));
  CHECK(make_grid({0, 0}, {1, 1}, 5, 16).distortion() == doctest::Approx(1.0196));
  // shortest path across the diagonal is within the distortion factor
  for (int st : {4, 8, 16}) {
    auto gg = make_grid({0, 0}, {1, 1}, 33, st);
    std::vector<double> dist;
    std::vector<int> par;
    shortest_paths(gg, gg.node(0, 0), dist, par);
    double d = dist[gg.node(32, 32)];
    CHECK(d >= std::sqrt(2.0) - 1e-12);
    CHECK(d <= std::sqrt(2.0) * gg.distortion() + 1e-9);
    auto path = extract_path(gg, par, gg.node(32, 32));
    double len = 0;
    for (auto [e, s] : path) len += gg.edges[e].len;
    CHECK(len == doctest::Approx(d));
  }
}

TEST_CASE("snap_atoms refines on collision") {
  auto S = dipole1({0.0, 0.0}, {0.01, 0.0});
  auto g = make_grid({-1, -1}, {1, 1}, 9, 8);
  int n0 = g.n;
  auto snapped = snap_atoms(S, g);
  CHECK(g.n > n0);
  CHECK(snapped[0] != snapped[1]);
}

TEST_CASE("solve_normal dipole exact for k=1") {
  auto S = dipole1({-0.4, 0.0}, {0.6, 0.0});
  for (int st : {4, 8, 16}) {
    auto g = grid_for(S, 41, st);
    for (auto p : {Exponent::rational(1, 1), Exponent(), Exponent::infinity()}) {
      auto sol = solve_normal(S, p, g);
      CHECK(sol.gap == 0.0);
      CHECK(sol.residual < 1e-12);
      CHECK(sol.value >= 1.0 - g.spacing());  // snapping can shorten slightly
      CHECK(sol.value <= g.distortion() * (1.0 + 2 * g.spacing()));
    }
  }
}

TEST_CASE("solve_normal triangle p=1 decomposes") {
  auto S = triangle2();
  auto g = grid_for(S, 65, 16);
  auto sol = solve_normal(S, Exponent::rational(1, 1), g);
  CHECK(sol.gap == 0.0);
  CHECK(sol.value == doctest::Approx(2.0).epsilon(0.03));
  CHECK(sol.value >= 2.0 - 4 * g.spacing());
}

TEST_CASE("splitting solver matches the exact path") {
  auto S = triangle2();
  auto g = grid_for(S, 25, 8);
  NormalOptions exact_opts;
  auto exact = solve_normal(S, Exponent::rational(1, 1), g, exact_opts);
  NormalOptions cp;
  cp.force_splitting = true;
  cp.tol = 1e-5;
  auto approx = solve_normal(S, Exponent::rational(1, 1), g, cp);
  CHECK(approx.value == doctest::Approx(exact.value).epsilon(5e-3));
  CHECK(approx.residual < 1e-6);
  CHECK(approx.lower <= exact.value + 1e-9);
}

TEST_CASE("serial and parallel kernels agree") {
  auto S = triangle2();
  auto g = grid_for(S, 25, 8);
  NormalOptions a, b;
  a.force_splitting = b.force_splitting = true;
  a.tol = b.tol = 1e-5;
  a.max_iters = b.max_iters = 3000;
  a.throw_on_gap = b.throw_on_gap = false;
  a.parallel = true;
  b.parallel = false;
  auto sa = solve_normal(S, Exponent(), g, a);
  auto sb = solve_normal(S, Exponent(), g, b);
  CHECK(sa.iterations == sb.iterations);
  CHECK(sa.value == doctest::Approx(sb.value).epsilon(1e-12));
}

TEST_CASE("solve_normal p=2 decoupled dipoles") {
  // disjoint components: value = sum of segment lengths
  PointBoundary S;
  S.k = 2;
  Atom a, b, c, d;
  a.pos = {0.0, 0.0};
  b.pos = {1.0, 0.0};
  c.pos = {0.0, 1.0};
  d.pos = {1.0, 1.0};
  a.mult = Eigen::Vector2i(1, 0);
  b.mult = Eigen::Vector2i(-1, 0);
  c.mult = Eigen::Vector2i(0, 1);
  d.mult = Eigen::Vector2i(0, -1);
  S.atoms = {a, b, c, d};
  auto g = grid_for(S, 33, 8);
  NormalOptions o;
  o.tol = 1e-4;
  auto sol = solve_normal(S, Exponent(), g, o);
  // atoms snap to grid nodes (up to spacing/sqrt(2) each), so each segment
  // length can shift by up to sqrt(2)*spacing before the stencil distortion
  CHECK(sol.value >= 2.0 - 3.0 * sol.grid.spacing());
  CHECK(sol.value <= sol.grid.distortion() * (2.0 + 3.0 * sol.grid.spacing()));
  CHECK(sol.residual < 1e-6);
  CHECK(sol.gap <= 4 * o.tol * sol.value + 1e-12);
}

TEST_CASE("check_calibration certifies the dipole segment") {
  CalibrationForm cal;
  cal.p = Exponent();
  cal.target.k = 1;
  cal.target.vertices = {{0.0, 0.0}, {1.0, 0.0}};
  cal.target.edges = {{0, 1, Eigen::VectorXd::Constant(1, 1.0)}};
  // two triangles covering [-0.5, 1.5] x [-0.5, 0.5]
  Eigen::Vector2d p00(-0.5, -0.5), p10(1.5, -0.5), p11(1.5, 0.5), p01(-0.5, 0.5);
  cal.triangles = {{p00, p10, p11}, {p00, p11, p01}};
  Eigen::MatrixXd w(1, 2);
  w << 1.0, 0.0;  // the unit covector along the segment
  cal.omega = {w, w};
  auto rep = check_calibration(cal);
  CHECK(rep.valid);
  CHECK(rep.certified_value == doctest::Approx(1.0));

  CalibrationForm scaled = cal;
  scaled.target.edges.clear();  // empty target: only (ii)/(iii) can fire
  scaled.omega = {2.0 * w, 2.0 * w};
  auto rs = check_calibration(scaled);
  CHECK_FALSE(rs.valid);
  CHECK(rs.violation.find("(iii)") == 0);
  CHECK(rs.magnitude == doctest::Approx(1.0));

  CalibrationForm mism = cal;
  mism.target.edges.clear();
  Eigen::MatrixXd w2(1, 2);
  w2 << 0.0, 1.0;
  mism.omega = {w, w2};
  auto rm = check_calibration(mism);
  CHECK_FALSE(rm.valid);
  CHECK(rm.violation.find("(ii)") == 0);

  CalibrationForm onviol = cal;  // scaled form with the target present: (i) fires
  onviol.omega = {2.0 * w, 2.0 * w};
  CHECK(check_calibration(onviol).violation.find("(i)") == 0);
}

TEST_CASE("sweep_p monotone on the triangle") {
  auto S = triangle2();
  auto g = grid_for(S, 33, 8);
  NormalOptions o;
  o.tol = 1e-4;
  std::vector<Exponent> ps = {Exponent::rational(1, 1), Exponent(),
                              Exponent::infinity()};
  auto rows = sweep_p(S, ps, g, o);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].value >= rows[1].value - 2 * (rows[0].gap + rows[1].gap) - 1e-9);
  CHECK(rows[1].value >= rows[2].value - 2 * (rows[1].gap + rows[2].gap) - 1e-9);
  // k=2 p=1 sandwich: P_1 <= 2 P_inf
  CHECK(rows[0].value <= 2.0 * rows[2].value + 1e-6);
}

TEST_CASE("solve_integral dipole and Fermat triangle") {
  auto d = solve_integral(dipole1({0.0, 0.0}, {1.0, 0.0}), Exponent());
  CHECK(d.value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(d.network.edges.size() == 1);

  auto S = triangle2();
  auto fermat = solve_integral(S, Exponent::infinity());
  CHECK(fermat.value == doctest::Approx(std::sqrt(3.0)).epsilon(1e-6));
  // single branch point at the centroid joined to all three terminals
  CHECK(fermat.network.edges.size() == 3);
  CHECK(fermat.network.vertices.size() == 4);

  auto p1 = solve_integral(S, Exponent::rational(1, 1));
  CHECK(p1.value == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("solve_integral boundary is exact") {
  auto S = triangle2();
  for (auto p : {Exponent::rational(1, 1), Exponent(), Exponent::infinity()}) {
    auto sol = solve_integral(S, p);
    auto B = boundary(sol.network);
    REQUIRE(B.atoms.size() == S.atoms.size());
    for (const auto& a : S.atoms) {
      bool found = false;
      for (const auto& b : B.atoms)
        if ((a.pos - b.pos).norm() < 1e-6 && a.mult == b.mult) found = true;
      CHECK(found);
    }
  }
}

TEST_CASE("solve_integral equals minimal_connection for k=1 dipole sets") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    int n = 2 + static_cast<int>(rng() % 3);  // 2..4 dipoles
    PointBoundary S;
    S.k = 1;
    std::vector<Eigen::Vector2d> P, N;
    for (int i = 0; i < n; ++i) {
      Atom a, b;
      a.pos = {U(rng), U(rng)};
      b.pos = {U(rng), U(rng)};
      a.mult = Eigen::VectorXi::Constant(1, 1);
      b.mult = Eigen::VectorXi::Constant(1, -1);
      P.push_back(a.pos);
      N.push_back(b.pos);
      S.atoms.push_back(a);
      S.atoms.push_back(b);
    }
    auto conn = minimal_connection(P, N);
    auto sol = solve_integral(S, Exponent());
    CHECK(sol.value == doctest::Approx(conn.length).epsilon(1e-8));
  }
}

TEST_CASE("solve_integral monotone in p with sandwich") {
  auto S = triangle2();
  double v1 = solve_integral(S, Exponent::rational(1, 1)).value;
  double v2 = solve_integral(S, Exponent()).value;
  double vi = solve_integral(S, Exponent::infinity()).value;
  CHECK(v1 >= v2 - 1e-9);
  CHECK(v2 >= vi - 1e-9);
  CHECK(v1 <= 2.0 * vi + 1e-9);          // k^{1/p} = 2 at p=1
  CHECK(v2 <= std::sqrt(2.0) * vi + 1e-9);
}

TEST_CASE("grid oracle brackets solve_integral") {
  auto S = triangle2();
  auto g = grid_for(S, 65, 16);
  double fermat = std::sqrt(3.0);
  double oi = grid_local_search_oracle(S, Exponent::infinity(), g);
  CHECK(oi >= fermat - 1e-9);
  CHECK(oi <= fermat * 1.05);
  double o1 = grid_local_search_oracle(S, Exponent::rational(1, 1), g);
  CHECK(o1 >= 2.0 - 3.0 * g.spacing());  // snapping can shorten each pair
  CHECK(o1 <= 2.0 * g.distortion() + 0.05);

  auto D = dipole1({-0.3, 0.1}, {0.6, 0.2});
  auto gd = grid_for(D, 65, 16);
  double od = grid_local_search_oracle(D, Exponent::infinity(), gd);
  double len = (D.atoms[0].pos - D.atoms[1].pos).norm();
  CHECK(od >= len - 2 * gd.spacing());
  CHECK(od <= len * gd.distortion() + 2 * gd.spacing());
}

TEST_CASE("theoremE on dipole and triangle") {
  auto D = dipole1({-0.4, 0.0}, {0.5, 0.3});
  auto gd = grid_for(D, 65, 16);
  auto rd = verify_theoremE(D, Exponent(), gd);
  CHECK(rd.ok);
  CHECK(rd.factor == doctest::Approx(1.0));  // k = 1
  CHECK(std::abs(rd.p_integral - rd.p_normal) <= rd.p_normal * 0.025 + 1e-9);

  auto S = triangle2();
  auto g = grid_for(S, 49, 16);
  NormalOptions no;
  no.tol = 1e-4;
  auto rt = verify_theoremE(S, Exponent::infinity(), g, no);
  CHECK(rt.ok);
  CHECK(rt.factor == doctest::Approx(2.0));  // min(2*2 - 1, k) = k = 2
  CHECK(rt.ratio > 0.9);

  auto r1 = verify_theoremE(S, Exponent::rational(1, 1), g);
  CHECK(r1.ok);
  CHECK(r1.factor == doctest::Approx(1.0));  // p = 1
}

TEST_CASE("pentagon strict gap at p=inf") {
  auto S = pentagon4();
  auto iz = solve_integral(S, Exponent::infinity());
  // frozen oracle value for the circumradius-1 pentagon
  CHECK(iz.value == doctest::Approx(4.574329).epsilon(2e-4));
  auto g = grid_for(S, 97, 16);
  NormalOptions o;
  o.tol = 2e-3;
  o.throw_on_gap = false;
  auto nr = solve_normal(S, Exponent::infinity(), g, o);
  CHECK(nr.value < iz.value);  // strict inequality, wide margin
  CHECK(iz.value - nr.value > nr.distortion_band + nr.gap);
}
