#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "plateau/exponent.hpp"
#include "plateau/norms.hpp"

using namespace plateau;

TEST_CASE("exponent arithmetic is exact") {
  CHECK(Exponent::parse("2").conjugate() == Exponent::rational(2, 1));
  CHECK(Exponent::parse("4").conjugate() == Exponent::rational(4, 3));
  CHECK(Exponent::parse("1").conjugate().is_inf());
  CHECK(Exponent::infinity().conjugate().is_one());
  CHECK(Exponent::parse("1.5") == Exponent::rational(3, 2));
  CHECK(Exponent::parse("3/2").conjugate() == Exponent::rational(3, 1));
  CHECK(Exponent::rational(3, 2).k_factor(4) == doctest::Approx(std::pow(4.0, 1.0 / 3.0)));
  CHECK(Exponent::infinity().k_factor(7) == 7.0);
  CHECK(Exponent::rational(1, 1).k_factor(7) == 1.0);
  CHECK_THROWS_AS(Exponent::parse("0.5"), std::invalid_argument);
}

TEST_CASE("lp norms: frozen values and scalar-block reduction") {
  Eigen::VectorXd x(2);
  x << 3.0, 4.0;
  CHECK(lp_norm(x, Exponent::rational(2, 1)) == doctest::Approx(5.0));
  CHECK(lp_norm(x, Exponent::rational(1, 1)) == doctest::Approx(7.0));
  CHECK(lp_norm(x, Exponent::infinity()) == doctest::Approx(4.0));
  CHECK(lp_norm(x, Exponent::rational(3, 1)) == doctest::Approx(std::cbrt(27.0 + 64.0)));

  // block=2 on (3,4) is a single complex modulus, so all p agree
  CHECK(lp_norm(x, Exponent::rational(1, 1), 2) == doctest::Approx(5.0));
  CHECK(lp_norm(x, Exponent::infinity(), 2) == doctest::Approx(5.0));

  Eigen::VectorXcd z(2);
  z << std::complex<double>(3.0, 4.0), std::complex<double>(0.0, 12.0);
  CHECK(lp_norm(z, Exponent::rational(1, 1)) == doctest::Approx(17.0));
  CHECK(lp_norm(z, Exponent::rational(2, 1)) == doctest::Approx(13.0));
}

TEST_CASE("lq ball projection: closed forms vs generic bisection") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const char* qs : {"1", "2", "inf", "3", "3/2", "7/5"}) {
    Exponent q = Exponent::parse(qs);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd x(6);
      for (int i = 0; i < 6; ++i) x[i] = 3.0 * gauss(rng);
      Eigen::VectorXd y = x;
      project_lq_ball(y, q, 1.0);
      CHECK(lp_norm(y, q) <= 1.0 + 1e-8);
      // projection optimality: no feasible point on the segment toward a
      // random feasible z is closer to x
      Eigen::VectorXd z(6);
      for (int i = 0; i < 6; ++i) z[i] = gauss(rng);
      if (lp_norm(z, q) > 1.0) z /= (lp_norm(z, q) * 1.0000001);
      for (double t : {0.1, 0.5, 0.9}) {
        Eigen::VectorXd w = (1 - t) * y + t * z;
        CHECK((x - y).norm() <= (x - w).norm() + 1e-7);
      }
    }
  }
}

TEST_CASE("prox of sigma*lp via Moreau") {
  Eigen::VectorXd x(3);
  x << 5.0, -1.0, 0.5;
  // p=1: soft threshold by sigma
  Eigen::VectorXd y = prox_lp_norm(x, Exponent::rational(1, 1), 1.0);
  CHECK(y[0] == doctest::Approx(4.0));
  CHECK(y[1] == doctest::Approx(0.0));
  CHECK(y[2] == doctest::Approx(0.0));
  // p=2: radial shrink by sigma
  Eigen::VectorXd y2 = prox_lp_norm(x, Exponent::rational(2, 1), 1.0);
  double r = x.norm();
  CHECK((y2 - x * (r - 1.0) / r).norm() == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("comass: frozen planar examples") {
  // identity 2x2: comass_p = sup_{|tau|=1} ||tau||_q
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  CHECK(comass(I, Exponent::infinity()).value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  CHECK(comass(I, Exponent::rational(2, 1)).value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(comass(I, Exponent::rational(1, 1)).value == doctest::Approx(1.0).epsilon(1e-6));
  // p=4 -> q=4/3: max of ||tau||_{4/3} on the circle is 2^{1-3/4}
  CHECK(comass(I, Exponent::rational(4, 1)).value ==
        doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-6));

  // rank-1 W = z tau^T: comass_p = ||z||_q
  Eigen::VectorXd zc(3);
  zc << 1.0, -2.0, 0.5;
  Eigen::VectorXd tau(2);
  tau << std::cos(0.3), std::sin(0.3);
  Eigen::MatrixXd W = zc * tau.transpose();
  for (const char* ps : {"1", "2", "4", "inf"}) {
    Exponent p = Exponent::parse(ps);
    CHECK(comass(W, p).value == doctest::Approx(lp_norm(zc, p.conjugate())).epsilon(1e-6));
  }
}

TEST_CASE("comass certificate brackets dense sampling") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd W(3, 2);
    for (int i = 0; i < 6; ++i) W(i / 2, i % 2) = gauss(rng);
    Exponent p = trial % 2 ? Exponent::rational(3, 1) : Exponent::infinity();
    auto res = comass(W, p);
    double dense = 0.0;
    for (int j = 0; j < 200000; ++j) {
      double t = M_PI * j / 200000.0;
      Eigen::VectorXd tau(2);
      tau << std::cos(t), std::sin(t);
      dense = std::max(dense, lp_norm(Eigen::VectorXd(W * tau), p.conjugate()));
    }
    CHECK(res.lower <= dense + 1e-9);
    CHECK(res.value >= dense - 1e-9);
    CHECK(res.value - res.lower <= 1e-6 * std::max(1.0, res.value));
  }
}

TEST_CASE("mass p=2 equals the trace norm") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd v(4, 2);
    for (int i = 0; i < 8; ++i) v(i / 2, i % 2) = gauss(rng);
    auto res = mass(v, Exponent::rational(2, 1));
    double trace = Eigen::JacobiSVD<Eigen::MatrixXd>(v).singularValues().sum();
    CHECK(res.value == doctest::Approx(trace).epsilon(1e-9));
    CHECK(res.upper - res.lower <= 1e-6 * std::max(1.0, trace));
  }
}

TEST_CASE("mass p=1 sums per-block trace norms") {
  Eigen::MatrixXd v(4, 2);
  v << 1, 0, 0, 1,  // rotation block: singular values 1,1
      2, 0, 0, 0;   // rank-1 block
  auto res = mass(v, Exponent::rational(1, 1), 2);
  CHECK(res.value == doctest::Approx(2.0 + 2.0).epsilon(1e-9));
}

TEST_CASE("mass p=inf of the identity, with certificates") {
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  auto res = mass(I, Exponent::infinity());
  CHECK(res.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-5));
  CHECK(res.upper - res.lower <= 2e-6 * res.value);
  // dual feasibility and attainment
  CHECK(comass(res.dual, Exponent::infinity()).value <= 1.0 + 1e-6);
  CHECK((res.dual.array() * I.array()).sum() == doctest::Approx(res.lower).epsilon(1e-9));
  // primal decomposition reconstructs I
  Eigen::MatrixXd rec = Eigen::MatrixXd::Zero(2, 2);
  double cost = 0.0;
  for (const auto& t : res.decomposition) {
    rec += t.z * t.tau.transpose();
    cost += lp_norm(t.z, Exponent::infinity());
  }
  CHECK((rec - I).norm() <= 1e-6);
  CHECK(cost == doctest::Approx(res.upper).epsilon(1e-6));
}

TEST_CASE("mass-comass duality holds across p for random 2-column matrices") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const char* ps : {"1", "4/3", "2", "3", "inf"}) {
    Exponent p = Exponent::parse(ps);
    for (int trial = 0; trial < 8; ++trial) {
      Eigen::MatrixXd v(3, 2);
      for (int i = 0; i < 6; ++i) v(i / 2, i % 2) = gauss(rng);
      auto res = mass(v, p);
      CHECK(res.lower <= res.upper + 1e-12);
      CHECK(res.upper - res.lower <= 1e-5 * std::max(1.0, res.value));
      // pairing bound: <W, v> <= comass_p(W) * mass_p(v) for the dual witness
      CHECK(comass(res.dual, p).value <= 1.0 + 1e-5);
      // reconstruct primal
      Eigen::MatrixXd rec = Eigen::MatrixXd::Zero(3, 2);
      double cost = 0.0;
      for (const auto& t : res.decomposition) {
        rec += t.z * t.tau.transpose();
        cost += lp_norm(t.z, p);
      }
      CHECK((rec - v).norm() <= 1e-5 * std::max(1.0, v.norm()));
      CHECK(cost <= res.upper + 1e-9);
    }
  }
}

TEST_CASE("mass monotone in p and within the k-factor sandwich") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Exponent ps[] = {Exponent::rational(1, 1), Exponent::rational(3, 2),
                   Exponent::rational(2, 1), Exponent::rational(4, 1),
                   Exponent::infinity()};
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd v(3, 2);
    for (int i = 0; i < 6; ++i) v(i / 2, i % 2) = gauss(rng);
    double prev = 1e300;
    double m1 = mass(v, ps[0]).value;
    for (const auto& p : ps) {
      double m = mass(v, p).value;
      CHECK(m <= prev + 1e-5);  // p -> mass_p is nonincreasing
      CHECK(m1 <= p.k_factor(3) * m + 1e-5);
      prev = m;
    }
  }
}

TEST_CASE("nuclear norm of complex matrices") {
  // unitary row scaling leaves the p=2 value at the real trace norm
  Eigen::MatrixXcd A(2, 2);
  A << std::complex<double>(1, 0), std::complex<double>(0, 0),
      std::complex<double>(0, 0), std::complex<double>(0, 1);
  // rows are e1 and i*e2; real embedding has singular values 1,1
  CHECK(nuclear_norm(A, Exponent::rational(2, 1)).value == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(nuclear_norm(A, Exponent::rational(1, 1)).value == doctest::Approx(2.0).epsilon(1e-8));
  // p=inf: rows share a direction profile, one rank-1 term suffices
  Eigen::MatrixXcd B(2, 2);
  B << std::complex<double>(1, 0), std::complex<double>(2, 0),
      std::complex<double>(3, 0), std::complex<double>(6, 0);
  CHECK(nuclear_norm(B, Exponent::infinity()).value ==
        doctest::Approx(3.0 * std::sqrt(5.0)).epsilon(1e-5));
}

TEST_CASE("hodge star in the plane") {
  Eigen::MatrixXd w(2, 2);
  w << 1.0, 2.0,   // dx1 + 2 dx2 -> e2 - 2 e1 = (-2, 1)
      -3.0, 0.5;
  Eigen::MatrixXd s = hodge_star_rows_2d(w);
  CHECK(s(0, 0) == doctest::Approx(-2.0));
  CHECK(s(0, 1) == doctest::Approx(1.0));
  CHECK(s(1, 0) == doctest::Approx(-0.5));
  CHECK(s(1, 1) == doctest::Approx(-3.0));
  // isometry and star-star = -1 on 1-(co)vectors in d=2
  CHECK(s.row(0).norm() == doctest::Approx(w.row(0).norm()));
  CHECK((hodge_star_rows_2d(hodge_star_rows_2d(w)) + w).norm() == doctest::Approx(0.0));
}

TEST_CASE("hodge star laws for general multivectors") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int d : {2, 3}) {
    for (int m = 0; m <= d; ++m) {
      int cols = 1;
      for (int i = 0; i < m; ++i) cols = cols * (d - i) / (i + 1);
      Multivector x;
      x.d = d;
      x.m = m;
      x.covector = true;
      x.comp = Eigen::MatrixXd(2, cols);
      for (int i = 0; i < x.comp.size(); ++i) x.comp(i / cols, i % cols) = gauss(rng);
      Multivector sx = hodge_star(x);
      CHECK(sx.m == d - m);
      CHECK(sx.covector == false);
      CHECK(sx.comp.norm() == doctest::Approx(x.comp.norm()));  // isometry
      Multivector sxc = sx;
      sxc.covector = true;  // apply star twice on the same grading
      Multivector ssx = hodge_star(sxc);
      double sign = ((m * (d - m)) % 2 == 0) ? 1.0 : -1.0;
      CHECK((ssx.comp - sign * x.comp).norm() == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("duality between comass and mass on the pairing") {
  // <W, v> <= comass_p(W) mass_p(v), tight for the dual witness
  std::mt19937_64 rng(29);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd v(2, 2), W(2, 2);
    for (int i = 0; i < 4; ++i) {
      v(i / 2, i % 2) = gauss(rng);
      W(i / 2, i % 2) = gauss(rng);
    }
    Exponent p = Exponent::rational(3, 1);
    double pairing = (W.array() * v.array()).sum();
    CHECK(pairing <= comass(W, p).value * mass(v, p).value + 1e-6);
  }
}
