#include "plateau/norms.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdio>
#include <cstdlib>
#include <numeric>

namespace plateau {

namespace {

constexpr double kPi = 3.14159265358979323846;

double golden_max(const std::function<double(double)>& f, double a, double b,
                  double tol, double* arg = nullptr) {
  const double gr = 0.6180339887498949;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    }
  }
  double xm = 0.5 * (a + b), fm = f(xm);
  if (arg) *arg = xm;
  return std::max(fm, std::max(f1, f2));
}

}  // namespace

Eigen::VectorXd block_magnitudes(const Eigen::VectorXd& x, int block) {
  if (block == 1) return x.cwiseAbs();
  const int n = static_cast<int>(x.size()) / block;
  Eigen::VectorXd m(n);
  for (int i = 0; i < n; ++i) m[i] = x.segment(i * block, block).norm();
  return m;
}

double lp_norm(const Eigen::VectorXd& x, const Exponent& p, int block) {
  Eigen::VectorXd m = block_magnitudes(x, block);
  if (p.is_inf()) return m.size() ? m.maxCoeff() : 0.0;
  if (p.is_one()) return m.sum();
  if (p.is_two()) return m.norm();
  double mx = m.size() ? m.maxCoeff() : 0.0;
  if (mx == 0.0) return 0.0;
  double pv = p.value(), s = 0.0;
  for (int i = 0; i < m.size(); ++i) s += std::pow(m[i] / mx, pv);
  return mx * std::pow(s, 1.0 / pv);
}

double lp_norm(const Eigen::VectorXcd& z, const Exponent& p) {
  Eigen::VectorXd x(2 * z.size());
  for (int i = 0; i < z.size(); ++i) {
    x[2 * i] = z[i].real();
    x[2 * i + 1] = z[i].imag();
  }
  return lp_norm(x, p, 2);
}

namespace {

// Projection of nonnegative magnitudes onto the lq ball of radius r.
// Returns the projected magnitudes.
Eigen::VectorXd project_magnitudes(const Eigen::VectorXd& m, const Exponent& q, double r) {
  const int n = static_cast<int>(m.size());
  Eigen::VectorXd y = m;
  if (q.is_inf()) {
    for (int i = 0; i < n; ++i) y[i] = std::min(m[i], r);
    return y;
  }
  if (q.is_two()) {
    double nm = m.norm();
    if (nm > r) y *= r / nm;
    return y;
  }
  if (q.is_one()) {
    if (m.sum() <= r) return y;
    std::vector<double> s(m.data(), m.data() + n);
    std::sort(s.begin(), s.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    for (int j = 0; j < n; ++j) {
      cum += s[j];
      double t = (cum - r) / (j + 1);
      if (j + 1 == n || s[j + 1] <= t) {
        theta = t;
        break;
      }
    }
    for (int i = 0; i < n; ++i) y[i] = std::max(m[i] - theta, 0.0);
    return y;
  }
  // general finite q > 1: boundary solution y_i + mu*q*y_i^{q-1} = m_i,
  // mu chosen so that ||y||_q = r.  Safeguarded Newton inside and out.
  const double qv = q.value();
  auto norm_q = [&](const Eigen::VectorXd& v) {
    double mx = v.maxCoeff();
    if (mx == 0) return 0.0;
    double s = 0;
    for (int i = 0; i < v.size(); ++i) s += std::pow(v[i] / mx, qv);
    return mx * std::pow(s, 1.0 / qv);
  };
  if (norm_q(y) <= r) return y;
  auto solve_row = [&](double mi, double mu) {
    if (mi <= 0) return 0.0;
    double lo = 0.0, hi = mi, x = mi;
    for (int it = 0; it < 60; ++it) {
      double xq1 = std::pow(x, qv - 1.0);
      double f = x + mu * qv * xq1 - mi;
      (f > 0 ? hi : lo) = x;
      double df = 1.0 + mu * qv * (qv - 1.0) * (x > 0 ? xq1 / x : 0.0);
      double step = f / df;
      double xn = x - step;
      if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
      if (std::abs(xn - x) <= 1e-15 * mi) return xn;
      x = xn;
    }
    return x;
  };
  // g(mu) = sum y_i(mu)^q - r^q is decreasing; Newton with a bracket
  const double rq = std::pow(r, qv);
  double mu_lo = 0.0, mu_hi = 1e-6;
  auto eval = [&](double mu) {
    double s = 0.0, ds = 0.0;
    for (int i = 0; i < n; ++i) {
      y[i] = solve_row(m[i], mu);
      if (y[i] <= 0) continue;
      double yq1 = std::pow(y[i], qv - 1.0);
      s += yq1 * y[i];
      // dy/dmu = -q y^{q-1} / (1 + mu q (q-1) y^{q-2})
      ds += qv * yq1 * (-qv * yq1) / (1.0 + mu * qv * (qv - 1.0) * yq1 / y[i]);
    }
    return std::pair<double, double>(s - rq, ds);
  };
  while (eval(mu_hi).first > 0) {
    mu_lo = mu_hi;
    mu_hi *= 8.0;
  }
  double mu = 0.5 * (mu_lo + mu_hi);
  for (int it = 0; it < 60; ++it) {
    auto [g, dg] = eval(mu);
    if (std::abs(g) <= 1e-13 * rq) break;
    (g > 0 ? mu_lo : mu_hi) = mu;
    double mun = dg != 0.0 ? mu - g / dg : mu;
    if (!(mun > mu_lo && mun < mu_hi)) mun = 0.5 * (mu_lo + mu_hi);
    if (mun == mu) break;
    mu = mun;
  }
  eval(mu);
  return y;
}

}  // namespace

void project_lq_ball(Eigen::VectorXd& x, const Exponent& q, double r, int block) {
  Eigen::VectorXd m = block_magnitudes(x, block);
  Eigen::VectorXd y = project_magnitudes(m, q, r);
  const int n = static_cast<int>(m.size());
  for (int i = 0; i < n; ++i) {
    double s = m[i] > 0 ? y[i] / m[i] : 0.0;
    x.segment(i * block, block) *= s;
  }
}

Eigen::VectorXd prox_lp_norm(const Eigen::VectorXd& x, const Exponent& p, double sigma,
                             int block) {
  Eigen::VectorXd q = x;
  project_lq_ball(q, p.conjugate(), sigma, block);
  return x - q;
}

// ---- comass ----------------------------------------------------------------

namespace {

struct DirMax {
  Eigen::VectorXd tau;
  double g;
};

double eval_dir(const Eigen::MatrixXd& W, const Eigen::VectorXd& tau, const Exponent& q,
                int block) {
  return lp_norm(W * tau, q, block);
}

// All refined local maxima of t -> ||W tau(t)||_q over the half circle (d=2).
std::vector<DirMax> comass_maxima_2d(const Eigen::MatrixXd& W, const Exponent& q,
                                     int block, int samples) {
  const int N = samples;
  std::vector<double> g(N);
  for (int j = 0; j < N; ++j) {
    double t = kPi * j / N;
    g[j] = eval_dir(W, Eigen::Vector2d(std::cos(t), std::sin(t)), q, block);
  }
  std::vector<DirMax> out;
  for (int j = 0; j < N; ++j) {
    double gp = g[(j + N - 1) % N], gn = g[(j + 1) % N];
    if (g[j] >= gp && g[j] >= gn && (g[j] > gp || g[j] > gn || g[j] > 0)) {
      double a = kPi * (j - 1) / N, b = kPi * (j + 1) / N;
      double targ;
      double gv = golden_max(
          [&](double t) {
            return eval_dir(W, Eigen::Vector2d(std::cos(t), std::sin(t)), q, block);
          },
          a, b, 1e-12, &targ);
      out.push_back({Eigen::Vector2d(std::cos(targ), std::sin(targ)), gv});
    }
  }
  std::sort(out.begin(), out.end(), [](const DirMax& a, const DirMax& b) { return a.g > b.g; });
  return out;
}

std::vector<Eigen::Vector3d> fibonacci_sphere(int n) {
  std::vector<Eigen::Vector3d> pts(n);
  const double ga = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / n;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    pts[i] = Eigen::Vector3d(r * std::cos(ga * i), r * std::sin(ga * i), z);
  }
  return pts;
}

std::vector<DirMax> comass_maxima_3d(const Eigen::MatrixXd& W, const Exponent& q,
                                     int block, int samples) {
  auto dirs = fibonacci_sphere(samples);
  std::vector<std::pair<double, int>> scored;
  scored.reserve(dirs.size());
  for (int i = 0; i < static_cast<int>(dirs.size()); ++i)
    scored.push_back({eval_dir(W, dirs[i], q, block), i});
  std::sort(scored.begin(), scored.end(), std::greater<>());
  std::vector<DirMax> out;
  int tries = std::min<int>(12, scored.size());
  for (int c = 0; c < tries; ++c) {
    Eigen::Vector3d u = dirs[scored[c].second];
    double rho = 2.4 / std::sqrt(static_cast<double>(samples));
    double best = scored[c].first;
    for (int round = 0; round < 48; ++round) {
      Eigen::Vector3d e1 = u.unitOrthogonal(), e2 = u.cross(e1);
      Eigen::Vector3d ubest = u;
      for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b) {
          Eigen::Vector3d cand = (u + rho * (a / 2.0) * e1 + rho * (b / 2.0) * e2).normalized();
          double gv = eval_dir(W, cand, q, block);
          if (gv > best) {
            best = gv;
            ubest = cand;
          }
        }
      u = ubest;
      rho *= 0.55;
    }
    out.push_back({u, best});
  }
  std::sort(out.begin(), out.end(), [](const DirMax& a, const DirMax& b) { return a.g > b.g; });
  // dedupe nearby directions
  std::vector<DirMax> ded;
  for (auto& m : out) {
    bool dup = false;
    for (auto& e : ded)
      if (std::abs(e.tau.dot(m.tau)) > 1.0 - 1e-8) dup = true;
    if (!dup) ded.push_back(m);
  }
  return ded;
}

std::vector<DirMax> comass_maxima(const Eigen::MatrixXd& W, const Exponent& p, int block,
                                  int samples) {
  Exponent q = p.conjugate();
  if (W.cols() == 2) return comass_maxima_2d(W, q, block, samples ? samples : 4096);
  if (W.cols() == 3) return comass_maxima_3d(W, q, block, samples ? samples : 8192);
  throw std::invalid_argument("comass: d must be 2 or 3");
}

double certified_factor(int d, int samples) {
  if (d == 2) {
    double h = kPi / (samples ? samples : 4096);
    return 1.0 / std::cos(0.5 * h);
  }
  double theta = 2.8 / std::sqrt(static_cast<double>(samples ? samples : 8192));
  return 1.0 / std::cos(theta);
}

}  // namespace

ComassResult comass(const Eigen::MatrixXd& W, const Exponent& p, int block, int samples) {
  if (W.norm() == 0.0) return {0.0, 0.0, Eigen::VectorXd::Zero(W.cols())};
  auto mx = comass_maxima(W, p, block, samples);
  double best = mx.empty() ? 0.0 : mx.front().g;
  Eigen::VectorXd tau = mx.empty() ? Eigen::VectorXd::Zero(W.cols()) : mx.front().tau;
  return {best * certified_factor(static_cast<int>(W.cols()), samples), best, tau};
}

// ---- mass ------------------------------------------------------------------

namespace {

// duality map: returns zeta with lp_norm(zeta, conj(e)) = 1 and <zeta, u> = lp_norm(u, e)
Eigen::VectorXd duality_map(const Eigen::VectorXd& u, const Exponent& q, int block) {
  Eigen::VectorXd m = block_magnitudes(u, block);
  const int n = static_cast<int>(m.size());
  double nq = lp_norm(u, q, block);
  Eigen::VectorXd zeta = Eigen::VectorXd::Zero(u.size());
  if (nq == 0) return zeta;
  if (q.is_one()) {
    for (int i = 0; i < n; ++i)
      if (m[i] > 0) zeta.segment(i * block, block) = u.segment(i * block, block) / m[i];
    return zeta;
  }
  if (q.is_inf()) {
    int imax = 0;
    m.maxCoeff(&imax);
    zeta.segment(imax * block, block) = u.segment(imax * block, block) / m[imax];
    return zeta;
  }
  double qv = q.value();
  for (int i = 0; i < n; ++i)
    if (m[i] > 0)
      zeta.segment(i * block, block) =
          std::pow(m[i] / nq, qv - 1.0) / m[i] * u.segment(i * block, block);
  return zeta;
}

MassResult mass_p1(const Eigen::MatrixXd& v, int block) {
  const int d = static_cast<int>(v.cols());
  const int n = static_cast<int>(v.rows()) / block;
  MassResult r;
  r.dual = Eigen::MatrixXd::Zero(v.rows(), d);
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXd A = v.middleRows(j * block, block);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    total += svd.singularValues().sum();
    r.dual.middleRows(j * block, block) = svd.matrixU() * svd.matrixV().transpose();
    for (int i = 0; i < svd.singularValues().size(); ++i) {
      double s = svd.singularValues()[i];
      if (s <= 0) continue;
      RankOneTerm t;
      t.z = Eigen::VectorXd::Zero(v.rows());
      t.z.segment(j * block, block) = s * svd.matrixU().col(i);
      t.tau = svd.matrixV().col(i);
      r.decomposition.push_back(std::move(t));
    }
  }
  r.value = r.lower = r.upper = total;
  return r;
}

MassResult mass_p2(const Eigen::MatrixXd& v) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
  MassResult r;
  double total = svd.singularValues().sum();
  r.value = r.lower = r.upper = total;
  r.dual = svd.matrixU() * svd.matrixV().transpose();
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    double s = svd.singularValues()[i];
    if (s <= 0) continue;
    r.decomposition.push_back({s * svd.matrixU().col(i), svd.matrixV().col(i)});
  }
  return r;
}

// mass_1 of a matrix, closed form, used to bound residual cost from above
double mass1_value(const Eigen::MatrixXd& v, int block) {
  const int n = static_cast<int>(v.rows()) / block;
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXd A = v.middleRows(j * block, block);
    if (block == 1)
      total += A.norm();
    else {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
      total += svd.singularValues().sum();
    }
  }
  return total;
}

// primal upper bound from the active directions of the dual candidate
double active_decomposition(const Eigen::MatrixXd& v, const Eigen::MatrixXd& W,
                            const Exponent& p, int block,
                            const std::vector<DirMax>& maxima,
                            std::vector<RankOneTerm>* out) {
  Exponent q = p.conjugate();
  if (maxima.empty()) return mass1_value(v, block);
  double gmax = maxima.front().g;
  std::vector<Eigen::VectorXd> zdirs, taus;
  for (const auto& m : maxima) {
    if (m.g < (1.0 - 1e-6) * gmax) break;
    Eigen::VectorXd u = W * m.tau;
    Eigen::VectorXd zeta = duality_map(u, q, block);  // ||zeta||_p = 1
    zdirs.push_back(zeta);
    taus.push_back(m.tau);
    if (q.is_inf()) {
      // the duality map is supported on one block; add per-block candidates
      Eigen::VectorXd mag = block_magnitudes(u, block);
      for (int i = 0; i < mag.size(); ++i) {
        if (mag[i] < (1.0 - 1e-9) * mag.maxCoeff() || mag[i] == 0) continue;
        Eigen::VectorXd zi = Eigen::VectorXd::Zero(u.size());
        zi.segment(i * block, block) = u.segment(i * block, block) / mag[i];
        zdirs.push_back(zi);
        taus.push_back(m.tau);
      }
    }
  }
  // nonnegative least squares for lambda: sum lambda_j z_j tau_j^T = v
  const int r = static_cast<int>(zdirs.size());
  const int nv = static_cast<int>(v.size());
  Eigen::MatrixXd A(nv, r);
  for (int j = 0; j < r; ++j) {
    Eigen::MatrixXd R1 = zdirs[j] * taus[j].transpose();
    A.col(j) = Eigen::Map<Eigen::VectorXd>(R1.data(), nv);
  }
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(v.data(), nv);
  std::vector<int> active(r);
  std::iota(active.begin(), active.end(), 0);
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(r);
  for (int pass = 0; pass < r + 2 && !active.empty(); ++pass) {
    Eigen::MatrixXd Aa(nv, active.size());
    for (size_t j = 0; j < active.size(); ++j) Aa.col(j) = A.col(active[j]);
    Eigen::VectorXd la = Aa.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
    bool neg = false;
    for (int j = static_cast<int>(active.size()) - 1; j >= 0; --j)
      if (la[j] < -1e-12) {
        active.erase(active.begin() + j);
        neg = true;
      }
    if (!neg) {
      lam.setZero();
      for (size_t j = 0; j < active.size(); ++j) lam[active[j]] = std::max(0.0, la[j]);
      break;
    }
  }
  Eigen::VectorXd resid = b - A * lam;
  Eigen::MatrixXd R = Eigen::Map<Eigen::MatrixXd>(resid.data(), v.rows(), v.cols());
  double upper = lam.sum() + mass1_value(R, block);
  if (out) {
    out->clear();
    for (int j = 0; j < r; ++j)
      if (lam[j] > 0) out->push_back({lam[j] * zdirs[j], taus[j]});
  }
  return upper;
}

// Remez-style polish: solve the KKT system of  max <W,v> s.t. comass_p(W) <= 1
// with active directions tau(theta_j).  Unknowns (W, lambda, theta); equations
//   v = sum_j lambda_j J_q(W tau_j) tau_j^T        (stationarity)
//   ||W tau_j||_q = 1                              (active constraints)
//   <J_q(W tau_j), W tau'_j> = 0                   (tau_j is a local max)
// Finite-difference Jacobian; the system is tiny (kb*2 + 2r).
bool kkt_debug() {
  static bool on = std::getenv("PLATEAU_MASS_DEBUG") != nullptr;
  return on;
}

bool kkt_polish(const Eigen::MatrixXd& v, const Exponent& p, int block,
                Eigen::MatrixXd& W, Eigen::VectorXd& lam, Eigen::VectorXd& th,
                const std::vector<Eigen::VectorXd>* frozen = nullptr) {
  const int kb = static_cast<int>(v.rows());
  const int r = static_cast<int>(lam.size());
  const int nW = kb * 2, n = nW + 2 * r;
  Exponent q = p.conjugate();
  double scale = v.norm();
  // with frozen contact vectors the active constraint ||W tau_j||_q = 1 is
  // written through the contact <zeta_j, W tau_j> = 1, which is smooth even
  // for q = 1 where the duality map is piecewise constant
  auto residual = [&](const Eigen::VectorXd& x) {
    Eigen::MatrixXd Wx = Eigen::Map<const Eigen::MatrixXd>(x.data(), kb, 2);
    Eigen::VectorXd F(n);
    Eigen::MatrixXd rec = Eigen::MatrixXd::Zero(kb, 2);
    for (int j = 0; j < r; ++j) {
      double lj = x[nW + j], tj = x[nW + r + j];
      Eigen::Vector2d tau(std::cos(tj), std::sin(tj)), taup(-std::sin(tj), std::cos(tj));
      Eigen::VectorXd u = Wx * tau;
      Eigen::VectorXd zeta = frozen ? (*frozen)[j] : duality_map(u, q, block);
      rec += lj * zeta * tau.transpose();
      F[nW + j] = frozen ? zeta.dot(u) - 1.0 : lp_norm(u, q, block) - 1.0;
      F[nW + r + j] = zeta.dot(Wx * taup);
    }
    Eigen::MatrixXd R1 = v - rec;
    F.head(nW) = Eigen::Map<Eigen::VectorXd>(R1.data(), nW);
    return F;
  };
  Eigen::VectorXd x(n);
  Eigen::Map<Eigen::MatrixXd>(x.data(), kb, 2) = W;
  x.segment(nW, r) = lam;
  x.segment(nW + r, r) = th;
  double fnorm = residual(x).norm();
  for (int it = 0; it < 50 && fnorm > 1e-12 * std::max(1.0, scale); ++it) {
    Eigen::VectorXd F = residual(x);
    Eigen::MatrixXd J(n, n);
    for (int c = 0; c < n; ++c) {
      double h = 1e-7 * std::max(1.0, std::abs(x[c]));
      Eigen::VectorXd xp = x;
      xp[c] += h;
      J.col(c) = (residual(xp) - F) / h;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    Eigen::VectorXd dx;
    if (lu.isInvertible()) {
      dx = lu.solve(-F);
    } else {
      // rank-deficient active set: fall back to a least-squares Gauss-Newton
      // step; acceptance is still gated on the residual dropping to zero
      if (kkt_debug()) fprintf(stderr, "[kkt] singular jacobian r=%d it=%d fnorm=%g\n", r, it, fnorm);
      dx = J.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).setThreshold(1e-10).solve(-F);
    }
    double step = 1.0;
    bool ok = false;
    for (int ls = 0; ls < 12; ++ls, step *= 0.5) {
      Eigen::VectorXd xn = x + step * dx;
      double fn = residual(xn).norm();
      if (fn < fnorm * (1.0 - 0.25 * step) || fn < 1e-13 * std::max(1.0, scale)) {
        x = xn;
        fnorm = fn;
        ok = true;
        break;
      }
    }
    if (!ok) break;
  }
  if (fnorm > 1e-10 * std::max(1.0, scale)) {
    if (kkt_debug()) fprintf(stderr, "[kkt] stalled r=%d fnorm=%g\n", r, fnorm);
    return false;
  }
  W = Eigen::Map<const Eigen::MatrixXd>(x.data(), kb, 2);
  lam = x.segment(nW, r);
  th = x.segment(nW + r, r);
  for (int j = 0; j < r; ++j)
    if (lam[j] < -1e-9) {
      if (kkt_debug()) fprintf(stderr, "[kkt] negative lambda r=%d lam=%g\n", r, lam[j]);
      return false;
    }
  return true;
}

// closed-form two-direction primal: for fixed angles (a, b) the constraint
// z1 tau_a^T + z2 tau_b^T = v determines (z1, z2); minimize the summed p-norm
// over the angle pair by grid search plus coordinate refinement.
struct PairSeed {
  double th1 = 0, th2 = 0;
  Eigen::VectorXd z1, z2;
  double cost = 0;
};

bool pair_search(const Eigen::MatrixXd& v, const Exponent& p, int block, PairSeed& out) {
  auto eval = [&](double a, double b, PairSeed* s) {
    if (std::abs(std::sin(b - a)) < 1e-7) return 1e300;
    Eigen::Matrix2d T;
    T << std::cos(a), std::cos(b), std::sin(a), std::sin(b);
    Eigen::MatrixXd Z = T.inverse() * v.transpose();  // rows are z1^T, z2^T
    Eigen::VectorXd z1 = Z.row(0).transpose(), z2 = Z.row(1).transpose();
    double c = lp_norm(z1, p, block) + lp_norm(z2, p, block);
    if (s) {
      s->th1 = a;
      s->th2 = b;
      s->z1 = z1;
      s->z2 = z2;
      s->cost = c;
    }
    return c;
  };
  const int N = 72;
  double ba = 0, bb = 0, bc = 1e300;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      double a = kPi * i / N, b = kPi * j / N;
      double c = eval(a, b, nullptr);
      if (c < bc) {
        bc = c;
        ba = a;
        bb = b;
      }
    }
  if (bc >= 1e300) return false;
  double h = kPi / N;
  for (int sweep = 0; sweep < 8; ++sweep) {
    double na;
    golden_max([&](double a) { return -eval(a, bb, nullptr); }, ba - h, ba + h, 1e-13, &na);
    if (eval(na, bb, nullptr) < bc) ba = na;
    double nb;
    golden_max([&](double b) { return -eval(ba, b, nullptr); }, bb - h, bb + h, 1e-13, &nb);
    if (eval(ba, nb, nullptr) < bc) bb = nb;
    bc = eval(ba, bb, nullptr);
    h *= 0.35;
  }
  eval(ba, bb, &out);
  return true;
}

// minimal dense two-phase revised simplex with Bland's rule:
// min c^T x  s.t.  A x = b, x >= 0.  Sizes here are tiny (m <= 2k).
bool simplex_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b0, const Eigen::VectorXd& c,
                Eigen::VectorXd& x, Eigen::VectorXd& y) {
  const int m = static_cast<int>(A.rows()), n = static_cast<int>(A.cols());
  Eigen::MatrixXd Af(m, n + m);
  Eigen::VectorXd b = b0;
  Eigen::VectorXd flip = Eigen::VectorXd::Ones(m);
  Af.leftCols(n) = A;
  Af.rightCols(m).setZero();
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0) {
      Af.row(i) = -Af.row(i);
      b[i] = -b[i];
      flip[i] = -1.0;
    }
    Af(i, n + i) = 1.0;
  }
  std::vector<int> basis(m);
  std::iota(basis.begin(), basis.end(), n);
  Eigen::VectorXd xB = b;
  auto run = [&](const Eigen::VectorXd& cost, int ncols) {
    for (int iter = 0; iter < 50000; ++iter) {
      Eigen::MatrixXd B(m, m);
      Eigen::VectorXd cB(m);
      for (int i = 0; i < m; ++i) {
        B.col(i) = Af.col(basis[i]);
        cB[i] = cost[basis[i]];
      }
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
      y = Eigen::PartialPivLU<Eigen::MatrixXd>(B.transpose()).solve(cB);
      int enter = -1;
      for (int j = 0; j < ncols; ++j) {
        bool basic = false;
        for (int i = 0; i < m; ++i) basic |= basis[i] == j;
        if (basic) continue;
        if (cost[j] - y.dot(Af.col(j)) < -1e-9) {
          enter = j;  // Bland: first improving index
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::VectorXd w = lu.solve(Af.col(enter));
      int leave = -1;
      double best = 1e300;
      for (int i = 0; i < m; ++i)
        if (w[i] > 1e-11) {
          double ratio = xB[i] / w[i];
          if (ratio < best - 1e-12 ||
              (ratio < best + 1e-12 && (leave < 0 || basis[i] < basis[leave]))) {
            best = ratio;
            leave = i;
          }
        }
      if (leave < 0) return false;  // unbounded
      xB -= best * w;
      xB[leave] = best;
      xB = xB.cwiseMax(0.0);
      basis[leave] = enter;
    }
    return false;
  };
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n + m);
  c1.tail(m).setOnes();
  if (!run(c1, n + m)) return false;
  double art = 0;
  for (int i = 0; i < m; ++i)
    if (basis[i] >= n) art += xB[i];
  if (art > 1e-7 * (1.0 + b.norm())) return false;
  // pivot leftover zero artificials out of the basis where possible
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    Eigen::MatrixXd B(m, m);
    for (int t = 0; t < m; ++t) B.col(t) = Af.col(basis[t]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    for (int j = 0; j < n; ++j) {
      bool basic = false;
      for (int t = 0; t < m; ++t) basic |= basis[t] == j;
      if (basic) continue;
      Eigen::VectorXd w = lu.solve(Af.col(j));
      if (std::abs(w[i]) > 1e-7) {
        basis[i] = j;
        break;
      }
    }
  }
  Eigen::VectorXd c2 = Eigen::VectorXd::Zero(n + m);
  c2.head(n) = c;
  if (!run(c2, n)) return false;
  x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) x[basis[i]] = xB[i];
  y = y.cwiseProduct(flip);  // duals of the original (unflipped) rows
  return true;
}

struct MassAtom {
  Eigen::VectorXd zeta;  // ||zeta||_p = 1
  double theta = 0;
};

// Column generation on rank-one atoms zeta tau^T: the restricted master is an
// LP whose duals give a candidate comass form W; pricing = comass maxima of W.
void mass_colgen(const Eigen::MatrixXd& v, const Exponent& p, int block, double tol,
                 std::vector<MassAtom>& atoms, MassResult* r) {
  const int kb = static_cast<int>(v.rows());
  const int m = kb * 2;
  Exponent q = p.conjugate();
  // guaranteed-feasible seed: per-block SVD atoms (the mass_1 decomposition)
  for (int i = 0; i * block < kb; ++i) {
    Eigen::MatrixXd Vi = v.middleRows(i * block, block);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Vi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    for (int a = 0; a < svd.singularValues().size(); ++a) {
      if (svd.singularValues()[a] <= 1e-14 * v.norm()) continue;
      Eigen::VectorXd zeta = Eigen::VectorXd::Zero(kb);
      zeta.segment(i * block, block) = svd.matrixU().col(a);
      atoms.push_back({zeta, std::atan2(svd.matrixV()(1, a), svd.matrixV()(0, a))});
    }
  }
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(v.data(), m);
  for (int round = 0; round < 400; ++round) {
    const int n = static_cast<int>(atoms.size());
    Eigen::MatrixXd A(m, n);
    for (int j = 0; j < n; ++j) {
      Eigen::Vector2d tau(std::cos(atoms[j].theta), std::sin(atoms[j].theta));
      Eigen::MatrixXd col = atoms[j].zeta * tau.transpose();
      A.col(j) = Eigen::Map<Eigen::VectorXd>(col.data(), m);
    }
    Eigen::VectorXd x, y;
    if (!simplex_lp(A, b, Eigen::VectorXd::Ones(n), x, y)) {
      if (kkt_debug()) fprintf(stderr, "[cg] round=%d simplex failed n=%d\n", round, n);
      break;
    }
    r->iterations = round + 1;
    Eigen::VectorXd resid = b - A * x;
    Eigen::MatrixXd R = Eigen::Map<Eigen::MatrixXd>(resid.data(), kb, 2);
    double upper = x.sum() + mass1_value(R, block);
    if (upper < r->upper) {
      r->upper = upper;
      r->decomposition.clear();
      for (int j = 0; j < n; ++j)
        if (x[j] > 0)
          r->decomposition.push_back(
              {x[j] * atoms[j].zeta,
               Eigen::Vector2d(std::cos(atoms[j].theta), std::sin(atoms[j].theta))});
    }
    Eigen::MatrixXd W = Eigen::Map<Eigen::MatrixXd>(y.data(), kb, 2);
    auto cm = comass(W, p, block);
    if (cm.value > 0) {
      double lower = (W.array() * v.array()).sum() / cm.value;
      if (lower > r->lower) {
        r->lower = lower;
        r->dual = W / cm.value;
      }
    }
    if (kkt_debug())
      fprintf(stderr, "[cg] round=%d n=%d obj=%.9g up=%.9g lo=%.9g cm=%.12g\n", round, n,
              x.sum(), r->upper, r->lower, cm.value);
    if (r->upper - r->lower <= tol * std::max(r->upper, 1e-300)) return;
    auto mx = comass_maxima(W, p, block, 4096);
    bool grew = false;
    for (const auto& mxe : mx) {
      // every local maximum with ||W tau||_q > 1 is a violated column
      if (mxe.g <= 1.0 + 1e-12 && mxe.g < (1.0 - 1e-7) * mx.front().g) break;
      Eigen::VectorXd zeta = duality_map(W * mxe.tau, q, block);
      double t = std::atan2(mxe.tau[1], mxe.tau[0]);
      bool dup = false;
      for (const auto& a : atoms)
        if (std::abs(a.theta - t) < 1e-10 && (a.zeta - zeta).norm() < 1e-9) dup = true;
      if (!dup && static_cast<int>(atoms.size()) < 1200) {
        atoms.push_back({zeta, t});
        grew = true;
      }
    }
    if (!grew) {
      if (kkt_debug())
        fprintf(stderr, "[cg] stalled round=%d n=%d up=%.9g lo=%.9g cm=%.12g\n", round,
                static_cast<int>(atoms.size()), r->upper, r->lower, cm.value);
      return;
    }
  }
}

// Newton polish seeded from a set of weighted atoms; tries the exact KKT
// system, growing the active set from violated directions when needed.
void mass_polish(const Eigen::MatrixXd& v, const Exponent& p, int block,
                 const Eigen::MatrixXd& W0, std::vector<double> angs,
                 std::vector<double> lam0, std::vector<Eigen::VectorXd> zet0,
                 double tol, MassResult* r) {
  Exponent q = p.conjugate();
  const bool freeze = q.is_one();
  for (int attempt = 0; attempt < 4 && !angs.empty(); ++attempt) {
    Eigen::MatrixXd Wn = W0;
    Eigen::VectorXd lam = Eigen::Map<Eigen::VectorXd>(lam0.data(), lam0.size());
    Eigen::VectorXd th = Eigen::Map<Eigen::VectorXd>(angs.data(), angs.size());
    if (!kkt_polish(v, p, block, Wn, lam, th, freeze ? &zet0 : nullptr)) return;
    auto cm = comass(Wn, p, block);
    if (cm.value <= 0) return;
    double lo = (Wn.array() * v.array()).sum() / cm.value;
    if (lo > r->lower) {
      r->lower = lo;
      r->dual = Wn / cm.value;
    }
    Eigen::MatrixXd rec = Eigen::MatrixXd::Zero(v.rows(), 2);
    std::vector<RankOneTerm> pdec;
    double cost = 0.0;
    for (int j = 0; j < th.size(); ++j) {
      if (lam[j] <= 0) continue;
      Eigen::Vector2d tau(std::cos(th[j]), std::sin(th[j]));
      Eigen::VectorXd zeta = freeze ? zet0[j] : duality_map(Wn * tau, q, block);
      pdec.push_back({lam[j] * zeta, tau});
      rec += lam[j] * zeta * tau.transpose();
      cost += lam[j] * lp_norm(zeta, p, block);
    }
    double up = cost + mass1_value(v - rec, block);
    if (up < r->upper) {
      r->upper = up;
      r->decomposition = std::move(pdec);
    }
    if (r->upper - r->lower <= tol * std::max(r->upper, 1e-300)) return;
    // grow the active set from the maximizers the polish missed
    auto mx2 = comass_maxima(Wn, p, block, 4096);
    bool grew = false;
    for (const auto& mxe : mx2) {
      if (mxe.g < (1.0 - 1e-9) * mx2.front().g) break;
      double t = std::atan2(mxe.tau[1], mxe.tau[0]);
      Eigen::Vector2d tau = mxe.tau;
      if (t < 0) {  // canonicalize mod pi to match the active list
        t += M_PI;
        tau = -tau;
      }
      bool dup = false;
      for (double a : angs)
        if (std::abs(a - t) < 1e-6 || std::abs(std::abs(a - t) - M_PI) < 1e-6) dup = true;
      if (!dup) {
        angs.push_back(t);
        lam0.push_back(1e-3 * r->upper);
        zet0.push_back(duality_map(Wn * tau, q, block));
        grew = true;
      }
    }
    if (!grew) return;
  }
}

MassResult mass_general(const Eigen::MatrixXd& v, const Exponent& p, int block,
                        const MassOptions& opts) {
  const int d = static_cast<int>(v.cols());
  MassResult r;
  r.lower = 0.0;
  r.upper = mass1_value(v, block);
  r.dual = Eigen::MatrixXd::Zero(v.rows(), d);
  Exponent q = p.conjugate();

  // near-rank-one fast path
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  {
    Eigen::VectorXd u1 = sv[0] * svd.matrixU().col(0);
    double main = lp_norm(u1, p, block);
    double rest = 0.0;
    for (int i = 1; i < sv.size(); ++i) {
      Eigen::VectorXd ui = sv[i] * svd.matrixU().col(i);
      rest += lp_norm(ui, p, block);
    }
    // W = J_p(u1) tau1^T is comass-feasible; <W,v> = ||u1||_p by orthogonality
    Eigen::MatrixXd W1 = duality_map(u1, p, block) * svd.matrixV().col(0).transpose();
    r.lower = main;
    r.dual = W1;
    r.upper = std::min(r.upper, main + rest);
    if (r.upper - r.lower <= opts.tol * std::max(r.upper, 1e-300)) {
      r.value = 0.5 * (r.lower + r.upper);
      RankOneTerm t;
      t.z = u1;
      t.tau = svd.matrixV().col(0);
      r.decomposition.push_back(std::move(t));
      return r;
    }
  }

  std::vector<MassAtom> atoms;
  if (d == 2) {
    PairSeed ps;
    if (pair_search(v, p, block, ps)) {
      double n1 = lp_norm(ps.z1, p, block), n2 = lp_norm(ps.z2, p, block);
      if (ps.cost < r.upper && n1 > 0 && n2 > 0) {
        r.upper = ps.cost;
        r.decomposition = {{ps.z1, Eigen::Vector2d(std::cos(ps.th1), std::sin(ps.th1))},
                           {ps.z2, Eigen::Vector2d(std::cos(ps.th2), std::sin(ps.th2))}};
      }
      if (n1 > 0 && n2 > 0) {
        Eigen::VectorXd ze1 = ps.z1 / n1, ze2 = ps.z2 / n2;
        atoms.push_back({ze1, ps.th1});
        atoms.push_back({ze2, ps.th2});
        // dual candidate through the contact vectors of the pair atoms
        Eigen::Matrix2d T;
        T << std::cos(ps.th1), std::cos(ps.th2), std::sin(ps.th1), std::sin(ps.th2);
        if (std::abs(T.determinant()) > 1e-9) {
          Eigen::MatrixXd U(v.rows(), 2);
          U.col(0) = duality_map(ze1, p, block);
          U.col(1) = duality_map(ze2, p, block);
          Eigen::MatrixXd W0 = U * T.inverse();
          mass_polish(v, p, block, W0, {ps.th1, ps.th2}, {n1, n2}, {ze1, ze2}, opts.tol, &r);
        }
      }
    }
  }

  if (r.upper - r.lower > opts.tol * std::max(r.upper, 1e-300)) {
    for (const auto& t : r.decomposition) {
      double n = lp_norm(t.z, p, block);
      if (n > 0) atoms.push_back({t.z / n, std::atan2(t.tau[1], t.tau[0])});
    }
    mass_colgen(v, p, block, opts.tol, atoms, &r);
  }

  if (r.upper - r.lower > opts.tol * std::max(r.upper, 1e-300) && !r.decomposition.empty()) {
    // final polish from the column-generation active set
    std::vector<double> angs, lam0;
    std::vector<Eigen::VectorXd> zet0;
    for (const auto& t : r.decomposition) {
      double n = lp_norm(t.z, p, block);
      if (n <= 1e-10 * r.upper) continue;
      // canonicalize to [0, pi): z tau^T is unchanged under (z, theta) -> (-z, theta + pi)
      double th = std::atan2(t.tau[1], t.tau[0]);
      Eigen::VectorXd z = t.z / n;
      if (th < 0) {
        th += M_PI;
        z = -z;
      }
      int near = -1;
      for (size_t a = 0; a < angs.size(); ++a)
        if (std::abs(angs[a] - th) < 1e-3 || std::abs(std::abs(angs[a] - th) - M_PI) < 1e-3)
          near = static_cast<int>(a);
      if (near >= 0) {  // merge angle clusters; they make the KKT jacobian singular
        double s = std::abs(std::abs(angs[near] - th) - M_PI) < 1e-3 ? -1.0 : 1.0;
        Eigen::VectorXd zm = lam0[near] * zet0[near] + s * n * z;
        double nm = lp_norm(zm, p, block);
        if (nm > 1e-12 * r.upper) {
          zet0[near] = zm / nm;
          lam0[near] = nm;
        }
        continue;
      }
      angs.push_back(th);
      lam0.push_back(n);
      zet0.push_back(z);
    }
    if (!angs.empty() && r.dual.norm() > 0)
      mass_polish(v, p, block, r.dual, angs, lam0, zet0, opts.tol, &r);
  }

  r.value = 0.5 * (r.lower + r.upper);
  double gap = r.upper - r.lower;
  if (gap > opts.tol * std::max(r.upper, 1e-300) && opts.throw_on_gap)
    throw NonconvergenceError(gap);
  return r;
}

}  // namespace

MassResult mass(const Eigen::MatrixXd& v, const Exponent& p, int block,
                const MassOptions& opts) {
  if (v.cols() != 2 && v.cols() != 3)
    throw std::invalid_argument("mass: d must be 2 or 3");
  if (v.norm() == 0.0) {
    MassResult r;
    r.value = r.lower = r.upper = 0.0;
    r.dual = Eigen::MatrixXd::Zero(v.rows(), v.cols());
    return r;
  }
  if (p.is_one()) return mass_p1(v, block);
  if (p.is_two()) return mass_p2(v);
  return mass_general(v, p, block, opts);
}

MassResult nuclear_norm(const Eigen::MatrixXcd& A, const Exponent& p,
                        const MassOptions& opts) {
  Eigen::MatrixXd vr(2 * A.rows(), A.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int c = 0; c < A.cols(); ++c) {
      vr(2 * i, c) = A(i, c).real();
      vr(2 * i + 1, c) = A(i, c).imag();
    }
  return mass(vr, p, 2, opts);
}

// ---- Hodge star ------------------------------------------------------------

namespace {

std::vector<std::vector<int>> multi_indices(int d, int m) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(m);
  std::function<void(int, int)> rec = [&](int start, int pos) {
    if (pos == m) {
      out.push_back(idx);
      return;
    }
    for (int i = start; i <= d; ++i) {
      idx[pos] = i;
      rec(i + 1, pos + 1);
    }
  };
  rec(1, 0);
  return out;
}

int permutation_sign(std::vector<int> seq) {
  int sign = 1;
  for (size_t i = 0; i < seq.size(); ++i)
    for (size_t j = i + 1; j < seq.size(); ++j)
      if (seq[i] > seq[j]) sign = -sign;
  return sign;
}

}  // namespace

Multivector hodge_star(const Multivector& x) {
  if (x.d != 2 && x.d != 3) throw std::invalid_argument("hodge_star: d must be 2 or 3");
  const int d = x.d, m = x.m;
  auto src = multi_indices(d, m);
  auto dst = multi_indices(d, d - m);
  Multivector out;
  out.d = d;
  out.m = d - m;
  out.covector = !x.covector;
  out.comp = Eigen::MatrixXd::Zero(x.comp.rows(), static_cast<int>(dst.size()));
  for (size_t s = 0; s < src.size(); ++s) {
    std::vector<int> comp;
    for (int i = 1; i <= d; ++i)
      if (std::find(src[s].begin(), src[s].end(), i) == src[s].end()) comp.push_back(i);
    auto it = std::find(dst.begin(), dst.end(), comp);
    std::vector<int> seq = src[s];
    seq.insert(seq.end(), comp.begin(), comp.end());
    int sign = permutation_sign(seq);
    out.comp.col(static_cast<int>(it - dst.begin())) += sign * x.comp.col(static_cast<int>(s));
  }
  return out;
}

Eigen::MatrixXd hodge_star_rows_2d(const Eigen::MatrixXd& w) {
  Eigen::MatrixXd out(w.rows(), 2);
  out.col(0) = -w.col(1);
  out.col(1) = w.col(0);
  return out;
}

}  // namespace plateau
