#include "plateau/normal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "plateau/hungarian.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace plateau {

namespace {

// divergence convention: edge a -> b contributes +z at b, -z at a
Eigen::MatrixXd divergence(const GridGraph& g, const Eigen::MatrixXd& z) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(z.rows(), g.nodes());
  for (size_t e = 0; e < g.edges.size(); ++e) {
    d.col(g.edges[e].b) += z.col(e);
    d.col(g.edges[e].a) -= z.col(e);
  }
  return d;
}

double operator_norm(const GridGraph& g) {
  // power iteration on B B^T over scalar node fields
  std::mt19937 rng(12345);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd x(g.nodes());
  for (int v = 0; v < g.nodes(); ++v) x[v] = gauss(rng);
  x.normalize();
  double lam = 0;
  for (int it = 0; it < 60; ++it) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(g.edges.size());
    for (size_t e = 0; e < g.edges.size(); ++e)
      w[e] = x[g.edges[e].b] - x[g.edges[e].a];
    Eigen::VectorXd y = Eigen::VectorXd::Zero(g.nodes());
    for (size_t e = 0; e < g.edges.size(); ++e) {
      y[g.edges[e].b] += w[e];
      y[g.edges[e].a] -= w[e];
    }
    lam = y.norm();
    if (lam <= 0) break;
    x = y / lam;
  }
  return std::sqrt(lam) * 1.01;
}

// route per-component integer units by shortest paths + optimal assignment;
// exact for p = 1 (componentwise additive) and for k = 1 (any p)
void route_exact(const GridGraph& g, const std::vector<int>& snapped,
                 const PointBoundary& S, Eigen::MatrixXd& z) {
  for (int i = 0; i < S.k; ++i) {
    std::vector<int> src, dst;
    for (size_t a = 0; a < S.atoms.size(); ++a) {
      int m = S.atoms[a].mult[i];
      for (int u = 0; u < m; ++u) src.push_back(snapped[a]);
      for (int u = 0; u < -m; ++u) dst.push_back(snapped[a]);
    }
    if (src.empty()) continue;
    std::map<int, std::pair<std::vector<double>, std::vector<int>>> trees;
    for (int s : src)
      if (!trees.count(s)) shortest_paths(g, s, trees[s].first, trees[s].second);
    const int U = static_cast<int>(src.size());
    std::vector<std::vector<double>> cost(U, std::vector<double>(U));
    for (int a = 0; a < U; ++a)
      for (int b = 0; b < U; ++b) cost[a][b] = trees[src[a]].first[dst[b]];
    std::vector<int> asg;
    hungarian(cost, asg);
    for (int a = 0; a < U; ++a)
      // boundary convention: +m at the head, so current flows sink -> source
      for (auto [e, sign] : extract_path(g, trees[src[a]].second, dst[asg[a]]))
        z(i, e) -= sign;
  }
}

double flow_cost(const GridGraph& g, const Exponent& p, const Eigen::MatrixXd& z) {
  double c = 0;
  for (size_t e = 0; e < g.edges.size(); ++e)
    c += g.edges[e].len * lp_norm(Eigen::VectorXd(z.col(e)), p);
  return c;
}

// repair  div z = b  by routing residual mass from deficit to surplus nodes
void repair_feasibility(const GridGraph& g, const Eigen::MatrixXd& b,
                        Eigen::MatrixXd& z, double thresh) {
  Eigen::MatrixXd r = b - divergence(g, z);
  for (int i = 0; i < r.rows(); ++i) {
    for (;;) {
      int vp = -1, vn = -1;
      double best = thresh;
      for (int v = 0; v < r.cols(); ++v) {
        if (r(i, v) > best) {
          best = r(i, v);
          vp = v;
        }
      }
      if (vp < 0) break;
      // nearest node with residual of the opposite sign
      double bd = std::numeric_limits<double>::infinity();
      for (int v = 0; v < r.cols(); ++v)
        if (r(i, v) < -thresh) {
          double d = (g.pos(v) - g.pos(vp)).squaredNorm();
          if (d < bd) {
            bd = d;
            vn = v;
          }
        }
      if (vn < 0) break;
      std::vector<double> dist;
      std::vector<int> parent;
      shortest_paths(g, vn, dist, parent);
      double amt = std::min(r(i, vp), -r(i, vn));
      for (auto [e, sign] : extract_path(g, parent, vp)) z(i, e) += sign * amt;
      r(i, vp) -= amt;
      r(i, vn) += amt;
    }
  }
}

}  // namespace

FlowSolution solve_normal(const PointBoundary& S, const Exponent& p,
                          const GridGraph& g0, const NormalOptions& opts) {
  S.validate();
  FlowSolution sol;
  sol.grid = g0;
  sol.snapped = snap_atoms(S, sol.grid);
  const GridGraph& g = sol.grid;
  const int k = S.k, V = g.nodes(), E = static_cast<int>(g.edges.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k, V);
  for (size_t a = 0; a < S.atoms.size(); ++a)
    b.col(sol.snapped[a]) += S.atoms[a].mult.cast<double>();
  sol.z = Eigen::MatrixXd::Zero(k, E);

  if ((p.is_one() || k == 1) && !opts.force_splitting) {
    // exact: the problem decomposes per component into min-cost routing,
    // solved by shortest-path distances + optimal unit assignment
    route_exact(g, sol.snapped, S, sol.z);
    sol.value = flow_cost(g, p, sol.z);
    sol.lower = sol.value;
    sol.gap = 0;
    sol.residual = (b - divergence(g, sol.z)).cwiseAbs().maxCoeff();
    sol.distortion_band = sol.value * (g.distortion() - 1.0);
    return sol;
  }

  // Chambolle-Pock on  min_z sum_e len_e ||z_e||_p  s.t.  B z = b
  const double L = operator_norm(g);
  const double sigma = 1.0 / L, tau = 1.0 / L;
  // warm start from the per-component shortest-path routing: feasible for
  // every p, and optimal when the components decouple
  route_exact(g, sol.snapped, S, sol.z);
  Eigen::MatrixXd z = sol.z, zbar = z, y = Eigen::MatrixXd::Zero(k, V);
  const double diam_graph = (g.hi - g.lo).norm() * g.distortion();
  double best_lower = 0, upper = std::numeric_limits<double>::infinity();
  int it = 0;
  // node -> signed incident edges, for the parallel divergence update
  std::vector<std::vector<std::pair<int, int>>> inc(V);
  for (int e = 0; e < E; ++e) {
    inc[g.edges[e].b].push_back({e, 1});
    inc[g.edges[e].a].push_back({e, -1});
  }
  // the inner updates run billions of times, so they work on raw columns with
  // closed-form l_q-ball projections (Moreau: prox = id - projection)
  auto update_y = [&](int v) {
    double* yv = y.data() + static_cast<std::ptrdiff_t>(v) * k;
    const double* bv = b.data() + static_cast<std::ptrdiff_t>(v) * k;
    for (int i = 0; i < k; ++i) yv[i] -= sigma * bv[i];
    for (auto [e, s] : inc[v]) {
      const double* ze = zbar.data() + static_cast<std::ptrdiff_t>(e) * k;
      const double ss = sigma * s;
      for (int i = 0; i < k; ++i) yv[i] += ss * ze[i];
    }
  };
  const Exponent q = p.conjugate();
  const int qcase = q.is_one() ? 1 : q.is_two() ? 2 : q.is_inf() ? 3 : 0;
  const double qv = q.is_inf() ? 0.0 : q.value();
  std::vector<double> mu_cache(qcase == 0 ? E : 0, 0.0);
  auto update_z = [&](int e, double* w) {
    double* ze = z.data() + static_cast<std::ptrdiff_t>(e) * k;
    double* zb = zbar.data() + static_cast<std::ptrdiff_t>(e) * k;
    const double* yh = y.data() + static_cast<std::ptrdiff_t>(g.edges[e].b) * k;
    const double* yt = y.data() + static_cast<std::ptrdiff_t>(g.edges[e].a) * k;
    const double r = tau * g.edges[e].len;
    for (int i = 0; i < k; ++i) w[i] = ze[i] - tau * (yh[i] - yt[i]);
    auto commit = [&](int i, double zn) {
      zb[i] = 2.0 * zn - ze[i];
      ze[i] = zn;
    };
    switch (qcase) {
      case 1: {  // p = inf: subtract the l1-ball projection (soft threshold)
        double s1 = 0;
        for (int i = 0; i < k; ++i) s1 += std::abs(w[i]);
        if (s1 <= r) {
          for (int i = 0; i < k; ++i) commit(i, 0.0);
          break;
        }
        double* a = w + k;
        for (int i = 0; i < k; ++i) a[i] = std::abs(w[i]);
        std::sort(a, a + k, std::greater<>());
        double csum = 0, theta = 0;
        for (int i = 0; i < k; ++i) {
          csum += a[i];
          theta = (csum - r) / (i + 1);
          if (i == k - 1 || theta >= a[i + 1]) break;
        }
        for (int i = 0; i < k; ++i)
          commit(i, std::copysign(std::min(std::abs(w[i]), theta), w[i]));
        break;
      }
      case 2: {  // p = 2: radial shrinkage
        double n2 = 0;
        for (int i = 0; i < k; ++i) n2 += w[i] * w[i];
        double scale = n2 > r * r ? 1.0 - r / std::sqrt(n2) : 0.0;
        for (int i = 0; i < k; ++i) commit(i, scale * w[i]);
        break;
      }
      case 3: {  // p = 1: componentwise soft threshold
        for (int i = 0; i < k; ++i)
          commit(i, std::copysign(std::max(std::abs(w[i]) - r, 0.0), w[i]));
        break;
      }
      default: {
        // generic finite q: subtract the q-ball projection, solved by Newton
        // on the scalar multiplier mu in y_i + mu q y_i^{q-1} = |w_i| with
        // ||y||_q = r.  mu is cached per edge: the prox input drifts slowly
        // across iterations, so the cached value is an excellent start.
        double* m = w + k;
        double* yy = w + 2 * k;
        double mx = 0.0;
        for (int i = 0; i < k; ++i) {
          m[i] = std::abs(w[i]);
          mx = std::max(mx, m[i]);
        }
        if (mx == 0.0) {
          for (int i = 0; i < k; ++i) commit(i, 0.0);
          break;
        }
        double sq = 0.0;
        for (int i = 0; i < k; ++i) sq += std::pow(m[i] / mx, qv);
        if (mx * std::pow(sq, 1.0 / qv) <= r) {
          for (int i = 0; i < k; ++i) commit(i, 0.0);
          break;
        }
        auto row = [&](double mi, double mu, double x0) {
          if (mi <= 0.0) return 0.0;
          double lo = 0.0, hi = mi;
          double x = std::clamp(x0, 1e-12 * mi, mi);
          for (int rit = 0; rit < 40; ++rit) {
            double xq1 = std::pow(x, qv - 1.0);
            double f = x + mu * qv * xq1 - mi;
            (f > 0.0 ? hi : lo) = x;
            double df = 1.0 + mu * qv * (qv - 1.0) * xq1 / x;
            double xn = x - f / df;
            if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
            if (std::abs(xn - x) <= 1e-12 * mi) return xn;
            x = xn;
          }
          return x;
        };
        const double rq = std::pow(r, qv);
        for (int i = 0; i < k; ++i) yy[i] = m[i];
        auto eval = [&](double mu) {
          double s = 0.0, ds = 0.0;
          for (int i = 0; i < k; ++i) {
            yy[i] = row(m[i], mu, yy[i]);
            if (yy[i] <= 0.0) continue;
            double yq1 = std::pow(yy[i], qv - 1.0);
            s += yq1 * yy[i];
            ds -= qv * qv * yq1 * yq1 /
                  (1.0 + mu * qv * (qv - 1.0) * yq1 / yy[i]);
          }
          return std::pair<double, double>(s - rq, ds);
        };
        double mu_lo = 0.0, mu_hi = std::max(mu_cache[e], 1e-8);
        while (eval(mu_hi).first > 0.0) {
          mu_lo = mu_hi;
          mu_hi *= 8.0;
        }
        double mu = std::clamp(mu_cache[e], mu_lo, mu_hi);
        for (int nit = 0; nit < 30; ++nit) {
          auto [gv, dgv] = eval(mu);
          if (std::abs(gv) <= 1e-9 * rq) break;
          (gv > 0.0 ? mu_lo : mu_hi) = mu;
          double mun = dgv != 0.0 ? mu - gv / dgv : mu;
          if (!(mun > mu_lo && mun < mu_hi)) mun = 0.5 * (mu_lo + mu_hi);
          if (mun == mu) break;
          mu = mun;
        }
        mu_cache[e] = mu;
        for (int i = 0; i < k; ++i)
          commit(i, w[i] - std::copysign(yy[i], w[i]));
      }
    }
  };
  for (; it < opts.max_iters; ++it) {
    if (opts.parallel) {
#pragma omp parallel
      {
        std::vector<double> w(3 * k);
#pragma omp for schedule(static)
        for (int v = 0; v < V; ++v) update_y(v);
#pragma omp for schedule(static)
        for (int e = 0; e < E; ++e) update_z(e, w.data());
      }
    } else {
      std::vector<double> w(3 * k);
      for (int v = 0; v < V; ++v) update_y(v);
      for (int e = 0; e < E; ++e) update_z(e, w.data());
    }
    if ((it + 1) % opts.check_every != 0) continue;
    // primal bound: cost + worst-case transport of the divergence residual
    Eigen::MatrixXd r = b - divergence(g, z);
    double cost = flow_cost(g, p, z);
    upper = cost + 0.5 * r.cwiseAbs().sum() * diam_graph;
    // dual bound: scale y into the polar constraint ||(B^T y)_e||_q <= len_e
    double s = std::numeric_limits<double>::infinity();
    for (int e = 0; e < E; ++e) {
      double nq = lp_norm(Eigen::VectorXd(y.col(g.edges[e].b) - y.col(g.edges[e].a)), q);
      if (nq > 0) s = std::min(s, g.edges[e].len / nq);
    }
    double lb = -(b.array() * y.array()).sum() * std::min(s, 1e12);
    best_lower = std::max(best_lower, lb);
    if (upper - best_lower <= opts.tol * std::max(upper, 1e-300) &&
        r.cwiseAbs().maxCoeff() < 1e-2)
      break;
  }
  sol.iterations = it + 1;
  sol.z = z;
  repair_feasibility(g, b, sol.z, 1e-9);
  Eigen::MatrixXd r = b - divergence(g, sol.z);
  sol.residual = r.cwiseAbs().maxCoeff();
  sol.value = flow_cost(g, p, sol.z) + 0.5 * r.cwiseAbs().sum() * diam_graph;
  sol.lower = best_lower;
  sol.gap = sol.value - sol.lower;
  sol.distortion_band = sol.value * (g.distortion() - 1.0);
  if (opts.throw_on_gap && sol.gap > opts.tol * std::max(sol.value, 1e-300) * 4)
    throw NonconvergenceError(sol.gap);
  return sol;
}

namespace {

bool in_triangle(const std::array<Eigen::Vector2d, 3>& t, const Eigen::Vector2d& x) {
  Eigen::Matrix2d M;
  M.col(0) = t[1] - t[0];
  M.col(1) = t[2] - t[0];
  double det = M.determinant();
  if (std::abs(det) < 1e-300) return false;
  Eigen::Vector2d lam = M.inverse() * (x - t[0]);
  return lam.minCoeff() >= -1e-9 && lam.sum() <= 1.0 + 1e-9;
}

}  // namespace

CalibrationReport check_calibration(const CalibrationForm& cal) {
  CalibrationReport rep;
  const auto& T = cal.target;
  // (i) equality along the target current
  for (size_t e = 0; e < T.edges.size(); ++e) {
    Eigen::Vector2d A = T.vertices[T.edges[e].tail], B = T.vertices[T.edges[e].head];
    if ((B - A).norm() < 1e-15) continue;
    Eigen::Vector2d tau = (B - A).normalized();
    const Eigen::VectorXd& m = T.edges[e].mult;
    double target = lp_norm(m, cal.p);
    for (int s = 0; s < 8; ++s) {
      Eigen::Vector2d x = A + (s + 0.5) / 8.0 * (B - A);
      int tri = -1;
      for (size_t t = 0; t < cal.triangles.size(); ++t)
        if (in_triangle(cal.triangles[t], x)) {
          tri = static_cast<int>(t);
          break;
        }
      double err;
      if (tri < 0) {
        err = target;  // support left the triangulated region
      } else {
        err = std::abs(m.dot(cal.omega[tri] * tau) - target);
      }
      if (err > 1e-9 * std::max(1.0, target)) {
        rep.violation = "(i) <omega; tau, m> != ||m||_p on a target edge";
        rep.location = static_cast<int>(e);
        rep.magnitude = err;
        return rep;
      }
    }
  }
  // (ii) closedness: tangential traces match across interior faces
  std::map<std::pair<std::pair<long long, long long>, std::pair<long long, long long>>,
           std::vector<int>>
      faces;
  auto key = [](const Eigen::Vector2d& a) {
    return std::pair<long long, long long>(std::llround(a.x() * 1e9),
                                           std::llround(a.y() * 1e9));
  };
  for (size_t t = 0; t < cal.triangles.size(); ++t)
    for (int j = 0; j < 3; ++j) {
      auto ka = key(cal.triangles[t][j]), kb = key(cal.triangles[t][(j + 1) % 3]);
      faces[{std::min(ka, kb), std::max(ka, kb)}].push_back(static_cast<int>(t));
    }
  int face_idx = 0;
  for (const auto& [fk, tris] : faces) {
    if (tris.size() == 2) {
      Eigen::Vector2d a(fk.first.first * 1e-9, fk.first.second * 1e-9);
      Eigen::Vector2d b(fk.second.first * 1e-9, fk.second.second * 1e-9);
      Eigen::Vector2d t = (b - a).normalized();
      double err = ((cal.omega[tris[0]] - cal.omega[tris[1]]) * t).cwiseAbs().maxCoeff();
      if (err > 1e-9) {
        rep.violation = "(ii) tangential trace jump across an interior face";
        rep.location = face_idx;
        rep.magnitude = err;
        return rep;
      }
    }
    ++face_idx;
  }
  // (iii) comass bound per triangle; the comass value is a certified upper
  // bound inflated by the direction-grid resolution, so sample finely enough
  // that the inflation stays below the 1e-9 acceptance tolerance.
  for (size_t t = 0; t < cal.triangles.size(); ++t) {
    double c = comass(cal.omega[t], cal.p, 1, 1 << 17).value;
    if (c > 1.0 + 1e-9) {
      rep.violation = "(iii) comass_p(omega) > 1 on a triangle";
      rep.location = static_cast<int>(t);
      rep.magnitude = c - 1.0;
      return rep;
    }
  }
  rep.valid = true;
  rep.certified_value = mass_p_current(cal.target, cal.p);
  return rep;
}

std::vector<SweepRow> sweep_p(const PointBoundary& S,
                              const std::vector<Exponent>& plist,
                              const GridGraph& g, const NormalOptions& opts) {
  for (size_t i = 1; i < plist.size(); ++i)
    if (!(plist[i - 1] < plist[i]))
      throw std::invalid_argument("sweep_p: plist must be ascending");
  std::vector<SweepRow> rows;
  for (const auto& p : plist) {
    auto sol = solve_normal(S, p, g, opts);
    rows.push_back({p, sol.value, sol.gap});
  }
  SweepRow tail = rows.back();
  if (!tail.p.is_inf()) {
    auto sol = solve_normal(S, Exponent::infinity(), g, opts);
    tail = {Exponent::infinity(), sol.value, sol.gap};
  }
  for (size_t i = 1; i < rows.size(); ++i)
    if (rows[i].value > rows[i - 1].value + 2 * (rows[i].gap + rows[i - 1].gap) + 1e-9)
      throw std::logic_error("sweep_p: values not decreasing in p");
  for (const auto& row : rows) {
    double slack = 2 * (row.gap + tail.gap) + 1e-9;
    if (tail.value > row.value + slack ||
        row.value > row.p.k_root(S.k) * tail.value + slack)
      throw std::logic_error("sweep_p: sandwich P_inf <= P_p <= k^{1/p} P_inf violated");
  }
  return rows;
}

}  // namespace plateau
