#include "plateau/torusmaps.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace plateau {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct EdgeGeom {
  Eigen::Vector2d A, B, tang;
  double len = 0.0;
  double delta = 0.0;  // ramp half-width in subtended-angle units
  Eigen::VectorXd m;
};

std::vector<EdgeGeom> edge_geometry(const TorusMapSpec& spec) {
  std::vector<EdgeGeom> geo;
  geo.reserve(spec.T.edges.size());
  for (const auto& e : spec.T.edges) {
    EdgeGeom g;
    g.A = spec.T.vertices[e.tail];
    g.B = spec.T.vertices[e.head];
    g.len = (g.B - g.A).norm();
    if (g.len < 1e-14) continue;
    g.tang = (g.B - g.A) / g.len;
    g.delta = spec.eps > 0 ? std::min(2.0 * spec.eps / g.len, 0.5 * kPi) : 0.0;
    g.m = e.mult;
    geo.push_back(std::move(g));
  }
  return geo;
}

// vortex kernel: grad arg(y) = (-y2, y1)/|y|^2
inline Eigen::Vector2d vortex(const Eigen::Vector2d& y) {
  double r2 = y.squaredNorm();
  if (r2 < 1e-280) throw std::domain_error("map evaluation on the network spine");
  return Eigen::Vector2d(-y.y(), y.x()) / r2;
}

// subtended angle of segment AB seen from x, in (-pi, pi]; jumps by 2 pi
// exactly across the open segment
inline double subtended(const EdgeGeom& g, const Eigen::Vector2d& x) {
  Eigen::Vector2d w1 = x - g.A, w2 = x - g.B;
  return std::atan2(w1.x() * w2.y() - w1.y() * w2.x(), w1.dot(w2));
}

// ramp profile: identity for eps = 0; otherwise 0 on |phi| <= pi - delta and
// linear up to +-pi on the lens where the segment subtends more than pi-delta
inline double ramp(double phi, double delta, double* der) {
  if (delta <= 0) {
    if (der) *der = 1.0;
    return phi;
  }
  double a = std::abs(phi), plateau = kPi - delta;
  if (a <= plateau) {
    if (der) *der = 0.0;
    return 0.0;
  }
  if (der) *der = kPi / delta;
  return std::copysign((a - plateau) * (kPi / delta), phi);
}

void phases(const std::vector<EdgeGeom>& geo, int k, const Eigen::Vector2d& x,
            Eigen::VectorXd& theta, Eigen::MatrixXd& G) {
  theta.setZero(k);
  G.setZero(k, 2);
  for (const auto& g : geo) {
    double der;
    double h = ramp(subtended(g, x), g.delta, &der);
    if (h != 0.0) theta += h * g.m;
    if (der != 0.0) {
      Eigen::Vector2d gp = vortex(x - g.B) - vortex(x - g.A);
      G += (der * g.m) * gp.transpose();
    }
  }
}

double pairwise_sum(const std::vector<double>& v, size_t lo, size_t hi) {
  if (hi - lo <= 8) {
    double s = 0;
    for (size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  }
  size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

// ---- adaptive band quadrature ---------------------------------------------

struct Cell {
  double x0, y0, size;
  int depth;
  double integral = 0, err = 0;
};

struct NodeSample {
  double value = 0;         // integrand
  double identity_dev = 0;  // nuclear-vs-star deviation, when requested
};

struct QuadContext {
  const std::vector<EdgeGeom>* geo;
  std::vector<Eigen::Vector2d> atoms;  // network vertices (grading targets)
  double eps;
  int k;
};

double dist_to_segment(const EdgeGeom& g, const Eigen::Vector2d& x) {
  double t = std::clamp((x - g.A).dot(g.tang), 0.0, g.len);
  return (x - (g.A + t * g.tang)).norm();
}

bool cell_meets_band(const QuadContext& q, const Cell& c) {
  Eigen::Vector2d ctr(c.x0 + 0.5 * c.size, c.y0 + 0.5 * c.size);
  double half = 0.5 * c.size * std::sqrt(2.0);
  for (const auto& g : *q.geo)
    if (dist_to_segment(g, ctr) <= 0.5 * q.eps + half + 1e-12) return true;
  return false;
}

double dist_to_atoms(const QuadContext& q, const Cell& c) {
  Eigen::Vector2d ctr(c.x0 + 0.5 * c.size, c.y0 + 0.5 * c.size);
  double d = std::numeric_limits<double>::infinity();
  for (const auto& a : q.atoms) d = std::min(d, (ctr - a).norm());
  return d;
}

// Gauss-Legendre nodes on [0,1]
constexpr double kG2n[2] = {0.21132486540518713, 0.7886751345948129};
constexpr double kG2w[2] = {0.5, 0.5};
constexpr double kG4n[4] = {0.06943184420297371, 0.33000947820757187,
                            0.6699905217924281, 0.9305681557970262};
constexpr double kG4w[4] = {0.17392742256872693, 0.3260725774312731,
                            0.3260725774312731, 0.17392742256872693};

template <class F>
void integrate_cell(const F& f, Cell& c, double& maxdev, long long& evals) {
  double i44 = 0, i22 = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      NodeSample s = f(Eigen::Vector2d(c.x0 + kG4n[a] * c.size,
                                       c.y0 + kG4n[b] * c.size));
      i44 += kG4w[a] * kG4w[b] * s.value;
      maxdev = std::max(maxdev, s.identity_dev);
    }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      NodeSample s = f(Eigen::Vector2d(c.x0 + kG2n[a] * c.size,
                                       c.y0 + kG2n[b] * c.size));
      i22 += kG2w[a] * kG2w[b] * s.value;
    }
  evals += 20;
  double area = c.size * c.size;
  c.integral = i44 * area;
  c.err = std::abs(i44 - i22) * area;
}

// integrates f over the eps-band around the network with geometric grading
// near the vertices and embedded-rule error control
template <class F>
void integrate_band(const QuadContext& q, const F& f,
                    const QuadratureOptions& opts, EnergyReport& rep) {
  // bounding box of the spine, inflated by the band width
  Eigen::Vector2d lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const auto& g : *q.geo) {
    lo = lo.cwiseMin(g.A.cwiseMin(g.B));
    hi = hi.cwiseMax(g.A.cwiseMax(g.B));
  }
  if (q.geo->empty()) return;
  lo.array() -= q.eps;
  hi.array() += q.eps;
  double diam = (hi - lo).norm();
  double s0 = std::max(diam / 16.0, q.eps);
  int nx = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / s0)));
  int ny = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / s0)));

  std::vector<Cell> stack;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      Cell c{lo.x() + i * s0, lo.y() + j * s0, s0, 0};
      if (cell_meets_band(q, c)) stack.push_back(c);
    }
  // geometric pre-refinement: resolve the band width and grade geometrically
  // toward the vertices, where the gradient behaves like 1/r inside a wedge
  auto needs_split = [&](const Cell& c) {
    if (c.depth >= opts.max_depth) return false;
    if (c.size > 0.125 * q.eps) return true;
    double da = dist_to_atoms(q, c);
    return c.size > std::max(0.03125 * q.eps, 0.25 * da);
  };
  std::vector<Cell> leaves;
  while (!stack.empty()) {
    Cell c = stack.back();
    stack.pop_back();
    if (needs_split(c) &&
        leaves.size() + stack.size() < static_cast<size_t>(opts.max_cells)) {
      double h = 0.5 * c.size;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          Cell ch{c.x0 + a * h, c.y0 + b * h, h, c.depth + 1};
          if (cell_meets_band(q, ch)) stack.push_back(ch);
        }
    } else {
      leaves.push_back(c);
    }
  }

  auto evaluate_all = [&](size_t from) {
    double maxdev = rep.identity_max_dev;
    long long evals = 0;
    if (opts.parallel) {
      std::vector<double> devs(leaves.size() - from, 0.0);
#pragma omp parallel for schedule(dynamic, 8) reduction(+ : evals)
      for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(from);
           i < static_cast<std::ptrdiff_t>(leaves.size()); ++i)
        integrate_cell(f, leaves[i], devs[i - static_cast<std::ptrdiff_t>(from)],
                       evals);
      for (double d : devs) maxdev = std::max(maxdev, d);
    } else {
      for (size_t i = from; i < leaves.size(); ++i)
        integrate_cell(f, leaves[i], maxdev, evals);
    }
    rep.identity_max_dev = maxdev;
    rep.evals += evals;
  };
  evaluate_all(0);

  auto canon = [](const Cell& c) {
    return std::tuple<int, double, double>(c.depth, c.x0, c.y0);
  };
  for (int round = 0; round < 12; ++round) {
    std::sort(leaves.begin(), leaves.end(),
              [&](const Cell& a, const Cell& b) { return canon(a) < canon(b); });
    std::vector<double> vals(leaves.size()), errs(leaves.size());
    for (size_t i = 0; i < leaves.size(); ++i) {
      vals[i] = leaves[i].integral;
      errs[i] = leaves[i].err;
    }
    double total = pairwise_sum(vals, 0, vals.size());
    double err = pairwise_sum(errs, 0, errs.size());
    rep.value = total;
    rep.quad_error = err;
    rep.cells = static_cast<long long>(leaves.size());
    if (err <= opts.rel_tol * std::max(std::abs(total), 1e-300) ||
        leaves.size() >= static_cast<size_t>(opts.max_cells))
      break;
    // split the cells carrying the bulk of the error estimate
    double thr = std::max(err / (4.0 * static_cast<double>(leaves.size())),
                          0.25 * opts.rel_tol * std::abs(total) /
                              static_cast<double>(leaves.size()));
    size_t before = leaves.size();
    std::vector<Cell> keep;
    std::vector<Cell> fresh;
    for (const Cell& c : leaves) {
      if (c.err > thr && c.depth < opts.max_depth) {
        double h = 0.5 * c.size;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            Cell ch{c.x0 + a * h, c.y0 + b * h, h, c.depth + 1};
            if (cell_meets_band(q, ch)) fresh.push_back(ch);
          }
      } else {
        keep.push_back(c);
      }
    }
    if (fresh.empty()) break;
    leaves = std::move(keep);
    size_t from = leaves.size();
    leaves.insert(leaves.end(), fresh.begin(), fresh.end());
    evaluate_all(from);
    if (leaves.size() == before) break;
  }
  std::sort(leaves.begin(), leaves.end(),
            [&](const Cell& a, const Cell& b) { return canon(a) < canon(b); });
  std::vector<double> vals(leaves.size()), errs(leaves.size());
  for (size_t i = 0; i < leaves.size(); ++i) {
    vals[i] = leaves[i].integral;
    errs[i] = leaves[i].err;
  }
  rep.value = pairwise_sum(vals, 0, vals.size());
  rep.quad_error = pairwise_sum(errs, 0, errs.size());
  rep.cells = static_cast<long long>(leaves.size());
}

QuadContext make_context(const TorusMapSpec& spec,
                         const std::vector<EdgeGeom>& geo) {
  QuadContext q;
  q.geo = &geo;
  q.eps = spec.eps;
  q.k = spec.k();
  for (const auto& v : spec.T.vertices) q.atoms.push_back(v);
  return q;
}

}  // namespace

void TorusMapSpec::validate() const {
  if (eps < 0) throw std::invalid_argument("mollification width must be >= 0");
  if (eps == 0) return;
  for (const auto& e : T.edges) {
    double len = (T.vertices[e.head] - T.vertices[e.tail]).norm();
    if (len > 1e-14 && eps >= 0.25 * len)
      throw std::invalid_argument(
          "mollification width must stay below a quarter of the shortest edge");
  }
}

MapValue evaluate_map(const TorusMapSpec& spec, const Eigen::Vector2d& x) {
  spec.validate();
  auto geo = edge_geometry(spec);
  MapValue mv;
  phases(geo, spec.k(), x, mv.theta, mv.grad_theta);
  mv.u.resize(spec.k());
  mv.grad_u.resize(spec.k(), 2);
  for (int i = 0; i < spec.k(); ++i) {
    mv.u[i] = std::polar(1.0, mv.theta[i]);
    mv.grad_u.row(i) = std::complex<double>(0.0, 1.0) * mv.u[i] *
                       mv.grad_theta.row(i).cast<std::complex<double>>();
  }
  return mv;
}

EnergyReport harmonic_energy(const TorusMapSpec& spec, const Exponent& p,
                             const QuadratureOptions& opts) {
  spec.validate();
  if (spec.eps <= 0)
    throw std::invalid_argument("energies need a positive mollification width");
  auto geo = edge_geometry(spec);
  auto q = make_context(spec, geo);
  const int k = spec.k();
  EnergyReport rep;
  auto f = [&](const Eigen::Vector2d& x) {
    Eigen::VectorXd theta;
    Eigen::MatrixXd G;
    phases(geo, k, x, theta, G);
    NodeSample s;
    s.value = lp_norm(Eigen::VectorXd(G.rowwise().norm()), p);
    return s;
  };
  integrate_band(q, f, opts, rep);
  return rep;
}

EnergyReport nuclear_energy(const TorusMapSpec& spec, const Exponent& p,
                            const QuadratureOptions& opts) {
  spec.validate();
  if (spec.eps <= 0)
    throw std::invalid_argument("energies need a positive mollification width");
  auto geo = edge_geometry(spec);
  auto q = make_context(spec, geo);
  const int k = spec.k();
  EnergyReport rep;
  MassOptions mo;
  mo.throw_on_gap = false;
  auto f = [&](const Eigen::Vector2d& x) {
    Eigen::VectorXd theta;
    Eigen::MatrixXd G;
    phases(geo, k, x, theta, G);
    NodeSample s;
    if (G.cwiseAbs().maxCoeff() == 0.0) return s;
    // star j(u): rows are the rotated phase gradients
    MassResult star = mass(hodge_star_rows_2d(G), p, 1, mo);
    s.value = star.value;
    if (opts.check_identity) {
      // independent route: the complex gradient through the 2k x 2 embedding
      Eigen::MatrixXcd A(k, 2);
      for (int i = 0; i < k; ++i)
        A.row(i) = std::complex<double>(0.0, 1.0) * std::polar(1.0, theta[i]) *
                   G.row(i).cast<std::complex<double>>();
      MassResult nuc = nuclear_norm(A, p, mo);
      double slack = 0.5 * ((star.upper - star.lower) + (nuc.upper - nuc.lower));
      double dev = std::max(0.0, std::abs(nuc.value - star.value) - slack) /
                   (1.0 + std::max(nuc.value, star.value));
      s.identity_dev = dev;
    }
    return s;
  };
  integrate_band(q, f, opts, rep);
  if (opts.check_identity && rep.identity_max_dev > 1e-6)
    throw std::logic_error(
        "pointwise identity |grad u|_nucl != |star j(u)|_mass, deviation " +
        std::to_string(rep.identity_max_dev));
  return rep;
}

double jump_cost(const LiftingSpec& lift, const Exponent& p) {
  PointBoundary bc = boundary(lift.cuts);
  PointBoundary bt = boundary(lift.base.T);
  auto key = [](const Atom& a) {
    return std::pair<double, double>(a.pos.x(), a.pos.y());
  };
  auto sorted = [&](PointBoundary b) {
    std::sort(b.atoms.begin(), b.atoms.end(),
              [&](const Atom& x, const Atom& y) { return key(x) < key(y); });
    return b;
  };
  bc = sorted(bc);
  bt = sorted(bt);
  bool match = bc.atoms.size() == bt.atoms.size();
  // branch-point optimization can drift terminals by a few ulp-scale steps,
  // so pair atoms with a diameter-relative tolerance
  double postol = 1e-5 * std::max(1.0, bc.diameter());
  for (size_t i = 0; match && i < bc.atoms.size(); ++i)
    match = (bc.atoms[i].pos - bt.atoms[i].pos).norm() < postol &&
            bc.atoms[i].mult == bt.atoms[i].mult;
  if (!match)
    throw std::invalid_argument(
        "cut system and base map have different boundaries");
  return 2.0 * kPi * mass_p_current(lift.cuts, p);
}

TheoremBReport verify_theoremB(const TorusMapSpec& spec, const LiftingSpec& lift,
                               const Exponent& p, const QuadratureOptions& opts,
                               int fd_points, unsigned seed) {
  TheoremBReport rep;
  EnergyReport h = harmonic_energy(spec, p, opts);
  rep.h_p = h.value;
  rep.jump = jump_cost(lift, p);
  rep.sbv_norm = rep.h_p + rep.jump;
  double factor = 2.0 * p.k_factor(spec.k());
  rep.bound = factor * rep.h_p;
  // budget: the embedded-rule estimate plus the quadrature target itself (the
  // estimate can be optimistic on the discontinuous band boundary)
  rep.tolerance = factor * (opts.rel_tol * h.value + h.quad_error + 1e-9);

  // finite-difference identity |grad theta_j| = |grad u_j| off the cuts
  auto geo = edge_geometry(spec);
  Eigen::Vector2d lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const auto& g : geo) {
    lo = lo.cwiseMin(g.A.cwiseMin(g.B));
    hi = hi.cwiseMax(g.A.cwiseMax(g.B));
  }
  double diam = std::max((hi - lo).norm(), 1e-9);
  lo.array() -= 2.0 * std::max(spec.eps, 0.05 * diam);
  hi.array() += 2.0 * std::max(spec.eps, 0.05 * diam);
  const double step = 1e-6 * diam;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y());
  const int k = spec.k();
  Eigen::VectorXd theta;
  Eigen::MatrixXd G;
  int accepted = 0;
  for (int trial = 0; trial < 200 * fd_points && accepted < fd_points; ++trial) {
    Eigen::Vector2d x(ux(rng), uy(rng));
    bool good = true;
    for (const auto& g : geo) {
      // keep clear of the ramp kinks, the cuts and the winding vertices,
      // where one-sided differences would see the derivative jump
      double phi = subtended(g, x);
      if (g.delta > 0 && std::abs(std::abs(phi) - (kPi - g.delta)) < 1e-3)
        good = false;
      if (std::abs(std::abs(phi) - kPi) < 1e-3) good = false;
      // near the endpoints the subtended angle varies fast, so a small
      // displacement could cross a ramp kink; keep a generous clearance
      if ((x - g.A).norm() < 0.02 * diam || (x - g.B).norm() < 0.02 * diam)
        good = false;
    }
    if (!good) continue;
    ++accepted;
    phases(geo, k, x, theta, G);
    Eigen::VectorXd tpx, tpy, tmx, tmy;
    Eigen::MatrixXd dump;
    phases(geo, k, x + Eigen::Vector2d(step, 0), tpx, dump);
    phases(geo, k, x - Eigen::Vector2d(step, 0), tmx, dump);
    phases(geo, k, x + Eigen::Vector2d(0, step), tpy, dump);
    phases(geo, k, x - Eigen::Vector2d(0, step), tmy, dump);
    for (int i = 0; i < k; ++i) {
      // central differences of u_i = exp(i theta_i)
      auto du = [&](double tp, double tm) {
        return std::abs(std::polar(1.0, tp) - std::polar(1.0, tm)) /
               (2.0 * step);
      };
      double fd =
          std::hypot(du(tpx[i], tmx[i]), du(tpy[i], tmy[i]));
      double an = G.row(i).norm();
      rep.fd_max_err =
          std::max(rep.fd_max_err, std::abs(fd - an) / (1.0 + an));
    }
  }
  rep.ok = rep.sbv_norm <= rep.bound + rep.tolerance && rep.fd_max_err <= 1e-6;
  return rep;
}

TheoremDReport verify_theoremD(const PointBoundary& S, const Exponent& p,
                               const GridGraph& g, const NormalOptions& nopts,
                               const IntegralOptions& iopts) {
  TheoremDReport rep;
  FlowSolution nsol = solve_normal(S, p, g, nopts);
  IntegralSolution isol = solve_integral(S, p, iopts);
  rep.p_normal = nsol.value;
  rep.p_integral = isol.value;
  rep.factor = 1.0 + isol.value / std::max(nsol.value, 1e-300);
  // snapping moves each atom by up to spacing/sqrt(2), shifting the grid value
  // by at most ||m_a||_p times that per atom
  double snap_band = 0.0;
  for (const auto& a : S.atoms)
    snap_band += lp_norm(Eigen::VectorXd(a.mult.cast<double>()), p) * nsol.grid.spacing() /
                 std::sqrt(2.0);
  double tol = nsol.gap + nsol.distortion_band + snap_band;
  rep.band = tol / std::max(nsol.value, 1e-300) * rep.factor;
  rep.factor_two = std::abs(isol.value - nsol.value) <= tol + 1e-9;
  // quadrature cross-check of the eps-family built over the integer optimum
  double minlen = std::numeric_limits<double>::infinity();
  for (const auto& e : isol.network.edges)
    minlen = std::min(minlen, (isol.network.vertices[e.head] -
                               isol.network.vertices[e.tail])
                                  .norm());
  if (std::isfinite(minlen) && minlen > 0) {
    TorusMapSpec spec;
    spec.T = isol.network;
    spec.eps = 0.02 * minlen;
    QuadratureOptions qo;
    qo.rel_tol = 5e-3;
    rep.h_p_quad = harmonic_energy(spec, p, qo).value;
  }
  return rep;
}

}  // namespace plateau
