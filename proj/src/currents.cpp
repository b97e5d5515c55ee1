#include "plateau/currents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "plateau/hungarian.hpp"
#include "plateau/norms.hpp"

namespace plateau {

namespace {
constexpr double kPi = 3.14159265358979323846;
using nlohmann::json;
}  // namespace

void PointBoundary::validate() const {
  Eigen::VectorXi sum = Eigen::VectorXi::Zero(k);
  for (const auto& a : atoms) {
    if (a.mult.size() != k) throw std::invalid_argument("atom multiplicity size != k");
    sum += a.mult;
  }
  for (int i = 0; i < k; ++i)
    if (sum[i] != 0)
      throw std::invalid_argument("component " + std::to_string(i) +
                                  " multiplicities do not sum to zero");
  double diam = diameter();
  double tol = 1e-9 * std::max(diam, 1e-12);
  for (size_t i = 0; i < atoms.size(); ++i)
    for (size_t j = i + 1; j < atoms.size(); ++j)
      if ((atoms[i].pos - atoms[j].pos).norm() <= tol)
        throw std::invalid_argument("coinciding atoms");
}

double PointBoundary::diameter() const {
  double d = 0.0;
  for (size_t i = 0; i < atoms.size(); ++i)
    for (size_t j = i + 1; j < atoms.size(); ++j)
      d = std::max(d, (atoms[i].pos - atoms[j].pos).norm());
  return d;
}

Eigen::Vector2d PointBoundary::center() const {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& a : atoms) c += a.pos;
  return atoms.empty() ? c : Eigen::Vector2d(c / atoms.size());
}

double PolyCurrent::total_length() const {
  double L = 0.0;
  for (const auto& e : edges) L += (vertices[e.head] - vertices[e.tail]).norm();
  return L;
}

PointBoundary boundary(const PolyCurrent& T, double merge_tol) {
  (void)merge_tol;
  std::vector<Eigen::VectorXd> net(T.vertices.size(), Eigen::VectorXd::Zero(T.k));
  for (const auto& e : T.edges) {
    net[e.head] += e.mult;
    net[e.tail] -= e.mult;
  }
  PointBoundary S;
  S.k = T.k;
  for (size_t v = 0; v < T.vertices.size(); ++v) {
    if (net[v].cwiseAbs().maxCoeff() < 1e-12) continue;
    Atom a;
    a.pos = T.vertices[v];
    a.mult = net[v].array().round().cast<int>();
    S.atoms.push_back(std::move(a));
  }
  return S;
}

double mass_p_current(const PolyCurrent& T, const Exponent& p) {
  double total = 0.0;
  for (const auto& e : T.edges)
    total += (T.vertices[e.head] - T.vertices[e.tail]).norm() * lp_norm(e.mult, p);
  return total;
}

void canonicalize(PolyCurrent& T) {
  std::map<std::pair<int, int>, Eigen::VectorXd> merged;
  for (auto& e : T.edges) {
    int t = e.tail, h = e.head;
    Eigen::VectorXd m = e.mult;
    if (t > h) {
      std::swap(t, h);
      m = -m;
    }
    if (t == h) continue;
    auto it = merged.find({t, h});
    if (it == merged.end())
      merged[{t, h}] = m;
    else
      it->second += m;
  }
  T.edges.clear();
  for (auto& [key, m] : merged) {
    if (m.cwiseAbs().maxCoeff() < 1e-12) continue;
    T.edges.push_back({key.first, key.second, m});
  }
}

Connection minimal_connection(const std::vector<Eigen::Vector2d>& P,
                              const std::vector<Eigen::Vector2d>& N) {
  if (P.size() != N.size())
    throw std::invalid_argument("minimal_connection: |P| != |N|");
  const int n = static_cast<int>(P.size());
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cost[i][j] = (P[i] - N[j]).norm();
  Connection c;
  c.length = hungarian(cost, c.matching);
  return c;
}

// ---- mollifier -------------------------------------------------------------

double RadialMollifier::rho(double t) const {
  if (t >= 1.0) return 0.0;
  double c = d == 2 ? 3.0 / kPi : 105.0 / (32.0 * kPi);
  double w = 1.0 - t * t;
  return c * w * w;
}

double RadialMollifier::rho_eps_at(double r) const {
  return std::pow(epsilon, -d) * rho(r / epsilon);
}

double RadialMollifier::xi(double t) const {
  if (t >= 1.0 || t <= 0.0) return 0.0;
  double c = d == 2 ? 3.0 / kPi : 105.0 / (32.0 * kPi);
  double w = 1.0 - t * t;
  if (d == 2) {
    // int_t^1 s (1-s^2)^2 ds = (1-t^2)^3 / 6
    return c * w * w * w / (6.0 * t * t);
  }
  // d=3: int_t^1 s^2 (1-s^2)^2 ds
  auto F = [](double s) { return s * s * s / 3.0 - 2.0 * std::pow(s, 5) / 5.0 + std::pow(s, 7) / 7.0; };
  return c * (F(1.0) - F(t)) / (t * t * t);
}

double RadialMollifier::field_l1() const {
  if (d == 2) {
    // 2 pi int_0^1 xi(t) t^2 dt = (pi c / 3) * int (1-t^2)^3 = (pi c/3)(16/35)
    double c = 3.0 / kPi;
    return epsilon * (kPi * c / 3.0) * (16.0 / 35.0);
  }
  throw std::invalid_argument("field_l1: d=2 only");
}

Eigen::Vector2d mollifier_field(const RadialMollifier& mol, const Eigen::Vector2d& x) {
  double r = x.norm();
  if (r == 0.0) throw std::domain_error("mollifier_field: singular at the origin");
  if (r >= mol.epsilon) return Eigen::Vector2d::Zero();
  Eigen::Vector2d y = x / mol.epsilon;
  return std::pow(mol.epsilon, -mol.d + 1) * mol.xi(y.norm()) * y;
}

double check_divergence_identity(const RadialMollifier& mol, const TestFunction& phi) {
  // polar quadrature over the support ball; integrands are bounded
  const int nr = 200, nt = 256;
  double eps = mol.epsilon;
  double flux = 0.0, mollified = 0.0;
  for (int i = 0; i < nr; ++i) {
    double r = eps * (i + 0.5) / nr;
    double wr = eps / nr;
    for (int j = 0; j < nt; ++j) {
      double t = 2.0 * kPi * j / nt;
      double wt = 2.0 * kPi / nt;
      Eigen::Vector2d x(r * std::cos(t), r * std::sin(t));
      flux += mollifier_field(mol, x).dot(phi.gradient(x)) * r * wr * wt;
      mollified += mol.rho_eps_at(r) * phi.value(x) * r * wr * wt;
    }
  }
  return std::abs(-flux - phi.value(Eigen::Vector2d::Zero()) + mollified);
}

// ---- JSON / SVG ------------------------------------------------------------

PointBoundary boundary_from_json(const std::string& text) {
  json j = json::parse(text);
  PointBoundary S;
  S.k = j.at("k").get<int>();
  for (const auto& ja : j.at("atoms")) {
    Atom a;
    a.pos = Eigen::Vector2d(ja.at("pos")[0].get<double>(), ja.at("pos")[1].get<double>());
    auto mv = ja.at("mult").get<std::vector<int>>();
    a.mult = Eigen::Map<Eigen::VectorXi>(mv.data(), static_cast<int>(mv.size()));
    S.atoms.push_back(std::move(a));
  }
  S.validate();
  return S;
}

std::string boundary_to_json(const PointBoundary& S) {
  json j;
  j["k"] = S.k;
  j["atoms"] = json::array();
  for (const auto& a : S.atoms) {
    json ja;
    ja["pos"] = {a.pos[0], a.pos[1]};
    ja["mult"] = std::vector<int>(a.mult.data(), a.mult.data() + a.mult.size());
    j["atoms"].push_back(ja);
  }
  return j.dump(2);
}

PolyCurrent current_from_json(const std::string& text) {
  json j = json::parse(text);
  PolyCurrent T;
  for (const auto& jv : j.at("vertices"))
    T.vertices.emplace_back(jv[0].get<double>(), jv[1].get<double>());
  T.integer_ring = true;
  for (const auto& je : j.at("edges")) {
    CurrentEdge e;
    e.tail = je[0].get<int>();
    e.head = je[1].get<int>();
    auto mv = je[2].get<std::vector<double>>();
    e.mult = Eigen::Map<Eigen::VectorXd>(mv.data(), static_cast<int>(mv.size()));
    for (double m : mv)
      if (std::abs(m - std::round(m)) > 1e-12) T.integer_ring = false;
    T.k = static_cast<int>(mv.size());
    T.edges.push_back(std::move(e));
  }
  if (j.contains("k")) T.k = j["k"].get<int>();
  return T;
}

std::string current_to_json(const PolyCurrent& T) {
  json j;
  j["k"] = T.k;
  j["vertices"] = json::array();
  for (const auto& v : T.vertices) j["vertices"].push_back({v[0], v[1]});
  j["edges"] = json::array();
  for (const auto& e : T.edges) {
    std::vector<double> mv(e.mult.data(), e.mult.data() + e.mult.size());
    j["edges"].push_back({e.tail, e.head, mv});
  }
  return j.dump(2);
}

namespace {
std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

PointBoundary load_boundary(const std::string& path) { return boundary_from_json(slurp(path)); }
PolyCurrent load_current(const std::string& path) { return current_from_json(slurp(path)); }

std::string render_svg(const PointBoundary& S, const PolyCurrent* T, const Exponent& p) {
  double lo_x = 1e30, lo_y = 1e30, hi_x = -1e30, hi_y = -1e30;
  auto grow = [&](const Eigen::Vector2d& q) {
    lo_x = std::min(lo_x, q[0]);
    lo_y = std::min(lo_y, q[1]);
    hi_x = std::max(hi_x, q[0]);
    hi_y = std::max(hi_y, q[1]);
  };
  for (const auto& a : S.atoms) grow(a.pos);
  if (T)
    for (const auto& v : T->vertices) grow(v);
  double w = std::max(hi_x - lo_x, 1e-6), h = std::max(hi_y - lo_y, 1e-6);
  double pad = 0.1 * std::max(w, h);
  lo_x -= pad;
  lo_y -= pad;
  w += 2 * pad;
  h += 2 * pad;
  const double W = 640.0;
  double scale = W / std::max(w, h);
  auto X = [&](double x) { return (x - lo_x) * scale; };
  auto Y = [&](double y) { return (h - (y - lo_y)) * scale; };  // flip y

  static const char* colors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  std::ostringstream svg;
  svg.precision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
      << h * scale << "\" viewBox=\"0 0 " << W << " " << h * scale << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (T) {
    for (int comp = 0; comp < T->k; ++comp) {
      for (const auto& e : T->edges) {
        if (std::abs(e.mult[comp]) < 1e-12) continue;
        double width = 1.5 * std::abs(e.mult[comp]);
        const auto &a = T->vertices[e.tail], &b = T->vertices[e.head];
        svg << "<line x1=\"" << X(a[0]) << "\" y1=\"" << Y(a[1]) << "\" x2=\"" << X(b[0])
            << "\" y2=\"" << Y(b[1]) << "\" stroke=\"" << colors[comp % 8]
            << "\" stroke-width=\"" << width << "\" stroke-opacity=\"0.55\"/>\n";
      }
    }
    for (const auto& e : T->edges) {
      double width = 0.8 * lp_norm(e.mult, p);
      const auto &a = T->vertices[e.tail], &b = T->vertices[e.head];
      svg << "<line x1=\"" << X(a[0]) << "\" y1=\"" << Y(a[1]) << "\" x2=\"" << X(b[0])
          << "\" y2=\"" << Y(b[1]) << "\" stroke=\"#333\" stroke-width=\"" << width
          << "\"/>\n";
    }
  }
  for (const auto& a : S.atoms) {
    svg << "<circle cx=\"" << X(a.pos[0]) << "\" cy=\"" << Y(a.pos[1])
        << "\" r=\"4\" fill=\"black\"/>\n";
    svg << "<text x=\"" << X(a.pos[0]) + 6 << "\" y=\"" << Y(a.pos[1]) - 6
        << "\" font-size=\"12\">(";
    for (int i = 0; i < a.mult.size(); ++i) svg << (i ? "," : "") << a.mult[i];
    svg << ")</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace plateau
