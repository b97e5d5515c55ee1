// Command-line front end: solve Plateau instances, evaluate norms and
// energies, compute lifting jump costs, run verification suites, render SVGs.
// Exit codes: 0 pass, 1 assertion failure, 2 configuration error, 3 solver
// nonconvergence.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "plateau/cli.hpp"
#include "plateau/integral.hpp"
#include "plateau/norms.hpp"
#include "plateau/torusmaps.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace plateau;
using nlohmann::ordered_json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void emit(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planar vectorial Plateau problems: solvers, energies, suites"};
  app.require_subcommand(1);
  app.set_config("--config")->description("load options from a TOML file");

  std::uint64_t seed = 42;
  std::string out_dir = "artifacts";
  int threads = 0;
  double tol = 1e-3;
  app.add_option("--seed", seed, "random instance seed")->capture_default_str();
  app.add_option("--out", out_dir, "artifact directory")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0 = default)");
  app.add_option("--tol", tol, "solver relative gap target")
      ->capture_default_str();

  // ---- solve: normal (grid flow) or integral (Steiner enumeration) ---------
  auto* solve = app.add_subcommand("solve", "solve one Plateau instance");
  std::string coeff = "normal", instance_path, p_str = "2", svg_path;
  int grid_n = 65, stencil = 16, max_terminals = 8;
  solve->add_option("--coeff", coeff, "coefficient group")
      ->check(CLI::IsMember({"normal", "integral"}));
  solve->add_option("--instance", instance_path, "boundary JSON")->required();
  solve->add_option("--p", p_str, "norm exponent (decimal, a/b, or inf)");
  solve->add_option("--grid", grid_n, "grid nodes per side");
  solve->add_option("--stencil", stencil, "neighbor stencil")
      ->check(CLI::IsMember({4, 8, 16}));
  solve->add_option("--max-terminals", max_terminals, "integral solver cap");
  solve->add_option("--svg", svg_path, "write a solution figure here");

  // ---- norms: mass / comass of one matrix ----------------------------------
  auto* norms = app.add_subcommand("norms", "p-mass and p-comass of a matrix");
  std::string matrix_path;
  int block = 1;
  norms->add_option("--matrix", matrix_path, "JSON 2-d array")->required();
  norms->add_option("--p", p_str, "norm exponent");
  norms->add_option("--block", block, "rows per Euclidean block");

  // ---- energy: torus-map energies over a current ---------------------------
  auto* energy = app.add_subcommand("energy", "harmonic and nuclear energy");
  std::string current_path;
  double eps = 0.0, rel_tol = 1e-3;
  energy->add_option("--current", current_path, "network JSON")->required();
  energy->add_option("--eps", eps, "phase mollification width")->required();
  energy->add_option("--p", p_str, "norm exponent");
  energy->add_option("--rel-tol", rel_tol, "quadrature relative tolerance");

  // ---- lift: jump cost of a branch-cut system ------------------------------
  auto* lift = app.add_subcommand("lift", "BV-lifting jump cost");
  std::string cuts_path, base_path;
  lift->add_option("--cuts", cuts_path, "cut system JSON")->required();
  lift->add_option("--current", base_path,
                   "generating current JSON (defaults to the cuts)");
  lift->add_option("--p", p_str, "norm exponent");

  // ---- verify: named reproducible suite ------------------------------------
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  SuiteConfig cfg;
  std::vector<std::string> p_list;
  verify->add_option("--suite", cfg.suite, "suite name")->required();
  verify->add_option("--trials", cfg.trials, "instances per suite");
  verify->add_option("--k", cfg.k, "coefficient components");
  verify->add_option("--atoms", cfg.atoms, "boundary atoms per instance");
  verify->add_option("--p", p_list, "exponent list");
  verify->add_option("--grid", cfg.grid_n, "grid nodes per side");
  verify->add_option("--stencil", cfg.stencil, "neighbor stencil");
  verify->add_flag("--serial", "run trials sequentially");

  // ---- render: instance / solution figure ----------------------------------
  auto* render = app.add_subcommand("render", "write an SVG figure");
  std::string render_out;
  render->add_option("--instance", instance_path, "boundary JSON")->required();
  render->add_option("--current", current_path, "optional network JSON");
  render->add_option("--p", p_str, "norm exponent for edge widths");
  render->add_option("-o,--output", render_out, "SVG path")->required();

  // global flags remain usable after a subcommand name
  for (auto* sub : {solve, norms, energy, lift, verify, render})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif
    const Exponent p = Exponent::parse(p_str);

    if (solve->parsed()) {
      auto S = load_boundary(instance_path);
      ordered_json j;
      if (coeff == "normal") {
        auto g = grid_for(S, grid_n, stencil);
        NormalOptions opts;
        opts.tol = tol;
        auto sol = solve_normal(S, p, g, opts);
        j["value"] = num(sol.value);
        j["gap"] = num(sol.gap);
        j["distortion_band"] = num(sol.distortion_band);
        j["iterations"] = sol.iterations;
        if (!svg_path.empty())
          write_file(svg_path, render_solution(S, nullptr, &sol, p));
      } else {
        IntegralOptions opts;
        opts.max_terminals = max_terminals;
        opts.seed = seed;
        auto sol = solve_integral(S, p, opts);
        j["value"] = num(sol.value);
        j["topology_id"] = sol.topology_id;
        j["network"] = nlohmann::json::parse(current_to_json(sol.network));
        if (!svg_path.empty())
          write_file(svg_path, render_solution(S, &sol.network, nullptr, p));
      }
      emit(j);
      return 0;
    }

    if (norms->parsed()) {
      auto rows = nlohmann::json::parse(slurp(matrix_path));
      Eigen::MatrixXd M(rows.size(), rows.at(0).size());
      for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index c = 0; c < M.cols(); ++c)
          M(i, c) = rows.at(i).at(c).get<double>();
      auto m = mass(M, p, block);
      auto cm = comass(M, p, block);
      ordered_json j;
      j["mass"] = {{"value", num(m.value)},
                   {"lower", num(m.lower)},
                   {"upper", num(m.upper)}};
      j["comass"] = {{"value", num(cm.value)}, {"lower", num(cm.lower)}};
      emit(j);
      return 0;
    }

    if (energy->parsed()) {
      TorusMapSpec spec;
      spec.T = load_current(current_path);
      spec.eps = eps;
      spec.validate();
      QuadratureOptions qo;
      qo.rel_tol = rel_tol;
      auto hp = harmonic_energy(spec, p, qo);
      auto ep = nuclear_energy(spec, p, qo);
      ordered_json j;
      j["H_p"] = num(hp.value);
      j["E_p"] = num(ep.value);
      j["tail_bound"] = num(std::max(hp.tail_bound, ep.tail_bound));
      j["quad_error"] = num(hp.quad_error + ep.quad_error);
      j["identity_max_dev"] = num(ep.identity_max_dev);
      emit(j);
      return 0;
    }

    if (lift->parsed()) {
      LiftingSpec ls;
      ls.cuts = load_current(cuts_path);
      ls.base.T = base_path.empty() ? ls.cuts : load_current(base_path);
      double cost = jump_cost(ls, p);
      ordered_json j;
      j["jump_cost"] = num(cost);
      emit(j);
      return 0;
    }

    if (verify->parsed()) {
      cfg.seed = seed;
      cfg.tol = tol;
      cfg.out_dir = out_dir;
      cfg.parallel = verify->count("--serial") == 0;
      if (!p_list.empty()) {
        cfg.plist.clear();
        for (const auto& s : p_list) cfg.plist.push_back(Exponent::parse(s));
      }
      auto r = run_suite(cfg);
      for (const auto& a : r.assertions)
        std::cout << (a.pass ? "PASS " : "FAIL ") << a.name << " = "
                  << num(a.value) << "\n";
      std::cout << (r.passed ? "suite passed: " : "suite FAILED: ") << r.suite
                << " (" << r.failures << " failures)\n";
      return r.passed ? 0 : 1;
    }

    if (render->parsed()) {
      auto S = load_boundary(instance_path);
      PolyCurrent T;
      bool have_T = !current_path.empty();
      if (have_T) T = load_current(current_path);
      write_file(render_out,
                 render_solution(S, have_T ? &T : nullptr, nullptr, p));
      return 0;
    }
  } catch (const NonconvergenceError& e) {
    std::cerr << "solver nonconvergence: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
