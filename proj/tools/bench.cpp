// Benchmark: OpenMP kernels against the serial reference implementation for
// the primal-dual flow solver and the adaptive energy quadrature.
#include <chrono>
#include <cstdio>

#include "plateau/cli.hpp"
#include "plateau/integral.hpp"
#include "plateau/torusmaps.hpp"

using namespace plateau;

namespace {

template <class F>
double timed(F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

int main() {
  std::printf("%-34s %10s %10s %8s\n", "kernel", "serial[s]", "parallel[s]",
              "speedup");

  {
    auto S = random_boundary(11, 3, 4);
    auto g = grid_for(S, 65, 16);
    NormalOptions opts;
    opts.max_iters = 3000;  // fixed work: compare kernel throughput
    opts.throw_on_gap = false;
    opts.force_splitting = true;
    double vs = 0, vp = 0;
    opts.parallel = false;
    double ts = timed([&] { vs = solve_normal(S, Exponent(), g, opts).value; });
    opts.parallel = true;
    double tp = timed([&] { vp = solve_normal(S, Exponent(), g, opts).value; });
    std::printf("%-34s %10.3f %10.3f %7.2fx   (values %.6f / %.6f)\n",
                "primal-dual flow, n=65, k=3", ts, tp, ts / tp, vs, vp);
  }

  {
    auto S = random_boundary(11, 2, 3);
    auto isol = solve_integral(S, Exponent::infinity());
    TorusMapSpec spec;
    spec.T = isol.network;
    double minlen = 1e30;
    for (const auto& e : spec.T.edges)
      minlen = std::min(minlen,
                        (spec.T.vertices[e.head] - spec.T.vertices[e.tail])
                            .norm());
    spec.eps = 0.1 * minlen;
    QuadratureOptions qo;
    double vs = 0, vp = 0;
    qo.parallel = false;
    double ts =
        timed([&] { vs = nuclear_energy(spec, Exponent(), qo).value; });
    qo.parallel = true;
    double tp =
        timed([&] { vp = nuclear_energy(spec, Exponent(), qo).value; });
    std::printf("%-34s %10.3f %10.3f %7.2fx   (values %.6f / %.6f)\n",
                "adaptive energy quadrature, k=2", ts, tp, ts / tp, vs, vp);
  }

  return 0;
}
