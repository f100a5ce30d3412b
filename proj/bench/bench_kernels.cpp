// Timing comparison of the parallel kernels against their serial reference
// implementations on an assembled operator-sized problem. Prints one line per
// kernel with throughput and verifies that both variants produce identical
// bits before reporting.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>
#include <vector>

#include "divlab/assemble.hpp"
#include "divlab/grid.hpp"
#include "divlab/kernels.hpp"
#include "divlab/scenarios.hpp"

using namespace divlab;
using clk = std::chrono::steady_clock;

namespace {

double seconds_since(clk::time_point t0) {
  return std::chrono::duration<double>(clk::now() - t0).count();
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clk::now();
    fn();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

}  // namespace

int main() {
  // A realistic pattern: the assembled planar operator on a fine grid.
  auto f = make_scenario("gaussian-ou", 2);
  auto op = assemble(f, make_grid(2, 8.0, 0.05), AssembleOptions{});
  const Csr& m = op.K;
  const std::int64_t n = m.n;
  std::printf("matrix: n=%lld nnz=%lld (planar operator, h=0.05)\n",
              static_cast<long long>(n), static_cast<long long>(m.nnz()));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> g(-1.0, 1.0);
  std::vector<double> x(n), y_par(n), y_ser(n);
  for (auto& v : x) v = g(rng);

  const int reps = 20;
  const double t_spmv_par =
      time_best_of(reps, [&] { spmv(m, x.data(), y_par.data()); });
  const double t_spmv_ser =
      time_best_of(reps, [&] { spmv_serial(m, m.val, x.data(), y_ser.data()); });
  const bool spmv_same =
      std::memcmp(y_par.data(), y_ser.data(), sizeof(double) * n) == 0;
  std::printf("spmv   : parallel %8.3f ms   serial %8.3f ms   speedup %5.2fx   %s\n",
              1e3 * t_spmv_par, 1e3 * t_spmv_ser, t_spmv_ser / t_spmv_par,
              spmv_same ? "bitwise-equal" : "MISMATCH");

  volatile double sink = 0.0;
  const double t_dot_par = time_best_of(reps, [&] { sink = dot(x.data(), y_par.data(), n); });
  const double d_par = dot(x.data(), y_par.data(), n);
  const double t_dot_ser =
      time_best_of(reps, [&] { sink = dot_serial(x.data(), y_ser.data(), n); });
  const double d_ser = dot_serial(x.data(), y_ser.data(), n);
  std::printf("dot    : parallel %8.3f ms   serial %8.3f ms   speedup %5.2fx   %s\n",
              1e3 * t_dot_par, 1e3 * t_dot_ser, t_dot_ser / t_dot_par,
              d_par == d_ser && spmv_same ? "bitwise-equal" : "MISMATCH");

  const double t_nrm = time_best_of(reps, [&] { sink = nrm2(x.data(), n); });
  std::printf("nrm2   : parallel %8.3f ms\n", 1e3 * t_nrm);
  (void)sink;

  return (spmv_same && d_par == d_ser) ? 0 : 1;
}
