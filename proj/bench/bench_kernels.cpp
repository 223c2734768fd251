// Timing comparison of the brute-force serial kernels against the
// contraction-based OpenMP kernels. Build and run:
//   cmake --build build --target lra_bench && ./build/bench/lra_bench

#include <omp.h>

#include <cstdio>
#include <functional>
#include <vector>

#include "lra/oracle.hpp"
#include "lra/reference.hpp"
#include "lra/rng.hpp"
#include "lra/tensor.hpp"

namespace {

double time_best_of(int reps, const std::function<double()>& fn, double* checksum) {
  double best = 1e300;
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) {
    const double t0 = omp_get_wtime();
    sum += fn();
    best = std::min(best, omp_get_wtime() - t0);
  }
  *checksum = sum;
  return best;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s %10.3f ms %10.3f ms %8.2fx\n", name, serial * 1e3, parallel * 1e3,
              serial / parallel);
}

void bench_case(const std::vector<std::size_t>& dims, std::uint64_t seed) {
  const lra::DenseTensor t = lra::random_gaussian_tensor(dims, seed);
  lra::Rng rng(seed + 1);
  std::vector<std::vector<double>> vecs(dims.size());
  for (std::size_t mu = 0; mu < dims.size(); ++mu) {
    vecs[mu].resize(dims[mu]);
    for (double& e : vecs[mu]) e = rng.normal();
  }
  const lra::FactorTuple x(std::move(vecs));

  std::printf("dims:");
  for (std::size_t n : dims) std::printf(" %zu", n);
  std::printf("  (%zu entries, %d threads)\n", t.size(), omp_get_max_threads());
  std::printf("%-28s %13s %13s %9s\n", "kernel", "reference", "parallel", "speedup");

  const int reps = 5;
  double c0 = 0.0, c1 = 0.0;
  double s = time_best_of(reps, [&] { return lra::ref::multilinear_form(t, x); }, &c0);
  double p = time_best_of(reps, [&] { return lra::multilinear_form(t, x); }, &c1);
  report("multilinear_form", s, p);

  s = time_best_of(reps, [&] { return lra::ref::partial_contraction(t, x, 0)[0]; }, &c0);
  p = time_best_of(reps, [&] { return lra::partial_contraction(t, x, 0)[0]; }, &c1);
  report("partial_contraction mode 0", s, p);

  const std::size_t last = dims.size() - 1;
  s = time_best_of(reps, [&] { return lra::ref::partial_contraction(t, x, last)[0]; }, &c0);
  p = time_best_of(reps, [&] { return lra::partial_contraction(t, x, last)[0]; }, &c1);
  report("partial_contraction last", s, p);

  s = time_best_of(reps, [&] { return lra::ref::residual_half_sumsq(t, x); }, &c0);
  p = time_best_of(reps, [&] { return lra::residual_half_sumsq(t, x); }, &c1);
  report("residual_half_sumsq", s, p);

  s = time_best_of(reps, [&] { return lra::ref::outer_rank_one(x)[0]; }, &c0);
  p = time_best_of(reps, [&] { return lra::outer_rank_one(x)[0]; }, &c1);
  report("outer_rank_one", s, p);
  std::printf("\n");
}

}  // namespace

int main() {
  bench_case({96, 96, 96}, 7);
  bench_case({512, 512}, 11);
  bench_case({24, 24, 24, 24}, 13);
  return 0;
}
