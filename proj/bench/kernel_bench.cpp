// Serial vs OpenMP dense kernels. Usage: kernel_bench [repeats]
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>

#include "recover/kernels.hpp"

namespace kn = recover::kernels;
using kn::DenseMatrix;

namespace {

DenseMatrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) m(i, j) = u(rng);
  }
  return m;
}

double best_of(int repeats, const std::function<void()>& f) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 5;
  std::mt19937_64 rng(2024);
  std::printf("threads %d\n", omp_get_max_threads());
  std::printf("%-10s %12s %12s %12s %8s %6s\n", "kernel", "shape", "serial_ms", "openmp_ms", "speedup", "equal");

  for (auto [r, c] : {std::pair<std::size_t, std::size_t>{100, 200}, {400, 800}, {1000, 2000}, {2000, 4000}}) {
    const auto base = random_matrix(r, c, rng);
    DenseMatrix a = base, b = base;
    const double ts = best_of(repeats, [&] {
      a = base;
      kn::pivot_serial(a, r / 2, c / 3);
    });
    const double tp = best_of(repeats, [&] {
      b = base;
      kn::pivot_parallel(b, r / 2, c / 3);
    });
    char shape[32];
    std::snprintf(shape, sizeof shape, "%zux%zu", r, c);
    std::printf("%-10s %12s %12.3f %12.3f %8.2f %6s\n", "pivot", shape, ts * 1e3, tp * 1e3, ts / tp, a == b ? "yes" : "NO");
  }

  for (std::size_t n : {64, 128, 256, 384}) {
    const auto x = random_matrix(n, n, rng), y = random_matrix(n, n, rng);
    DenseMatrix a(n, n), b(n, n);
    const double ts = best_of(repeats, [&] { kn::multiply_serial(x, y, a); });
    const double tp = best_of(repeats, [&] { kn::multiply_parallel(x, y, b); });
    char shape[32];
    std::snprintf(shape, sizeof shape, "%zux%zu", n, n);
    std::printf("%-10s %12s %12.3f %12.3f %8.2f %6s\n", "multiply", shape, ts * 1e3, tp * 1e3, ts / tp, a == b ? "yes" : "NO");
  }
  return 0;
}
