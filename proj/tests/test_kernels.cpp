#include <doctest.h>
#include <omp.h>

#include <cmath>
#include <random>

#include "recover/kernels.hpp"

using recover::kernels::DenseMatrix;
namespace kernels = recover::kernels;

namespace {

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = u(rng);
  }
  return m;
}

}  // namespace

TEST_CASE("parallel pivot matches the serial reference bit for bit") {
  omp_set_num_threads(4);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto a = random_matrix(300, 257, seed);
    auto b = a;
    kernels::pivot_serial(a, 17, 40);
    kernels::pivot_parallel(b, 17, 40);
    CHECK(a == b);
    CHECK(a(17, 40) == 1.0);
    CHECK(a(3, 40) == 0.0);
  }
}

TEST_CASE("parallel multiply matches serial") {
  omp_set_num_threads(4);
  auto a = random_matrix(120, 80, 9);
  auto b = random_matrix(80, 150, 10);
  DenseMatrix c1, c2;
  kernels::multiply_serial(a, b, c1);
  kernels::multiply_parallel(a, b, c2);
  CHECK(c1 == c2);
}

TEST_CASE("invert produces an inverse") {
  auto a = random_matrix(40, 40, 4);
  auto inv = a;
  REQUIRE(kernels::invert(inv));
  DenseMatrix prod;
  kernels::multiply(a, inv, prod);
  double worst = 0.0;
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t j = 0; j < 40; ++j) worst = std::max(worst, std::abs(prod(i, j) - (i == j ? 1.0 : 0.0)));
  }
  CHECK(worst < 1e-9);

  DenseMatrix singular(2, 2);
  singular(0, 0) = 1;
  singular(0, 1) = 2;
  singular(1, 0) = 2;
  singular(1, 1) = 4;
  CHECK_FALSE(kernels::invert(singular));
}
