#include "recover/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace recover::kernels {

void DenseMatrix::swap_rows(std::size_t a, std::size_t b) {
  if (a == b) return;
  std::swap_ranges(data_.begin() + static_cast<std::ptrdiff_t>(a * cols_),
                   data_.begin() + static_cast<std::ptrdiff_t>((a + 1) * cols_),
                   data_.begin() + static_cast<std::ptrdiff_t>(b * cols_));
}

namespace {

inline void scale_pivot_row(DenseMatrix& m, std::size_t row, std::size_t col) {
  const double p = m(row, col);
  auto r = m.row(row);
  for (auto& v : r) v /= p;
  r[col] = 1.0;
}

inline void eliminate_row(DenseMatrix& m, std::size_t i, std::size_t row, std::size_t col) {
  const double f = m(i, col);
  if (f == 0.0) return;
  auto target = m.row(i);
  auto source = m.row(row);
  for (std::size_t k = 0; k < target.size(); ++k) target[k] -= f * source[k];
  target[col] = 0.0;
}

}  // namespace

void pivot_serial(DenseMatrix& m, std::size_t row, std::size_t col) {
  scale_pivot_row(m, row, col);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (i != row) eliminate_row(m, i, row, col);
  }
}

void pivot_parallel(DenseMatrix& m, std::size_t row, std::size_t col) {
  scale_pivot_row(m, row, col);
  const auto rows = static_cast<std::ptrdiff_t>(m.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    if (static_cast<std::size_t>(i) != row) eliminate_row(m, static_cast<std::size_t>(i), row, col);
  }
}

void pivot(DenseMatrix& m, std::size_t row, std::size_t col) {
  if (m.rows() * m.cols() >= kParallelThreshold) {
    pivot_parallel(m, row, col);
  } else {
    pivot_serial(m, row, col);
  }
}

namespace {

inline void multiply_row(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out, std::size_t i) {
  auto dst = out.row(i);
  std::fill(dst.begin(), dst.end(), 0.0);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double aik = a(i, k);
    if (aik == 0.0) continue;
    auto src = b.row(k);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aik * src[j];
  }
}

}  // namespace

void multiply_serial(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  out = DenseMatrix(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) multiply_row(a, b, out, i);
}

void multiply_parallel(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  out = DenseMatrix(a.rows(), b.cols());
  const auto rows = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) multiply_row(a, b, out, static_cast<std::size_t>(i));
}

void multiply(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
  if (a.rows() * b.cols() >= kParallelThreshold) {
    multiply_parallel(a, b, out);
  } else {
    multiply_serial(a, b, out);
  }
}

bool invert(DenseMatrix& m, double singular_tol) {
  const std::size_t n = m.rows();
  DenseMatrix aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = 1.0;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t best = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(aug(r, c)) > std::abs(aug(best, c))) best = r;
    }
    if (std::abs(aug(best, c)) < singular_tol) return false;
    aug.swap_rows(best, c);
    pivot(aug, c, c);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m(i, j) = aug(i, n + j);
  }
  return true;
}

}  // namespace recover::kernels
