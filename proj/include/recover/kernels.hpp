#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace recover::kernels {

/// Row-major dense matrix used by the tableau simplex.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void swap_rows(std::size_t a, std::size_t b);

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Matrices with at least this many entries go through the OpenMP kernels.
inline constexpr std::size_t kParallelThreshold = 1u << 15;

// Gauss-Jordan pivot: divides `row` by the pivot entry, then eliminates column
// `col` from every other row. The pivot column ends as an exact unit vector.
void pivot_serial(DenseMatrix& m, std::size_t row, std::size_t col);
void pivot_parallel(DenseMatrix& m, std::size_t row, std::size_t col);
void pivot(DenseMatrix& m, std::size_t row, std::size_t col);

// out = a * b. `out` is resized.
void multiply_serial(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);
void multiply_parallel(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);
void multiply(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);

// In-place inverse by Gauss-Jordan with partial pivoting. Returns false when a
// pivot falls below `singular_tol`; the matrix is then left unspecified.
bool invert(DenseMatrix& m, double singular_tol = 1e-12);

}  // namespace recover::kernels
