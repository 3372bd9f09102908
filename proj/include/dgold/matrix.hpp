#pragma once

// Dense row-major matrices and the handful of kernels the level-2 learners need.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace dgold {

using Label = std::uint32_t;
using Labels = std::vector<Label>;

class Matrix {
 public:
  Matrix() = default;

  /// Zero-filled rows x cols.
  Matrix(std::size_t rows, std::size_t cols);

  /// Takes ownership of row-major data. Throws ShapeError on a length
  /// mismatch and Error on any non-finite entry.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool all_finite() const noexcept;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Kernel behind matmul and matmul_tn. Every path computes each entry as a chain
/// of fused multiply-adds over the inner index in ascending order, so all paths
/// return identical bits.
enum class GemmPath { automatic, portable, avx2, avx512 };

/// Selects the kernel; returns false and changes nothing if this CPU lacks it.
bool set_gemm_path(GemmPath path) noexcept;
GemmPath active_gemm_path() noexcept;

Matrix matmul(const Matrix& a, const Matrix& b);

/// aᵀ·b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

/// Lower-triangular Cholesky factor L with a = L·Lᵀ. Throws
/// FactorizationError carrying the index of the first non-positive pivot.
Matrix cholesky(const Matrix& a);

/// Solves a·X = b for symmetric positive-definite a via Cholesky.
Matrix spd_solve(const Matrix& a, const Matrix& b);

/// Per-row index of the maximum entry; ties go to the lowest index.
Labels argmax_rows(const Matrix& a);

/// Index of the maximum of a span; ties go to the lowest index.
std::size_t argmax(std::span<const double> v);

/// Numerically stable row-wise softmax.
Matrix softmax_rows(const Matrix& a);

/// Keeps the listed rows, in the given order.
Matrix take_rows(const Matrix& a, std::span<const std::size_t> rows);

double dot(std::span<const double> a, std::span<const double> b) noexcept;

/// Squared Euclidean distance.
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace dgold
