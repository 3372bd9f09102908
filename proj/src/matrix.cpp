#include "dgold/matrix.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "dgold/error.hpp"

#if defined(DGOLD_X86_GEMM)
#include "gemm.hpp"
#endif

namespace dgold {

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) + " != " + std::to_string(rows_) + "x" +
                     std::to_string(cols_));
  }
  if (!all_finite()) throw Error("matrix entries must be finite");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  if (!all_finite()) throw Error("matrix entries must be finite");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

// Same contract as the ISA kernels, one correctly rounded fma at a time.
void gemm_portable(const double* a, std::size_t a_row, std::size_t a_col, const double* b, double* c, std::size_t n,
                   std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    double* out = c + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double x = a[i * a_row + p * a_col];
      const double* brow = b + p * m;
      for (std::size_t j = 0; j < m; ++j) out[j] = std::fma(x, brow[j], out[j]);
    }
  }
}

using GemmFn = void (*)(const double*, std::size_t, std::size_t, const double*, double*, std::size_t, std::size_t,
                        std::size_t);

bool path_supported(GemmPath path) noexcept {
  switch (path) {
    case GemmPath::automatic:
    case GemmPath::portable:
      return true;
#if defined(DGOLD_X86_GEMM)
    case GemmPath::avx2:
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    case GemmPath::avx512:
      return __builtin_cpu_supports("avx512f");
#else
    case GemmPath::avx2:
    case GemmPath::avx512:
      return false;
#endif
  }
  return false;
}

GemmPath best_path() noexcept {
  if (path_supported(GemmPath::avx512)) return GemmPath::avx512;
  if (path_supported(GemmPath::avx2)) return GemmPath::avx2;
  return GemmPath::portable;
}

GemmFn kernel_for(GemmPath path) noexcept {
#if defined(DGOLD_X86_GEMM)
  if (path == GemmPath::avx512) return detail::gemm_avx512;
  if (path == GemmPath::avx2) return detail::gemm_avx2;
#endif
  (void)path;
  return gemm_portable;
}

std::atomic<GemmPath> g_path{best_path()};

void gemm(const double* a, std::size_t a_row, std::size_t a_col, const double* b, double* c, std::size_t n,
          std::size_t k, std::size_t m) {
  kernel_for(g_path.load(std::memory_order_relaxed))(a, a_row, a_col, b, c, n, k, m);
}

}  // namespace

bool set_gemm_path(GemmPath path) noexcept {
  if (!path_supported(path)) return false;
  g_path.store(path == GemmPath::automatic ? best_path() : path);
  return true;
}

GemmPath active_gemm_path() noexcept { return g_path.load(); }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " by " +
                     std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix c(a.rows(), b.cols());
  gemm(a.data().data(), a.cols(), 1, b.data().data(), c.data().data(), a.rows(), a.cols(), b.cols());
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_tn: row counts " + std::to_string(a.rows()) + " and " + std::to_string(b.rows()));
  }
  Matrix c(a.cols(), b.cols());
  gemm(a.data().data(), 1, a.cols(), b.data().data(), c.data().data(), a.cols(), a.rows(), b.cols());
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("cholesky: matrix is not square");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) {
      throw FactorizationError("cholesky: non-positive pivot at index " + std::to_string(j), j);
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Matrix spd_solve(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols()) throw ShapeError("spd_solve: coefficient matrix is not square");
  if (a.rows() != b.rows()) {
    throw ShapeError("spd_solve: " + std::to_string(a.rows()) + " equations but rhs has " +
                     std::to_string(b.rows()) + " rows");
  }
  const Matrix l = cholesky(a);
  const std::size_t n = a.rows();
  Matrix x = b;
  // Forward substitution L·Y = B, then back substitution Lᵀ·X = Y, column by column.
  for (std::size_t c = 0; c < x.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = x(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
      x(i, c) = s / l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = x(i, c);
      for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x(k, c);
      x(i, c) = s / l(i, i);
    }
  }
  return x;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < v.size(); ++j)
    if (v[j] > v[best]) best = j;
  return best;
}

Labels argmax_rows(const Matrix& a) {
  Labels out(a.rows());
  if (a.cols() == 0) throw ShapeError("argmax_rows: matrix has no columns");
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = static_cast<Label>(argmax(a.row(i)));
  return out;
}

Matrix softmax_rows(const Matrix& a) {
  Matrix out = a;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    if (r.empty()) continue;
    const double m = *std::max_element(r.begin(), r.end());
    double z = 0.0;
    for (auto& v : r) {
      v = std::exp(v - m);
      z += v;
    }
    for (auto& v : r) v /= z;
  }
  return out;
}

Matrix take_rows(const Matrix& a, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = a.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

}  // namespace dgold
