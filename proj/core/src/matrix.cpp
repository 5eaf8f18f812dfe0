#include "spectrack/matrix.hpp"

#include <cmath>

#include "spectrack/error.hpp"

namespace spectrack {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                         " does not match shape " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged initializer for matrix");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::row_vector(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Matrix::shape_str() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void Matrix::fill(double v) noexcept {
  for (double& x : data_) x = v;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_shape(same_shape(other), "add", *this, other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
  for (double& x : data_) x *= s;
  return *this;
}

void require_shape(bool ok, const char* op, const Matrix& a, const Matrix& b) {
  if (!ok) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require_shape(a.cols() == b.rows(), "matmul", a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Matrix out(m, n);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = po + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  require_shape(a.rows() == b.rows(), "matmul_tn", a, b);
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  if (out.rows() != m || out.cols() != n) {
    throw DimensionError("matmul_tn: output shape " + out.shape_str() + " expected " +
                         std::to_string(m) + "x" + std::to_string(n));
  }
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = pa + p * m;
    const double* brow = pb + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* orow = po + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  Matrix out(a.cols(), b.cols());
  matmul_tn_acc(a, b, out);
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require_shape(a.cols() == b.cols(), "matmul_nt", a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  Matrix out(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    const auto arow = a.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const auto brow = b.row(j);
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace spectrack
