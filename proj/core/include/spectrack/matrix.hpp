#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace spectrack {

/// Dense row-major matrix of 64-bit reals. Vectors are 1×n row matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix row_vector(std::span<const double> values);
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const noexcept;
  std::string shape_str() const;

  void fill(double v) noexcept;
  Matrix transposed() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator*=(double s) noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Raw kernels. Accumulation runs over the inner index in ascending order for
// every output entry, so results are reproducible bit-for-bit.

/// a·b
Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ·b
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a·bᵀ
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// out += aᵀ·b
void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& out);

/// Throws DimensionError naming both shapes unless the predicate holds.
void require_shape(bool ok, const char* op, const Matrix& a, const Matrix& b);

}  // namespace spectrack
