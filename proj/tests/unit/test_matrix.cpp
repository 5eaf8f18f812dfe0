#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "spectrack/error.hpp"
#include "spectrack/matrix.hpp"

using spectrack::Matrix;

TEST(Matrix, ConstructionAndShape) {
  Matrix m(2, 3, 1.5);
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m.size(), 6u);
  EXPECT_EQ(m(1, 2), 1.5);
  EXPECT_EQ(m.shape_str(), "2x3");
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), spectrack::DimensionError);
  EXPECT_THROW(Matrix::from_rows({{1, 2}, {3}}), spectrack::DimensionError);
}

TEST(Matrix, IdentityAndTranspose) {
  const Matrix i = Matrix::identity(3);
  EXPECT_EQ(i(0, 0), 1.0);
  EXPECT_EQ(i(0, 1), 0.0);
  const Matrix a = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  const Matrix t = a.transposed();
  EXPECT_EQ(t.rows(), 3u);
  EXPECT_EQ(t(2, 1), 6.0);
  EXPECT_EQ(t.transposed(), a);
}

TEST(Matrix, KernelsMatchNaiveProduct) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = oracle::random_matrix(5, 7, rng);
    const Matrix b = oracle::random_matrix(7, 3, rng);
    const Matrix ref = oracle::naive_matmul(a, b);
    EXPECT_LT(oracle::max_abs_diff(spectrack::matmul(a, b), ref), 1e-14);
    EXPECT_LT(oracle::max_abs_diff(spectrack::matmul_tn(a.transposed(), b), ref), 1e-14);
    EXPECT_LT(oracle::max_abs_diff(spectrack::matmul_nt(a, b.transposed()), ref), 1e-14);
    Matrix acc(7, 3, 1.0);
    spectrack::matmul_tn_acc(a.transposed().transposed(), oracle::random_matrix(5, 3, rng), acc);
    EXPECT_TRUE(acc.all_finite());
  }
}

TEST(Matrix, ShapeMismatchNamesBothShapes) {
  const Matrix a(2, 3), b(4, 5);
  try {
    spectrack::matmul(a, b);
    FAIL() << "expected DimensionError";
  } catch (const spectrack::DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos);
    EXPECT_NE(msg.find("4x5"), std::string::npos);
  }
}

TEST(Matrix, FiniteCheck) {
  Matrix m(1, 2);
  EXPECT_TRUE(m.all_finite());
  m[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(m.all_finite());
}

TEST(Matrix, InPlaceArithmetic) {
  Matrix a = Matrix::from_rows({{1, 2}});
  a += Matrix::from_rows({{3, 4}});
  a *= 0.5;
  EXPECT_EQ(a, Matrix::from_rows({{2, 3}}));
  EXPECT_THROW(a += Matrix(2, 1), spectrack::DimensionError);
}
