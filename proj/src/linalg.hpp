#pragma once

#include <cstddef>
#include <vector>

namespace msm {

// Dense row-major matrix. State dimensions in this project stay below ten,
// so no attempt is made at blocking or sparsity.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Matrix operator*(const Matrix& rhs) const;
  Matrix operator+(const Matrix& rhs) const;
  Matrix operator-(const Matrix& rhs) const;
  Matrix& operator*=(double s);

  // Maximum absolute row sum.
  double norm_inf() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::vector<double> mat_vec(const Matrix& a, const std::vector<double>& x);

// Gaussian elimination with partial pivoting. Throws NumericalError on a
// (numerically) singular system.
std::vector<double> solve_linear(Matrix a, std::vector<double> b);
Matrix solve_matrix(Matrix a, Matrix b);

// Matrix exponential by scaling and squaring with a (6,6) Pade approximant.
Matrix expm(const Matrix& a);

struct NnlsResult {
  std::vector<double> x;
  double residual_norm = 0.0;
};

// Lawson-Hanson active-set nonnegative least squares, min ||a x - b|| s.t.
// x >= 0. Throws NumericalError naming the involved columns when the
// passive-set system is singular (collinear regressors).
NnlsResult nnls(const Matrix& a, const std::vector<double>& b);

}  // namespace msm
