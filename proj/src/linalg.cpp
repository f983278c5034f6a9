#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace msm {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  Matrix out(rows_, rhs.cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const double aik = (*this)(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += aik * rhs(k, j);
    }
  }
  return out;
}

Matrix Matrix::operator+(const Matrix& rhs) const {
  Matrix out = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += rhs.data_[i];
  return out;
}

Matrix Matrix::operator-(const Matrix& rhs) const {
  Matrix out = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= rhs.data_[i];
  return out;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

double Matrix::norm_inf() const {
  double best = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) row += std::abs((*this)(i, j));
    best = std::max(best, row);
  }
  return best;
}

std::vector<double> mat_vec(const Matrix& a, const std::vector<double>& x) {
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

namespace {

// Row-echelon reduction shared by the vector and matrix solvers.
void eliminate(Matrix& a, Matrix& rhs) {
  const std::size_t n = a.rows();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (std::abs(a(pivot, col)) < 1e-300)
      throw NumericalError("singular linear system");
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
      for (std::size_t j = 0; j < rhs.cols(); ++j) std::swap(rhs(col, j), rhs(pivot, j));
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      for (std::size_t j = 0; j < rhs.cols(); ++j) rhs(r, j) -= f * rhs(col, j);
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    for (std::size_t j = 0; j < rhs.cols(); ++j) {
      double acc = rhs(col, j);
      for (std::size_t k = col + 1; k < n; ++k) acc -= a(col, k) * rhs(k, j);
      rhs(col, j) = acc / a(col, col);
    }
  }
}

}  // namespace

std::vector<double> solve_linear(Matrix a, std::vector<double> b) {
  Matrix rhs(b.size(), 1);
  for (std::size_t i = 0; i < b.size(); ++i) rhs(i, 0) = b[i];
  eliminate(a, rhs);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = rhs(i, 0);
  return b;
}

Matrix solve_matrix(Matrix a, Matrix b) {
  eliminate(a, b);
  return b;
}

Matrix expm(const Matrix& a) {
  const std::size_t n = a.rows();
  if (n == 0) return Matrix(0, 0);

  int squarings = 0;
  double norm = a.norm_inf();
  if (norm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    squarings = std::max(squarings, 0);
  }
  Matrix x = a;
  x *= std::ldexp(1.0, -squarings);

  // (6,6) Pade: N(x) = sum c_k x^k, D(x) = sum (-1)^k c_k x^k.
  const int p = 6;
  double c = 1.0;
  Matrix num = Matrix::identity(n);
  Matrix den = Matrix::identity(n);
  Matrix power = Matrix::identity(n);
  for (int k = 1; k <= p; ++k) {
    c = c * static_cast<double>(p - k + 1) /
        (static_cast<double>(2 * p - k + 1) * static_cast<double>(k));
    power = power * x;
    Matrix term = power;
    term *= c;
    num = num + term;
    if (k % 2 == 0)
      den = den + term;
    else
      den = den - term;
  }

  Matrix result = solve_matrix(den, num);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

NnlsResult nnls(const Matrix& a, const std::vector<double>& b) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();

  // Pairwise collinearity scan; the active-set solver below would stall on
  // duplicated regressors with an unhelpful message otherwise.
  std::vector<double> col_norm(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += a(i, j) * a(i, j);
    col_norm[j] = std::sqrt(s);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (col_norm[j] == 0.0) continue;
    for (std::size_t k = j + 1; k < n; ++k) {
      if (col_norm[k] == 0.0) continue;
      double dot = 0.0;
      for (std::size_t i = 0; i < m; ++i) dot += a(i, j) * a(i, k);
      if (std::abs(dot) / (col_norm[j] * col_norm[k]) > 1.0 - 1e-12) {
        std::ostringstream msg;
        msg << "rank-deficient regressor: columns " << j << " and " << k
            << " are collinear";
        throw NumericalError(msg.str());
      }
    }
  }

  // Normal-equation form; condition numbers here are benign.
  Matrix gram(n, n);
  std::vector<double> atb(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) atb[j] += a(i, j) * b[i];
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j; k < n; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += a(i, j) * a(i, k);
      gram(j, k) = s;
      gram(k, j) = s;
    }

  std::vector<bool> passive(n, false);
  std::vector<double> x(n, 0.0);

  auto solve_passive = [&](const std::vector<bool>& set) {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < n; ++j)
      if (set[j]) idx.push_back(j);
    Matrix g(idx.size(), idx.size());
    std::vector<double> rhs(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      rhs[r] = atb[idx[r]];
      for (std::size_t cidx = 0; cidx < idx.size(); ++cidx)
        g(r, cidx) = gram(idx[r], idx[cidx]);
    }
    std::vector<double> z;
    try {
      z = solve_linear(std::move(g), std::move(rhs));
    } catch (const NumericalError&) {
      std::ostringstream msg;
      msg << "rank-deficient regressor over columns {";
      for (std::size_t r = 0; r < idx.size(); ++r)
        msg << (r ? ", " : "") << idx[r];
      msg << "}";
      throw NumericalError(msg.str());
    }
    std::vector<double> full(n, 0.0);
    for (std::size_t r = 0; r < idx.size(); ++r) full[idx[r]] = z[r];
    return full;
  };

  const double tol = 1e-12 * (1.0 + *std::max_element(col_norm.begin(), col_norm.end()));
  const std::size_t max_outer = 3 * n + 10;
  for (std::size_t outer = 0; outer < max_outer; ++outer) {
    // Gradient of 0.5||ax-b||^2 at the current iterate.
    std::vector<double> grad(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double s = atb[j];
      for (std::size_t k = 0; k < n; ++k) s -= gram(j, k) * x[k];
      grad[j] = s;
    }
    std::size_t best = n;
    double best_val = tol;
    for (std::size_t j = 0; j < n; ++j) {
      if (!passive[j] && grad[j] > best_val) {
        best_val = grad[j];
        best = j;
      }
    }
    if (best == n) break;
    passive[best] = true;

    for (std::size_t inner = 0; inner < max_outer; ++inner) {
      std::vector<double> z = solve_passive(passive);
      bool feasible = true;
      double alpha = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (passive[j] && z[j] <= 0.0) {
          feasible = false;
          const double step = x[j] / (x[j] - z[j]);
          alpha = std::min(alpha, step);
        }
      }
      if (feasible) {
        x = std::move(z);
        break;
      }
      for (std::size_t j = 0; j < n; ++j)
        if (passive[j]) x[j] += alpha * (z[j] - x[j]);
      for (std::size_t j = 0; j < n; ++j)
        if (passive[j] && x[j] <= tol) {
          x[j] = 0.0;
          passive[j] = false;
        }
    }
  }

  NnlsResult out;
  out.x = x;
  double rss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double r = -b[i];
    for (std::size_t j = 0; j < n; ++j) r += a(i, j) * x[j];
    rss += r * r;
  }
  out.residual_norm = std::sqrt(rss);
  return out;
}

}  // namespace msm
