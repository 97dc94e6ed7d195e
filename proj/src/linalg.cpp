#include "wanova/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace wanova {

void Matrix::matvec(std::span<const double> x, std::span<double> out) const {
  if (static_cast<int>(x.size()) != cols_ || static_cast<int>(out.size()) != rows_)
    throw DimensionMismatch("matvec: size mismatch");
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    const double* r = a_.data() + static_cast<size_t>(i) * cols_;
    for (int j = 0; j < cols_; ++j) s += r[j] * x[j];
    out[i] = s;
  }
}

Matrix Matrix::times_transpose() const {
  Matrix out(rows_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int k = 0; k < cols_; ++k) s += (*this)(i, k) * (*this)(j, k);
      out(i, j) = out(j, i) = s;
    }
  return out;
}

Matrix cholesky_lower(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("cholesky: square matrix required");
  const int n = a.rows();
  Matrix l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (s <= 0.0)
          throw EigenSolveFailure("cholesky: matrix is not positive definite");
        l(i, j) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return l;
}

SymmetricEigen jacobi_eigen(const Matrix& a_in) {
  if (a_in.rows() != a_in.cols())
    throw DimensionMismatch("jacobi_eigen: square matrix required");
  const int n = a_in.rows();
  Matrix a = a_in;
  Matrix v(n, n);
  for (int i = 0; i < n; ++i) v(i, i) = 1.0;

  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
  if (scale == 0.0) scale = 1.0;

  auto offdiag = [&] {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
  };

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (offdiag() <= 1e-12 * scale * n) break;
    if (sweep == max_sweeps - 1)
      throw EigenSolveFailure("jacobi_eigen: did not converge");
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
        double t = std::copysign(1.0, theta) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a(i, i) > a(j, j); });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (int c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]);
    for (int r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  return out;
}

}  // namespace wanova
