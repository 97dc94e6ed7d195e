#pragma once

#include <span>
#include <vector>

#include "wanova/errors.hpp"

namespace wanova {

/// Minimal dense row-major matrix for the small symmetric factorizations the
/// option models need (d is a few dozen at most).
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, 0.0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }
  std::span<const double> row(int i) const {
    return {a_.data() + static_cast<size_t>(i) * cols_, static_cast<size_t>(cols_)};
  }

  void matvec(std::span<const double> x, std::span<double> out) const;
  Matrix times_transpose() const;  // A * A^T

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
Matrix cholesky_lower(const Matrix& a);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // columns are the eigenvectors, same order
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix; sweeps until the
/// off-diagonal Frobenius norm falls below 1e-12 of the matrix scale.
/// Throws EigenSolveFailure if that never happens.
SymmetricEigen jacobi_eigen(const Matrix& a);

}  // namespace wanova
