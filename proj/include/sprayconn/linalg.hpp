#pragma once

#include <cstddef>
#include <vector>

#include "sprayconn/core_space.hpp"

namespace sprayconn {

/// Small dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return a_[r * cols_ + c];
  }

  Vector operator*(const Vector& x) const;
  Matrix operator*(const Matrix& o) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

/// LU factorization with partial pivoting of a square matrix.
class LuDecomposition {
 public:
  /// Throws DomainError when the matrix is singular to working precision.
  explicit LuDecomposition(Matrix a);
  Vector solve(const Vector& b) const;
  Matrix inverse() const;
  std::size_t size() const noexcept { return lu_.rows(); }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

}  // namespace sprayconn
