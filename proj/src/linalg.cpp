#include "sprayconn/linalg.hpp"

#include <cmath>
#include <utility>

#include "sprayconn/errors.hpp"

namespace sprayconn {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::operator*(const Vector& x) const {
  if (x.size() != cols_) throw DimensionError("matrix-vector size mismatch");
  Vector y(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) s += (*this)(r, c) * x[c];
    y[r] = s;
  }
  return y;
}

Matrix Matrix::operator*(const Matrix& o) const {
  if (cols_ != o.rows_) throw DimensionError("matrix product size mismatch");
  Matrix p(rows_, o.cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = 0; k < cols_; ++k)
      for (std::size_t c = 0; c < o.cols_; ++c)
        p(r, c) += (*this)(r, k) * o(k, c);
  return p;
}

LuDecomposition::LuDecomposition(Matrix a) : lu_(std::move(a)) {
  const std::size_t n = lu_.rows();
  if (lu_.cols() != n) throw DimensionError("LU needs a square matrix");
  perm_.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
  double scale = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) scale = std::max(scale, std::abs(lu_(r, c)));
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(lu_(r, k)) > std::abs(lu_(p, k))) p = r;
    if (!(std::abs(lu_(p, k)) > 1e-14 * scale))
      throw DomainError("matrix is singular to working precision");
    if (p != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(lu_(k, c), lu_(p, c));
      std::swap(perm_[k], perm_[p]);
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      lu_(r, k) /= lu_(k, k);
      for (std::size_t c = k + 1; c < n; ++c) lu_(r, c) -= lu_(r, k) * lu_(k, c);
    }
  }
}

Vector LuDecomposition::solve(const Vector& b) const {
  const std::size_t n = lu_.rows();
  if (b.size() != n) throw DimensionError("LU solve size mismatch");
  Vector y(n);
  for (std::size_t r = 0; r < n; ++r) {
    double s = b[perm_[r]];
    for (std::size_t c = 0; c < r; ++c) s -= lu_(r, c) * y[c];
    y[r] = s;
  }
  for (std::size_t r = n; r-- > 0;) {
    double s = y[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= lu_(r, c) * y[c];
    y[r] = s / lu_(r, r);
  }
  return y;
}

Matrix LuDecomposition::inverse() const {
  const std::size_t n = lu_.rows();
  Matrix inv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    Vector e(n);
    e[c] = 1.0;
    Vector col = solve(e);
    for (std::size_t r = 0; r < n; ++r) inv(r, c) = col[r];
  }
  return inv;
}

}  // namespace sprayconn
