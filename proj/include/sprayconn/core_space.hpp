#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <vector>

namespace sprayconn {

/// Dense coordinate vector. Used for base points, tangent components and
/// every other block of chart data.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : c_(n, fill) {}
  Vector(std::initializer_list<double> init) : c_(init) {}
  explicit Vector(std::vector<double> coords) : c_(std::move(coords)) {}
  explicit Vector(std::span<const double> coords)
      : c_(coords.begin(), coords.end()) {}

  std::size_t size() const noexcept { return c_.size(); }
  bool empty() const noexcept { return c_.empty(); }
  double& operator[](std::size_t i) { return c_[i]; }
  double operator[](std::size_t i) const { return c_[i]; }
  auto begin() noexcept { return c_.begin(); }
  auto end() noexcept { return c_.end(); }
  auto begin() const noexcept { return c_.begin(); }
  auto end() const noexcept { return c_.end(); }
  std::span<const double> span() const noexcept { return c_; }
  const std::vector<double>& coords() const noexcept { return c_; }

  bool all_finite() const noexcept;

  Vector& operator+=(const Vector& o);
  Vector& operator-=(const Vector& o);
  Vector& operator*=(double s) noexcept;

  friend Vector operator+(Vector a, const Vector& b) { return a += b; }
  friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
  friend Vector operator*(double s, Vector a) { return a *= s; }
  friend Vector operator*(Vector a, double s) { return a *= s; }
  friend Vector operator-(Vector a) { return a *= -1.0; }
  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> c_;
};

std::ostream& operator<<(std::ostream& os, const Vector& v);

double norm_inf(const Vector& v) noexcept;
double norm2(const Vector& v) noexcept;
double dot(const Vector& a, const Vector& b);

/// First n coordinates of v.
Vector head(const Vector& v, std::size_t n);
/// Concatenation [a, b].
Vector concat(const Vector& a, const Vector& b);

/// |a - b|_inf / (1 + max(|a|_inf, |b|_inf)). The scaled residual used by
/// every approximate check in the library.
double scaled_residual(const Vector& a, const Vector& b);

enum class SeminormKind { sup, weighted_sup };

/// Graded coordinate space. Grade g (1-based) spans the first grades[g-1]
/// coordinates; the active level selects the working dimension.
class ModelSpace {
 public:
  /// Single-grade space of dimension n.
  explicit ModelSpace(std::size_t n);
  ModelSpace(std::vector<std::size_t> grades, std::size_t active_level,
             SeminormKind kind = SeminormKind::sup,
             std::vector<double> weights = {});

  std::size_t levels() const noexcept { return grades_.size(); }
  std::size_t active_level() const noexcept { return active_; }
  std::size_t dim() const noexcept { return grades_[active_ - 1]; }
  std::size_t dim(std::size_t level) const;
  SeminormKind seminorm_kind() const noexcept { return kind_; }
  const std::vector<std::size_t>& grades() const noexcept { return grades_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  /// Same grading, different active level.
  ModelSpace at_level(std::size_t level) const;
  /// Grade (1-based) a coordinate index belongs to.
  std::size_t grade_of(std::size_t coord) const;

 private:
  std::vector<std::size_t> grades_;
  std::size_t active_;
  SeminormKind kind_;
  std::vector<double> weights_;
};

/// Sup of |x_i| (times the grade weight for weighted-sup) over the first
/// dim(level) coordinates.
double seminorm(const ModelSpace& space, const Vector& x, std::size_t level);

/// Truncates x, given at from_level, to the coordinates of to_level.
Vector project(const ModelSpace& space, const Vector& x, std::size_t from_level,
               std::size_t to_level);

}  // namespace sprayconn
