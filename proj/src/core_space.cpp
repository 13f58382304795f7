#include "sprayconn/core_space.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "sprayconn/errors.hpp"

namespace sprayconn {

namespace {

void require_same_size(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw DimensionError("vector sizes differ: " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
}

}  // namespace

bool Vector::all_finite() const noexcept {
  return std::all_of(c_.begin(), c_.end(),
                     [](double d) { return std::isfinite(d); });
}

Vector& Vector::operator+=(const Vector& o) {
  require_same_size(*this, o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& o) {
  require_same_size(*this, o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Vector& Vector::operator*=(double s) noexcept {
  for (auto& c : c_) c *= s;
  return *this;
}

std::ostream& operator<<(std::ostream& os, const Vector& v) {
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os << ')';
}

double norm_inf(const Vector& v) noexcept {
  double m = 0.0;
  for (double c : v) m = std::max(m, std::abs(c));
  return m;
}

double norm2(const Vector& v) noexcept {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

double dot(const Vector& a, const Vector& b) {
  require_same_size(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vector head(const Vector& v, std::size_t n) {
  if (n > v.size()) throw DimensionError("head longer than vector");
  return Vector(v.span().first(n));
}

Vector concat(const Vector& a, const Vector& b) {
  std::vector<double> c(a.begin(), a.end());
  c.insert(c.end(), b.begin(), b.end());
  return Vector(std::move(c));
}

double scaled_residual(const Vector& a, const Vector& b) {
  require_same_size(a, b);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    diff = std::max(diff, std::abs(a[i] - b[i]));
  if (std::isnan(diff)) return diff;
  return diff / (1.0 + std::max(norm_inf(a), norm_inf(b)));
}

ModelSpace::ModelSpace(std::size_t n)
    : ModelSpace(std::vector<std::size_t>{n}, 1) {}

ModelSpace::ModelSpace(std::vector<std::size_t> grades,
                       std::size_t active_level, SeminormKind kind,
                       std::vector<double> weights)
    : grades_(std::move(grades)),
      active_(active_level),
      kind_(kind),
      weights_(std::move(weights)) {
  if (grades_.empty()) throw DomainError("model space needs at least one grade");
  if (grades_.front() < 1) throw DomainError("first grade must be >= 1");
  for (std::size_t g = 1; g < grades_.size(); ++g)
    if (grades_[g] < grades_[g - 1])
      throw DomainError("grades must be non-decreasing");
  if (active_ < 1 || active_ > grades_.size())
    throw DomainError("active level out of range");
  if (weights_.empty()) weights_.assign(grades_.size(), 1.0);
  if (weights_.size() != grades_.size())
    throw DimensionError("one weight per grade required");
  for (double w : weights_)
    if (!(w > 0.0)) throw DomainError("grade weights must be positive");
}

std::size_t ModelSpace::dim(std::size_t level) const {
  if (level < 1 || level > grades_.size())
    throw DomainError("level " + std::to_string(level) + " out of range");
  return grades_[level - 1];
}

ModelSpace ModelSpace::at_level(std::size_t level) const {
  return ModelSpace(grades_, level, kind_, weights_);
}

std::size_t ModelSpace::grade_of(std::size_t coord) const {
  for (std::size_t g = 0; g < grades_.size(); ++g)
    if (coord < grades_[g]) return g + 1;
  throw DomainError("coordinate index beyond the top grade");
}

double seminorm(const ModelSpace& space, const Vector& x, std::size_t level) {
  if (level < 1 || level > space.active_level())
    throw DomainError("seminorm level " + std::to_string(level) +
                      " out of range [1, " +
                      std::to_string(space.active_level()) + "]");
  if (x.size() != space.dim())
    throw DimensionError("vector does not live at the active level");
  double m = 0.0;
  for (std::size_t i = 0; i < space.dim(level); ++i) {
    double c = std::abs(x[i]);
    if (space.seminorm_kind() == SeminormKind::weighted_sup)
      c *= space.weights()[space.grade_of(i) - 1];
    m = std::max(m, c);
  }
  return m;
}

Vector project(const ModelSpace& space, const Vector& x, std::size_t from_level,
               std::size_t to_level) {
  if (to_level > from_level)
    throw DomainError("cannot project from level " + std::to_string(from_level) +
                      " up to level " + std::to_string(to_level));
  if (x.size() != space.dim(from_level))
    throw DimensionError("vector does not live at level " +
                         std::to_string(from_level));
  return head(x, space.dim(to_level));
}

}  // namespace sprayconn
