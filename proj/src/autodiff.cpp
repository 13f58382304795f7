#include "sprayconn/autodiff.hpp"

#include <string>

#include "sprayconn/errors.hpp"

namespace sprayconn {

JetVector seed(const Vector& x, const Vector& h) {
  if (x.size() != h.size()) throw DimensionError("point and direction sizes differ");
  JetVector j;
  j.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) j.push_back(Jet::variable(x[i], h[i]));
  return j;
}

Vector values(const JetVector& j) {
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].val;
  return v;
}

Vector first(const JetVector& j) {
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].d1;
  return v;
}

Vector second(const JetVector& j) {
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].d2;
  return v;
}

JetVector jet_eval(const ExprMap& f, const Vector& x, const Vector& h) {
  if (x.size() != f.arity_in())
    throw DimensionError("map takes " + std::to_string(f.arity_in()) +
                         " inputs, got " + std::to_string(x.size()));
  JetVector in = seed(x, h);
  return f.eval<Jet>(std::span<const Jet>(in));
}

Vector dir_derivative(const ExprMap& f, const Vector& x, const Vector& h) {
  return first(jet_eval(f, x, h));
}

Vector second_dir_derivative(const ExprMap& f, const Vector& x, const Vector& h1,
                             const Vector& h2) {
  Vector q_sum = second(jet_eval(f, x, h1 + h2));
  Vector q1 = second(jet_eval(f, x, h1));
  Vector q2 = second(jet_eval(f, x, h2));
  Vector out(q_sum.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = 0.5 * (q_sum[i] - (q1[i] + q2[i]));
  return out;
}

Matrix jacobian(const ExprMap& f, const Vector& x) {
  Matrix j(f.arity_out(), f.arity_in());
  for (std::size_t c = 0; c < f.arity_in(); ++c) {
    Vector e(f.arity_in());
    e[c] = 1.0;
    Vector col = dir_derivative(f, x, e);
    for (std::size_t r = 0; r < col.size(); ++r) j(r, c) = col[r];
  }
  return j;
}

Vector fd_oracle(const ExprMap& f, const Vector& x, const Vector& h, int order,
                 double eps) {
  if (!(eps >= 1e-8 && eps <= 1e-3))
    throw DomainError("finite-difference step must lie in [1e-8, 1e-3]");
  if (x.size() != h.size()) throw DimensionError("point and direction sizes differ");
  Vector plus = f(x + eps * h);
  Vector minus = f(x - eps * h);
  if (order == 1) return (1.0 / (2.0 * eps)) * (plus - minus);
  if (order == 2) return (1.0 / (eps * eps)) * (plus - 2.0 * f(x) + minus);
  throw DomainError("finite-difference order must be 1 or 2");
}

}  // namespace sprayconn
