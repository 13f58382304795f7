#pragma once

#include <vector>

#include "sprayconn/core_space.hpp"
#include "sprayconn/expr.hpp"
#include "sprayconn/jet.hpp"
#include "sprayconn/linalg.hpp"

namespace sprayconn {

using Jet = Jet2<double>;
using JetVector = std::vector<Jet>;

/// Seeds x + t h as jets (x_i, h_i, 0).
JetVector seed(const Vector& x, const Vector& h);
/// Component blocks of a jet vector.
Vector values(const JetVector& j);
Vector first(const JetVector& j);
Vector second(const JetVector& j);

/// Jet evaluation of f along the line x + t h.
JetVector jet_eval(const ExprMap& f, const Vector& x, const Vector& h);

/// Df(x)(h), exact to rounding via first-order jets.
Vector dir_derivative(const ExprMap& f, const Vector& x, const Vector& h);

/// D^2 f(x)(h1, h2) by polarization of the pure second jet Q(h):
///   (Q(h1 + h2) - (Q(h1) + Q(h2))) / 2.
/// The grouping makes the result bitwise symmetric in (h1, h2).
Vector second_dir_derivative(const ExprMap& f, const Vector& x, const Vector& h1,
                             const Vector& h2);

/// Jacobian Df(x) as a matrix (columns are Df(x)e_j).
Matrix jacobian(const ExprMap& f, const Vector& x);

/// Central finite differences along h. order 1: (f(x+eh) - f(x-eh)) / 2e,
/// order 2: (f(x+eh) - 2f(x) + f(x-eh)) / e^2. eps must lie in [1e-8, 1e-3].
Vector fd_oracle(const ExprMap& f, const Vector& x, const Vector& h, int order,
                 double eps);

inline constexpr double kFdEps1 = 1e-5;
inline constexpr double kFdEps2 = 1e-4;

}  // namespace sprayconn
