#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sprayconn/atlas.hpp"
#include "sprayconn/expr.hpp"
#include "sprayconn/report.hpp"
#include "sprayconn/spray.hpp"

namespace sprayconn {

/// Per-chart table of local representatives (vector fields: n outputs,
/// scalar functions: one output; inputs x0..).
class FieldTable {
 public:
  void set(const std::string& chart, ExprMap f) { table_[chart] = std::move(f); }
  bool has(const std::string& chart) const { return table_.count(chart) != 0; }
  const ExprMap& at(const std::string& chart) const;

 private:
  std::map<std::string, ExprMap> table_;
};

using VectorField = FieldTable;
using ScalarField = FieldTable;

/// (nabla_X Y)(x) = DY(x)(X(x)) - B(x; X(x), Y(x)).
Vector covariant_derivative(const BilinearMap& b, const ExprMap& x_field,
                            const ExprMap& y_field, const Vector& x);
Vector covariant_derivative(const BilinearCoeffs& b, const VectorField& x_field,
                            const VectorField& y_field, const Chart& chart, const Vector& x);

/// [X, Y](x) = DY(x)(X(x)) - DX(x)(Y(x)).
Vector lie_bracket(const ExprMap& x_field, const ExprMap& y_field, const Vector& x);

/// Tensoriality in X, Leibniz rule in Y, torsion-freeness and R-bilinearity
/// over the given test fields. One record per axiom.
std::vector<CheckRecord> check_cd_axioms(const BilinearMap& b, const Chart& chart,
                                         const ExprMap& x_field, const ExprMap& y_field,
                                         const ExprMap& f, const SampleContext& ctx,
                                         std::size_t samples, double tol = 1e-8,
                                         double torsion_tol = 1e-12);

/// Connection map K(x, u, v, w) = (x, w - B(x; u, v)).
class ConnectionMap {
 public:
  explicit ConnectionMap(BilinearMap b) : b_(std::move(b)) {}
  const BilinearMap& bilinear() const noexcept { return b_; }
  TangentVector operator()(const DoubleTangentVector& xi) const;

 private:
  BilinearMap b_;
};

/// (x, u, v): drops the second fiber component.
struct AnchoredVector {
  Vector x;
  Vector u;
  Vector v;
};
AnchoredVector anchor_projection(const DoubleTangentVector& xi);
/// (x, u, w - B(x; u, v)): K before forgetting the foot u.
AnchoredVector pullback_part(const ConnectionMap& k, const DoubleTangentVector& xi);

TangentVector connection_map_apply(const ConnectionMap& k, const DoubleTangentVector& xi);

/// ||K(TX(Y(x))) - (nabla_Y X)(x)|| over chart samples; TX(x, v) =
/// (x, X(x), v, DX(x)v).
CheckRecord check_nabla_equals_K_of_T(const ConnectionMap& k, const ExprMap& x_field,
                                      const ExprMap& y_field, const Chart& chart,
                                      const SampleContext& ctx, std::size_t samples,
                                      double tol = 1e-9);

/// Left splitting c of 0 -> VTM -> T(TM) -> Pi*TM -> 0. Either backed by a
/// bilinear map, c(x, u, v, w) = (x, u, 0, w - B(x; u, v)), or an opaque
/// evaluation-only function.
class ConnectionSplitting {
 public:
  using Fn = std::function<DoubleTangentVector(const DoubleTangentVector&)>;

  static ConnectionSplitting from_bilinear(BilinearMap b);
  static ConnectionSplitting black_box(std::size_t dim, Fn fn);

  std::size_t dim() const noexcept { return dim_; }
  const std::optional<BilinearMap>& bilinear() const noexcept { return b_; }
  DoubleTangentVector operator()(const DoubleTangentVector& xi) const;

 private:
  ConnectionSplitting() = default;
  std::size_t dim_ = 0;
  std::optional<BilinearMap> b_;
  Fn fn_;
};

DoubleTangentVector splitting_apply(const ConnectionSplitting& c, const DoubleTangentVector& xi);

/// (x, u, v, w) -> (x, v, u, w).
DoubleTangentVector involution(const DoubleTangentVector& xi);
/// T Pi(xi) = (x, v).
TangentVector tangent_projection(const DoubleTangentVector& xi);
/// Ver_v(w) = (x, v, 0, w).
DoubleTangentVector vertical_lift(const Vector& x, const Vector& v, const Vector& w);
/// Hor_u(w) = (x, u, w, B(x; u, w)), the element of ker K over (x, u) with
/// T Pi = (x, w).
DoubleTangentVector horizontal_lift(const BilinearMap& b, const Vector& x, const Vector& u,
                                    const Vector& w);
/// J(x, u, v, w) = (x, u, 0, v).
DoubleTangentVector tangent_structure(const DoubleTangentVector& xi);

/// Vertical and horizontal projectors. Vp = c; Hp(xi) = Hor_u(v), which is
/// Id - Vp in exact arithmetic.
std::pair<DoubleTangentVector, DoubleTangentVector> projectors(const ConnectionSplitting& c,
                                                               const DoubleTangentVector& xi);

/// Connection map of a splitting, K(xi) = (x, w-block of c(xi)). A black-box
/// splitting is sampled over the chart: B(x; u, v) = -w-block of c(x, u, v, 0),
/// then splitting identity, vertical image, symmetry and linearity are
/// validated to 1e-9. Throws SplittingRejected otherwise.
ConnectionMap connection_from_splitting(const ConnectionSplitting& c, const Chart& chart,
                                        const SampleContext& ctx, std::size_t samples = 50,
                                        double tol = 1e-9);

/// Random element of T(TM) over a chart point.
DoubleTangentVector random_double_tangent(const Vector& x, Sampler& rng);

/// The coordinate identities relating c, Inv, J, Hor, Ver, K, Vp, Hp; one
/// record per identity over `samples` random double tangent vectors. c o Inv = c
/// compares the vertical fiber parts, since the feet u and v differ.
std::vector<CheckRecord> check_exact_identities(const BilinearMap& b, const Chart& chart,
                                                const SampleContext& ctx, std::size_t samples,
                                                double tol = 1e-15);

}  // namespace sprayconn
