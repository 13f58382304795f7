#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sprayconn/atlas.hpp"
#include "sprayconn/autodiff.hpp"
#include "sprayconn/core_space.hpp"
#include "sprayconn/expr.hpp"
#include "sprayconn/report.hpp"
#include "sprayconn/sampling.hpp"

namespace sprayconn {

/// Fiber part S2(x, v) of a spray on one chart. The first component of the
/// spray is always v and is not stored.
class QuadraticField {
 public:
  virtual ~QuadraticField() = default;
  virtual std::size_t dim() const = 0;
  virtual Vector eval(const Vector& x, const Vector& v) const = 0;
  /// S2(x, v) with v a jet and x fixed. The default assumes S2 is quadratic
  /// in v and expands it through the polarized bilinear form; expression
  /// sprays override it with true jet evaluation.
  virtual JetVector eval_fiber_jet(const Vector& x, const JetVector& v) const;
  virtual std::string describe() const = 0;
};

using QuadraticFieldPtr = std::shared_ptr<const QuadraticField>;

/// Symmetric bilinear map B(x; u, v) of one chart. Value type; cheap to copy.
class BilinearMap {
 public:
  using Fn = std::function<Vector(const Vector&, const Vector&, const Vector&)>;

  BilinearMap() = default;
  static BilinearMap zero(std::size_t n);
  /// Expression over inputs x0.., u0.., v0.. with n outputs. Not symmetrized.
  static BilinearMap from_expr(ExprMap b);
  /// B = -Gamma for the Levi-Civita connection of the metric. `metric` has
  /// inputs x0.. and n*n row-major outputs; it is symmetrized on evaluation.
  static BilinearMap from_metric(ExprMap metric);
  /// B(x; u, v) = (S(u + v) - (S(u) + S(v))) / 2.
  static BilinearMap polarization(QuadraticFieldPtr s);
  /// Evaluation-only map (no structure assumed).
  static BilinearMap from_function(std::size_t n, Fn fn, std::string label);

  std::size_t dim() const;
  Vector operator()(const Vector& x, const Vector& u, const Vector& v) const;
  /// B(x; u, v) for fiber jets u, v; exact through bilinearity.
  JetVector apply_fiber_jet(const Vector& x, const JetVector& u, const JetVector& v) const;
  std::string describe() const;
  bool valid() const noexcept { return fn_ != nullptr; }

 private:
  struct Impl;
  std::shared_ptr<const Impl> fn_;
};

using BilinearCoeffs = std::map<std::string, BilinearMap>;

/// Per-chart table of spray fiber parts.
class SprayField {
 public:
  void set(const std::string& chart, QuadraticFieldPtr s2) { table_[chart] = std::move(s2); }
  bool has(const std::string& chart) const { return table_.count(chart) != 0; }
  const QuadraticField& at(const std::string& chart) const { return *ptr(chart); }
  const QuadraticFieldPtr& ptr(const std::string& chart) const;
  std::vector<std::string> charts() const;

 private:
  std::map<std::string, QuadraticFieldPtr> table_;
};

/// S2 from an expression over inputs x0.., v0...
QuadraticFieldPtr make_expr_spray(ExprMap s2);
/// S2(x, v) = B(x; v, v).
QuadraticFieldPtr make_bilinear_spray(BilinearMap b);
/// S2 from a metric: B(x; v, v) with B = -Gamma.
QuadraticFieldPtr make_metric_spray(const ExprMap& metric);
/// The zero spray on R^n.
QuadraticFieldPtr make_flat_spray(std::size_t n);

/// Metric tensor g_x as a symmetric matrix.
Matrix metric_at(const ExprMap& metric, const Vector& x);
/// g_x(v, v).
double metric_energy(const ExprMap& metric, const Vector& x, const Vector& v);
/// Christoffel symbols Gamma^k_ij, index [k][i][j], from jet derivatives of g.
std::vector<double> christoffel_jet(const ExprMap& metric, const Vector& x);
/// Christoffel symbols from central differences of g (step eps) and an
/// explicit inverse; independent of the jet route.
std::vector<double> christoffel_fd(const ExprMap& metric, const Vector& x,
                                   double eps = 1e-5);

/// The section (x, u) -> (x, u, u, S2(x, u)) of T(TM).
using SpraySection = std::function<DoubleTangentVector(const Vector&, const Vector&)>;
SpraySection spray_section(const QuadraticField& s);

/// T Pi o S = Id on sampled (x, u); exact comparison.
CheckRecord check_second_order(const SpraySection& section, const Chart& chart,
                               const SampleContext& ctx, std::size_t samples);
CheckRecord check_second_order(const SprayField& s, const Chart& chart,
                               const SampleContext& ctx, std::size_t samples);

inline const std::vector<double> kDefaultHomogeneityScalars = {-2.0, -1.0, 0.0,
                                                               0.5,  1.0,  2.0};

/// max |S2(x, s v) - s^2 S2(x, v)|_inf / (1 + |S2(x, v)|_inf). Points of
/// the box outside the chart are skipped and counted.
CheckRecord check_homogeneity(const QuadraticField& s, const Chart& chart,
                              const std::vector<double>& scalars,
                              const SampleContext& ctx, std::size_t samples,
                              double tol = 1e-9);

/// Largest scaled gap between polarization and (1/2) D_2^2 S2(x, 0)(u, v)
/// computed with fiber jets.
CheckRecord check_extraction_consistency(const QuadraticFieldPtr& s, const Chart& chart,
                                         const SampleContext& ctx, std::size_t samples,
                                         double tol = 1e-8);

/// Polarization B of S2, cross-checked against fiber jets on samples.
/// Throws NotQuadraticError when the two disagree by more than 1e-6.
BilinearMap extract_bilinear(const SprayField& s, const Chart& chart,
                             const SampleContext& ctx, std::size_t samples = 20);

/// Symmetry (exact), bilinearity in the first slot and B(x; v, v) = S2(x, v).
CheckRecord check_symmetry(const BilinearMap& b, const Chart& chart,
                           const SampleContext& ctx, std::size_t samples);
CheckRecord check_bilinearity(const BilinearMap& b, const Chart& chart,
                              const SampleContext& ctx, std::size_t samples,
                              double tol = 1e-9);
CheckRecord check_diagonal(const BilinearMap& b, const QuadraticField& s,
                           const Chart& chart, const SampleContext& ctx,
                           std::size_t samples, double tol = 1e-9);

/// B(x; u, v) against -Gamma(x)(u, v) with Gamma from central differences.
CheckRecord check_christoffel(const BilinearMap& b, const ExprMap& metric, const Chart& chart,
                              const SampleContext& ctx, std::size_t samples,
                              double tol = 1e-5);

/// B_dst(phi(x); Dphi u, Dphi v) = D^2phi(x)(u, v) + Dphi(x) B_src(x; u, v).
CheckRecord check_transformation_law(const BilinearMap& b_src, const BilinearMap& b_dst,
                                     const Transition& t, const SampleContext& ctx,
                                     std::size_t samples, double tol = 1e-8);
CheckRecord check_transformation_law(const SprayField& s, const Transition& t,
                                     const SampleContext& ctx, std::size_t samples,
                                     double tol = 1e-8);

/// Fiber part on the target chart of t induced by the source-chart spray:
///   S_V(phi(x), Dphi v) = D^2phi(x)(v, v) + Dphi(x) S_U(x, v).
QuadraticFieldPtr pushforward_field(QuadraticFieldPtr source, const Transition& t);
/// Copy of s whose t.to entry is replaced by the pushforward of its t.from entry.
SprayField pushforward_spray(const SprayField& s, const Transition& t);

/// Push along t, pull back along t.reversed(), compare with the original.
CheckRecord check_pushforward_roundtrip(const SprayField& s, const Transition& t,
                                        const SampleContext& ctx, std::size_t samples,
                                        double tol = 1e-8);

}  // namespace sprayconn
