#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sprayconn/core_space.hpp"
#include "sprayconn/expr.hpp"
#include "sprayconn/report.hpp"
#include "sprayconn/sampling.hpp"

namespace sprayconn {

/// Chart domain given by a smooth predicate: x lies in the chart iff the
/// predicate is positive there.
class Chart {
 public:
  Chart(std::string name, ModelSpace space, ExprMap domain);
  /// Chart covering all of R^n (predicate constant 1).
  static Chart whole(std::string name, std::size_t n);

  const std::string& name() const noexcept { return name_; }
  const ModelSpace& space() const noexcept { return space_; }
  std::size_t dim() const noexcept { return space_.dim(); }
  const ExprMap& domain() const noexcept { return domain_; }

  /// Predicate value; -inf when the predicate cannot be evaluated at x.
  double predicate(const Vector& x) const;
  bool contains(const Vector& x) const { return predicate(x) > 0.0; }
  /// Same chart with a different domain predicate.
  Chart with_domain(ExprMap domain) const;

 private:
  std::string name_;
  ModelSpace space_;
  ExprMap domain_;
};

/// Chart change phi: from -> to with its inverse.
struct Transition {
  Chart from;
  Chart to;
  ExprMap map;
  ExprMap inverse;

  Transition(Chart from, Chart to, ExprMap map, ExprMap inverse);

  static Transition identity(const Chart& chart);
  /// x -> A x with the given inverse matrix.
  static Transition linear(const Chart& chart, const std::vector<std::vector<double>>& a,
                           const std::vector<std::vector<double>>& a_inv);

  Transition reversed() const;
  /// First this, then next.
  Transition then(const Transition& next) const;
  /// x in the source domain and phi(x) in the target domain.
  bool in_overlap(const Vector& x) const;
};

/// Tangent vector (x, v) in chart coordinates.
struct TangentVector {
  Vector x;
  Vector v;
};

/// Element of T(TM) in chart coordinates. Convention: Pi_TM(xi) = (x, u),
/// T Pi(xi) = (x, v), and w is the second fiber component.
struct DoubleTangentVector {
  Vector x;
  Vector u;
  Vector v;
  Vector w;

  std::size_t dim() const noexcept { return x.size(); }
  /// Throws DimensionError unless all four blocks have equal size.
  void check_blocks() const;
  bool is_vertical() const;
  bool is_symmetric() const { return u == v; }
  friend bool operator==(const DoubleTangentVector&, const DoubleTangentVector&) = default;
};

/// Largest scaled residual over the u, v, w blocks (x blocks compared too).
double block_residual(const DoubleTangentVector& a, const DoubleTangentVector& b);

/// Charts plus chart changes, and the box used to sample chart points.
struct Atlas {
  std::vector<Chart> charts;
  std::vector<Transition> transitions;
  Box box;

  const Chart& chart(const std::string& name) const;
  bool has_chart(const std::string& name) const;
  std::vector<const Transition*> transitions_from(const std::string& name) const;
  const Transition* find_transition(const std::string& from, const std::string& to) const;
};

/// (phi(x), Dphi(x) v).
TangentVector tangent_lift(const Transition& t, const Vector& x, const Vector& v);

/// (phi(x), Dphi(x)u, Dphi(x)v, D^2phi(x)(u, v) + Dphi(x)w).
DoubleTangentVector double_tangent_lift(const Transition& t, const DoubleTangentVector& xi);

/// Draws up to n points of the overlap of t by rejection from the box.
/// Throws EmptyOverlapError when no draw lands in the overlap.
std::vector<Vector> sample_overlap(const Transition& t, const Box& box, std::size_t n,
                                   Sampler& rng);
/// Draws up to n points of the chart domain by rejection from the box.
std::vector<Vector> sample_chart(const Chart& c, const Box& box, std::size_t n,
                                 Sampler& rng);

/// Jet-vs-central-difference agreement for the derivative of the paired
/// fiber map (x, v) -> (Dphi(x)v, Dphi^{-1}(phi(x))v) on overlap samples.
CheckRecord check_transition_regularity(const Transition& t, const SampleContext& ctx,
                                        std::size_t samples, double tol);

/// Round trips phi_VU(phi_UV(x)) = x over every transition. Throws
/// ConfigError when a transition has no reverse partner in the list.
CheckRecord cocycle_check(const std::vector<Transition>& transitions,
                          const SampleContext& ctx, std::size_t samples,
                          double tol = 1e-9);

}  // namespace sprayconn
