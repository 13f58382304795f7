#include "sprayconn/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sprayconn/autodiff.hpp"
#include "sprayconn/errors.hpp"

namespace sprayconn {

Chart::Chart(std::string name, ModelSpace space, ExprMap domain)
    : name_(std::move(name)), space_(std::move(space)), domain_(std::move(domain)) {
  if (domain_.arity_in() != space_.dim())
    throw DimensionError("chart '" + name_ + "': domain predicate takes " +
                         std::to_string(domain_.arity_in()) + " inputs, chart dimension is " +
                         std::to_string(space_.dim()));
  if (domain_.arity_out() != 1)
    throw DimensionError("chart '" + name_ + "': domain predicate must be scalar");
}

Chart Chart::whole(std::string name, std::size_t n) {
  return Chart(std::move(name), ModelSpace(n), ExprMap::constant(n, Vector{1.0}));
}

double Chart::predicate(const Vector& x) const {
  if (x.size() != dim()) throw DimensionError("point does not match chart dimension");
  try {
    double p = domain_(x)[0];
    return std::isnan(p) ? -std::numeric_limits<double>::infinity() : p;
  } catch (const EvaluationError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

Chart Chart::with_domain(ExprMap domain) const {
  return Chart(name_, space_, std::move(domain));
}

Transition::Transition(Chart from_, Chart to_, ExprMap map_, ExprMap inverse_)
    : from(std::move(from_)), to(std::move(to_)), map(std::move(map_)),
      inverse(std::move(inverse_)) {
  const std::size_t n = from.dim();
  if (to.dim() != n) throw DimensionError("transition between charts of different dimension");
  if (map.arity_in() != n || map.arity_out() != n)
    throw DimensionError("transition map " + from.name() + "->" + to.name() +
                         " must be R^" + std::to_string(n) + " -> R^" + std::to_string(n));
  if (inverse.arity_in() != n || inverse.arity_out() != n)
    throw DimensionError("transition inverse " + to.name() + "->" + from.name() +
                         " must be R^" + std::to_string(n) + " -> R^" + std::to_string(n));
}

Transition Transition::identity(const Chart& chart) {
  auto id = ExprMap::identity(chart.dim());
  return Transition(chart, chart, id, id);
}

Transition Transition::linear(const Chart& chart, const std::vector<std::vector<double>>& a,
                              const std::vector<std::vector<double>>& a_inv) {
  return Transition(chart, chart, ExprMap::linear(a), ExprMap::linear(a_inv));
}

Transition Transition::reversed() const { return Transition(to, from, inverse, map); }

Transition Transition::then(const Transition& next) const {
  if (next.from.dim() != to.dim()) throw DimensionError("cannot chain transitions");
  return Transition(from, next.to, next.map.compose(map), inverse.compose(next.inverse));
}

bool Transition::in_overlap(const Vector& x) const {
  if (!from.contains(x)) return false;
  try {
    Vector y = map(x);
    return y.all_finite() && to.contains(y);
  } catch (const EvaluationError&) {
    return false;
  }
}

void DoubleTangentVector::check_blocks() const {
  const std::size_t n = x.size();
  if (u.size() != n || v.size() != n || w.size() != n)
    throw DimensionError("double tangent vector blocks have unequal sizes");
}

bool DoubleTangentVector::is_vertical() const {
  return std::all_of(v.begin(), v.end(), [](double c) { return c == 0.0; });
}

double block_residual(const DoubleTangentVector& a, const DoubleTangentVector& b) {
  double worst = 0.0;
  for (double r : {scaled_residual(a.x, b.x), scaled_residual(a.u, b.u),
                   scaled_residual(a.v, b.v), scaled_residual(a.w, b.w)})
    keep_worst(worst, r);
  return worst;
}

const Chart& Atlas::chart(const std::string& name) const {
  for (const auto& c : charts)
    if (c.name() == name) return c;
  throw UnresolvedReference("unknown chart '" + name + "'");
}

bool Atlas::has_chart(const std::string& name) const {
  return std::any_of(charts.begin(), charts.end(),
                     [&](const Chart& c) { return c.name() == name; });
}

std::vector<const Transition*> Atlas::transitions_from(const std::string& name) const {
  std::vector<const Transition*> out;
  for (const auto& t : transitions)
    if (t.from.name() == name) out.push_back(&t);
  return out;
}

const Transition* Atlas::find_transition(const std::string& from,
                                         const std::string& to) const {
  for (const auto& t : transitions)
    if (t.from.name() == from && t.to.name() == to) return &t;
  return nullptr;
}

TangentVector tangent_lift(const Transition& t, const Vector& x, const Vector& v) {
  if (!t.from.contains(x))
    throw DomainError("point outside the domain of chart '" + t.from.name() + "'");
  JetVector j = jet_eval(t.map, x, v);
  return {values(j), first(j)};
}

DoubleTangentVector double_tangent_lift(const Transition& t, const DoubleTangentVector& xi) {
  xi.check_blocks();
  if (!t.from.contains(xi.x))
    throw DomainError("point outside the domain of chart '" + t.from.name() + "'");
  JetVector ju = jet_eval(t.map, xi.x, xi.u);
  return {values(ju), first(ju), dir_derivative(t.map, xi.x, xi.v),
          second_dir_derivative(t.map, xi.x, xi.u, xi.v) +
              dir_derivative(t.map, xi.x, xi.w)};
}

namespace {

template <typename Pred>
std::vector<Vector> rejection_sample(std::size_t dim, const Box& box, std::size_t n,
                                     Sampler& rng, Pred accept, const std::string& what) {
  std::vector<Vector> pts;
  const std::size_t max_draws = std::max<std::size_t>(n, 1) * 500;
  for (std::size_t d = 0; d < max_draws && pts.size() < n; ++d) {
    Vector x = rng.point(dim, box);
    if (accept(x)) pts.push_back(std::move(x));
  }
  if (pts.empty() && n > 0)
    throw EmptyOverlapError("no sample landed in " + what + " within the box [" +
                            std::to_string(box.lo) + ", " + std::to_string(box.hi) + "]");
  return pts;
}

}  // namespace

std::vector<Vector> sample_overlap(const Transition& t, const Box& box, std::size_t n,
                                   Sampler& rng) {
  return rejection_sample(
      t.from.dim(), box, n, rng, [&](const Vector& x) { return t.in_overlap(x); },
      "the overlap " + t.from.name() + "/" + t.to.name());
}

std::vector<Vector> sample_chart(const Chart& c, const Box& box, std::size_t n,
                                 Sampler& rng) {
  return rejection_sample(
      c.dim(), box, n, rng, [&](const Vector& x) { return c.contains(x); },
      "chart '" + c.name() + "'");
}

CheckRecord check_transition_regularity(const Transition& t, const SampleContext& ctx,
                                        std::size_t samples, double tol) {
  if (samples < 1) throw DomainError("regularity check needs at least one sample");
  const std::string id = "atlas.regularity." + t.from.name() + "->" + t.to.name();
  Sampler rng(ctx.seed);
  auto pts = sample_overlap(t, ctx.box, samples, rng);
  const std::size_t n = t.from.dim();

  auto paired = [&](const Vector& x, const Vector& v) {
    Vector y = t.map(x);
    return concat(dir_derivative(t.map, x, v), dir_derivative(t.inverse, y, v));
  };

  double worst = 0.0;
  for (const auto& x : pts) {
    Vector v = rng.direction(n);
    Vector dx = rng.direction(n);
    Vector dv = rng.direction(n);
    Vector y = t.map(x);
    Vector dy = dir_derivative(t.map, x, dx);
    Vector jet = concat(
        second_dir_derivative(t.map, x, v, dx) + dir_derivative(t.map, x, dv),
        second_dir_derivative(t.inverse, y, v, dy) + dir_derivative(t.inverse, y, dv));
    const double eps = kFdEps1;
    Vector fd = (1.0 / (2.0 * eps)) *
                (paired(x + eps * dx, v + eps * dv) - paired(x - eps * dx, v - eps * dv));
    keep_worst(worst, scaled_residual(jet, fd));
    // The paired maps must be mutually inverse on the fiber.
    Vector back = dir_derivative(t.inverse, y, dir_derivative(t.map, x, v));
    keep_worst(worst, scaled_residual(back, v));
  }
  return CheckRecord::make(id, pts.size(), worst, tol);
}

CheckRecord cocycle_check(const std::vector<Transition>& transitions,
                          const SampleContext& ctx, std::size_t samples, double tol) {
  Sampler rng(ctx.seed);
  double worst = 0.0;
  std::size_t count = 0;
  for (const auto& t : transitions) {
    const Transition* back = nullptr;
    for (const auto& r : transitions)
      if (r.from.name() == t.to.name() && r.to.name() == t.from.name()) back = &r;
    if (!back)
      throw ConfigError("transition " + t.from.name() + "->" + t.to.name() +
                        " has no inverse transition in the atlas");
    for (const auto& x : sample_overlap(t, ctx.box, samples, rng)) {
      Vector y = t.map(x);
      keep_worst(worst, norm_inf(back->map(y) - x));
      keep_worst(worst, norm_inf(t.inverse(y) - x));
      keep_worst(worst, norm_inf(t.map(t.inverse(y)) - y));
      ++count;
    }
  }
  return CheckRecord::make("atlas.cocycle", count, worst, tol,
                           transitions.empty() ? "single chart: vacuous" : "");
}

}  // namespace sprayconn
