#include "sprayconn/connection.hpp"

#include <cmath>

#include "sprayconn/autodiff.hpp"
#include "sprayconn/errors.hpp"

namespace sprayconn {

namespace {

ExprMap combine(double a, const ExprMap& f, double b, const ExprMap& g) {
  if (f.arity_out() != g.arity_out() || f.arity_in() != g.arity_in())
    throw DimensionError("cannot combine fields of different shape");
  std::vector<Expr> outs;
  for (std::size_t i = 0; i < f.arity_out(); ++i)
    outs.push_back(Expr::constant(a) * f.output(i) + Expr::constant(b) * g.output(i));
  return ExprMap(f.input_names(), std::move(outs));
}

void require_field(const ExprMap& f, std::size_t n, const char* what) {
  if (f.arity_in() != n || f.arity_out() != n)
    throw DimensionError(std::string(what) + " must map R^" + std::to_string(n) + " to itself");
}

}  // namespace

const ExprMap& FieldTable::at(const std::string& chart) const {
  auto it = table_.find(chart);
  if (it == table_.end()) throw UnresolvedReference("field has no entry for chart '" + chart + "'");
  return it->second;
}

Vector covariant_derivative(const BilinearMap& b, const ExprMap& x_field,
                            const ExprMap& y_field, const Vector& x) {
  Vector xv = x_field(x);
  return dir_derivative(y_field, x, xv) - b(x, xv, y_field(x));
}

Vector covariant_derivative(const BilinearCoeffs& b, const VectorField& x_field,
                            const VectorField& y_field, const Chart& chart, const Vector& x) {
  if (!chart.contains(x)) throw DomainError("point outside chart '" + chart.name() + "'");
  auto it = b.find(chart.name());
  if (it == b.end()) throw UnresolvedReference("no bilinear map for chart '" + chart.name() + "'");
  return covariant_derivative(it->second, x_field.at(chart.name()), y_field.at(chart.name()), x);
}

Vector lie_bracket(const ExprMap& x_field, const ExprMap& y_field, const Vector& x) {
  return dir_derivative(y_field, x, x_field(x)) - dir_derivative(x_field, x, y_field(x));
}

std::vector<CheckRecord> check_cd_axioms(const BilinearMap& b, const Chart& chart,
                                         const ExprMap& x_field, const ExprMap& y_field,
                                         const ExprMap& f, const SampleContext& ctx,
                                         std::size_t samples, double tol, double torsion_tol) {
  const std::size_t n = chart.dim();
  require_field(x_field, n, "X");
  require_field(y_field, n, "Y");
  if (f.arity_in() != n || f.arity_out() != 1)
    throw DimensionError("test function must be scalar on the chart");

  const ExprMap fx = ExprMap::scale(f, x_field);
  const ExprMap fy = ExprMap::scale(f, y_field);
  const double a = 1.5, c = -0.75;
  const ExprMap mix = combine(a, x_field, c, y_field);

  Sampler rng(ctx.seed);
  auto pts = sample_chart(chart, ctx.box, samples, rng);
  double tensorial = 0.0, leibniz = 0.0, torsion = 0.0, bilinear = 0.0;
  for (const auto& x : pts) {
    const double fv = f(x)[0];
    const Vector nxy = covariant_derivative(b, x_field, y_field, x);
    const Vector nyx = covariant_derivative(b, y_field, x_field, x);

    keep_worst(tensorial, scaled_residual(covariant_derivative(b, fx, y_field, x), fv * nxy));

    const double lie_f = dir_derivative(f, x, x_field(x))[0];
    keep_worst(leibniz, scaled_residual(covariant_derivative(b, x_field, fy, x),
                                        lie_f * y_field(x) + fv * nxy));

    keep_worst(torsion, scaled_residual(nxy - nyx, lie_bracket(x_field, y_field, x)));

    const Vector nyy = covariant_derivative(b, y_field, y_field, x);
    const Vector nxx = covariant_derivative(b, x_field, x_field, x);
    keep_worst(bilinear, scaled_residual(covariant_derivative(b, mix, y_field, x),
                                         a * nxy + c * nyy));
    keep_worst(bilinear, scaled_residual(covariant_derivative(b, x_field, mix, x),
                                         a * nxx + c * nxy));
  }
  const std::string s = "." + chart.name();
  return {CheckRecord::make("cd.bilinear" + s, pts.size(), bilinear, tol),
          CheckRecord::make("cd.tensorial" + s, pts.size(), tensorial, tol),
          CheckRecord::make("cd.leibniz" + s, pts.size(), leibniz, tol),
          CheckRecord::make("cd.torsion" + s, pts.size(), torsion, torsion_tol)};
}

TangentVector ConnectionMap::operator()(const DoubleTangentVector& xi) const {
  xi.check_blocks();
  return {xi.x, xi.w - b_(xi.x, xi.u, xi.v)};
}

AnchoredVector anchor_projection(const DoubleTangentVector& xi) { return {xi.x, xi.u, xi.v}; }

AnchoredVector pullback_part(const ConnectionMap& k, const DoubleTangentVector& xi) {
  return {xi.x, xi.u, k(xi).v};
}

TangentVector connection_map_apply(const ConnectionMap& k, const DoubleTangentVector& xi) {
  return k(xi);
}

CheckRecord check_nabla_equals_K_of_T(const ConnectionMap& k, const ExprMap& x_field,
                                      const ExprMap& y_field, const Chart& chart,
                                      const SampleContext& ctx, std::size_t samples,
                                      double tol) {
  require_field(x_field, chart.dim(), "X");
  require_field(y_field, chart.dim(), "Y");
  Sampler rng(ctx.seed);
  auto pts = sample_chart(chart, ctx.box, samples, rng);
  double worst = 0.0;
  for (const auto& x : pts) {
    // TX at Y(x): one jet pass yields X(x) and DX(x)Y(x).
    const Vector y = y_field(x);
    JetVector tx = jet_eval(x_field, x, y);
    DoubleTangentVector lifted{x, values(tx), y, first(tx)};
    keep_worst(worst, scaled_residual(k(lifted).v,
                                      covariant_derivative(k.bilinear(), y_field, x_field, x)));
  }
  return CheckRecord::make("connection.nabla_eq_KoT." + chart.name(), pts.size(), worst, tol);
}

ConnectionSplitting ConnectionSplitting::from_bilinear(BilinearMap b) {
  ConnectionSplitting c;
  c.dim_ = b.dim();
  c.b_ = std::move(b);
  return c;
}

ConnectionSplitting ConnectionSplitting::black_box(std::size_t dim, Fn fn) {
  ConnectionSplitting c;
  c.dim_ = dim;
  c.fn_ = std::move(fn);
  return c;
}

DoubleTangentVector ConnectionSplitting::operator()(const DoubleTangentVector& xi) const {
  xi.check_blocks();
  if (b_) return {xi.x, xi.u, Vector(xi.dim()), xi.w - (*b_)(xi.x, xi.u, xi.v)};
  DoubleTangentVector out = fn_(xi);
  out.check_blocks();
  return out;
}

DoubleTangentVector splitting_apply(const ConnectionSplitting& c,
                                    const DoubleTangentVector& xi) {
  return c(xi);
}

DoubleTangentVector involution(const DoubleTangentVector& xi) {
  xi.check_blocks();
  return {xi.x, xi.v, xi.u, xi.w};
}

TangentVector tangent_projection(const DoubleTangentVector& xi) { return {xi.x, xi.v}; }

DoubleTangentVector vertical_lift(const Vector& x, const Vector& v, const Vector& w) {
  DoubleTangentVector xi{x, v, Vector(x.size()), w};
  xi.check_blocks();
  return xi;
}

DoubleTangentVector horizontal_lift(const BilinearMap& b, const Vector& x, const Vector& u,
                                    const Vector& w) {
  return {x, u, w, b(x, u, w)};
}

DoubleTangentVector tangent_structure(const DoubleTangentVector& xi) {
  xi.check_blocks();
  return {xi.x, xi.u, Vector(xi.dim()), xi.v};
}

std::pair<DoubleTangentVector, DoubleTangentVector> projectors(const ConnectionSplitting& c,
                                                               const DoubleTangentVector& xi) {
  DoubleTangentVector vp = c(xi);
  DoubleTangentVector hp;
  if (c.bilinear()) {
    hp = horizontal_lift(*c.bilinear(), xi.x, xi.u, xi.v);
  } else {
    hp = {xi.x, xi.u, xi.v - vp.v, xi.w - vp.w};
  }
  return {std::move(vp), std::move(hp)};
}

ConnectionMap connection_from_splitting(const ConnectionSplitting& c, const Chart& chart,
                                        const SampleContext& ctx, std::size_t samples,
                                        double tol) {
  if (c.bilinear()) return ConnectionMap(*c.bilinear());
  if (c.dim() != chart.dim()) throw DimensionError("splitting and chart dimensions differ");

  const std::size_t n = c.dim();
  auto recovered = BilinearMap::from_function(
      n,
      [c](const Vector& x, const Vector& u, const Vector& v) {
        return -c(DoubleTangentVector{x, u, v, Vector(x.size())}).w;
      },
      "recovered from splitting");

  Sampler rng(ctx.seed);
  auto pts = sample_chart(chart, ctx.box, samples, rng);
  double identity = 0.0, vertical = 0.0, symmetry = 0.0, linearity = 0.0;
  for (const auto& x : pts) {
    DoubleTangentVector xi = random_double_tangent(x, rng);
    DoubleTangentVector vert{x, xi.u, Vector(n), xi.w};
    keep_worst(identity, block_residual(c(vert), vert));
    keep_worst(vertical, norm_inf(c(xi).v));
    keep_worst(symmetry, scaled_residual(recovered(x, xi.u, xi.v), recovered(x, xi.v, xi.u)));

    DoubleTangentVector other = random_double_tangent(x, rng);
    other.u = xi.u;
    const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
    DoubleTangentVector mix{x, xi.u, a * xi.v + b * other.v, a * xi.w + b * other.w};
    keep_worst(linearity, scaled_residual(c(mix).w, a * c(xi).w + b * c(other).w));
  }
  if (!(identity <= tol)) throw SplittingRejected("splitting does not fix vertical vectors", identity);
  if (!(vertical <= tol)) throw SplittingRejected("splitting image is not vertical", vertical);
  if (!(symmetry <= tol)) throw SplittingRejected("splitting is not symmetric", symmetry);
  if (!(linearity <= tol)) throw SplittingRejected("splitting is not fiberwise linear", linearity);
  return ConnectionMap(std::move(recovered));
}

DoubleTangentVector random_double_tangent(const Vector& x, Sampler& rng) {
  const std::size_t n = x.size();
  Vector u = rng.direction(n);
  Vector v = rng.direction(n);
  Vector w = rng.direction(n);
  return {x, std::move(u), std::move(v), std::move(w)};
}

std::vector<CheckRecord> check_exact_identities(const BilinearMap& b, const Chart& chart,
                                                const SampleContext& ctx, std::size_t samples,
                                                double tol) {
  const std::size_t n = chart.dim();
  const Vector zero(n);
  const auto c = ConnectionSplitting::from_bilinear(b);
  const ConnectionMap k(b);

  Sampler rng(ctx.seed);
  auto pts = sample_chart(chart, ctx.box, samples, rng);
  std::vector<std::pair<std::string, double>> worst = {
      {"c_o_I", 0.0},   {"c_o_Inv", 0.0}, {"Inv2", 0.0},  {"J2", 0.0},
      {"J_o_Hor", 0.0}, {"K_o_J", 0.0},   {"K_o_Ver", 0.0}, {"Vp2", 0.0},
      {"Hp2", 0.0},     {"Vp_o_Hp", 0.0}, {"K_o_Hor", 0.0}, {"TPi_o_Hor", 0.0}};
  auto track = [&](std::size_t i, double r) { keep_worst(worst[i].second, r); };
  auto tangent_gap = [](const TangentVector& a, const TangentVector& b2) {
    double r = 0.0;
    keep_worst(r, scaled_residual(a.x, b2.x));
    keep_worst(r, scaled_residual(a.v, b2.v));
    return r;
  };

  for (const auto& x : pts) {
    const DoubleTangentVector xi = random_double_tangent(x, rng);
    const DoubleTangentVector vert = vertical_lift(x, xi.u, xi.w);
    const DoubleTangentVector hor = horizontal_lift(b, x, xi.u, xi.w);
    const DoubleTangentVector origin{x, xi.u, zero, zero};

    track(0, block_residual(c(vert), vert));
    const auto swapped = c(involution(xi));
    const auto direct = c(xi);
    track(1, tangent_gap({swapped.x, swapped.w}, {direct.x, direct.w}));
    track(2, block_residual(involution(involution(xi)), xi));
    track(3, block_residual(tangent_structure(tangent_structure(xi)), origin));
    track(4, block_residual(tangent_structure(hor), vert));
    track(5, tangent_gap(k(tangent_structure(xi)), tangent_projection(xi)));
    track(6, tangent_gap(k(vert), TangentVector{x, xi.w}));
    auto [vp, hp] = projectors(c, xi);
    track(7, block_residual(projectors(c, vp).first, vp));
    track(8, block_residual(projectors(c, hp).second, hp));
    track(9, block_residual(projectors(c, hp).first, origin));
    track(10, tangent_gap(k(hor), TangentVector{x, zero}));
    track(11, tangent_gap(tangent_projection(hor), TangentVector{x, xi.w}));
  }
  std::vector<CheckRecord> out;
  for (const auto& [name, r] : worst)
    out.push_back(CheckRecord::make("identity." + name + "." + chart.name(), pts.size(), r, tol));
  return out;
}

}  // namespace sprayconn
