#include "sprayconn/spray.hpp"

#include <algorithm>
#include <cmath>

#include "sprayconn/errors.hpp"
#include "sprayconn/linalg.hpp"

namespace sprayconn {

namespace {

std::size_t metric_dim(const ExprMap& metric) {
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(double(metric.arity_out()))));
  if (n * n != metric.arity_out() || metric.arity_in() != n)
    throw DimensionError("metric must have n inputs and n*n outputs");
  return n;
}

// Symmetrized n x n block read from row-major values.
Matrix symmetric_block(std::span<const double> g, std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = 0.5 * (g[i * n + j] + g[j * n + i]);
  return m;
}

// dg[a] = d_a g, each symmetrized.
std::vector<double> christoffel_from(const Matrix& g, const std::vector<Matrix>& dg) {
  const std::size_t n = g.rows();
  Matrix ginv = LuDecomposition(g).inverse();
  std::vector<double> gamma(n * n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t l = 0; l < n; ++l)
          s += ginv(k, l) * ((dg[i](j, l) + dg[j](i, l)) - dg[l](i, j));
        gamma[(k * n + i) * n + j] = 0.5 * s;
      }
  return gamma;
}

// -Gamma^k_ij u^i v^j, grouped so that swapping u and v is bitwise neutral.
Vector contract_minus(const std::vector<double>& gamma, std::size_t n, const Vector& u,
                      const Vector& v) {
  Vector out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += gamma[(k * n + i) * n + i] * (u[i] * v[i]);
      for (std::size_t j = i + 1; j < n; ++j)
        s += gamma[(k * n + i) * n + j] * (u[i] * v[j] + u[j] * v[i]);
    }
    out[k] = -s;
  }
  return out;
}

void require_dims(std::size_t n, const Vector& x, const Vector& u, const Vector& v) {
  if (x.size() != n || u.size() != n || v.size() != n)
    throw DimensionError("bilinear map of dimension " + std::to_string(n) +
                         " applied to mismatched blocks");
}

class ExprSpray final : public QuadraticField {
 public:
  explicit ExprSpray(ExprMap s2) : s2_(std::move(s2)) {
    if (s2_.arity_in() != 2 * s2_.arity_out())
      throw DimensionError("spray expression must take (x, v) and return dim(x) values");
  }
  std::size_t dim() const override { return s2_.arity_out(); }
  Vector eval(const Vector& x, const Vector& v) const override {
    return s2_(concat(x, v));
  }
  JetVector eval_fiber_jet(const Vector& x, const JetVector& v) const override {
    JetVector in;
    in.reserve(2 * x.size());
    for (double c : x) in.emplace_back(c);
    in.insert(in.end(), v.begin(), v.end());
    return s2_.eval<Jet>(std::span<const Jet>(in));
  }
  std::string describe() const override { return "S2 " + s2_.text(); }

 private:
  ExprMap s2_;
};

class BilinearSpray final : public QuadraticField {
 public:
  BilinearSpray(BilinearMap b, std::string label) : b_(std::move(b)), label_(std::move(label)) {}
  std::size_t dim() const override { return b_.dim(); }
  Vector eval(const Vector& x, const Vector& v) const override { return b_(x, v, v); }
  JetVector eval_fiber_jet(const Vector& x, const JetVector& v) const override {
    return b_.apply_fiber_jet(x, v, v);
  }
  std::string describe() const override { return label_; }

 private:
  BilinearMap b_;
  std::string label_;
};

class PushforwardSpray final : public QuadraticField {
 public:
  PushforwardSpray(QuadraticFieldPtr src, Transition t) : src_(std::move(src)), t_(std::move(t)) {}
  std::size_t dim() const override { return src_->dim(); }
  Vector eval(const Vector& y, const Vector& a) const override {
    Vector x;
    try {
      x = t_.inverse(y);
    } catch (const EvaluationError& e) {
      throw DomainError(std::string("inverse transition failed: ") + e.what());
    }
    if (!x.all_finite()) throw DomainError("inverse transition produced non-finite point");
    Matrix j = jacobian(t_.map, x);
    Vector v = LuDecomposition(j).solve(a);
    return second(jet_eval(t_.map, x, v)) + j * src_->eval(x, v);
  }
  std::string describe() const override {
    return "pushforward of (" + src_->describe() + ") along " + t_.map.text();
  }

 private:
  QuadraticFieldPtr src_;
  Transition t_;
};

}  // namespace

JetVector QuadraticField::eval_fiber_jet(const Vector& x, const JetVector& v) const {
  Vector v0 = values(v), v1 = first(v), v2 = second(v);
  auto pol = [&](const Vector& a, const Vector& b) {
    Vector sab = eval(x, a + b), sa = eval(x, a), sb = eval(x, b);
    Vector r(sab.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = 0.5 * (sab[i] - (sa[i] + sb[i]));
    return r;
  };
  Vector s0 = eval(x, v0);
  Vector b01 = pol(v0, v1);
  Vector s1 = eval(x, v1);
  Vector b02 = pol(v0, v2);
  JetVector out(s0.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = Jet(s0[i], 2.0 * b01[i], 2.0 * s1[i] + 2.0 * b02[i]);
  return out;
}

struct BilinearMap::Impl {
  std::size_t n;
  Fn fn;
  std::string label;
};

BilinearMap BilinearMap::zero(std::size_t n) {
  return from_function(
      n, [n](const Vector&, const Vector&, const Vector&) { return Vector(n); }, "B = 0");
}

BilinearMap BilinearMap::from_expr(ExprMap b) {
  const std::size_t n = b.arity_out();
  if (b.arity_in() != 3 * n)
    throw DimensionError("bilinear expression must take (x, u, v) and return dim(x) values");
  std::string label = "B " + b.text();
  return from_function(
      n,
      [b = std::move(b)](const Vector& x, const Vector& u, const Vector& v) {
        return b(concat(concat(x, u), v));
      },
      std::move(label));
}

BilinearMap BilinearMap::from_metric(ExprMap metric) {
  const std::size_t n = metric_dim(metric);
  return from_function(
      n,
      [n, metric = std::move(metric)](const Vector& x, const Vector& u, const Vector& v) {
        return contract_minus(christoffel_jet(metric, x), n, u, v);
      },
      "B = -Gamma(metric)");
}

BilinearMap BilinearMap::polarization(QuadraticFieldPtr s) {
  const std::size_t n = s->dim();
  std::string label = "polarization of " + s->describe();
  return from_function(
      n,
      [s = std::move(s)](const Vector& x, const Vector& u, const Vector& v) {
        Vector suv = s->eval(x, u + v), su = s->eval(x, u), sv = s->eval(x, v);
        Vector r(suv.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = 0.5 * (suv[i] - (su[i] + sv[i]));
        return r;
      },
      std::move(label));
}

BilinearMap BilinearMap::from_function(std::size_t n, Fn fn, std::string label) {
  BilinearMap b;
  b.fn_ = std::make_shared<const Impl>(Impl{n, std::move(fn), std::move(label)});
  return b;
}

std::size_t BilinearMap::dim() const {
  if (!fn_) throw ConfigError("empty bilinear map");
  return fn_->n;
}

Vector BilinearMap::operator()(const Vector& x, const Vector& u, const Vector& v) const {
  require_dims(dim(), x, u, v);
  return fn_->fn(x, u, v);
}

JetVector BilinearMap::apply_fiber_jet(const Vector& x, const JetVector& u,
                                       const JetVector& v) const {
  const auto& b = *this;
  Vector u0 = values(u), u1 = first(u), u2 = second(u);
  Vector v0 = values(v), v1 = first(v), v2 = second(v);
  Vector val = b(x, u0, v0);
  Vector d1 = b(x, u1, v0) + b(x, u0, v1);
  Vector d2 = b(x, u2, v0) + 2.0 * b(x, u1, v1) + b(x, u0, v2);
  JetVector out(val.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Jet(val[i], d1[i], d2[i]);
  return out;
}

std::string BilinearMap::describe() const { return fn_ ? fn_->label : "<empty>"; }

const QuadraticFieldPtr& SprayField::ptr(const std::string& chart) const {
  auto it = table_.find(chart);
  if (it == table_.end()) throw UnresolvedReference("spray has no entry for chart '" + chart + "'");
  return it->second;
}

std::vector<std::string> SprayField::charts() const {
  std::vector<std::string> names;
  for (const auto& [k, _] : table_) names.push_back(k);
  return names;
}

QuadraticFieldPtr make_expr_spray(ExprMap s2) {
  return std::make_shared<ExprSpray>(std::move(s2));
}

QuadraticFieldPtr make_bilinear_spray(BilinearMap b) {
  std::string label = "S2(x, v) = B(x; v, v), " + b.describe();
  return std::make_shared<BilinearSpray>(std::move(b), std::move(label));
}

QuadraticFieldPtr make_metric_spray(const ExprMap& metric) {
  return std::make_shared<BilinearSpray>(BilinearMap::from_metric(metric),
                                         "geodesic spray of metric " + metric.text());
}

QuadraticFieldPtr make_flat_spray(std::size_t n) {
  return std::make_shared<BilinearSpray>(BilinearMap::zero(n), "flat spray");
}

Matrix metric_at(const ExprMap& metric, const Vector& x) {
  const std::size_t n = metric_dim(metric);
  return symmetric_block(metric(x).span(), n);
}

double metric_energy(const ExprMap& metric, const Vector& x, const Vector& v) {
  return dot(v, metric_at(metric, x) * v);
}

std::vector<double> christoffel_jet(const ExprMap& metric, const Vector& x) {
  const std::size_t n = metric_dim(metric);
  std::vector<Matrix> dg;
  Matrix g;
  for (std::size_t l = 0; l < n; ++l) {
    Vector e(n);
    e[l] = 1.0;
    JetVector j = jet_eval(metric, x, e);
    if (l == 0) g = symmetric_block(values(j).span(), n);
    dg.push_back(symmetric_block(first(j).span(), n));
  }
  return christoffel_from(g, dg);
}

std::vector<double> christoffel_fd(const ExprMap& metric, const Vector& x, double eps) {
  const std::size_t n = metric_dim(metric);
  std::vector<Matrix> dg;
  for (std::size_t l = 0; l < n; ++l) {
    Vector e(n);
    e[l] = eps;
    Vector diff = (1.0 / (2.0 * eps)) * (metric(x + e) - metric(x - e));
    dg.push_back(symmetric_block(diff.span(), n));
  }
  return christoffel_from(metric_at(metric, x), dg);
}

SpraySection spray_section(const QuadraticField& s) {
  return [&s](const Vector& x, const Vector& u) {
    return DoubleTangentVector{x, u, u, s.eval(x, u)};
  };
}

CheckRecord check_second_order(const SpraySection& section, const Chart& chart,
                               const SampleContext& ctx, std::size_t samples) {
  Sampler rng(ctx.seed);
  auto pts = sample_chart(chart, ctx.box, samples, rng);
  double worst = 0.0;
  for (const auto& x : pts) {
    Vector u = rng.direction(chart.dim());
    DoubleTangentVector xi = section(x, u);
    // T Pi(xi) = (x, v) must reproduce the foot (x, u) exactly.
    bool ok = xi.x == x && xi.v == u && xi.u == u;
    if (!ok) {
      keep_worst(worst, 1.0);
      keep_worst(worst, norm_inf(xi.v - u));
      keep_worst(worst, norm_inf(xi.x - x));
    }
  }
  return CheckRecord::make("spray.second_order." + chart.name(), pts.size(), worst, 0.0);
}

CheckRecord check_second_order(const SprayField& s, const Chart& chart,
                               const SampleContext& ctx, std::size_t samples) {
  return check_second_order(spray_section(s.at(chart.name())), chart, ctx, samples);
}

CheckRecord check_homogeneity(const QuadraticField& s, const Chart& chart,
                              const std::vector<double>& scalars,
                              const SampleContext& ctx, std::size_t samples, double tol) {
  if (scalars.empty()) throw DomainError("homogeneity check needs at least one scalar");
  Sampler rng(ctx.seed);
  double worst = 0.0;
  std::size_t used = 0, skipped = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    Vector x = rng.point(chart.dim(), ctx.box);
    Vector v = rng.direction(chart.dim());
    if (!chart.contains(x)) {
      ++skipped;
      continue;
    }
    Vector base = s.eval(x, v);
    for (double sc : scalars) {
      Vector scaled = s.eval(x, sc * v);
      keep_worst(worst, norm_inf(scaled - sc * sc * base) / (1.0 + norm_inf(base)));
    }
    ++used;
  }
  auto rec = CheckRecord::make("spray.homogeneity." + chart.name(), used, worst, tol);
  rec.skipped = skipped;
  if (used == 0) {
    rec.pass = false;
    rec.note = "no sample inside the chart domain";
  }
  return rec;
}

namespace {

// (1/2) D_2^2 S(x, 0)(u, v) with fiber jets: quarter of the polarized Q.
Vector half_fiber_hessian(const QuadraticField& s, const Vector& x, const Vector& u,
                          const Vector& v) {
  const Vector zero(x.size());
  auto q = [&](const Vector& h) { return second(s.eval_fiber_jet(x, seed(zero, h))); };
  Vector quv = q(u + v), qu = q(u), qv = q(v);
  Vector r(quv.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = 0.25 * (quv[i] - (qu[i] + qv[i]));
  return r;
}

double extraction_gap(const QuadraticFieldPtr& s, const BilinearMap& b, const Chart& chart,
                      const SampleContext& ctx, std::size_t samples, std::size_t& used) {
  Sampler rng(ctx.seed);
  auto pts = sample_chart(chart, ctx.box, samples, rng);
  double worst = 0.0;
  for (const auto& x : pts) {
    Vector u = rng.direction(chart.dim());
    Vector v = rng.direction(chart.dim());
    keep_worst(worst, scaled_residual(b(x, u, v), half_fiber_hessian(*s, x, u, v)));
  }
  used = pts.size();
  return worst;
}

}  // namespace

CheckRecord check_extraction_consistency(const QuadraticFieldPtr& s, const Chart& chart,
                                         const SampleContext& ctx, std::size_t samples,
                                         double tol) {
  std::size_t used = 0;
  double gap = extraction_gap(s, BilinearMap::polarization(s), chart, ctx, samples, used);
  return CheckRecord::make("spray.extraction." + chart.name(), used, gap, tol);
}

BilinearMap extract_bilinear(const SprayField& s, const Chart& chart,
                             const SampleContext& ctx, std::size_t samples) {
  const auto& field = s.ptr(chart.name());
  BilinearMap b = BilinearMap::polarization(field);
  std::size_t used = 0;
  double gap = extraction_gap(field, b, chart, ctx, samples, used);
  if (!(gap <= 1e-6))
    throw NotQuadraticError("spray on chart '" + chart.name() +
                                "' is not fiberwise quadratic (polarization and jets disagree)",
                            gap);
  return b;
}

CheckRecord check_symmetry(const BilinearMap& b, const Chart& chart, const SampleContext& ctx,
                           std::size_t samples) {
  Sampler rng(ctx.seed);
  auto pts = sample_chart(chart, ctx.box, samples, rng);
  double worst = 0.0;
  for (const auto& x : pts) {
    Vector u = rng.direction(chart.dim());
    Vector v = rng.direction(chart.dim());
    keep_worst(worst, scaled_residual(b(x, u, v), b(x, v, u)));
  }
  return CheckRecord::make("bilinear.symmetry." + chart.name(), pts.size(), worst, 0.0);
}

CheckRecord check_bilinearity(const BilinearMap& b, const Chart& chart,
                              const SampleContext& ctx, std::size_t samples, double tol) {
  Sampler rng(ctx.seed);
  auto pts = sample_chart(chart, ctx.box, samples, rng);
  double worst = 0.0;
  const std::size_t n = chart.dim();
  for (const auto& x : pts) {
    Vector u1 = rng.direction(n), u2 = rng.direction(n), v = rng.direction(n);
    double a = rng.uniform(-2.0, 2.0), c = rng.uniform(-2.0, 2.0);
    Vector lhs = b(x, a * u1 + c * u2, v);
    Vector rhs = a * b(x, u1, v) + c * b(x, u2, v);
    keep_worst(worst, scaled_residual(lhs, rhs));
    lhs = b(x, v, a * u1 + c * u2);
    rhs = a * b(x, v, u1) + c * b(x, v, u2);
    keep_worst(worst, scaled_residual(lhs, rhs));
  }
  return CheckRecord::make("bilinear.linearity." + chart.name(), pts.size(), worst, tol);
}

CheckRecord check_diagonal(const BilinearMap& b, const QuadraticField& s, const Chart& chart,
                           const SampleContext& ctx, std::size_t samples, double tol) {
  Sampler rng(ctx.seed);
  auto pts = sample_chart(chart, ctx.box, samples, rng);
  double worst = 0.0;
  for (const auto& x : pts) {
    Vector v = rng.direction(chart.dim());
    keep_worst(worst, scaled_residual(b(x, v, v), s.eval(x, v)));
  }
  return CheckRecord::make("bilinear.diagonal." + chart.name(), pts.size(), worst, tol);
}

CheckRecord check_christoffel(const BilinearMap& b, const ExprMap& metric, const Chart& chart,
                              const SampleContext& ctx, std::size_t samples, double tol) {
  const std::size_t n = chart.dim();
  Sampler rng(ctx.seed);
  auto pts = sample_chart(chart, ctx.box, samples, rng);
  double worst = 0.0;
  for (const auto& x : pts) {
    const Vector u = rng.direction(n);
    const Vector v = rng.direction(n);
    const auto gamma = christoffel_fd(metric, x);
    Vector expect(n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) expect[k] -= gamma[(k * n + i) * n + j] * u[i] * v[j];
    keep_worst(worst, scaled_residual(b(x, u, v), expect));
  }
  return CheckRecord::make("spray.christoffel." + chart.name(), pts.size(), worst, tol);
}

CheckRecord check_transformation_law(const BilinearMap& b_src, const BilinearMap& b_dst,
                                     const Transition& t, const SampleContext& ctx,
                                     std::size_t samples, double tol) {
  Sampler rng(ctx.seed);
  auto pts = sample_overlap(t, ctx.box, samples, rng);
  double worst = 0.0;
  for (const auto& x : pts) {
    Vector u = rng.direction(t.from.dim());
    Vector v = rng.direction(t.from.dim());
    Vector y = t.map(x);
    Vector lhs = b_dst(y, dir_derivative(t.map, x, u), dir_derivative(t.map, x, v));
    Vector rhs = second_dir_derivative(t.map, x, u, v) + dir_derivative(t.map, x, b_src(x, u, v));
    keep_worst(worst, scaled_residual(lhs, rhs));
  }
  return CheckRecord::make("spray.transformation." + t.from.name() + "->" + t.to.name(),
                           pts.size(), worst, tol);
}

CheckRecord check_transformation_law(const SprayField& s, const Transition& t,
                                     const SampleContext& ctx, std::size_t samples,
                                     double tol) {
  return check_transformation_law(BilinearMap::polarization(s.ptr(t.from.name())),
                                  BilinearMap::polarization(s.ptr(t.to.name())), t, ctx,
                                  samples, tol);
}

QuadraticFieldPtr pushforward_field(QuadraticFieldPtr source, const Transition& t) {
  if (source->dim() != t.from.dim())
    throw DimensionError("spray and transition dimensions differ");
  return std::make_shared<PushforwardSpray>(std::move(source), t);
}

SprayField pushforward_spray(const SprayField& s, const Transition& t) {
  SprayField out = s;
  out.set(t.to.name(), pushforward_field(s.ptr(t.from.name()), t));
  return out;
}

CheckRecord check_pushforward_roundtrip(const SprayField& s, const Transition& t,
                                        const SampleContext& ctx, std::size_t samples,
                                        double tol) {
  SprayField there = pushforward_spray(s, t);
  auto back = pushforward_field(there.ptr(t.to.name()), t.reversed());
  const auto& orig = s.at(t.from.name());
  Sampler rng(ctx.seed);
  auto pts = sample_overlap(t, ctx.box, samples, rng);
  double worst = 0.0;
  for (const auto& x : pts) {
    Vector v = rng.direction(t.from.dim());
    keep_worst(worst, scaled_residual(back->eval(x, v), orig.eval(x, v)));
  }
  return CheckRecord::make("spray.pushforward_roundtrip." + t.from.name() + "->" + t.to.name(),
                           pts.size(), worst, tol);
}

}  // namespace sprayconn
