#include "sprayconn/second_order.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sprayconn/autodiff.hpp"
#include "sprayconn/errors.hpp"

namespace sprayconn {

namespace {

void check_point(const Vector& x, const Vector& p, const Vector& q) {
  if (p.size() != x.size() || q.size() != x.size())
    throw DimensionError("second-order point blocks have unequal sizes");
}

double triv_residual(const SecondOrderTriv& a, const SecondOrderTriv& b) {
  return scaled_residual(concat(a.h, a.k), concat(b.h, b.k));
}

std::string arrow(const Transition& mu) { return mu.from.name() + "->" + mu.to.name(); }

}  // namespace

SecondOrderTriv trivialize(const BilinearMap& b, const SecondOrderPoint& p) {
  check_point(p.x, p.a, p.b);
  return {p.x, p.a, p.b - b(p.x, p.a, p.a)};
}

SecondOrderPoint untrivialize(const BilinearMap& b, const SecondOrderTriv& t) {
  check_point(t.x, t.h, t.k);
  return {t.x, t.h, t.k + b(t.x, t.h, t.h)};
}

UpsilonImage upsilon(const BilinearMap& b, const DoubleTangentVector& xi) {
  xi.check_blocks();
  return {xi.x, xi.u, xi.v, xi.w - b(xi.x, xi.u, xi.v)};
}

DoubleTangentVector upsilon_inverse(const BilinearMap& b, const UpsilonImage& y) {
  DoubleTangentVector xi{y.x, y.u, y.v, y.z + b(y.x, y.u, y.v)};
  xi.check_blocks();
  return xi;
}

SecondOrderPoint jet_push(const Transition& mu, const SecondOrderPoint& p) {
  check_point(p.x, p.a, p.b);
  if (!mu.from.contains(p.x)) throw DomainError("point outside the source domain");
  return {mu.map(p.x), dir_derivative(mu.map, p.x, p.a),
          second_dir_derivative(mu.map, p.x, p.a, p.a) + dir_derivative(mu.map, p.x, p.b)};
}

SecondOrderTriv second_order_map(const BilinearMap& b_src, const BilinearMap& b_dst,
                                 const Transition& mu, const SecondOrderTriv& t) {
  check_point(t.x, t.h, t.k);
  if (!mu.from.contains(t.x)) throw DomainError("point outside the source domain");
  const Vector y = mu.map(t.x);
  const Vector dh = dir_derivative(mu.map, t.x, t.h);
  Vector k = dir_derivative(mu.map, t.x, t.k) +
             dir_derivative(mu.map, t.x, b_src(t.x, t.h, t.h)) +
             second_dir_derivative(mu.map, t.x, t.h, t.h) - b_dst(y, dh, dh);
  return {y, dh, std::move(k)};
}

SecondOrderTriv second_order_map(const BilinearMap& b_src, const BilinearMap& b_dst,
                                 const Transition& mu, const SecondOrderPoint& p) {
  return second_order_map(b_src, b_dst, mu, trivialize(b_src, p));
}

CheckRecord check_conjugacy(const ConnectionMap& k1, const ConnectionMap& k2,
                            const Transition& mu, const SampleContext& ctx,
                            std::size_t samples, double tol) {
  Sampler rng(ctx.seed);
  auto pts = sample_overlap(mu, ctx.box, samples, rng);
  double worst = 0.0;
  for (const auto& x : pts) {
    const DoubleTangentVector xi = random_double_tangent(x, rng);
    const Vector lhs = dir_derivative(mu.map, x, k1(xi).v);
    const Vector rhs = k2(double_tangent_lift(mu, xi)).v;
    keep_worst(worst, scaled_residual(lhs, rhs));
  }
  return CheckRecord::make("conjugacy." + arrow(mu), pts.size(), worst, tol);
}

std::vector<CheckRecord> check_T2mu_linearity(const ConnectionMap& k1, const ConnectionMap& k2,
                                              const Transition& mu, const SampleContext& ctx,
                                              std::size_t samples, double tol) {
  const auto& b1 = k1.bilinear();
  const auto& b2 = k2.bilinear();
  const std::size_t n = mu.from.dim();
  Sampler rng(ctx.seed);
  auto pts = sample_overlap(mu, ctx.box, samples, rng);
  double linear = 0.0, reduced = 0.0, pushed = 0.0;
  for (const auto& x : pts) {
    const SecondOrderTriv p1{x, rng.direction(n), rng.direction(n)};
    const SecondOrderTriv p2{x, rng.direction(n), rng.direction(n)};
    const double a = rng.uniform(-2.0, 2.0), c = rng.uniform(-2.0, 2.0);
    const SecondOrderTriv mix{x, a * p1.h + c * p2.h, a * p1.k + c * p2.k};
    const auto f1 = second_order_map(b1, b2, mu, p1);
    const auto f2 = second_order_map(b1, b2, mu, p2);
    const auto fm = second_order_map(b1, b2, mu, mix);
    keep_worst(linear, triv_residual(fm, {fm.x, a * f1.h + c * f2.h, a * f1.k + c * f2.k}));
    keep_worst(reduced, triv_residual(f1, {f1.x, dir_derivative(mu.map, x, p1.h),
                                           dir_derivative(mu.map, x, p1.k)}));
    keep_worst(pushed, triv_residual(f1, trivialize(b2, jet_push(mu, untrivialize(b1, p1)))));
  }
  std::string note;
  const auto conj = check_conjugacy(k1, k2, mu, ctx, samples);
  if (!conj.pass) note = "pair is not conjugate: residual " + std::to_string(conj.max_residual);
  const std::string s = "." + arrow(mu);
  return {CheckRecord::make("T2mu.linearity" + s, pts.size(), linear, tol, note),
          CheckRecord::make("T2mu.reduced_form" + s, pts.size(), reduced, tol, note),
          CheckRecord::make("T2mu.jet_push" + s, pts.size(), pushed, tol)};
}

CheckRecord check_nonlinearity_witness(const ConnectionMap& k1, const ConnectionMap& k2,
                                       const Transition& mu, const SampleContext& ctx,
                                       std::size_t samples, double threshold) {
  const std::size_t n = mu.from.dim();
  Sampler rng(ctx.seed);
  auto pts = sample_overlap(mu, ctx.box, samples, rng);
  double best = 0.0;
  for (const auto& x : pts) {
    const SecondOrderTriv p1{x, rng.direction(n), rng.direction(n)};
    const SecondOrderTriv p2{x, rng.direction(n), rng.direction(n)};
    const SecondOrderTriv sum{x, p1.h + p2.h, p1.k + p2.k};
    const auto f1 = second_order_map(k1.bilinear(), k2.bilinear(), mu, p1);
    const auto f2 = second_order_map(k1.bilinear(), k2.bilinear(), mu, p2);
    const auto fs = second_order_map(k1.bilinear(), k2.bilinear(), mu, sum);
    keep_worst(best, triv_residual(fs, {fs.x, f1.h + f2.h, f1.k + f2.k}));
  }
  return CheckRecord::make_at_least("T2mu.nonlinearity_witness." + arrow(mu), pts.size(), best,
                                    threshold);
}

std::vector<CheckRecord> check_conjugacy_equivalence(const QuadraticFieldPtr& s,
                                                     const Transition& mu1,
                                                     const Transition& mu2,
                                                     const SampleContext& ctx,
                                                     std::size_t samples, double tol) {
  const auto s2 = pushforward_field(s, mu1);
  const auto s3 = pushforward_field(s2, mu2);
  const ConnectionMap k1(BilinearMap::polarization(s));
  const ConnectionMap k2(BilinearMap::polarization(s2));
  const ConnectionMap k3(BilinearMap::polarization(s3));

  auto relabel = [](CheckRecord r, const std::string& id) {
    r.id = id;
    return r;
  };
  return {relabel(check_conjugacy(k1, k1, Transition::identity(mu1.from), ctx, samples, tol),
                  "conjugacy.reflexive"),
          relabel(check_conjugacy(k1, k2, mu1, ctx, samples, tol), "conjugacy.constructed"),
          relabel(check_conjugacy(k2, k1, mu1.reversed(), ctx, samples, tol),
                  "conjugacy.symmetric"),
          relabel(check_conjugacy(k1, k3, mu1.then(mu2), ctx, samples, tol),
                  "conjugacy.transitive")};
}

SecondOrderConnection SecondOrderConnection::from_bilinear(BilinearMap b) {
  SecondOrderConnection c;
  c.dim_ = b.dim();
  c.b_ = std::move(b);
  return c;
}

SecondOrderConnection SecondOrderConnection::black_box(std::size_t dim, Fn fn) {
  SecondOrderConnection c;
  c.dim_ = dim;
  c.fn_ = std::move(fn);
  return c;
}

SecondOrderTangent SecondOrderConnection::operator()(const SecondOrderTangent& xi) const {
  const std::size_t n = xi.x.size();
  for (const Vector* p : {&xi.h, &xi.k, &xi.dx, &xi.dh, &xi.dk})
    if (p->size() != n) throw DimensionError("second-order tangent blocks have unequal sizes");
  if (b_)
    return {xi.x, xi.h, xi.k, Vector(n), xi.dh - (*b_)(xi.x, xi.h, xi.dx),
            xi.dk - (*b_)(xi.x, xi.k, xi.dx)};
  return fn_(xi);
}

SecondOrderConnection induce_second_order_connection(const ConnectionSplitting& c) {
  if (c.bilinear()) return SecondOrderConnection::from_bilinear(*c.bilinear());
  return SecondOrderConnection::black_box(c.dim(), [c](const SecondOrderTangent& xi) {
    const auto first = c(DoubleTangentVector{xi.x, xi.h, xi.dx, xi.dh});
    const auto second = c(DoubleTangentVector{xi.x, xi.k, xi.dx, xi.dk});
    return SecondOrderTangent{xi.x, xi.h, xi.k, Vector(xi.x.size()), first.w, second.w};
  });
}

double second_order_tangent_residual(const SecondOrderTangent& a, const SecondOrderTangent& b) {
  double r = 0.0;
  keep_worst(r, scaled_residual(a.x, b.x));
  keep_worst(r, scaled_residual(a.h, b.h));
  keep_worst(r, scaled_residual(a.k, b.k));
  keep_worst(r, scaled_residual(a.dx, b.dx));
  keep_worst(r, scaled_residual(a.dh, b.dh));
  keep_worst(r, scaled_residual(a.dk, b.dk));
  return r;
}

namespace {

SecondOrderTangent random_second_order_tangent(const Vector& x, Sampler& rng) {
  const std::size_t n = x.size();
  SecondOrderTangent xi;
  xi.x = x;
  xi.h = rng.direction(n);
  xi.k = rng.direction(n);
  xi.dx = rng.direction(n);
  xi.dh = rng.direction(n);
  xi.dk = rng.direction(n);
  return xi;
}

double splitting_defect(const SecondOrderConnection& c2, const std::vector<Vector>& pts,
                        Sampler& rng) {
  double worst = 0.0;
  for (const auto& x : pts) {
    SecondOrderTangent xi = random_second_order_tangent(x, rng);
    xi.dx = Vector(x.size());
    keep_worst(worst, second_order_tangent_residual(c2(xi), xi));
  }
  return worst;
}

}  // namespace

ConnectionSplitting reduce_to_first_order_connection(const SecondOrderConnection& c2,
                                                     const Chart& chart,
                                                     const SampleContext& ctx,
                                                     std::size_t samples, double tol) {
  if (c2.dim() != chart.dim()) throw DimensionError("connection and chart dimensions differ");
  Sampler rng(ctx.seed);
  auto pts = sample_chart(chart, ctx.box, samples, rng);
  const double defect = splitting_defect(c2, pts, rng);
  if (!(defect <= tol))
    throw SplittingRejected("second-order connection does not fix vertical vectors", defect);

  if (c2.bilinear()) return ConnectionSplitting::from_bilinear(*c2.bilinear());

  const std::size_t n = c2.dim();
  auto c = ConnectionSplitting::black_box(n, [c2, n](const DoubleTangentVector& xi) {
    const auto out = c2(SecondOrderTangent{xi.x, xi.u, Vector(n), xi.v, xi.w, Vector(n)});
    return DoubleTangentVector{xi.x, xi.u, Vector(n), out.dh};
  });
  const auto again = induce_second_order_connection(c);
  double worst = 0.0;
  for (const auto& x : pts) {
    const SecondOrderTangent xi = random_second_order_tangent(x, rng);
    keep_worst(worst, second_order_tangent_residual(again(xi), c2(xi)));
  }
  if (!(worst <= tol))
    throw SplittingRejected("second-order connection is not induced by a first-order one", worst);
  return c;
}

CheckRecord check_second_order_splitting(const SecondOrderConnection& c2, const Chart& chart,
                                         const SampleContext& ctx, std::size_t samples,
                                         double tol) {
  Sampler rng(ctx.seed);
  auto pts = sample_chart(chart, ctx.box, samples, rng);
  return CheckRecord::make("second_order.splitting_identity." + chart.name(), pts.size(),
                           splitting_defect(c2, pts, rng), tol);
}

CheckRecord check_induce_reduce_roundtrip(const ConnectionSplitting& c, const Chart& chart,
                                          const SampleContext& ctx, std::size_t samples,
                                          double tol) {
  const auto back = reduce_to_first_order_connection(induce_second_order_connection(c), chart,
                                                     ctx, samples);
  Sampler rng(ctx.seed + 1);
  auto pts = sample_chart(chart, ctx.box, samples, rng);
  double worst = 0.0;
  for (const auto& x : pts) {
    const auto xi = random_double_tangent(x, rng);
    keep_worst(worst, block_residual(back(xi), c(xi)));
  }
  return CheckRecord::make("second_order.induce_reduce." + chart.name(), pts.size(), worst,
                           tol);
}

std::vector<CheckRecord> check_trivialization(const BilinearMap& b, const Chart& chart,
                                              const SampleContext& ctx, std::size_t samples,
                                              double tol) {
  Sampler rng(ctx.seed);
  auto pts = sample_chart(chart, ctx.box, samples, rng);
  const std::size_t n = chart.dim();
  double roundtrip = 0.0, symmetric = 0.0;
  for (const auto& x : pts) {
    const SecondOrderPoint p{x, rng.direction(n), rng.direction(n)};
    const auto back = untrivialize(b, trivialize(b, p));
    const double size = 1.0 + std::max(norm_inf(concat(p.a, p.b)), norm_inf(b(x, p.a, p.a)));
    keep_worst(roundtrip, norm_inf(concat(back.a, back.b) - concat(p.a, p.b)) / size);

    const auto y = upsilon(b, DoubleTangentVector{x, p.a, p.a, p.b});
    const auto t = trivialize(b, p);
    keep_worst(symmetric, scaled_residual(concat(y.u, y.z), concat(t.h, t.k)));
  }
  return {CheckRecord::make("second_order.trivialize_roundtrip." + chart.name(), pts.size(),
                            roundtrip, tol),
          CheckRecord::make("second_order.upsilon_symmetric." + chart.name(), pts.size(),
                            symmetric, 0.0)};
}

}  // namespace sprayconn
