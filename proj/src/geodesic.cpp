#include "sprayconn/geodesic.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sprayconn/errors.hpp"

namespace sprayconn {

namespace {

struct Phase {
  Vector x;
  Vector v;
};

Phase rhs(const BilinearMap& b, const Vector& x, const Vector& v) { return {v, b(x, v, v)}; }

Phase step(const BilinearMap& b, const Phase& s, double h, Method method) {
  const Phase k1 = rhs(b, s.x, s.v);
  if (method == Method::euler) return {s.x + h * k1.x, s.v + h * k1.v};
  const Phase k2 = rhs(b, s.x + (0.5 * h) * k1.x, s.v + (0.5 * h) * k1.v);
  const Phase k3 = rhs(b, s.x + (0.5 * h) * k2.x, s.v + (0.5 * h) * k2.v);
  const Phase k4 = rhs(b, s.x + h * k3.x, s.v + h * k3.v);
  return {s.x + (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          s.v + (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
}

std::size_t step_count(double t1, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("step size must be positive");
  if (!(t1 >= 0.0) || !std::isfinite(t1)) throw DomainError("final time must be non-negative");
  return static_cast<std::size_t>(std::ceil(t1 / h - 1e-9));
}

double grid_time(std::size_t i, std::size_t n, double t1, double h) {
  return i >= n ? t1 : static_cast<double>(i) * h;
}

[[noreturn]] void fail(const std::string& what, const GeodesicState& last) {
  throw IntegrationError(what, last.chart, last.x.coords(), last.v.coords(), last.t);
}

const BilinearMap& coeffs_for(const BilinearCoeffs& b, const std::string& chart) {
  auto it = b.find(chart);
  if (it == b.end()) throw UnresolvedReference("no bilinear map for chart '" + chart + "'");
  return it->second;
}

void check_initial(std::size_t n, const Vector& x0, const Vector& v0) {
  if (x0.size() != n || v0.size() != n)
    throw DimensionError("initial point and velocity must have dimension " + std::to_string(n));
}

}  // namespace

std::string reparam_id(double s) {
  std::ostringstream os;
  os << "geodesic.reparam.s=" << s;
  return os.str();
}

Trajectory integrate(const Atlas& atlas, const BilinearCoeffs& b, const std::string& chart,
                     const Vector& x0, const Vector& v0, double t1, double h,
                     IntegrateOptions opt) {
  const std::size_t n = step_count(t1, h);
  check_initial(atlas.chart(chart).dim(), x0, v0);
  if (!atlas.chart(chart).contains(x0))
    throw DomainError("initial point outside chart '" + chart + "'");

  Trajectory traj{{}, h, opt.method};
  GeodesicState cur{chart, x0, v0, 0.0};
  traj.samples.push_back(cur);

  // Neighbouring chart with a larger predicate value at the current state.
  auto better_chart = [&](const GeodesicState& s, double here) -> const Transition* {
    const Transition* best = nullptr;
    for (const Transition* t : atlas.transitions_from(s.chart)) {
      if (!t->in_overlap(s.x)) continue;
      const double there = t->to.predicate(t->map(s.x));
      if (there > here) {
        here = there;
        best = t;
      }
    }
    return best;
  };
  auto switch_to = [](const Transition& t, const GeodesicState& s) {
    TangentVector tv = tangent_lift(t, s.x, s.v);
    return GeodesicState{t.to.name(), std::move(tv.x), std::move(tv.v), s.t};
  };
  auto attempt = [&](const GeodesicState& s, double dt) {
    Phase next;
    try {
      next = step(coeffs_for(b, s.chart), {s.x, s.v}, dt, opt.method);
    } catch (const EvaluationError& e) {
      fail(std::string("spray evaluation failed: ") + e.what(), s);
    }
    if (!next.x.all_finite() || !next.v.all_finite()) fail("non-finite step rejected", s);
    return next;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const double t_next = grid_time(i + 1, n, t1, h);
    Phase next = attempt(cur, t_next - cur.t);
    if (!atlas.chart(cur.chart).contains(next.x)) {
      // The step overshot the switch threshold: change chart first, then retry.
      const Transition* t = better_chart(cur, -std::numeric_limits<double>::infinity());
      if (!t) fail("trajectory left all chart domains", cur);
      cur = switch_to(*t, cur);
      next = attempt(cur, t_next - cur.t);
      if (!atlas.chart(cur.chart).contains(next.x)) fail("trajectory left all chart domains", cur);
    }
    cur = {cur.chart, std::move(next.x), std::move(next.v), t_next};

    const double here = atlas.chart(cur.chart).predicate(cur.x);
    if (here < opt.switch_threshold)
      if (const Transition* t = better_chart(cur, here)) cur = switch_to(*t, cur);
    traj.samples.push_back(cur);
  }
  return traj;
}

Trajectory integrate(const BilinearMap& b, const Vector& x0, const Vector& v0, double t1,
                     double h, Method method, const std::string& chart) {
  const std::size_t n = step_count(t1, h);
  check_initial(b.dim(), x0, v0);
  Trajectory traj{{}, h, method};
  GeodesicState cur{chart, x0, v0, 0.0};
  traj.samples.push_back(cur);
  for (std::size_t i = 0; i < n; ++i) {
    const double t_next = grid_time(i + 1, n, t1, h);
    Phase next;
    try {
      next = step(b, {cur.x, cur.v}, t_next - cur.t, method);
    } catch (const EvaluationError& e) {
      fail(std::string("spray evaluation failed: ") + e.what(), cur);
    }
    if (!next.x.all_finite() || !next.v.all_finite()) fail("non-finite step rejected", cur);
    cur = {chart, std::move(next.x), std::move(next.v), t_next};
    traj.samples.push_back(cur);
  }
  return traj;
}

GeodesicState express_in(const Atlas& atlas, const GeodesicState& s, const std::string& chart) {
  if (s.chart == chart) return s;
  const Transition* t = atlas.find_transition(s.chart, chart);
  if (!t) throw UnresolvedReference("no transition " + s.chart + "->" + chart);
  TangentVector tv = tangent_lift(*t, s.x, s.v);
  return {chart, std::move(tv.x), std::move(tv.v), s.t};
}

CheckRecord check_homogeneity_reparam(const Atlas& atlas, const BilinearCoeffs& b,
                                      const std::string& chart, const Vector& x0,
                                      const Vector& v0, double s, double t1, double h,
                                      double tol) {
  const std::string id = reparam_id(s);
  const auto scaled = integrate(atlas, b, chart, x0, s * v0, t1, h);
  double worst = 0.0;
  if (s == 0.0) {
    for (const auto& st : scaled.samples)
      keep_worst(worst, scaled_residual(express_in(atlas, st, chart).x, x0));
    return CheckRecord::make(id, scaled.samples.size(), worst, tol);
  }
  const double a = std::fabs(s);
  const Vector dir = s < 0.0 ? -v0 : v0;
  // Reference on the same step when |s| i lands on the grid, else on step |s| h.
  const bool same_grid = std::fabs(a - std::round(a)) < 1e-12;
  const double ref_h = same_grid ? h : a * h;
  const auto ref = integrate(atlas, b, chart, x0, dir, a * t1, ref_h);
  const std::size_t stride = same_grid ? static_cast<std::size_t>(std::round(a)) : 1;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < scaled.samples.size(); ++i) {
    const std::size_t j = i * stride;
    if (j >= ref.samples.size()) break;
    const auto& r = ref.samples[j];
    if (std::fabs(r.t - a * scaled.samples[i].t) > 1e-9 * (1.0 + r.t)) continue;
    keep_worst(worst, scaled_residual(express_in(atlas, scaled.samples[i], r.chart).x, r.x));
    ++matched;
  }
  return CheckRecord::make(id, matched, worst, tol);
}

CheckRecord check_time_reversal(const Atlas& atlas, const BilinearCoeffs& b,
                                const std::string& chart, const Vector& x0, const Vector& v0,
                                double t1, double h, double tol) {
  const auto fwd = integrate(atlas, b, chart, x0, v0, t1, h);
  const auto& end = fwd.back();
  const auto bwd = integrate(atlas, b, end.chart, end.x, -end.v, t1, h);
  const auto home = express_in(atlas, bwd.back(), chart);
  return CheckRecord::make("geodesic.time_reversal." + chart, fwd.samples.size(),
                           scaled_residual(home.x, x0), tol);
}

CheckRecord check_chart_switch_invariance(const Atlas& atlas, const BilinearCoeffs& b,
                                          const std::string& chart, const Vector& x0,
                                          const Vector& v0, double t1, double h,
                                          double force_threshold, double tol) {
  IntegrateOptions forced;
  forced.switch_threshold = force_threshold;
  const auto hopping = integrate(atlas, b, chart, x0, v0, t1, h, forced);
  const auto single = integrate(coeffs_for(b, chart), x0, v0, t1, h, Method::rk4, chart);
  double worst = 0.0;
  std::size_t switched = 0;
  for (std::size_t i = 0; i < hopping.samples.size() && i < single.samples.size(); ++i) {
    const auto& st = hopping.samples[i];
    if (st.chart != chart) ++switched;
    keep_worst(worst, scaled_residual(express_in(atlas, st, chart).x, single.samples[i].x));
  }
  CheckRecord r = CheckRecord::make("geodesic.chart_switch." + chart, hopping.samples.size(),
                                    worst, tol);
  if (switched == 0) {
    r.pass = false;
    r.note = "trajectory never switched chart";
  }
  return r;
}

CheckRecord check_reference_curve(const Atlas& atlas, const Trajectory& traj,
                                  const ExprMap& reference, double tol) {
  if (reference.arity_in() != 1) throw DimensionError("reference curve takes the single input t");
  const std::string& chart = traj.samples.front().chart;
  double worst = 0.0;
  for (const auto& st : traj.samples) {
    const Vector expect = reference(Vector{st.t});
    keep_worst(worst, scaled_residual(express_in(atlas, st, chart).x, expect));
  }
  return CheckRecord::make("geodesic.reference." + chart, traj.samples.size(), worst, tol);
}

CheckRecord energy_monitor(const MetricTable& metric, const Trajectory& traj, double tol) {
  auto energy = [&](const GeodesicState& s) {
    auto it = metric.find(s.chart);
    if (it == metric.end())
      throw ConfigError("no metric declared for chart '" + s.chart + "'");
    return metric_energy(it->second, s.x, s.v);
  };
  const double e0 = energy(traj.samples.front());
  const double scale = e0 != 0.0 ? std::fabs(e0) : 1.0;
  double worst = 0.0;
  for (const auto& s : traj.samples) keep_worst(worst, std::fabs(energy(s) - e0) / scale);
  return CheckRecord::make("geodesic.energy." + traj.samples.front().chart,
                           traj.samples.size(), worst, tol);
}

}  // namespace sprayconn
