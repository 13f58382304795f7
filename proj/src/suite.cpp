#include "sprayconn/suite.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include "sprayconn/connection.hpp"
#include "sprayconn/errors.hpp"
#include "sprayconn/geodesic.hpp"
#include "sprayconn/second_order.hpp"

namespace sprayconn {

SuiteKind parse_suite(const std::string& name) {
  if (name == "spray") return SuiteKind::spray;
  if (name == "connection") return SuiteKind::connection;
  if (name == "second-order") return SuiteKind::second_order;
  if (name == "geodesic") return SuiteKind::geodesic;
  if (name == "truncation") return SuiteKind::truncation;
  if (name == "all") return SuiteKind::all;
  throw ConfigError("unknown suite '" + name + "'");
}

std::string suite_name(SuiteKind kind) {
  switch (kind) {
    case SuiteKind::spray: return "spray";
    case SuiteKind::connection: return "connection";
    case SuiteKind::second_order: return "second-order";
    case SuiteKind::geodesic: return "geodesic";
    case SuiteKind::truncation: return "truncation";
    case SuiteKind::all: return "all";
  }
  return "all";
}

Tolerances::Tolerances()
    : values_{{"bilinearity", 1e-9},
              {"black_box", 1e-12},
              {"cd_axioms", 1e-8},
              {"chart_switch", 1e-6},
              {"christoffel", 1e-5},
              {"cocycle", 1e-9},
              {"conjugacy", 1e-9},
              {"conjugacy_equivalence", 1e-8},
              {"diagonal", 1e-9},
              {"energy", 1e-6},
              {"extraction", 1e-8},
              {"homogeneity", 1e-9},
              {"homogeneity_control", 0.1},
              {"identities", 1e-15},
              {"induce_reduce", 1e-12},
              {"nabla_K_T", 1e-9},
              {"nonlinearity_witness", 1e-3},
              {"pushforward", 1e-8},
              {"reference_curve", 1e-6},
              {"regularity", 1e-6},
              {"reparam", 1e-7},
              {"second_order_splitting", 1e-12},
              {"splitting_roundtrip", 0.0},
              {"symmetry", 0.0},
              {"t2mu_linearity", 1e-8},
              {"time_reversal", 1e-6},
              {"torsion", 1e-12},
              {"transformation", 1e-8},
              {"trivialization", 1e-15},
              {"truncation", 1e-8}} {}

double Tolerances::operator[](const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown tolerance '" + key + "'");
  return it->second;
}

void Tolerances::set(const std::string& key, double value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown tolerance '" + key + "'");
  if (!(value >= 0.0) || !std::isfinite(value))
    throw ConfigError("tolerance '" + key + "' must be a non-negative number");
  it->second = value;
}

void Tolerances::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("tolerance override must be key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw ConfigError("tolerance '" + key + "': cannot parse '" + text + "'");
  set(key, value);
}

Transition builtin_conjugacy_map(const Chart& chart) {
  const std::size_t n = chart.dim();
  const auto names = indexed_names("x", n);
  if (n == 1) {
    const Chart positive = chart.with_domain(ExprMap::parse("x0", names));
    return Transition(positive, positive, ExprMap::parse("x0^2", names),
                      ExprMap::parse("sqrt(x0)", names));
  }
  std::ostringstream fwd, inv;
  fwd << '[';
  inv << '[';
  for (std::size_t i = 0; i < n; ++i) {
    const char* sep = i ? ", " : "";
    if (i == 1) {
      fwd << sep << "x1 + 0.5*x0^2";
      inv << sep << "x1 - 0.5*x0^2";
    } else {
      fwd << sep << 'x' << i;
      inv << sep << 'x' << i;
    }
  }
  fwd << ']';
  inv << ']';
  return Transition(chart, chart, ExprMap::parse(fwd.str(), names),
                    ExprMap::parse(inv.str(), names));
}

Transition square_map(const Chart& chart) {
  const std::size_t n = chart.dim();
  const auto names = indexed_names("x", n);
  std::ostringstream fwd, inv;
  fwd << "[x0^2";
  inv << "[sqrt(x0)";
  for (std::size_t i = 1; i < n; ++i) {
    fwd << ", x" << i;
    inv << ", x" << i;
  }
  fwd << ']';
  inv << ']';
  const Chart positive = chart.with_domain(ExprMap::parse("x0", names));
  return Transition(positive, positive, ExprMap::parse(fwd.str(), names),
                    ExprMap::parse(inv.str(), names));
}

namespace {

constexpr std::size_t kHomogeneitySamples = 200;
constexpr std::size_t kCheckSamples = 100;
constexpr std::size_t kAxiomSamples = 50;
constexpr std::size_t kIdentitySamples = 500;
constexpr std::size_t kSplittingSamples = 200;

/// S(x, v) = v, homogeneous of degree one: must be caught by the checker.
class DegreeOneControl final : public QuadraticField {
 public:
  explicit DegreeOneControl(std::size_t n) : n_(n) {}
  std::size_t dim() const override { return n_; }
  Vector eval(const Vector&, const Vector& v) const override { return v; }
  std::string describe() const override { return "S(x, v) = v"; }

 private:
  std::size_t n_;
};

class Runner {
 public:
  Runner(const ManifoldDef& m, const Tolerances& tol, std::uint64_t seed)
      : m_(m), tol_(tol), ctx_{m.atlas.box, seed} {}

  std::vector<CheckRecord> records;

  void spray_suite();
  void connection_suite(const std::string& suffix = {});
  void second_order_suite();
  void geodesic_suite();

 private:
  void guard(const std::string& id, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      records.push_back(CheckRecord::error(id, e.what()));
    }
  }
  void add(CheckRecord r) { records.push_back(std::move(r)); }
  void add(std::vector<CheckRecord> rs) {
    for (auto& r : rs) records.push_back(std::move(r));
  }
  const BilinearMap& b(const Chart& c) const { return m_.spray.bilinear.at(c.name()); }

  const ManifoldDef& m_;
  const Tolerances& tol_;
  SampleContext ctx_;
};

void Runner::spray_suite() {
  for (const auto& c : m_.atlas.charts)
    guard("bilinear.symmetry." + c.name(),
          [&] { add(check_symmetry(b(c), c, ctx_, kCheckSamples)); });
  for (const auto& c : m_.atlas.charts) {
    const auto& field = m_.spray.field;
    guard("spray.second_order." + c.name(),
          [&] { add(check_second_order(field, c, ctx_, kCheckSamples)); });
    guard("spray.homogeneity." + c.name(), [&] {
      add(check_homogeneity(field.at(c.name()), c, kDefaultHomogeneityScalars, ctx_,
                            kHomogeneitySamples, tol_["homogeneity"]));
    });
    guard("spray.homogeneity_control." + c.name(), [&] {
      const auto r = check_homogeneity(DegreeOneControl(c.dim()), c, kDefaultHomogeneityScalars,
                                       ctx_, kHomogeneitySamples);
      add(CheckRecord::make_at_least("spray.homogeneity_control." + c.name(), r.samples,
                                     r.max_residual, tol_["homogeneity_control"],
                                     "degree-one field must be rejected"));
    });
    guard("spray.extraction." + c.name(), [&] {
      add(check_extraction_consistency(field.ptr(c.name()), c, ctx_, kCheckSamples,
                                       tol_["extraction"]));
    });
    guard("bilinear.bilinearity." + c.name(), [&] {
      add(check_bilinearity(b(c), c, ctx_, kCheckSamples, tol_["bilinearity"]));
    });
    guard("bilinear.diagonal." + c.name(), [&] {
      add(check_diagonal(b(c), field.at(c.name()), c, ctx_, kCheckSamples, tol_["diagonal"]));
    });
    if (m_.spray.kind == SprayKind::metric)
      guard("spray.christoffel." + c.name(), [&] {
        add(check_christoffel(b(c), m_.spray.metric.at(c.name()), c, ctx_, kCheckSamples,
                              tol_["christoffel"]));
      });
  }
  if (!m_.atlas.transitions.empty())
    guard("atlas.cocycle", [&] {
      add(cocycle_check(m_.atlas.transitions, ctx_, kCheckSamples, tol_["cocycle"]));
    });
  for (const auto& t : m_.atlas.transitions) {
    const std::string tag = t.from.name() + "->" + t.to.name();
    guard("atlas.regularity." + tag, [&] {
      add(check_transition_regularity(t, ctx_, kCheckSamples, tol_["regularity"]));
    });
    guard("spray.transformation." + tag, [&] {
      add(check_transformation_law(m_.spray.field, t, ctx_, kCheckSamples,
                                   tol_["transformation"]));
    });
    guard("spray.pushforward_roundtrip." + tag, [&] {
      add(check_pushforward_roundtrip(m_.spray.field, t, ctx_, kCheckSamples,
                                      tol_["pushforward"]));
    });
  }
}

/// Polynomial test fields X_i = 1 + x_i^2 / 2 - x_{i+1} / 4,
/// Y_i = x_i - x_i x_{i+1} / 3 + 1 / 2 and f = 1 + x_0^2 / 2 + x_{n-1} / 4.
ExprMap default_field(std::size_t n, int which) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    os << (i ? ", " : "");
    if (which == 0) os << "1 + 0.5*x" << i << "^2 - 0.25*x" << j;
    else os << "x" << i << " - x" << i << "*x" << j << "/3 + 0.5";
  }
  os << ']';
  return ExprMap::parse(os.str(), indexed_names("x", n));
}

ExprMap default_scalar(std::size_t n) {
  return ExprMap::parse("1 + 0.5*x0^2 + 0.25*x" + std::to_string(n - 1), indexed_names("x", n));
}

void Runner::connection_suite(const std::string& suffix) {
  const std::size_t n = m_.dim();
  auto vector_field = [&](std::size_t idx, const std::string& chart) {
    std::size_t k = 0;
    for (const auto& [name, table] : m_.vector_fields)
      if (k++ == idx && table.has(chart)) return table.at(chart);
    return default_field(n, static_cast<int>(idx));
  };
  auto scalar_field = [&](const std::string& chart) {
    for (const auto& [name, table] : m_.scalar_fields)
      if (table.has(chart)) return table.at(chart);
    return default_scalar(n);
  };
  auto tagged = [&](std::vector<CheckRecord> rs) {
    for (auto& r : rs) r.id += suffix;
    return rs;
  };
  auto tagged1 = [&](CheckRecord r) {
    r.id += suffix;
    return r;
  };

  for (const auto& c : m_.atlas.charts) {
    const ExprMap x = vector_field(0, c.name());
    const ExprMap y = vector_field(1, c.name());
    const ExprMap f = scalar_field(c.name());
    guard("cd.axioms." + c.name() + suffix, [&] {
      add(tagged(check_cd_axioms(b(c), c, x, y, f, ctx_, kAxiomSamples, tol_["cd_axioms"],
                                 tol_["torsion"])));
    });
    guard("connection.nabla_eq_KoT." + c.name() + suffix, [&] {
      add(tagged1(check_nabla_equals_K_of_T(ConnectionMap(b(c)), x, y, c, ctx_, kCheckSamples,
                                            tol_["nabla_K_T"])));
    });
    guard("identity." + c.name() + suffix, [&] {
      add(tagged(check_exact_identities(b(c), c, ctx_, kIdentitySamples, tol_["identities"])));
    });
    guard("connection.splitting_roundtrip." + c.name() + suffix, [&] {
      // spray -> splitting -> connection map -> B, intensional and black-box.
      const auto split = ConnectionSplitting::from_bilinear(b(c));
      const auto k = connection_from_splitting(split, c, ctx_);
      const auto opaque = ConnectionSplitting::black_box(
          c.dim(), [split](const DoubleTangentVector& xi) { return split(xi); });
      const auto kb = connection_from_splitting(opaque, c, ctx_, kAxiomSamples, 1e-9);
      Sampler rng(ctx_.seed);
      auto pts = sample_chart(c, ctx_.box, kCheckSamples, rng);
      double exact = 0.0, boxed = 0.0;
      for (const auto& p : pts) {
        const Vector u = rng.direction(c.dim());
        const Vector v = rng.direction(c.dim());
        const Vector src = b(c)(p, u, v);
        const Vector via_k = -k(DoubleTangentVector{p, u, v, Vector(c.dim())}).v;
        keep_worst(exact, norm_inf(via_k - src));
        keep_worst(boxed, scaled_residual(kb.bilinear()(p, u, v), src));
      }
      add(CheckRecord::make("connection.splitting_roundtrip." + c.name() + suffix, pts.size(),
                            exact, tol_["splitting_roundtrip"]));
      add(CheckRecord::make("connection.black_box_intake." + c.name() + suffix, pts.size(),
                            boxed, tol_["black_box"]));
    });
  }
}

void Runner::second_order_suite() {
  for (const auto& c : m_.atlas.charts) {
    guard("second_order.trivialization." + c.name(), [&] {
      add(check_trivialization(b(c), c, ctx_, kCheckSamples, tol_["trivialization"]));
    });
    const auto split = ConnectionSplitting::from_bilinear(b(c));
    guard("second_order.splitting_identity." + c.name(), [&] {
      add(check_second_order_splitting(induce_second_order_connection(split), c, ctx_,
                                       kSplittingSamples, tol_["second_order_splitting"]));
    });
    guard("second_order.induce_reduce." + c.name(), [&] {
      add(check_induce_reduce_roundtrip(split, c, ctx_, kCheckSamples, tol_["induce_reduce"]));
    });
    guard("second_order.induce_reduce_black_box." + c.name(), [&] {
      const auto opaque = ConnectionSplitting::black_box(
          c.dim(), [split](const DoubleTangentVector& xi) { return split(xi); });
      auto r = check_induce_reduce_roundtrip(opaque, c, ctx_, kCheckSamples,
                                             tol_["induce_reduce"]);
      r.id = "second_order.induce_reduce_black_box." + c.name();
      add(std::move(r));
    });
  }

  const Chart& first = m_.atlas.charts.front();
  const Transition mu = m_.conjugacy ? *m_.conjugacy : builtin_conjugacy_map(first);
  const std::string owner = mu.from.name();
  const auto s = m_.spray.field.ptr(owner);
  guard("conjugacy.equivalence", [&] {
    auto rs = check_conjugacy_equivalence(s, mu, mu, ctx_, kCheckSamples,
                                          tol_["conjugacy_equivalence"]);
    for (auto& r : rs)
      if (r.id == "conjugacy.constructed")
        r = CheckRecord::make(r.id, r.samples, r.max_residual, tol_["conjugacy"]);
    add(std::move(rs));
  });
  guard("T2mu", [&] {
    const ConnectionMap k1(BilinearMap::polarization(s));
    const ConnectionMap k2(BilinearMap::polarization(pushforward_field(s, mu)));
    add(check_T2mu_linearity(k1, k2, mu, ctx_, kCheckSamples, tol_["t2mu_linearity"]));
  });
  guard("T2mu.nonlinearity_witness", [&] {
    const Transition sq = square_map(first);
    const ConnectionMap flat(BilinearMap::zero(first.dim()));
    add(check_nonlinearity_witness(flat, flat, sq, ctx_, kCheckSamples,
                                   tol_["nonlinearity_witness"]));
  });
}

GeodesicSpec default_geodesic(const ManifoldDef& m) {
  if (m.geodesic) return *m.geodesic;
  GeodesicSpec g;
  g.chart = m.atlas.charts.front().name();
  g.x0 = Vector(m.dim());
  g.v0 = Vector(m.dim());
  g.v0[0] = 0.5;
  return g;
}

void Runner::geodesic_suite() {
  const GeodesicSpec g = default_geodesic(m_);
  const auto& bc = m_.spray.bilinear;
  guard("geodesic.integrate." + g.chart, [&] {
    const auto traj = integrate(m_.atlas, bc, g.chart, g.x0, g.v0, g.t1, g.step);
    if (g.reference)
      add(check_reference_curve(m_.atlas, traj, *g.reference, tol_["reference_curve"]));
    if (m_.spray.kind == SprayKind::metric)
      add(energy_monitor(m_.spray.metric, traj, tol_["energy"]));
  });
  for (double s : {0.0, 2.0, -1.0, 0.5}) {
    guard(reparam_id(s), [&] {
      const double t1 = g.t1 / std::max(std::fabs(s), 1.0);
      add(check_homogeneity_reparam(m_.atlas, bc, g.chart, g.x0, g.v0, s, t1, g.step,
                                    tol_["reparam"]));
    });
  }
  guard("geodesic.time_reversal." + g.chart, [&] {
    add(check_time_reversal(m_.atlas, bc, g.chart, g.x0, g.v0, g.t1, g.step,
                            tol_["time_reversal"]));
  });
  if (!m_.atlas.transitions_from(g.chart).empty())
    guard("geodesic.chart_switch." + g.chart, [&] {
      add(check_chart_switch_invariance(m_.atlas, bc, g.chart, g.x0, g.v0, g.t1, g.step,
                                        std::numeric_limits<double>::infinity(),
                                        tol_["chart_switch"]));
    });
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

Report make_report(const ManifoldDef& m, const std::string& suite, const Tolerances& tol,
                   std::uint64_t seed) {
  Report r;
  r.suite = suite;
  r.manifold = m.name;
  r.seed = seed;
  r.level = m.space.active_level();
  r.tolerances = tol.values();
  r.timestamp = now_utc();
  return r;
}

bool graded(const ManifoldDef& m) { return m.space.levels() >= 2; }

}  // namespace

Report run_suite(const ManifoldDef& m, SuiteKind suite, const Tolerances& tol,
                 std::uint64_t seed) {
  Report report = make_report(m, suite_name(suite), tol, seed);
  Runner run(m, tol, seed);
  const bool all = suite == SuiteKind::all;
  if (all || suite == SuiteKind::spray) run.spray_suite();
  if (all || suite == SuiteKind::connection) run.connection_suite();
  if (all || suite == SuiteKind::second_order) run.second_order_suite();
  if (all || suite == SuiteKind::geodesic) run.geodesic_suite();
  report.records = std::move(run.records);
  if (suite == SuiteKind::truncation || (all && graded(m) && m.spray.generic)) {
    std::vector<std::size_t> levels;
    for (std::size_t l = 1; l <= m.space.levels(); ++l) levels.push_back(l);
    report.append(truncation_stability(m, levels, tol, seed));
  }
  return report;
}

Report truncation_stability(const ManifoldDef& m, const std::vector<std::size_t>& levels,
                            const Tolerances& tol, std::uint64_t seed) {
  if (!m.spray.generic)
    throw ConfigError("truncation stability needs a dimension-generic spray (`each` patterns)");
  if (levels.size() < 2) throw ConfigError("truncation stability needs at least two levels");
  Report report = make_report(m, "truncation", tol, seed);
  const double t = tol["truncation"];

  std::vector<ManifoldDef> defs;
  for (std::size_t l : levels) defs.push_back(at_level(m, l));
  for (const auto& d : defs) {
    Runner run(d, tol, seed);
    run.connection_suite(".L" + std::to_string(d.space.active_level()));
    for (auto& r : run.records) report.records.push_back(std::move(r));
  }

  for (std::size_t p = 0; p + 1 < defs.size(); ++p) {
    const ManifoldDef& lo = defs[p];
    const ManifoldDef& hi = defs[p + 1];
    const std::size_t nl = lo.dim(), nh = hi.dim();
    const std::string tag = ".L" + std::to_string(lo.space.active_level()) + "-L" +
                            std::to_string(hi.space.active_level());
    for (const auto& c : hi.atlas.charts) {
      if (!lo.atlas.has_chart(c.name())) continue;
      const Chart& cl = lo.atlas.chart(c.name());
      const BilinearMap& bh = hi.spray.bilinear.at(c.name());
      const BilinearMap& bl = lo.spray.bilinear.at(c.name());
      const ConnectionMap kh(bh), kl(bl);
      const auto ch = ConnectionSplitting::from_bilinear(bh);
      const auto cl_split = ConnectionSplitting::from_bilinear(bl);
      auto proj = [&](const Vector& v) { return project(hi.space, v, hi.space.active_level(),
                                                        lo.space.active_level()); };
      try {
        Sampler rng(seed);
        double k_res = 0.0, c_res = 0.0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < kCheckSamples; ++i) {
          const Vector x = rng.point(nh, m.atlas.box);
          const DoubleTangentVector xi = random_double_tangent(x, rng);
          if (!c.contains(x) || !cl.contains(proj(x))) continue;
          const DoubleTangentVector xl{proj(xi.x), proj(xi.u), proj(xi.v), proj(xi.w)};
          keep_worst(k_res, scaled_residual(proj(kh(xi).v), kl(xl).v));
          const auto sh = ch(xi);
          keep_worst(c_res, block_residual({proj(sh.x), proj(sh.u), proj(sh.v), proj(sh.w)},
                                           cl_split(xl)));
          ++used;
        }
        report.records.push_back(
            CheckRecord::make("truncation.K." + c.name() + tag, used, k_res, t));
        report.records.push_back(
            CheckRecord::make("truncation.c." + c.name() + tag, used, c_res, t));
      } catch (const std::exception& e) {
        report.records.push_back(CheckRecord::error("truncation.K." + c.name() + tag, e.what()));
      }
    }
    try {
      const std::string chart = hi.atlas.charts.front().name();
      Vector x0(nh), v0(nh);
      for (std::size_t i = 0; i < nh; ++i) {
        x0[i] = 0.2 / static_cast<double>(1 + i);
        v0[i] = 1.0 / static_cast<double>((1 + i) * (1 + i));
      }
      const auto th = integrate(hi.atlas, hi.spray.bilinear, chart, x0, v0, 1.0, 1e-2);
      const auto tl = integrate(lo.atlas, lo.spray.bilinear, chart, head(x0, nl), head(v0, nl),
                                1.0, 1e-2);
      double worst = 0.0;
      for (std::size_t i = 0; i < th.samples.size() && i < tl.samples.size(); ++i) {
        keep_worst(worst, scaled_residual(head(th.samples[i].x, nl), tl.samples[i].x));
        keep_worst(worst, scaled_residual(head(th.samples[i].v, nl), tl.samples[i].v));
      }
      report.records.push_back(
          CheckRecord::make("truncation.geodesic" + tag, th.samples.size(), worst, t));
    } catch (const std::exception& e) {
      report.records.push_back(CheckRecord::error("truncation.geodesic" + tag, e.what()));
    }
  }
  return report;
}

}  // namespace sprayconn
