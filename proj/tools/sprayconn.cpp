#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sprayconn/connection.hpp"
#include "sprayconn/errors.hpp"
#include "sprayconn/geodesic.hpp"
#include "sprayconn/manifold.hpp"
#include "sprayconn/second_order.hpp"
#include "sprayconn/suite.hpp"

using namespace sprayconn;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfig = 2;

Vector parse_coords(const std::string& text, std::size_t n, const std::string& what) {
  std::string s = text;
  for (char& c : s)
    if (c == ',' || c == '[' || c == ']' || c == ';') c = ' ';
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw ConfigError(what + ": cannot parse '" + tok + "'");
    out.push_back(v);
  }
  if (out.size() != n)
    throw DimensionError(what + ": expected " + std::to_string(n) + " coordinates, got " +
                         std::to_string(out.size()));
  return Vector(out);
}

ManifoldDef load(const std::string& name) { return load_manifold(resolve_manifold(name)); }

std::string fmt(const Vector& v) {
  std::ostringstream os;
  os << std::setprecision(17) << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ']';
  return os.str();
}

struct VerifyArgs {
  std::string manifold;
  std::string suite = "all";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> level;
  std::vector<std::string> tol;
  std::string report;
};

int verify(const VerifyArgs& a) {
  ManifoldDef m = load(a.manifold);
  if (a.level) m = at_level(m, *a.level);
  Tolerances tol;
  for (const auto& t : a.tol) tol.set(t);
  const SuiteKind kind = parse_suite(a.suite);
  const Report r = run_suite(m, kind, tol, a.seed.value_or(m.seed));
  std::cout << r.to_table();
  if (!a.report.empty()) {
    std::ofstream out(a.report);
    if (!out) throw ConfigError("cannot write report '" + a.report + "'");
    out << r.to_json() << '\n';
  }
  const auto* bad = r.first_failure();
  std::cout << (bad ? "FAIL" : "PASS") << ": " << m.name << " suite " << a.suite << " ("
            << r.records.size() << " checks)";
  if (bad) std::cout << ", first failure " << bad->id;
  std::cout << '\n';
  return bad ? kFail : kPass;
}

struct DeriveArgs {
  std::string manifold;
  std::string chart;
  std::string at;
  std::string u, v, w;
};

int derive(const DeriveArgs& a) {
  const ManifoldDef m = load(a.manifold);
  const Chart& c = a.chart.empty() ? m.atlas.charts.front() : m.atlas.chart(a.chart);
  const std::size_t n = c.dim();
  const Vector x = parse_coords(a.at, n, "--at");
  if (!c.contains(x)) throw DomainError("point " + fmt(x) + " is outside chart '" + c.name() + "'");
  const BilinearMap& b = m.spray.bilinear.at(c.name());

  std::cout << std::setprecision(12);
  std::cout << "chart " << c.name() << " at x = " << fmt(x) << "\n";
  std::cout << "B^k_ij = B(x; e_i, e_j)_k  (B = -Gamma for metric sprays)\n";
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Vector ei(n), ej(n);
      ei[i] = 1.0;
      ej[j] = 1.0;
      std::cout << "  B(e" << i << ", e" << j << ") = " << fmt(b(x, ei, ej)) << '\n';
    }

  Vector e0(n);
  e0[0] = 1.0;
  const Vector u = a.u.empty() ? e0 : parse_coords(a.u, n, "--u");
  const Vector v = a.v.empty() ? e0 : parse_coords(a.v, n, "--v");
  const Vector w = a.w.empty() ? Vector(n) : parse_coords(a.w, n, "--w");
  const DoubleTangentVector xi{x, u, v, w};
  const ConnectionMap k(b);
  const auto split = ConnectionSplitting::from_bilinear(b);
  const auto [vp, hp] = projectors(split, xi);
  std::cout << "xi = (x, u, v, w) with u = " << fmt(u) << ", v = " << fmt(v)
            << ", w = " << fmt(w) << '\n';
  std::cout << "K(xi)  = " << fmt(k(xi).v) << '\n';
  std::cout << "Vp(xi) = (u " << fmt(vp.u) << ", v " << fmt(vp.v) << ", w " << fmt(vp.w)
            << ")\n";
  std::cout << "Hp(xi) = (u " << fmt(hp.u) << ", v " << fmt(hp.v) << ", w " << fmt(hp.w)
            << ")\n";
  return kPass;
}

struct GeodesicArgs {
  std::string manifold;
  std::string chart;
  std::string x0, v0;
  double t1 = 1.0;
  double step = 1e-3;
  std::string method = "rk4";
  std::string output;
};

int geodesic(const GeodesicArgs& a) {
  const ManifoldDef m = load(a.manifold);
  const std::string chart = !a.chart.empty() ? a.chart
                            : m.geodesic    ? m.geodesic->chart
                                            : m.atlas.charts.front().name();
  const std::size_t n = m.atlas.chart(chart).dim();
  IntegrateOptions opt;
  if (a.method == "euler") opt.method = Method::euler;
  else if (a.method != "rk4") throw ConfigError("unknown method '" + a.method + "'");
  const Vector x0 = parse_coords(a.x0, n, "--x0");
  const Vector v0 = parse_coords(a.v0, n, "--v0");

  Trajectory traj;
  try {
    traj = integrate(m.atlas, m.spray.bilinear, chart, x0, v0, a.t1, a.step, opt);
  } catch (const IntegrationError& e) {
    std::cerr << "sprayconn: " << e.what() << '\n';
    return kFail;
  }

  const bool energy = m.spray.kind == SprayKind::metric;
  std::ofstream file;
  if (!a.output.empty()) {
    file.open(a.output);
    if (!file) throw ConfigError("cannot write '" + a.output + "'");
  }
  std::ostream& out = a.output.empty() ? std::cout : file;
  out << std::setprecision(17) << "t,chart";
  for (std::size_t i = 0; i < n; ++i) out << ",x" << i;
  for (std::size_t i = 0; i < n; ++i) out << ",v" << i;
  if (energy) out << ",energy";
  out << '\n';
  for (const auto& s : traj.samples) {
    out << s.t << ',' << s.chart;
    for (double c : s.x) out << ',' << c;
    for (double c : s.v) out << ',' << c;
    if (energy) out << ',' << metric_energy(m.spray.metric.at(s.chart), s.x, s.v);
    out << '\n';
  }
  if (energy) {
    const auto r = energy_monitor(m.spray.metric, traj);
    std::cerr << "energy drift " << r.max_residual
              << (r.pass ? " (ok)" : " (exceeds " + std::to_string(r.tolerance) + ")") << '\n';
  }
  return kPass;
}

struct ConjugateArgs {
  std::string manifold;
  std::string chart;
  std::string mu, mu_inverse;
  std::string k1 = "default", k2 = "pushforward";
  std::optional<std::uint64_t> seed;
};

int conjugate(const ConjugateArgs& a) {
  const ManifoldDef m = load(a.manifold);
  const Chart& c = a.chart.empty()
                       ? (m.conjugacy ? m.conjugacy->from : m.atlas.charts.front())
                       : m.atlas.chart(a.chart);
  const auto names = indexed_names("x", c.dim());
  std::optional<Transition> mu;
  if (!a.mu.empty()) {
    const ExprMap f = ExprMap::parse(a.mu, names);
    if (f.arity_out() != c.dim()) throw DimensionError("--mu must have one component per coordinate");
    ExprMap inv;
    if (!a.mu_inverse.empty()) inv = ExprMap::parse(a.mu_inverse, names);
    else if (a.k1 == "pushforward" || a.k2 == "pushforward")
      throw ConfigError("the pushforward spray needs --mu-inverse");
    else inv = ExprMap::identity(c.dim());
    mu.emplace(c, c, f, inv);
  } else if (m.conjugacy) {
    mu = *m.conjugacy;
  } else {
    mu = builtin_conjugacy_map(c);
  }

  const SampleContext ctx{m.atlas.box, a.seed.value_or(m.seed)};
  auto resolve = [&](const std::string& name) {
    if (name == "pushforward") {
      const auto& src = m.spray_named(a.k1 == "pushforward" ? "default" : a.k1);
      return BilinearMap::polarization(pushforward_field(src.field.ptr(c.name()), *mu));
    }
    return m.spray_named(name).bilinear.at(c.name());
  };
  const ConnectionMap k1(resolve(a.k1));
  const ConnectionMap k2(resolve(a.k2));

  Report r;
  r.suite = "conjugate";
  r.manifold = m.name;
  r.records.push_back(check_conjugacy(k1, k2, *mu, ctx, 100, Tolerances()["conjugacy"]));
  for (auto& rec : check_T2mu_linearity(k1, k2, *mu, ctx, 100)) r.records.push_back(rec);
  std::cout << "mu = " << mu->map.text() << " on chart " << c.name() << "; K1 = " << a.k1
            << ", K2 = " << a.k2 << '\n';
  std::cout << r.to_table();
  const bool ok = r.records.front().pass;
  std::cout << (ok ? "CONJUGATE" : "NOT CONJUGATE") << " (residual "
            << r.records.front().max_residual << ")\n";
  return r.pass() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sprays, connection maps and second-order bundles in chart coordinates"};
  app.require_subcommand(1);

  VerifyArgs va;
  auto* v = app.add_subcommand("verify", "Run a verification suite and report residuals");
  v->add_option("--manifold", va.manifold, "Catalog name or manifold file")->required();
  v->add_option("--suite", va.suite, "spray|connection|second-order|geodesic|truncation|all");
  v->add_option("--seed", va.seed, "Sampling seed (default: the manifold's seed)");
  v->add_option("--level", va.level, "Truncation level to instantiate");
  v->add_option("--tol", va.tol, "Tolerance override key=value")->take_all();
  v->add_option("--report", va.report, "Write the JSON report here");

  DeriveArgs da;
  auto* d = app.add_subcommand("derive", "Print B, K and the projectors at a point");
  d->add_option("--manifold", da.manifold, "Catalog name or manifold file")->required();
  d->add_option("--chart", da.chart, "Chart name (default: first chart)");
  d->add_option("--at", da.at, "Point coordinates, e.g. 0.1,0.2")->required();
  d->add_option("--u", da.u, "Foot fiber vector u (default e0)");
  d->add_option("--v", da.v, "Base direction v (default e0)");
  d->add_option("--w", da.w, "Second fiber component w (default 0)");

  GeodesicArgs ga;
  auto* g = app.add_subcommand("geodesic", "Integrate a geodesic and write CSV");
  g->add_option("--manifold", ga.manifold, "Catalog name or manifold file")->required();
  g->add_option("--chart", ga.chart, "Starting chart (default: first chart)");
  g->add_option("--x0", ga.x0, "Initial point, e.g. 0,0")->required();
  g->add_option("--v0", ga.v0, "Initial velocity, e.g. 1,0")->required();
  g->add_option("--t1", ga.t1, "End time")->capture_default_str();
  g->add_option("--step", ga.step, "Fixed step size")->capture_default_str();
  g->add_option("--method", ga.method, "rk4|euler");
  g->add_option("--output", ga.output, "CSV path (default: stdout)");

  ConjugateArgs ca;
  auto* c = app.add_subcommand("conjugate", "Check mu-conjugacy of two connection maps");
  c->add_option("--manifold", ca.manifold, "Catalog name or manifold file")->required();
  c->add_option("--chart", ca.chart, "Chart of mu (default: the declared or first chart)");
  c->add_option("--mu", ca.mu, "Diffeomorphism expression, e.g. \"[x0, x1 + 0.1*x0^2]\"");
  c->add_option("--mu-inverse", ca.mu_inverse, "Inverse of --mu");
  c->add_option("--k1", ca.k1, "Spray name: default, flat, pushforward or a declared one");
  c->add_option("--k2", ca.k2, "Spray name for the target side");
  c->add_option("--seed", ca.seed, "Sampling seed (default: the manifold's seed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfig;
  }

  try {
    if (*v) return verify(va);
    if (*d) return derive(da);
    if (*g) return geodesic(ga);
    if (*c) return conjugate(ca);
  } catch (const ConfigError& e) {
    std::cerr << "sprayconn: configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const ParseError& e) {
    std::cerr << "sprayconn: parse error: " << e.what() << '\n';
    return kConfig;
  } catch (const DimensionError& e) {
    std::cerr << "sprayconn: dimension error: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "sprayconn: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "sprayconn: " << e.what() << '\n';
    return kFail;
  }
  return kConfig;
}
