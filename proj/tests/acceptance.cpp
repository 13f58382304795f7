// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "sprayconn/connection.hpp"
#include "sprayconn/errors.hpp"
#include "sprayconn/geodesic.hpp"
#include "sprayconn/manifold.hpp"
#include "sprayconn/second_order.hpp"
#include "sprayconn/spray.hpp"
#include "sprayconn/suite.hpp"

using namespace sprayconn;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kCatalog = {"flat2", "sphere2", "hyperbolic2", "poly1", "loop8"};

ManifoldDef catalog(const std::string& name) { return load_manifold(resolve_manifold(name)); }

/// Accumulates the outcome of one criterion.
class Verdict {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (failures_.size() < 4) failures_.push_back(what);
    }
  }
  void record(const CheckRecord& r) {
    require(r.pass, r.id + " residual " + fmt(r.max_residual) + " tol " + fmt(r.tolerance));
  }
  void within(const std::string& what, double residual, double tol) {
    require(residual <= tol, what + " residual " + fmt(residual) + " > " + fmt(tol));
  }
  void at_least(const std::string& what, double residual, double bound) {
    require(residual >= bound, what + " residual " + fmt(residual) + " < " + fmt(bound));
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool pass() const { return pass_; }
  std::string summary() const {
    std::string s;
    for (const auto& f : (pass_ ? notes_ : failures_)) s += (s.empty() ? "" : "; ") + f;
    return s;
  }
  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }

 private:
  bool pass_ = true;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Polynomial test fields on R^n: X, Y and a scalar f.
struct TestFields {
  ExprMap x, y, f;
};

TestFields polynomial_fields(std::size_t n) {
  std::string xs, ys;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string a = "x" + std::to_string(i), b = "x" + std::to_string((i + 1) % n);
    xs += (i ? ", " : "") + ("1 + 0.5*" + a + "^2 - " + b);
    ys += (i ? ", " : "") + (a + " - 0.25*" + a + "^3 + 0.3*" + b + "^2");
  }
  const auto names = indexed_names("x", n);
  const std::string last = "x" + std::to_string(n - 1);
  return {ExprMap::parse("[" + xs + "]", names), ExprMap::parse("[" + ys + "]", names),
          ExprMap::parse("1 + x0^2 - 0.5*x0*" + last, names)};
}

QuadraticFieldPtr degree_one_control(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? ", v" : "v") + std::to_string(i);
  return make_expr_spray(ExprMap::parse("[" + s + "]", indexed_names({"x", "v"}, n)));
}

// 1. Homogeneity on every catalog spray, degree-one control, runtime.
void spray_axioms(Verdict& v) {
  double worst = 0, control = 1e300, slowest = 0;
  for (const auto& name : kCatalog) {
    const auto t0 = std::chrono::steady_clock::now();
    const ManifoldDef m = catalog(name);
    for (const auto& c : m.atlas.charts) {
      const auto r = check_homogeneity(m.spray.field.at(c.name()), c, kDefaultHomogeneityScalars,
                                       m.context(), 200, 1e-9);
      v.record(r);
      worst = std::max(worst, r.max_residual);
      const auto ctl = check_homogeneity(*degree_one_control(m.dim()), c,
                                         kDefaultHomogeneityScalars, m.context(), 200, 1e-9);
      v.require(!ctl.pass, name + " degree-one control passed");
      v.at_least(name + " degree-one control", ctl.max_residual, 0.1);
      control = std::min(control, ctl.max_residual);
    }
    v.require(run_suite(m, SuiteKind::spray, Tolerances(), m.seed).pass(), name + " spray suite");
    const double dt = seconds_since(t0);
    v.within(name + " runtime", dt, 5.0);
    slowest = std::max(slowest, dt);
  }
  v.note("homogeneity " + Verdict::fmt(worst) + ", control >= " + Verdict::fmt(control) +
         ", slowest " + Verdict::fmt(slowest) + " s");
}

// 2. Polarization against jets and against finite-difference Christoffel symbols.
void bilinear_extraction(Verdict& v) {
  double jets = 0, fd = 0;
  const std::vector<std::pair<std::string, oracle::MetricFn>> metrics = {
      {"sphere2", oracle::sphere_metric}, {"hyperbolic2", oracle::disk_metric}};
  for (const auto& [name, g] : metrics) {
    const ManifoldDef m = catalog(name);
    Sampler rng(m.seed);
    for (const auto& c : m.atlas.charts) {
      const auto r = check_extraction_consistency(m.spray.field.ptr(c.name()), c, m.context(),
                                                  100, 1e-8);
      v.record(r);
      jets = std::max(jets, r.max_residual);
      const BilinearMap b = extract_bilinear(m.spray.field, c, m.context());
      for (const Vector& x : sample_chart(c, m.atlas.box, 100, rng)) {
        const Vector a = rng.direction(2), bb = rng.direction(2);
        const auto want = oracle::minus_gamma(oracle::christoffel(g, x.coords()), a.coords(),
                                              bb.coords());
        const double r2 = oracle::dist(b(x, a, bb).coords(), want);
        v.within(name + " B vs -Gamma", r2, 1e-5);
        fd = std::max(fd, r2);
      }
    }
  }
  v.note("jet gap " + Verdict::fmt(jets) + ", Christoffel gap " + Verdict::fmt(fd));
}

// 3. Covariant-derivative axioms with polynomial fields.
void cd_axioms(Verdict& v) {
  double worst = 0, torsion = 0;
  for (const auto& name : kCatalog) {
    const ManifoldDef m = catalog(name);
    const TestFields tf = polynomial_fields(m.dim());
    for (const auto& c : m.atlas.charts) {
      for (const auto& r : check_cd_axioms(m.spray.bilinear.at(c.name()), c, tf.x, tf.y, tf.f,
                                           m.context(), 50, 1e-8, 1e-12)) {
        v.record(r);
        double& slot = r.id.rfind("cd.torsion", 0) == 0 ? torsion : worst;
        slot = std::max(slot, r.max_residual);
      }
    }
  }
  v.note("axioms " + Verdict::fmt(worst) + ", torsion " + Verdict::fmt(torsion));
}

// 4. nabla_Y X against K(TX(Y)).
void nabla_equals_k_of_t(Verdict& v) {
  double worst = 0;
  for (const auto& name : kCatalog) {
    const ManifoldDef m = catalog(name);
    const TestFields tf = polynomial_fields(m.dim());
    for (const auto& c : m.atlas.charts) {
      const auto r = check_nabla_equals_K_of_T(ConnectionMap(m.spray.bilinear.at(c.name())),
                                               tf.x, tf.y, c, m.context(), 100, 1e-9);
      v.record(r);
      worst = std::max(worst, r.max_residual);
    }
  }
  v.note("max gap " + Verdict::fmt(worst));
}

// 5. Coordinate identities on 500 random double tangent vectors.
void exact_identities(Verdict& v) {
  double worst = 0;
  std::size_t count = 0;
  for (const auto& name : kCatalog) {
    const ManifoldDef m = catalog(name);
    for (const auto& c : m.atlas.charts)
      for (const auto& r :
           check_exact_identities(m.spray.bilinear.at(c.name()), c, m.context(), 500, 1e-15)) {
        v.record(r);
        v.require(r.samples == 500, r.id + " sample count");
        worst = std::max(worst, r.max_residual);
        ++count;
      }
  }
  v.note(std::to_string(count) + " identities, max " + Verdict::fmt(worst));
}

/// Closed-form derivatives of x -> x / |x|^2 in the plane.
struct Inversion {
  static oracle::Vec d1(const oracle::Vec& x, const oracle::Vec& u) {
    const double r2 = x[0] * x[0] + x[1] * x[1], xu = x[0] * u[0] + x[1] * u[1];
    return {u[0] / r2 - 2 * xu * x[0] / (r2 * r2), u[1] / r2 - 2 * xu * x[1] / (r2 * r2)};
  }
  static oracle::Vec d2(const oracle::Vec& x, const oracle::Vec& u, const oracle::Vec& w) {
    const double r2 = x[0] * x[0] + x[1] * x[1], r4 = r2 * r2, r6 = r4 * r2;
    const double xu = x[0] * u[0] + x[1] * u[1], xw = x[0] * w[0] + x[1] * w[1];
    const double uw = u[0] * w[0] + u[1] * w[1];
    oracle::Vec out(2);
    for (int i = 0; i < 2; ++i)
      out[i] = -2 * (xw * u[i] + xu * w[i] + uw * x[i]) / r4 + 8 * xu * xw * x[i] / r6;
    return out;
  }
};

// 6. Transformation law across the sphere overlap and pushforward round trip.
void transformation_law(Verdict& v) {
  const ManifoldDef m = catalog("sphere2");
  const Transition& ns = *m.atlas.find_transition("N", "S");
  const auto law = check_transformation_law(m.spray.field, ns, m.context(), 100, 1e-8);
  v.record(law);
  const auto rt = check_pushforward_roundtrip(m.spray.field, ns, m.context(), 100, 1e-8);
  v.record(rt);
  Sampler rng(m.seed);
  double closed = 0;
  for (const Vector& x : sample_overlap(ns, m.atlas.box, 100, rng)) {
    const oracle::Vec u = rng.direction(2).coords(), w = rng.direction(2).coords();
    const oracle::Vec y = ns.map(x).coords();
    const oracle::Vec lhs =
        oracle::sphere_b(y, Inversion::d1(x.coords(), u), Inversion::d1(x.coords(), w));
    const oracle::Vec bx = oracle::sphere_b(x.coords(), u, w);
    const oracle::Vec d2 = Inversion::d2(x.coords(), u, w), db = Inversion::d1(x.coords(), bx);
    const oracle::Vec rhs{d2[0] + db[0], d2[1] + db[1]};
    closed = std::max(closed, scaled_residual(Vector(lhs), Vector(rhs)));
  }
  v.within("closed-form transformation law", closed, 1e-8);
  v.note("law " + Verdict::fmt(law.max_residual) + ", round trip " +
         Verdict::fmt(rt.max_residual) + ", closed form " + Verdict::fmt(closed));
}

// 7. Conjugate pairs, T^2 mu linearity, witness for x -> x^2 between flat connections.
void conjugacy(Verdict& v) {
  double conj = 0, lin = 0;
  for (const auto& name : kCatalog) {
    const ManifoldDef m = catalog(name);
    const Chart& first = m.atlas.charts.front();
    const Transition mu = m.conjugacy ? *m.conjugacy : builtin_conjugacy_map(first);
    const auto s = m.spray.field.ptr(mu.from.name());
    const ConnectionMap k1(m.spray.bilinear.at(mu.from.name()));
    const ConnectionMap k2(BilinearMap::polarization(pushforward_field(s, mu)));
    const auto c = check_conjugacy(k1, k2, mu, m.context(), 100, 1e-9);
    v.record(c);
    conj = std::max(conj, c.max_residual);
    for (const auto& r : check_T2mu_linearity(k1, k2, mu, m.context(), 100, 1e-8)) {
      v.record(r);
      lin = std::max(lin, r.max_residual);
    }
    for (const auto& r : check_conjugacy_equivalence(s, mu, mu, m.context(), 100, 1e-8)) {
      if (r.id == "conjugacy.constructed") v.within(name + " constructed pair", r.max_residual, 1e-9);
      else v.record(r);
    }
  }
  const Chart line = Chart::whole("R", 1);
  const ConnectionMap flat(BilinearMap::zero(1));
  const auto w = check_nonlinearity_witness(flat, flat, square_map(line), {{-2, 2}, 42}, 100, 1e-3);
  v.record(w);
  v.note("conjugacy " + Verdict::fmt(conj) + ", linearity " + Verdict::fmt(lin) + ", witness " +
         Verdict::fmt(w.max_residual));
}

// 8. Spray -> splitting -> connection map -> B, exact and through a black box.
void splitting_roundtrip(Verdict& v) {
  double box = 0;
  std::size_t exact_points = 0;
  for (const auto& name : kCatalog) {
    const ManifoldDef m = catalog(name);
    for (const auto& c : m.atlas.charts) {
      const BilinearMap b = extract_bilinear(m.spray.field, c, m.context());
      const auto split = ConnectionSplitting::from_bilinear(b);
      const BilinearMap back = connection_from_splitting(split, c, m.context()).bilinear();
      const auto opaque = ConnectionSplitting::black_box(
          c.dim(), [split](const DoubleTangentVector& xi) { return split(xi); });
      const BilinearMap intake = connection_from_splitting(opaque, c, m.context()).bilinear();
      Sampler rng(m.seed);
      for (const Vector& x : sample_chart(c, m.atlas.box, 100, rng)) {
        const Vector a = rng.direction(c.dim()), d = rng.direction(c.dim());
        const Vector want = b(x, a, d);
        v.require(back(x, a, d) == want, name + " exact recovery");
        ++exact_points;
        const double r = scaled_residual(intake(x, a, d), want);
        v.within(name + " black-box intake", r, 1e-12);
        box = std::max(box, r);
      }
    }
  }
  v.note(std::to_string(exact_points) + " exact points, black box " + Verdict::fmt(box));
}

// 9. Induce then reduce, and the induced splitting identity.
void induce_reduce(Verdict& v) {
  double worst = 0;
  for (const auto& name : kCatalog) {
    const ManifoldDef m = catalog(name);
    for (const auto& c : m.atlas.charts) {
      const auto split = ConnectionSplitting::from_bilinear(m.spray.bilinear.at(c.name()));
      const auto rt = check_induce_reduce_roundtrip(split, c, m.context(), 100, 1e-12);
      v.record(rt);
      worst = std::max(worst, rt.max_residual);
      const auto id = check_second_order_splitting(induce_second_order_connection(split), c,
                                                   m.context(), 200, 1e-12);
      v.record(id);
      v.require(id.samples == 200, id.id + " sample count");
    }
  }
  v.note("round trip " + Verdict::fmt(worst));
}

// 10. Geodesics.
void geodesics(Verdict& v) {
  {
    const ManifoldDef m = catalog("flat2");
    const Vector x0{0.25, -0.5}, v0{1, 0.5};
    const auto tr = integrate(m.atlas, m.spray.bilinear, "U", x0, v0, 1.0, 1e-3);
    v.within("flat endpoint", norm_inf(tr.back().x - (x0 + v0)), 1e-12);
  }
  const ManifoldDef m = catalog("sphere2");
  const Vector x0{0.2, 0.1}, v0{0.5, 0.8};
  const auto t0 = std::chrono::steady_clock::now();
  const auto tr = integrate(m.atlas, m.spray.bilinear, "N", x0, v0, 1.0, 1e-3);
  const double dt = seconds_since(t0);
  const GeodesicState end = express_in(m.atlas, tr.back(), "N");
  const double gc = oracle::dist(oracle::embed(end.x.coords()),
                                 oracle::great_circle(x0.coords(), v0.coords(), 1.0));
  v.within("great circle", gc, 1e-6);
  v.within("sphere runtime", dt, 2.0);

  std::vector<double> drift;
  for (double h : {1e-2, 5e-3, 2.5e-3}) {
    const auto t = integrate(m.atlas, m.spray.bilinear, "N", {0.5, 0.3}, {1, 0}, 1.0, h);
    const auto e = energy_monitor(m.spray.metric, t, 1e-8);
    v.record(e);
    drift.push_back(e.max_residual);
  }
  for (std::size_t i = 1; i < drift.size(); ++i) {
    const double ratio = drift[i - 1] / drift[i];
    v.require(std::fabs(ratio - 16.0) <= 0.2 * 16.0,
              "energy ratio " + Verdict::fmt(ratio) + " not within 20% of 16");
  }
  double reparam = 0;
  for (double s : {0.0, 2.0, -1.0, 0.5}) {
    const auto r = check_homogeneity_reparam(m.atlas, m.spray.bilinear, "N", x0, v0, s, 1.0, 1e-3,
                                             1e-7);
    v.record(r);
    reparam = std::max(reparam, r.max_residual);
  }
  const auto rev = check_time_reversal(m.atlas, m.spray.bilinear, "N", x0, v0, 1.0, 1e-3, 1e-6);
  v.record(rev);
  v.note("great circle " + Verdict::fmt(gc) + " in " + Verdict::fmt(dt) + " s, drift " +
         Verdict::fmt(drift[0]) + "/" + Verdict::fmt(drift[1]) + "/" + Verdict::fmt(drift[2]) +
         ", reparam " + Verdict::fmt(reparam) + ", reversal " + Verdict::fmt(rev.max_residual));
}

// 11. Levels 1 (4 modes) and 2 (8 modes) of the loop space agree on shared coordinates.
void truncation(Verdict& v) {
  const ManifoldDef m = catalog("loop8");
  Tolerances tol;
  const Report r = truncation_stability(m, {1, 2}, tol, m.seed);
  for (const auto& rec : r.records) v.record(rec);
  const ManifoldDef lo = at_level(m, 1), hi = at_level(m, 2);
  v.require(lo.dim() == 4 && hi.dim() == 8, "level dimensions");
  Vector x0(8), v0(8);
  for (std::size_t i = 0; i < 8; ++i) {
    x0[i] = 0.3 / (1.0 + i);
    v0[i] = 0.8 / (1.0 + i * i);
  }
  const auto a = integrate(lo.atlas, lo.spray.bilinear, "L", head(x0, 4), head(v0, 4), 1.0, 1e-2);
  const auto b = integrate(hi.atlas, hi.spray.bilinear, "L", x0, v0, 1.0, 1e-2);
  const double geo = scaled_residual(a.back().x, head(b.back().x, 4));
  v.within("shared geodesic coordinates", geo, 1e-8);
  v.note(std::to_string(r.records.size()) + " records, geodesic gap " + Verdict::fmt(geo));
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_timestamp(const std::string& json) {
  std::stringstream in(json);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find("\"timestamp\"") == std::string::npos) out += line + "\n";
  return out;
}

// 12. Two CLI runs produce the same report.
void determinism(Verdict& v) {
  const fs::path dir = fs::temp_directory_path() / ("sprayconn_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::vector<std::string> reports;
  for (int run = 0; run < 2; ++run) {
    const fs::path out = dir / ("report" + std::to_string(run) + ".json");
    const std::string cmd = std::string("\"") + SPRAYCONN_CLI +
                            "\" verify --manifold sphere2 --suite all --seed 42 --report \"" +
                            out.string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    v.require(rc == 0, "verify exited with " + std::to_string(rc));
    reports.push_back(read_text(out));
  }
  fs::remove_all(dir);
  v.require(!reports[0].empty(), "empty report");
  v.require(reports[0] != reports[1] || reports[0].find("\"timestamp\"") != std::string::npos,
            "report has no timestamp");
  v.require(strip_timestamp(reports[0]) == strip_timestamp(reports[1]), "reports differ");
  v.note(std::to_string(reports[0].size()) + " bytes, identical modulo timestamp");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
      {"spray axioms", spray_axioms},
      {"bilinear extraction", bilinear_extraction},
      {"covariant derivative axioms", cd_axioms},
      {"nabla equals K of T", nabla_equals_k_of_t},
      {"exact coordinate identities", exact_identities},
      {"chart transformation law", transformation_law},
      {"conjugacy", conjugacy},
      {"splitting round trips", splitting_roundtrip},
      {"induce and reduce", induce_reduce},
      {"geodesics", geodesics},
      {"truncation stability", truncation},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("error: ") + e.what());
    }
    if (!v.pass()) ++failed;
    std::printf("%s %2zu %-28s %s\n", v.pass() ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), v.summary().c_str());
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
