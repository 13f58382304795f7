#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sprayconn/errors.hpp"
#include "sprayconn/geodesic.hpp"

using namespace sprayconn;
using fixture::xmap;

namespace {

/// Sphere endpoint error against the great circle, compared on the embedded sphere.
double great_circle_error(const fixture::Sphere& s, const Vector& x0, const Vector& v0, double t1,
                          double h, Method m = Method::rk4) {
  const Trajectory tr = integrate(s.atlas(), s.coeffs(), "N", x0, v0, t1, h, {m});
  const GeodesicState end = express_in(s.atlas(), tr.back(), "N");
  return oracle::dist(oracle::embed(end.x.coords()),
                      oracle::great_circle(x0.coords(), v0.coords(), t1));
}

}  // namespace

TEST_CASE("flat geodesics are straight lines") {
  const Atlas atlas{{Chart::whole("U", 2)}, {}, {-1, 1}};
  const BilinearCoeffs flat{{"U", BilinearMap::zero(2)}};
  const Vector x0{0.3, -1.2}, v0{2.5, 0.7};
  for (Method m : {Method::rk4, Method::euler}) {
    const Trajectory tr = integrate(atlas, flat, "U", x0, v0, 1.0, 1e-3, {m});
    CHECK(norm_inf(tr.back().x - (x0 + v0)) <= 1e-12);
    CHECK(tr.back().v == v0);
    CHECK(tr.back().t == doctest::Approx(1.0));
  }
  const Trajectory single = integrate(BilinearMap::zero(2), x0, v0, 1.0, 1e-3);
  CHECK(norm_inf(single.back().x - (x0 + v0)) <= 1e-12);
}

TEST_CASE("zero initial velocity gives a constant curve") {
  const fixture::Sphere s;
  const Vector x0{0.4, 0.1};
  const Trajectory tr = integrate(s.atlas(), s.coeffs(), "N", x0, Vector(2), 1.0, 1e-2);
  for (const auto& st : tr.samples) {
    CHECK(st.x == x0);
    CHECK(norm_inf(st.v) == 0.0);
  }
}

TEST_CASE("sphere geodesics follow great circles") {
  const fixture::Sphere s;
  CHECK(great_circle_error(s, {0.2, 0.1}, {0.5, 0.8}, 1.0, 1e-3) <= 1e-6);
  CHECK(great_circle_error(s, {0, 0}, {1, 0}, 1.0, 1e-3) <= 1e-6);
  CHECK(great_circle_error(s, {0.5, 0.3}, {1, 0}, 1.0, 1e-3) <= 1e-6);
}

TEST_CASE("RK4 converges at fourth order and Euler at first order") {
  const fixture::Sphere s;
  const Vector x0{0.2, 0.1}, v0{0.5, 0.8};
  const double e1 = great_circle_error(s, x0, v0, 1.0, 4e-2);
  const double e2 = great_circle_error(s, x0, v0, 1.0, 2e-2);
  const double e3 = great_circle_error(s, x0, v0, 1.0, 1e-2);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.3));
  CHECK(e2 / e3 == doctest::Approx(16.0).epsilon(0.3));
  const double f1 = great_circle_error(s, x0, v0, 1.0, 2e-2, Method::euler);
  const double f2 = great_circle_error(s, x0, v0, 1.0, 1e-2, Method::euler);
  CHECK(f1 / f2 == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("energy is conserved to fourth order") {
  const fixture::Sphere s;
  const MetricTable mt{{"N", s.metric}, {"S", s.metric}};
  double prev = 0;
  for (double h : {1e-2, 5e-3, 2.5e-3}) {
    const auto rec = energy_monitor(mt, integrate(s.atlas(), s.coeffs(), "N", {0.5, 0.3},
                                                  {1, 0}, 1.0, h), 1e-8);
    CHECK(rec.pass);
    if (prev > 0) CHECK(prev / rec.max_residual == doctest::Approx(16.0).epsilon(0.2));
    prev = rec.max_residual;
  }
  CHECK_THROWS_AS(energy_monitor({{"N", s.metric}},
                                 integrate(s.atlas(), s.coeffs(), "N", {1.5, 0}, {1, 0}, 1.0, 1e-2)),
                  ConfigError);
}

TEST_CASE("reparametrization and time reversal") {
  const fixture::Sphere s;
  for (double sc : {0.0, 2.0, -1.0, 0.5}) {
    const auto rec = check_homogeneity_reparam(s.atlas(), s.coeffs(), "N", {0.2, 0.1},
                                               {0.5, 0.8}, sc, 1.0, 1e-3);
    INFO(rec.id << " residual " << rec.max_residual);
    CHECK(rec.pass);
  }
  CHECK(reparam_id(2.0) == "geodesic.reparam.s=2");
  CHECK(reparam_id(0.5) == "geodesic.reparam.s=0.5");
  const auto rev = check_time_reversal(s.atlas(), s.coeffs(), "N", {0.2, 0.1}, {0.5, 0.8}, 1.0, 1e-3);
  CHECK(rev.pass);
  CHECK(rev.max_residual <= 1e-6);
}

TEST_CASE("chart switches do not change the curve") {
  const fixture::Sphere s;
  const Vector x0{0.8, 0.2}, v0{1, 0.3};
  const Trajectory tr = integrate(s.atlas(), s.coeffs(), "N", x0, v0, 2.0, 1e-3);
  bool switched = false;
  for (const auto& st : tr.samples) switched |= st.chart != "N";
  CHECK(switched);
  const GeodesicState end = express_in(s.atlas(), tr.back(), "N");
  CHECK(oracle::dist(oracle::embed(end.x.coords()),
                     oracle::great_circle(x0.coords(), v0.coords(), 2.0)) <= 1e-6);
  const auto rec = check_chart_switch_invariance(s.atlas(), s.coeffs(), "N", {0.2, 0.1},
                                                 {0.5, 0.8}, 1.0, 1e-3, 1e300);
  CHECK(rec.pass);
  const auto never = check_chart_switch_invariance(s.atlas(), s.coeffs(), "N", {0.2, 0.1},
                                                   {0.5, 0.8}, 1.0, 1e-3, -1.0);
  CHECK_FALSE(never.pass);
}

TEST_CASE("express_in round trip") {
  const fixture::Sphere s;
  const GeodesicState st{"N", {0.6, -0.4}, {1, 2}, 0.3};
  const GeodesicState back = express_in(s.atlas(), express_in(s.atlas(), st, "S"), "N");
  CHECK(norm_inf(back.x - st.x) <= 1e-15);
  CHECK(norm_inf(back.v - st.v) <= 1e-14);
  CHECK(back.t == st.t);
}

TEST_CASE("reference curves") {
  const Atlas atlas{{Chart::whole("U", 1)}, {}, {-1, 1}};
  const BilinearCoeffs poly{{"U", BilinearMap::from_expr(ExprMap::parse(
                                        "u0*v0", indexed_names({"x", "u", "v"}, 1)))}};
  const Trajectory tr = integrate(atlas, poly, "U", {0}, {1}, 0.5, 1e-3);
  CHECK(std::fabs(tr.back().x[0] + std::log(0.5)) <= 1e-10);
  const ExprMap ref = ExprMap::parse("-log(1 - t)", {"t"});
  CHECK(check_reference_curve(atlas, tr, ref).pass);
  CHECK_FALSE(check_reference_curve(atlas, tr, ExprMap::parse("t", {"t"})).pass);
}

TEST_CASE("leaving every chart raises an integration error") {
  const Chart disk("D", ModelSpace(2), xmap("1 - x0^2 - x1^2", 2));
  const Atlas atlas{{disk}, {}, {-1, 1}};
  const BilinearCoeffs flat{{"D", BilinearMap::zero(2)}};
  try {
    integrate(atlas, flat, "D", {0, 0}, {1, 0}, 2.0, 1e-2);
    FAIL("expected an integration error");
  } catch (const IntegrationError& e) {
    CHECK(e.chart() == "D");
    CHECK(e.t() > 0.8);
    CHECK(e.t() < 1.0);
    CHECK(e.x().size() == 2);
  }
  CHECK_THROWS_AS(integrate(atlas, flat, "D", {2, 0}, {1, 0}, 1.0, 1e-2), DomainError);
}
