#include <doctest.h>

#include <algorithm>
#include <string>

#include "sprayconn/errors.hpp"
#include "sprayconn/manifold.hpp"

using namespace sprayconn;

TEST_CASE("catalog entries load") {
  const auto names = catalog_names();
  for (const char* n : {"flat2", "sphere2", "hyperbolic2", "poly1", "loop8"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  for (const auto& n : names) {
    INFO(n);
    const ManifoldDef m = load_manifold(resolve_manifold(n));
    CHECK(m.name == n);
    CHECK(!m.atlas.charts.empty());
    CHECK(m.spray.field.has(m.atlas.charts.front().name()));
  }
}

TEST_CASE("sphere2 declaration") {
  const ManifoldDef m = load_manifold(resolve_manifold("sphere2"));
  CHECK(m.dim() == 2);
  CHECK(m.atlas.charts.size() == 2);
  CHECK(m.atlas.transitions.size() == 2);
  CHECK(m.spray.kind == SprayKind::metric);
  CHECK(m.spray.metric.count("N") == 1);
  CHECK(m.vector_fields.count("X") == 1);
  CHECK(m.scalar_fields.count("f") == 1);
  REQUIRE(m.geodesic.has_value());
  CHECK(m.geodesic->reference.has_value());
  CHECK(m.conjugacy.has_value());
  CHECK(m.seed == 42);
  CHECK(m.atlas.box.lo == -2.0);
  CHECK(m.extra_sprays.count("flat") == 1);
  CHECK(&m.spray_named("default") == &m.spray);
  CHECK_THROWS_AS(m.spray_named("nope"), UnresolvedReference);
}

TEST_CASE("each patterns expand per coordinate and per level") {
  const ManifoldDef m = load_manifold(resolve_manifold("loop8"));
  CHECK(m.dim() == 8);
  CHECK(m.spray.generic);
  const Vector x(8, 0.5), v(8, 1.0);
  const Vector s = m.spray.field.at("L").eval(x, v);
  CHECK(s[0] == doctest::Approx(-0.5));
  CHECK(s[3] == doctest::Approx(-0.5 / 10));
  const ManifoldDef low = at_level(m, 1);
  CHECK(low.dim() == 4);
  CHECK(low.space.active_level() == 1);
  CHECK(low.spray.field.at("L").eval(Vector(4, 0.5), Vector(4, 1.0))[3] ==
        doctest::Approx(-0.05));
  CHECK_THROWS_AS(at_level(m, 3), ConfigError);
}

TEST_CASE("each with two indices fills a matrix") {
  const ManifoldDef m = parse_manifold(
      "space: {dim: 3}\n"
      "spray:\n"
      "  metric: {each: \"{n} + x{i}*x{j}\"}\n");
  const ExprMap& g = m.spray.metric.at("U");
  CHECK(g.arity_out() == 9);
  const Vector y = g(Vector{1, 2, 3});
  CHECK(y[1] == 5.0);
  CHECK(y[5] == 9.0);
  CHECK(y[8] == 12.0);
}

TEST_CASE("bilinear and S2 declarations") {
  const ManifoldDef a = parse_manifold("space: {dim: 1}\nspray:\n  B: \"u0*v0\"\n");
  CHECK(a.spray.kind == SprayKind::bilinear);
  CHECK(a.spray.field.at("U").eval(Vector{0}, Vector{3})[0] == 9.0);
  const ManifoldDef b = parse_manifold(
      "space: {dim: 2}\ncharts:\n  - {name: A}\n  - {name: C, domain: \"x0\"}\n"
      "spray:\n  S2: {A: \"[v0^2, 0]\", C: \"[0, v1^2]\"}\n");
  CHECK(b.spray.field.at("A").eval(Vector{0, 0}, Vector{2, 3}) == Vector{4, 0});
  CHECK(b.spray.field.at("C").eval(Vector{1, 0}, Vector{2, 3}) == Vector{0, 9});
  CHECK(b.atlas.chart("C").contains(Vector{1, 0}));
  CHECK_FALSE(b.atlas.chart("C").contains(Vector{-1, 0}));
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(parse_manifold("space: {dim: 1}\nspray:\n  S2: \"v0^2\"\n  metric: \"1\"\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_manifold("space: {dim: 1}\nspray: {}\n"), ConfigError);
  CHECK_THROWS_AS(parse_manifold("space: {dim: 1}\ncolour: red\nspray: {S2: \"0\"}\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_manifold("space: {dim: 2}\nspray: {S2: \"v0^2\"}\n"), DimensionError);
  CHECK_THROWS_AS(parse_manifold("space: {dim: 1}\nspray: {S2: {Z: \"v0^2\"}}\n"),
                  UnresolvedReference);
  CHECK_THROWS_AS(
      parse_manifold("space: {dim: 1}\ncharts: [{name: A}]\n"
                     "transitions: [{from: A, to: B, map: \"x0\", inverse: \"x0\"}]\n"
                     "spray: {S2: \"0\"}\n"),
      UnresolvedReference);
  CHECK_THROWS_AS(resolve_manifold("definitely_not_here"), ConfigError);
  CHECK_THROWS_AS(load_manifold(resolve_manifold("flat2")).spray_named("missing"), ConfigError);
}

TEST_CASE("parse errors report the file position") {
  try {
    parse_manifold("space: {dim: 1}\nspray:\n  S2: \"v0^^2\"\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() > 0);
  }
  try {
    parse_manifold("space: {dim: 1\nspray: [\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() > 0);
  }
}

TEST_CASE("flat spray matches the atlas") {
  const ManifoldDef m = load_manifold(resolve_manifold("sphere2"));
  const SprayDef flat = flat_spray(m);
  for (const auto& c : m.atlas.charts)
    CHECK(norm_inf(flat.field.at(c.name()).eval(Vector{0.3, 0.1}, Vector{1, 2})) == 0.0);
}
