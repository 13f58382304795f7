#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "sprayconn/errors.hpp"
#include "sprayconn/manifold.hpp"
#include "sprayconn/suite.hpp"

using namespace sprayconn;

namespace {

ManifoldDef catalog(const std::string& name) { return load_manifold(resolve_manifold(name)); }

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_timestamp(const std::string& json) {
  const auto at = json.find("\"timestamp\"");
  if (at == std::string::npos) return json;
  const auto end = json.find('\n', at);
  return json.substr(0, at) + json.substr(end);
}

}  // namespace

TEST_CASE("suite names") {
  for (const char* n : {"spray", "connection", "second-order", "geodesic", "truncation", "all"})
    CHECK(suite_name(parse_suite(n)) == n);
  CHECK_THROWS_AS(parse_suite("everything"), ConfigError);
}

TEST_CASE("tolerance overrides") {
  Tolerances t;
  CHECK(t["homogeneity"] == 1e-9);
  CHECK(t["identities"] == 1e-15);
  t.set("homogeneity=1e-12");
  CHECK(t["homogeneity"] == 1e-12);
  t.set("energy", 1e-4);
  CHECK(t["energy"] == 1e-4);
  CHECK_THROWS_AS(t.set("nonsense=1"), ConfigError);
  CHECK_THROWS_AS(t.set("energy=-1"), ConfigError);
  CHECK_THROWS_AS(t.set("energy"), ConfigError);
  CHECK_THROWS_AS(t.set("energy=abc"), ConfigError);
}

TEST_CASE("flat2 passes every suite with rounding-level residuals") {
  const Report r = run_suite(catalog("flat2"), SuiteKind::all, Tolerances(), 42);
  CHECK(r.pass());
  for (const auto& rec : r.records) {
    INFO(rec.id);
    CHECK(rec.pass);
    if (rec.id.find("control") == std::string::npos &&
        rec.id.find("witness") == std::string::npos)
      CHECK(rec.max_residual <= 1e-12);
  }
}

TEST_CASE("every catalog manifold passes the full run") {
  for (const auto& name : catalog_names()) {
    INFO(name);
    const Report r = run_suite(catalog(name), SuiteKind::all, Tolerances(), 42);
    const CheckRecord* bad = r.first_failure();
    CHECK_MESSAGE(bad == nullptr, (bad ? bad->id + ": " + bad->note : std::string{}));
  }
}

TEST_CASE("a non-symmetric B fails first on symmetry") {
  std::string text = read_text(resolve_manifold("sphere2"));
  const auto at = text.find("  metric:");
  const auto end = text.find('\n', at);
  text.replace(at, end - at, "  B: \"[u0*v1, u1*v1]\"");
  const Report r = run_suite(parse_manifold(text), SuiteKind::spray, Tolerances(), 42);
  REQUIRE(r.first_failure() != nullptr);
  CHECK(r.first_failure()->id == "bilinear.symmetry.N");
  CHECK_FALSE(r.pass());
}

TEST_CASE("tighter tolerances can fail a passing run") {
  Tolerances t;
  t.set("christoffel", 1e-14);
  const Report r = run_suite(catalog("sphere2"), SuiteKind::spray, t, 42);
  CHECK_FALSE(r.pass());
  REQUIRE(r.first_failure() != nullptr);
  CHECK(r.first_failure()->id == "spray.christoffel.N");
}

TEST_CASE("truncation needs a generic spray") {
  CHECK_THROWS_AS(truncation_stability(catalog("sphere2"), {1, 1}, Tolerances(), 42),
                  ConfigError);
  const Report r = truncation_stability(catalog("loop8"), {1, 2}, Tolerances(), 42);
  CHECK(r.pass());
  bool has_geodesic = false;
  for (const auto& rec : r.records) has_geodesic |= rec.id.find("geodesic") != std::string::npos;
  CHECK(has_geodesic);
}

TEST_CASE("reports are deterministic up to the timestamp") {
  const ManifoldDef m = catalog("sphere2");
  Report a = run_suite(m, SuiteKind::all, Tolerances(), 42);
  Report b = run_suite(m, SuiteKind::all, Tolerances(), 42);
  CHECK(strip_timestamp(a.to_json()) == strip_timestamp(b.to_json()));
  a.timestamp = b.timestamp = "";
  CHECK(a.to_json() == b.to_json());
  const Report c = run_suite(m, SuiteKind::spray, Tolerances(), 7);
  CHECK(c.seed == 7);
}
