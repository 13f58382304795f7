#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sprayconn/atlas.hpp"
#include "sprayconn/connection.hpp"
#include "sprayconn/geodesic.hpp"
#include "sprayconn/spray.hpp"

namespace sprayconn {

enum class SprayKind { s2, bilinear, metric };

/// A spray declaration instantiated on every chart.
struct SprayDef {
  SprayKind kind = SprayKind::s2;
  SprayField field;
  BilinearCoeffs bilinear;
  /// Filled only for metric sprays.
  MetricTable metric;
  /// Every chart entry uses an `each` pattern.
  bool generic = false;
};

struct GeodesicSpec {
  std::string chart;
  Vector x0;
  Vector v0;
  double t1 = 1.0;
  double step = 1e-3;
  /// Closed-form x(t) in `chart`, input t.
  std::optional<ExprMap> reference;
};

struct ManifoldSource;

/// A manifold file instantiated at one truncation level.
struct ManifoldDef {
  std::string name;
  std::string path;
  ModelSpace space{1};
  Atlas atlas;
  std::uint64_t seed = 42;
  SprayDef spray;
  std::map<std::string, SprayDef> extra_sprays;
  std::map<std::string, VectorField> vector_fields;
  std::map<std::string, ScalarField> scalar_fields;
  std::optional<GeodesicSpec> geodesic;
  /// Declared self-map of one chart used for conjugacy checks.
  std::optional<Transition> conjugacy;

  std::shared_ptr<const ManifoldSource> source;

  SampleContext context() const { return {atlas.box, seed}; }
  std::size_t dim() const { return space.dim(); }
  /// Named spray: "default", "flat", or an entry of `sprays`.
  const SprayDef& spray_named(const std::string& name) const;
};

/// Parses manifold text; `origin` names the source in diagnostics. Throws
/// ParseError (line/column), UnresolvedReference, DimensionError or
/// ConfigError.
ManifoldDef parse_manifold(const std::string& text, const std::string& origin = "<text>");
ManifoldDef load_manifold(const std::string& path);
/// The same definition instantiated at another truncation level.
ManifoldDef at_level(const ManifoldDef& m, std::size_t level);

/// Catalog directory: $SPRAYCONN_CATALOG when set, else the built-in one.
std::string catalog_dir();
/// A path to an existing file is returned unchanged; otherwise the name is
/// looked up as <catalog>/<name>.yaml. Throws ConfigError when neither exists.
std::string resolve_manifold(const std::string& name_or_path);
std::vector<std::string> catalog_names();

/// Zero spray on every chart of m.
SprayDef flat_spray(const ManifoldDef& m);

}  // namespace sprayconn
