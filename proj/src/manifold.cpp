#include "sprayconn/manifold.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sprayconn/errors.hpp"

#ifndef SPRAYCONN_CATALOG_DIR
#define SPRAYCONN_CATALOG_DIR "catalog"
#endif

namespace sprayconn {

struct ManifoldSource {
  YAML::Node root;
  std::string origin;
};

namespace {

namespace fs = std::filesystem;

class Loader {
 public:
  Loader(const ManifoldSource& src, std::optional<std::size_t> level)
      : src_(src), level_(level) {}

  ManifoldDef run();

 private:
  std::string where(const YAML::Node& n) const {
    const auto m = n.Mark();
    if (m.is_null()) return src_.origin + ": ";
    return src_.origin + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1) +
           ": ";
  }
  [[noreturn]] void config(const YAML::Node& n, const std::string& msg) const {
    throw ConfigError(where(n) + msg);
  }
  [[noreturn]] void unresolved(const YAML::Node& n, const std::string& msg) const {
    throw UnresolvedReference(where(n) + msg);
  }
  [[noreturn]] void dimension(const YAML::Node& n, const std::string& msg) const {
    throw DimensionError(where(n) + msg);
  }

  template <typename T>
  T as(const YAML::Node& n, const std::string& what) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      config(n, "invalid value for " + what);
    }
  }

  YAML::Node required(const YAML::Node& parent, const std::string& key) const {
    YAML::Node n = parent[key];
    if (!n) config(parent, "missing key '" + key + "'");
    return n;
  }

  void allow_keys(const YAML::Node& n, std::initializer_list<const char*> keys) const {
    if (!n.IsMap()) config(n, "expected a mapping");
    for (const auto& kv : n) {
      const auto k = kv.first.as<std::string>();
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
        config(kv.first, "unknown key '" + k + "'");
    }
  }

  const Chart& chart_ref(const YAML::Node& n) const {
    const auto name = as<std::string>(n, "chart name");
    if (!atlas_.has_chart(name)) unresolved(n, "unknown chart '" + name + "'");
    return atlas_.chart(name);
  }

  static bool is_each(const YAML::Node& n) { return n.IsMap() && n["each"] && n.size() == 1; }

  /// Compiles a scalar expression or an `each` pattern over `names`,
  /// expecting `outputs` components.
  ExprMap compile(const YAML::Node& n, const std::vector<std::string>& names,
                  std::size_t outputs, const std::string& what) const;

  /// Per-chart table for a node that is either one spec for all charts or a
  /// mapping chart -> spec. Returns pairs (chart, spec node).
  std::vector<std::pair<std::string, YAML::Node>> per_chart(const YAML::Node& n,
                                                            bool require_all) const;

  SprayDef spray(const YAML::Node& n) const;
  FieldTable field(const YAML::Node& n, std::size_t outputs, const std::string& what) const;

  const ManifoldSource& src_;
  std::optional<std::size_t> level_;
  std::size_t n_ = 0;
  Atlas atlas_;
};

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

ExprMap Loader::compile(const YAML::Node& n, const std::vector<std::string>& names,
                        std::size_t outputs, const std::string& what) const {
  std::string text;
  bool each = is_each(n);
  const YAML::Node body = each ? n["each"] : n;
  if (!body.IsScalar()) config(n, what + ": expected an expression string");
  const auto raw = body.as<std::string>();
  if (each) {
    const bool pairs = raw.find("{j}") != std::string::npos;
    std::ostringstream os;
    os << '[';
    bool first = true;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < (pairs ? n_ : 1); ++j) {
        std::string e = replace_all(raw, "{i}", std::to_string(i));
        e = replace_all(e, "{j}", std::to_string(j));
        e = replace_all(e, "{n}", std::to_string(n_));
        os << (first ? "" : ", ") << '(' << e << ')';
        first = false;
      }
    }
    os << ']';
    text = os.str();
  } else {
    text = raw;
  }
  ExprMap f;
  const auto mark = body.Mark();
  try {
    f = ExprMap::parse(text, names, mark.line + 1);
  } catch (const ParseError& e) {
    const int quoted = body.Tag() == "!" ? 1 : 0;
    const int column = each ? mark.column + 1 : mark.column + quoted + e.column();
    throw ParseError(src_.origin + ": " + what + ": " + e.message(), mark.line + 1, column);
  }
  if (f.arity_out() != outputs)
    dimension(body, what + ": expected " + std::to_string(outputs) + " components, got " +
                        std::to_string(f.arity_out()));
  return f;
}

std::vector<std::pair<std::string, YAML::Node>> Loader::per_chart(const YAML::Node& n,
                                                                  bool require_all) const {
  std::vector<std::pair<std::string, YAML::Node>> out;
  if (n.IsScalar() || is_each(n)) {
    for (const auto& c : atlas_.charts) out.emplace_back(c.name(), n);
    return out;
  }
  if (!n.IsMap()) config(n, "expected an expression or a mapping chart -> expression");
  for (const auto& kv : n) out.emplace_back(chart_ref(kv.first).name(), kv.second);
  if (require_all)
    for (const auto& c : atlas_.charts)
      if (std::none_of(out.begin(), out.end(), [&](const auto& p) { return p.first == c.name(); }))
        config(n, "no entry for chart '" + c.name() + "'");
  return out;
}

SprayDef Loader::spray(const YAML::Node& n) const {
  allow_keys(n, {"S2", "B", "metric"});
  int declared = 0;
  for (const char* k : {"S2", "B", "metric"}) declared += n[k] ? 1 : 0;
  if (declared != 1)
    config(n, "exactly one of S2, B or metric must be declared (found " +
                  std::to_string(declared) + ")");

  SprayDef def;
  def.generic = true;
  const auto xv = indexed_names({"x", "v"}, n_);
  const auto xuv = indexed_names({"x", "u", "v"}, n_);
  const auto x = indexed_names("x", n_);
  if (n["S2"]) {
    def.kind = SprayKind::s2;
    for (const auto& [chart, spec] : per_chart(n["S2"], true)) {
      def.generic = def.generic && is_each(spec);
      auto s = make_expr_spray(compile(spec, xv, n_, "S2 on chart " + chart));
      def.bilinear[chart] = BilinearMap::polarization(s);
      def.field.set(chart, std::move(s));
    }
  } else if (n["B"]) {
    def.kind = SprayKind::bilinear;
    for (const auto& [chart, spec] : per_chart(n["B"], true)) {
      def.generic = def.generic && is_each(spec);
      auto b = BilinearMap::from_expr(compile(spec, xuv, n_, "B on chart " + chart));
      def.field.set(chart, make_bilinear_spray(b));
      def.bilinear[chart] = std::move(b);
    }
  } else {
    def.kind = SprayKind::metric;
    for (const auto& [chart, spec] : per_chart(n["metric"], true)) {
      def.generic = def.generic && is_each(spec);
      auto g = compile(spec, x, n_ * n_, "metric on chart " + chart);
      def.field.set(chart, make_metric_spray(g));
      def.bilinear[chart] = BilinearMap::from_metric(g);
      def.metric[chart] = std::move(g);
    }
  }
  return def;
}

FieldTable Loader::field(const YAML::Node& n, std::size_t outputs,
                         const std::string& what) const {
  FieldTable t;
  const auto x = indexed_names("x", n_);
  for (const auto& [chart, spec] : per_chart(n, false))
    t.set(chart, compile(spec, x, outputs, what + " on chart " + chart));
  return t;
}

Vector to_vector(const std::vector<double>& v) { return Vector(v); }

ManifoldDef Loader::run() {
  const YAML::Node& root = src_.root;
  if (!root.IsMap()) config(root, "manifold file must be a mapping");
  allow_keys(root, {"name", "space", "sampling", "charts", "transitions", "spray", "fields",
                    "geodesic", "conjugacy", "sprays"});

  ManifoldDef m;
  m.name = root["name"] ? as<std::string>(root["name"], "name")
                        : fs::path(src_.origin).stem().string();
  m.path = src_.origin;

  // Model space.
  const YAML::Node space = required(root, "space");
  allow_keys(space, {"dim", "grades", "seminorm", "level", "weights"});
  std::vector<std::size_t> grades;
  if (space["grades"] && space["dim"]) config(space, "declare either dim or grades, not both");
  if (space["grades"]) {
    grades = as<std::vector<std::size_t>>(space["grades"], "grades");
  } else {
    grades = {as<std::size_t>(required(space, "dim"), "dim")};
  }
  SeminormKind kind = SeminormKind::sup;
  if (space["seminorm"]) {
    const auto s = as<std::string>(space["seminorm"], "seminorm");
    if (s == "weighted_sup") kind = SeminormKind::weighted_sup;
    else if (s != "sup") config(space["seminorm"], "unknown seminorm '" + s + "'");
  }
  std::size_t level = space["level"] ? as<std::size_t>(space["level"], "level") : grades.size();
  if (level_) level = *level_;
  std::vector<double> weights;
  if (space["weights"]) weights = as<std::vector<double>>(space["weights"], "weights");
  try {
    m.space = ModelSpace(grades, level, kind, weights);
  } catch (const Error& e) {
    config(space, e.what());
  }
  n_ = m.space.dim();

  // Sampling.
  if (const YAML::Node s = root["sampling"]) {
    allow_keys(s, {"box", "seed"});
    if (s["box"]) {
      const auto box = as<std::vector<double>>(s["box"], "box");
      if (box.size() != 2 || !(box[0] < box[1])) config(s["box"], "box must be [lo, hi]");
      atlas_.box = {box[0], box[1]};
    }
    if (s["seed"]) m.seed = as<std::uint64_t>(s["seed"], "seed");
  }

  // Charts.
  const auto x = indexed_names("x", n_);
  if (const YAML::Node charts = root["charts"]) {
    if (!charts.IsSequence() || charts.size() == 0) config(charts, "charts must be a non-empty list");
    for (const auto& c : charts) {
      allow_keys(c, {"name", "domain"});
      const auto name = as<std::string>(required(c, "name"), "chart name");
      if (atlas_.has_chart(name)) config(c, "duplicate chart '" + name + "'");
      ExprMap domain = c["domain"] ? compile(c["domain"], x, 1, "domain of " + name)
                                   : ExprMap::constant(n_, Vector{1.0});
      atlas_.charts.emplace_back(name, m.space, std::move(domain));
    }
  } else {
    atlas_.charts.emplace_back("U", m.space, ExprMap::constant(n_, Vector{1.0}));
  }

  // Transitions.
  if (const YAML::Node ts = root["transitions"]) {
    if (!ts.IsSequence()) config(ts, "transitions must be a list");
    for (const auto& t : ts) {
      allow_keys(t, {"from", "to", "map", "inverse"});
      const Chart& from = chart_ref(required(t, "from"));
      const Chart& to = chart_ref(required(t, "to"));
      const std::string tag = from.name() + "->" + to.name();
      atlas_.transitions.emplace_back(from, to, compile(required(t, "map"), x, n_, "map " + tag),
                                      compile(required(t, "inverse"), x, n_, "inverse " + tag));
    }
  }

  m.spray = spray(required(root, "spray"));

  if (const YAML::Node extra = root["sprays"]) {
    if (!extra.IsMap()) config(extra, "sprays must be a mapping name -> spray");
    for (const auto& kv : extra) {
      const auto name = kv.first.as<std::string>();
      if (name == "default") config(kv.first, "the name 'default' is reserved");
      m.extra_sprays[name] = spray(kv.second);
    }
  }

  if (const YAML::Node fields = root["fields"]) {
    allow_keys(fields, {"vector", "scalar"});
    if (const YAML::Node v = fields["vector"])
      for (const auto& kv : v)
        m.vector_fields[kv.first.as<std::string>()] =
            field(kv.second, n_, "vector field " + kv.first.as<std::string>());
    if (const YAML::Node s = fields["scalar"])
      for (const auto& kv : s)
        m.scalar_fields[kv.first.as<std::string>()] =
            field(kv.second, 1, "scalar field " + kv.first.as<std::string>());
  }

  if (const YAML::Node g = root["geodesic"]) {
    allow_keys(g, {"chart", "x0", "v0", "t1", "step", "reference"});
    GeodesicSpec spec;
    spec.chart = g["chart"] ? chart_ref(g["chart"]).name() : atlas_.charts.front().name();
    spec.x0 = to_vector(as<std::vector<double>>(required(g, "x0"), "x0"));
    spec.v0 = to_vector(as<std::vector<double>>(required(g, "v0"), "v0"));
    if (spec.x0.size() != n_) dimension(g["x0"], "x0 must have " + std::to_string(n_) + " entries");
    if (spec.v0.size() != n_) dimension(g["v0"], "v0 must have " + std::to_string(n_) + " entries");
    if (g["t1"]) spec.t1 = as<double>(g["t1"], "t1");
    if (g["step"]) spec.step = as<double>(g["step"], "step");
    if (g["reference"]) spec.reference = compile(g["reference"], {"t"}, n_, "geodesic reference");
    m.geodesic = std::move(spec);
  }

  if (const YAML::Node c = root["conjugacy"]) {
    allow_keys(c, {"chart", "mu", "inverse"});
    const Chart& chart = c["chart"] ? chart_ref(c["chart"]) : atlas_.charts.front();
    m.conjugacy.emplace(chart, chart, compile(required(c, "mu"), x, n_, "conjugacy map"),
                        compile(required(c, "inverse"), x, n_, "conjugacy inverse"));
  }

  m.atlas = std::move(atlas_);
  if (!m.extra_sprays.count("flat")) m.extra_sprays["flat"] = flat_spray(m);
  return m;
}

ManifoldDef instantiate(std::shared_ptr<const ManifoldSource> src,
                        std::optional<std::size_t> level) {
  ManifoldDef m;
  try {
    m = Loader(*src, level).run();
  } catch (const YAML::Exception& e) {
    throw ConfigError(src->origin + ": " + e.what());
  }
  m.source = std::move(src);
  return m;
}

}  // namespace

const SprayDef& ManifoldDef::spray_named(const std::string& name) const {
  if (name == "default") return spray;
  auto it = extra_sprays.find(name);
  if (it == extra_sprays.end()) throw UnresolvedReference("unknown spray '" + name + "'");
  return it->second;
}

SprayDef flat_spray(const ManifoldDef& m) {
  SprayDef def;
  def.kind = SprayKind::bilinear;
  def.generic = true;
  for (const auto& c : m.atlas.charts) {
    def.bilinear[c.name()] = BilinearMap::zero(c.dim());
    def.field.set(c.name(), make_flat_spray(c.dim()));
  }
  return def;
}

ManifoldDef parse_manifold(const std::string& text, const std::string& origin) {
  auto src = std::make_shared<ManifoldSource>();
  src->origin = origin;
  try {
    src->root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(origin + ": " + e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  return instantiate(std::move(src), std::nullopt);
}

ManifoldDef load_manifold(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifold file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifold(ss.str(), path);
}

ManifoldDef at_level(const ManifoldDef& m, std::size_t level) {
  if (!m.source) throw ConfigError("manifold has no source to re-instantiate");
  return instantiate(m.source, level);
}

std::string catalog_dir() {
  if (const char* env = std::getenv("SPRAYCONN_CATALOG"); env && *env) return env;
  return SPRAYCONN_CATALOG_DIR;
}

std::string resolve_manifold(const std::string& name_or_path) {
  std::error_code ec;
  if (fs::is_regular_file(name_or_path, ec)) return name_or_path;
  const fs::path candidate = fs::path(catalog_dir()) / (name_or_path + ".yaml");
  if (fs::is_regular_file(candidate, ec)) return candidate.string();
  throw ConfigError("no manifold file or catalog entry named '" + name_or_path + "' (catalog: " +
                    catalog_dir() + ")");
}

std::vector<std::string> catalog_names() {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(catalog_dir(), ec))
    if (e.path().extension() == ".yaml") out.push_back(e.path().stem().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace sprayconn
