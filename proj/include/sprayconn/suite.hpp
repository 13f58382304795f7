#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sprayconn/manifold.hpp"
#include "sprayconn/report.hpp"

namespace sprayconn {

enum class SuiteKind { spray, connection, second_order, geodesic, truncation, all };

/// "spray", "connection", "second-order", "geodesic", "truncation", "all".
SuiteKind parse_suite(const std::string& name);
std::string suite_name(SuiteKind kind);

/// Named tolerances with their defaults; unknown names are rejected.
class Tolerances {
 public:
  Tolerances();
  double operator[](const std::string& key) const;
  /// Throws ConfigError for an unknown key or a negative value.
  void set(const std::string& key, double value);
  /// Parses "key=value".
  void set(const std::string& assignment);
  const std::map<std::string, double>& values() const noexcept { return values_; }

 private:
  std::map<std::string, double> values_;
};

/// Runs the checks of one suite. Check errors are recorded as failed
/// records; the run itself only throws on configuration problems.
Report run_suite(const ManifoldDef& m, SuiteKind suite, const Tolerances& tol,
                 std::uint64_t seed);

/// Cross-level agreement of K, c and geodesics under projection for each
/// consecutive pair of levels, plus the connection checks at every level.
/// Throws ConfigError unless the spray is declared with `each` patterns.
Report truncation_stability(const ManifoldDef& m, const std::vector<std::size_t>& levels,
                            const Tolerances& tol, std::uint64_t seed);

/// Self-map of the first chart used when the file declares no conjugacy
/// map: a shear (x0, x1 + x0^2 / 2, ...) in dimension >= 2, x^2 on x > 0 in
/// dimension 1.
Transition builtin_conjugacy_map(const Chart& chart);

/// mu(x) = (x0^2, x1, ...) on x0 > 0 with its inverse.
Transition square_map(const Chart& chart);

}  // namespace sprayconn
