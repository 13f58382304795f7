#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sprayconn {

/// Running maximum that lets a NaN residual win, so a broken evaluation can
/// never pass silently.
inline void keep_worst(double& worst, double r) {
  if (std::isnan(worst)) return;
  if (std::isnan(r) || r > worst) worst = r;
}

/// Outcome of one sampled check: the worst residual seen and whether it is
/// within tolerance. A NaN residual never passes.
struct CheckRecord {
  std::string id;
  std::size_t samples = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::size_t skipped = 0;
  std::string note;

  static CheckRecord make(std::string id, std::size_t samples, double residual,
                          double tolerance, std::string note = {});
  /// Passes iff residual >= threshold (negative controls).
  static CheckRecord make_at_least(std::string id, std::size_t samples,
                                   double residual, double threshold,
                                   std::string note = {});
  /// Failed check carrying an error message instead of a residual.
  static CheckRecord error(std::string id, std::string message);
};

struct Report {
  std::string suite;
  std::string manifold;
  std::uint64_t seed = 0;
  std::size_t level = 0;
  std::map<std::string, double> tolerances;
  std::vector<CheckRecord> records;
  std::string timestamp;

  bool pass() const;
  /// First failing record, or nullptr.
  const CheckRecord* first_failure() const;
  void append(const Report& other);

  /// JSON with a fixed key order; `timestamp` is the only run-dependent field.
  std::string to_json() const;
  /// One aligned line per record.
  std::string to_table() const;
};

}  // namespace sprayconn
