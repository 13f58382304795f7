#pragma once

#include <map>
#include <string>
#include <vector>

#include "sprayconn/atlas.hpp"
#include "sprayconn/expr.hpp"
#include "sprayconn/report.hpp"
#include "sprayconn/spray.hpp"

namespace sprayconn {

enum class Method { rk4, euler };

struct GeodesicState {
  std::string chart;
  Vector x;
  Vector v;
  double t = 0.0;
};

struct Trajectory {
  std::vector<GeodesicState> samples;
  double step = 0.0;
  Method method = Method::rk4;

  const GeodesicState& back() const { return samples.back(); }
};

struct IntegrateOptions {
  Method method = Method::rk4;
  /// Switch charts once the domain predicate drops below this value.
  double switch_threshold = 0.1;
};

/// Solves x' = v, v' = B(x; v, v) on [0, t1] with fixed step h, moving to
/// the neighbouring chart with the largest predicate value when the current
/// predicate falls below the switch threshold.
Trajectory integrate(const Atlas& atlas, const BilinearCoeffs& b, const std::string& chart,
                     const Vector& x0, const Vector& v0, double t1, double h,
                     IntegrateOptions opt = {});

/// Same ODE with a single bilinear map and no domain bookkeeping.
Trajectory integrate(const BilinearMap& b, const Vector& x0, const Vector& v0, double t1,
                     double h, Method method = Method::rk4, const std::string& chart = "R^n");

/// State re-expressed in another chart through the atlas transition.
GeodesicState express_in(const Atlas& atlas, const GeodesicState& s, const std::string& chart);

/// "geodesic.reparam.s=<s>" with s in shortest form.
std::string reparam_id(double s);

/// gamma_{s v0}(t) against gamma_{v0}(s t) at matched times (s < 0 uses
/// -v0 and |s|).
CheckRecord check_homogeneity_reparam(const Atlas& atlas, const BilinearCoeffs& b,
                                      const std::string& chart, const Vector& x0,
                                      const Vector& v0, double s, double t1, double h,
                                      double tol = 1e-7);

/// Integrates forward for t1, then from (gamma(t1), -gamma'(t1)) for t1 and
/// compares with x0.
CheckRecord check_time_reversal(const Atlas& atlas, const BilinearCoeffs& b,
                                const std::string& chart, const Vector& x0, const Vector& v0,
                                double t1, double h, double tol = 1e-6);

/// A run forced through chart switches (threshold `force_threshold`) against
/// a run that stays in the starting chart, compared in the starting chart.
CheckRecord check_chart_switch_invariance(const Atlas& atlas, const BilinearCoeffs& b,
                                          const std::string& chart, const Vector& x0,
                                          const Vector& v0, double t1, double h,
                                          double force_threshold, double tol = 1e-6);

/// Endpoint against a closed-form curve x(t) given in the trajectory's
/// starting chart (inputs: t).
CheckRecord check_reference_curve(const Atlas& atlas, const Trajectory& traj,
                                  const ExprMap& reference, double tol = 1e-6);

using MetricTable = std::map<std::string, ExprMap>;

/// max |g(v, v) - E0| / |E0| along the trajectory (absolute when E0 = 0). Throws
/// ConfigError when a visited chart has no metric.
CheckRecord energy_monitor(const MetricTable& metric, const Trajectory& traj,
                           double tol = 1e-6);

}  // namespace sprayconn
