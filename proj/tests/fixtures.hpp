#pragma once
// Small atlases built directly from expressions, shared by the unit tests.

#include <string>

#include "sprayconn/atlas.hpp"
#include "sprayconn/expr.hpp"
#include "sprayconn/spray.hpp"

namespace fixture {

using namespace sprayconn;

inline ExprMap xmap(const std::string& text, std::size_t n) {
  return ExprMap::parse(text, indexed_names("x", n));
}

/// Stereographic charts N and S of the round sphere.
struct Sphere {
  Chart n{"N", ModelSpace(2), xmap("4 - x0^2 - x1^2", 2)};
  Chart s{"S", ModelSpace(2), xmap("4 - x0^2 - x1^2", 2)};
  ExprMap inversion = xmap("[x0/(x0^2 + x1^2), x1/(x0^2 + x1^2)]", 2);
  Transition ns{n, s, inversion, inversion};
  Transition sn{s, n, inversion, inversion};
  ExprMap metric = xmap("[4/(1 + x0^2 + x1^2)^2, 0, 0, 4/(1 + x0^2 + x1^2)^2]", 2);
  SampleContext ctx{{-2.0, 2.0}, 42};

  Atlas atlas() const { return Atlas{{n, s}, {ns, sn}, ctx.box}; }
  BilinearMap b() const { return BilinearMap::from_metric(metric); }
  BilinearCoeffs coeffs() const { return {{"N", b()}, {"S", b()}}; }
  SprayField spray() const {
    SprayField f;
    f.set("N", make_metric_spray(metric));
    f.set("S", make_metric_spray(metric));
    return f;
  }
};

/// 1-dimensional chart on the positive half line with phi(x) = x^2.
struct Square {
  Chart pos{"P", ModelSpace(1), xmap("x0", 1)};
  Chart img{"Q", ModelSpace(1), xmap("x0", 1)};
  Transition t{pos, img, xmap("x0^2", 1), xmap("sqrt(x0)", 1)};
};

}  // namespace fixture
