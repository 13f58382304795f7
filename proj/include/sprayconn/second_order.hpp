#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sprayconn/atlas.hpp"
#include "sprayconn/connection.hpp"
#include "sprayconn/report.hpp"
#include "sprayconn/spray.hpp"

namespace sprayconn {

/// 2-jet of a curve in a chart: position x, velocity a, acceleration b.
struct SecondOrderPoint {
  Vector x;
  Vector a;
  Vector b;
};

/// Vector-bundle coordinates on T^2M: h = a, k = b - B(x; a, a).
struct SecondOrderTriv {
  Vector x;
  Vector h;
  Vector k;
};

SecondOrderTriv trivialize(const BilinearMap& b, const SecondOrderPoint& p);
SecondOrderPoint untrivialize(const BilinearMap& b, const SecondOrderTriv& t);

/// (x; u, v, w - B(x; u, v)).
struct UpsilonImage {
  Vector x;
  Vector u;
  Vector v;
  Vector z;
};
UpsilonImage upsilon(const BilinearMap& b, const DoubleTangentVector& xi);
DoubleTangentVector upsilon_inverse(const BilinearMap& b, const UpsilonImage& y);

/// Raw 2-jet push (mu(x), Dmu a, D^2mu(a, a) + Dmu b).
SecondOrderPoint jet_push(const Transition& mu, const SecondOrderPoint& p);

/// Trivialized T^2 mu:
///   (h, k) -> (Dmu h, Dmu k + Dmu B_src(h, h) + D^2mu(h, h) - B_dst(mu x)(Dmu h, Dmu h)).
SecondOrderTriv second_order_map(const BilinearMap& b_src, const BilinearMap& b_dst,
                                 const Transition& mu, const SecondOrderTriv& t);
SecondOrderTriv second_order_map(const BilinearMap& b_src, const BilinearMap& b_dst,
                                 const Transition& mu, const SecondOrderPoint& p);

/// Dmu(x)(K1 part of xi) against the K2 part of TT mu(xi) on overlap samples.
CheckRecord check_conjugacy(const ConnectionMap& k1, const ConnectionMap& k2,
                            const Transition& mu, const SampleContext& ctx,
                            std::size_t samples, double tol = 1e-8);

/// Fiber linearity of the trivialized T^2 mu and agreement with (Dmu h, Dmu k),
/// plus agreement of the closed formula with pushing raw jets. When the pair
/// is not conjugate the conjugacy residual is attached as a note.
std::vector<CheckRecord> check_T2mu_linearity(const ConnectionMap& k1, const ConnectionMap& k2,
                                              const Transition& mu, const SampleContext& ctx,
                                              std::size_t samples, double tol = 1e-8);

/// Largest fiber nonlinearity of T^2 mu; passes iff it reaches `threshold`.
CheckRecord check_nonlinearity_witness(const ConnectionMap& k1, const ConnectionMap& k2,
                                       const Transition& mu, const SampleContext& ctx,
                                       std::size_t samples, double threshold = 1e-3);

/// Reflexivity (identity), symmetry (mu reversed) and transitivity (mu1 then
/// mu2) of conjugacy, with partners built by pushing the spray on `chart`.
std::vector<CheckRecord> check_conjugacy_equivalence(const QuadraticFieldPtr& s,
                                                     const Transition& mu1,
                                                     const Transition& mu2,
                                                     const SampleContext& ctx,
                                                     std::size_t samples, double tol = 1e-8);

/// Tangent vector to the trivialized T^2M = TM + TM at (x, h, k).
struct SecondOrderTangent {
  Vector x;
  Vector h;
  Vector k;
  Vector dx;
  Vector dh;
  Vector dk;
};

/// Left splitting on the trivialized T^2M; the image has dx = 0.
class SecondOrderConnection {
 public:
  using Fn = std::function<SecondOrderTangent(const SecondOrderTangent&)>;

  static SecondOrderConnection from_bilinear(BilinearMap b);
  static SecondOrderConnection black_box(std::size_t dim, Fn fn);

  std::size_t dim() const noexcept { return dim_; }
  const std::optional<BilinearMap>& bilinear() const noexcept { return b_; }
  SecondOrderTangent operator()(const SecondOrderTangent& xi) const;

 private:
  SecondOrderConnection() = default;
  std::size_t dim_ = 0;
  std::optional<BilinearMap> b_;
  Fn fn_;
};

/// (x, h, k, dx, dh, dk) -> (x, h, k, 0, dh - B(x; h, dx), dk - B(x; k, dx)).
SecondOrderConnection induce_second_order_connection(const ConnectionSplitting& c);

/// First block of C2 on (x, u, 0, v, w, 0). The splitting identity of C2 and
/// the re-induced agreement are validated on chart samples; failures throw
/// SplittingRejected.
ConnectionSplitting reduce_to_first_order_connection(const SecondOrderConnection& c2,
                                                     const Chart& chart,
                                                     const SampleContext& ctx,
                                                     std::size_t samples = 50,
                                                     double tol = 1e-9);

double second_order_tangent_residual(const SecondOrderTangent& a, const SecondOrderTangent& b);

/// Vertical tangents (dx = 0) are fixed points.
CheckRecord check_second_order_splitting(const SecondOrderConnection& c2, const Chart& chart,
                                         const SampleContext& ctx, std::size_t samples = 200,
                                         double tol = 1e-12);

/// reduce(induce(C)) against C on random double tangent vectors.
CheckRecord check_induce_reduce_roundtrip(const ConnectionSplitting& c, const Chart& chart,
                                          const SampleContext& ctx, std::size_t samples,
                                          double tol = 1e-12);

/// untrivialize o trivialize = Id, measured relative to the largest operand
/// including B(x; a, a), and the symmetric restriction of upsilon against
/// trivialize.
std::vector<CheckRecord> check_trivialization(const BilinearMap& b, const Chart& chart,
                                              const SampleContext& ctx, std::size_t samples,
                                              double tol = 1e-15);

}  // namespace sprayconn
