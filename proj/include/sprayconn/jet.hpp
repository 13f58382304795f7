#pragma once

#include <cmath>
#include <cstdlib>
#include <ostream>

namespace sprayconn {

/// Second-order jet along one fixed direction h: the truncated Taylor data
/// (f, Df(x)h, D^2f(x)(h,h)) of t -> f(x + t h) at t = 0.
///
/// Products follow the Leibniz rule to second order:
///   (fg).d2 = f.d2 g + 2 f.d1 g.d1 + f g.d2
/// and a lifted constant carries d1 = d2 = 0. T may itself be a jet, which
/// gives mixed derivatives along two directions.
template <typename T = double>
struct Jet2 {
  T val{};
  T d1{};
  T d2{};

  constexpr Jet2() = default;
  constexpr Jet2(T v) : val(v) {}  // NOLINT(google-explicit-constructor)
  constexpr Jet2(T v, T first, T second) : val(v), d1(first), d2(second) {}

  static constexpr Jet2 variable(T x, T h) { return {x, h, T{}}; }

  constexpr Jet2& operator+=(const Jet2& o) {
    val += o.val;
    d1 += o.d1;
    d2 += o.d2;
    return *this;
  }
  constexpr Jet2& operator-=(const Jet2& o) {
    val -= o.val;
    d1 -= o.d1;
    d2 -= o.d2;
    return *this;
  }
  constexpr Jet2& operator*=(const Jet2& o) { return *this = *this * o; }
  constexpr Jet2& operator/=(const Jet2& o) { return *this = *this / o; }

  friend constexpr Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
  friend constexpr Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
  friend constexpr Jet2 operator-(const Jet2& a) { return {-a.val, -a.d1, -a.d2}; }

  friend constexpr Jet2 operator*(const Jet2& f, const Jet2& g) {
    return {f.val * g.val, f.d1 * g.val + f.val * g.d1,
            f.d2 * g.val + T(2) * f.d1 * g.d1 + f.val * g.d2};
  }

  // q = f/g  =>  f = q g, solved order by order.
  friend constexpr Jet2 operator/(const Jet2& f, const Jet2& g) {
    Jet2 q;
    q.val = f.val / g.val;
    q.d1 = (f.d1 - q.val * g.d1) / g.val;
    q.d2 = (f.d2 - T(2) * q.d1 * g.d1 - q.val * g.d2) / g.val;
    return q;
  }

  friend constexpr bool operator==(const Jet2&, const Jet2&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Jet2& j) {
    return os << '[' << j.val << ", " << j.d1 << ", " << j.d2 << ']';
  }
};

/// Plain value underneath any nesting of jets.
inline double base_value(double x) { return x; }
template <typename T>
double base_value(const Jet2<T>& j) {
  return base_value(j.val);
}

template <typename T>
Jet2<T> exp(const Jet2<T>& f) {
  using std::exp;
  T e = exp(f.val);
  return {e, e * f.d1, e * (f.d2 + f.d1 * f.d1)};
}

template <typename T>
Jet2<T> sin(const Jet2<T>& f) {
  using std::cos;
  using std::sin;
  T s = sin(f.val);
  T c = cos(f.val);
  return {s, c * f.d1, c * f.d2 - s * f.d1 * f.d1};
}

template <typename T>
Jet2<T> cos(const Jet2<T>& f) {
  using std::cos;
  using std::sin;
  T s = sin(f.val);
  T c = cos(f.val);
  return {c, -s * f.d1, -s * f.d2 - c * f.d1 * f.d1};
}

template <typename T>
Jet2<T> log(const Jet2<T>& f) {
  using std::log;
  T inv = T(1) / f.val;
  T d1 = f.d1 * inv;
  return {log(f.val), d1, f.d2 * inv - d1 * d1};
}

template <typename T>
Jet2<T> sqrt(const Jet2<T>& f) {
  using std::sqrt;
  T r = sqrt(f.val);
  T d1 = f.d1 / (T(2) * r);
  return {r, d1, (f.d2 - T(2) * d1 * d1) / (T(2) * r)};
}

/// Integer power by repeated squaring; exact jet algebra for every n.
template <typename S>
S ipow(const S& base, long n) {
  if (n < 0) return S(1.0) / ipow(base, -n);
  S result(1.0);
  S b = base;
  while (n > 0) {
    if (n & 1) result = result * b;
    n >>= 1;
    if (n > 0) b = b * b;
  }
  return result;
}

}  // namespace sprayconn
