#pragma once
// Reference integrators and helpers for the tests. Deliberately naive: fixed
// step RK4 and plain bisection, sharing nothing with the library numerics.

#include <array>
#include <cmath>
#include <functional>

#include "rangeshift/error.hpp"

namespace oracle {

using Vec2 = std::array<double, 2>;
using Field2 = std::function<Vec2(double, const Vec2&)>;

inline Vec2 rk4(const Field2& f, double z, const Vec2& y, double h) {
  auto add = [](const Vec2& a, const Vec2& b, double s) { return Vec2{a[0] + s * b[0], a[1] + s * b[1]}; };
  const Vec2 k1 = f(z, y);
  const Vec2 k2 = f(z + h / 2, add(y, k1, h / 2));
  const Vec2 k3 = f(z + h / 2, add(y, k2, h / 2));
  const Vec2 k4 = f(z + h, add(y, k3, h));
  return {y[0] + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
          y[1] + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

/// p'' + c p' + g(p) = 0 as a first-order system in (p, p').
inline Field2 homogeneous(std::function<double(double)> g, double c) {
  return [g = std::move(g), c](double, const Vec2& y) { return Vec2{y[1], -c * y[1] - g(y[0])}; };
}

/// Integrates with step h until stop(y) holds between two steps; the crossing
/// is refined by linear interpolation of the stop value. Returns (z, y).
struct Hit {
  bool hit = false;
  double z = 0.0;
  Vec2 y{};
};

inline Hit integrate_until(const Field2& f, double z, Vec2 y, double h, double z_limit,
                           const std::function<double(const Vec2&)>& event) {
  double e0 = event(y);
  while ((h > 0 && z < z_limit) || (h < 0 && z > z_limit)) {
    const Vec2 y1 = rk4(f, z, y, h);
    const double e1 = event(y1);
    if ((e0 > 0) != (e1 > 0)) {
      const double s = e0 / (e0 - e1);
      return {true, z + s * h, {y[0] + s * (y1[0] - y[0]), y[1] + s * (y1[1] - y[1])}};
    }
    z += h;
    y = y1;
    e0 = e1;
  }
  return {false, z, y};
}

inline double bisect(const std::function<double(double)>& fn, double a, double b, double tol = 1e-14) {
  double fa = fn(a);
  for (int i = 0; i < 200 && b - a > tol; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = fn(m);
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

template <class Fn>
rangeshift::ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const rangeshift::Error& e) {
    return e.kind();
  }
  return static_cast<rangeshift::ErrorKind>(-1);
}

}  // namespace oracle
