#include "rangeshift/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rangeshift/error.hpp"

namespace rangeshift::ode {

namespace {

// Dormand-Prince 5(4) tableau and dense output coefficients (Hairer, DOPRI5).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
  State out = y;
  for (const auto& [a, k] : terms) {
    out[0] += h * a * (*k)[0];
    out[1] += h * a * (*k)[1];
  }
  return out;
}

}  // namespace

State DenseStep::operator()(double z) const {
  const double s = (z - z0) / h;
  const double s1 = 1.0 - s;
  State out;
  for (int i = 0; i < 2; ++i) {
    out[i] = rcont[0][i] + s * (rcont[1][i] + s1 * (rcont[2][i] + s * (rcont[3][i] + s1 * rcont[4][i])));
  }
  return out;
}

Result integrate(const Rhs& rhs, double z0, const State& y0, double z_end, const Options& opts,
                 const std::function<Action(const DenseStep&)>& on_step) {
  Result res;
  res.z = z0;
  res.y = y0;
  const double span = z_end - z0;
  if (span == 0.0) {
    res.reached_end = true;
    return res;
  }
  const double dir = span > 0 ? 1.0 : -1.0;
  double h = dir * std::min(opts.h_init, std::abs(span));
  double z = z0;
  State y = y0;
  State k1 = rhs(z, y);
  double fac_old = 1e-4;  // PI controller memory

  while (true) {
    if (res.steps >= opts.max_steps) {
      throw Error(ErrorKind::StepFailure, "maximum number of integration steps exceeded");
    }
    const double remaining = z_end - z;
    bool last = false;
    if (std::abs(h) >= std::abs(remaining)) {
      h = remaining;
      last = true;
    }
    const double h_min = 1e-14 * std::max(1.0, std::abs(z));
    if (std::abs(h) < h_min) {
      std::ostringstream os;
      os << "step size underflow at z=" << z << " (p=" << y[0] << ", q=" << y[1] << ")";
      throw Error(ErrorKind::StepFailure, os.str());
    }

    const State k2 = rhs(z + c2 * h, axpy(y, h, {{a21, &k1}}));
    const State k3 = rhs(z + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const State k4 = rhs(z + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State k5 = rhs(z + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State k6 =
        rhs(z + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State y_new = axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
    const State k7 = rhs(z + h, y_new);

    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / 2.0);
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      DenseStep step;
      step.z0 = z;
      step.h = h;
      step.y0 = y;
      step.y1 = y_new;
      for (int i = 0; i < 2; ++i) {
        const double ydiff = y_new[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        step.rcont[0][i] = y[i];
        step.rcont[1][i] = ydiff;
        step.rcont[2][i] = bspl;
        step.rcont[3][i] = ydiff - h * k7[i] - bspl;
        step.rcont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      ++res.steps;
      z = last ? z_end : z + h;
      y = y_new;
      k1 = k7;
      res.z = z;
      res.y = y;
      if (on_step && on_step(step) == Action::Stop) return res;
      if (last) {
        res.reached_end = true;
        return res;
      }
      // PI step-size control (Hairer's beta = 0.04).
      const double fac11 = std::pow(std::max(err, 1e-12), 0.17);
      double fac = fac11 / std::pow(fac_old, 0.04) / 0.9;
      fac = std::clamp(fac, 0.1, 5.0);
      fac_old = std::max(err, 1e-4);
      h = h / fac;
    } else {
      const double fac = std::clamp(std::pow(err, 0.2) / 0.9, 1.0, 5.0);
      h = h / fac;
    }
    if (std::abs(h) > opts.h_max) h = dir * opts.h_max;
  }
}

double locate_root(const DenseStep& step, const std::function<double(double, const State&)>& fn, double ztol) {
  double a = step.z0;
  double b = step.z1();
  double fa = fn(a, step(a));
  double fb = fn(b, step(b));
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  int side = 0;
  for (int it = 0; it < 200 && std::abs(b - a) > ztol; ++it) {
    double m = (a * fb - b * fa) / (fb - fa);
    if (!(std::min(a, b) < m && m < std::max(a, b))) m = 0.5 * (a + b);
    const double fm = fn(m, step(m));
    if (fm == 0.0) return m;
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = m;
      fb = fm;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
  }
  return std::abs(fa) < std::abs(fb) ? a : b;
}

}  // namespace rangeshift::ode
