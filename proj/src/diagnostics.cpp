#include "rangeshift/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "rangeshift/error.hpp"

namespace rangeshift {

SignChangeCount sign_changes(std::span<const double> h, int first, int last) {
  if (first < 0 || last >= static_cast<int>(h.size()) || first > last) {
    throw Error(ErrorKind::InvalidArgument, "sign_changes: bad index range");
  }
  SignChangeCount out;
  out.first = first;
  out.last = last;
  int prev = 0;
  for (int i = first; i <= last; ++i) {
    const double v = h[static_cast<std::size_t>(i)];
    const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
    if (s == 0) continue;
    if (prev != 0 && s != prev) {
      ++out.count;
      out.zero_runs.push_back(i);
    }
    prev = s;
  }
  if (prev == 0) throw Error(ErrorKind::AllZero, "h vanishes on the whole interval");
  return out;
}

SignChangeCount sign_changes(std::span<const double> h) {
  if (h.empty()) throw Error(ErrorKind::AllZero, "empty sequence");
  return sign_changes(h, 0, static_cast<int>(h.size()) - 1);
}

std::optional<double> ZeroNumberSeries::first_drop_time() const {
  if (drops.empty()) return std::nullopt;
  return times[drops.front()];
}

ZeroNumberSeries zero_number_trace(const Trace& trace, const std::vector<double>& reference, const Grid1D& grid,
                                   std::pair<double, double> interval) {
  if (trace.snapshots.empty()) throw Error(ErrorKind::InvalidArgument, "zero_number_trace needs stored snapshots");
  if (reference.size() != static_cast<std::size_t>(grid.n)) {
    throw Error(ErrorKind::InvalidArgument, "reference must be sampled on the grid");
  }
  const auto [first, last] = grid.index_range(interval.first, interval.second);
  ZeroNumberSeries zs;
  std::vector<double> h(reference.size());
  for (const Field& f : trace.snapshots) {
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = f.u[i] - reference[i];
    for (const int e : {first, last}) {
      if (std::abs(h[static_cast<std::size_t>(e)]) < kEndpointFloor) {
        std::ostringstream os;
        os << "|u - p| < " << kEndpointFloor << " at z = " << grid.z(e) << ", t = " << f.t;
        throw Error(ErrorKind::EndpointVanishes, os.str());
      }
    }
    zs.times.push_back(f.t);
    zs.counts.push_back(sign_changes(h, first, last).count);
  }
  const auto& n = zs.counts;
  for (std::size_t k = 1; k < n.size(); ++k) {
    if (n[k] < n[k - 1]) zs.drops.push_back(k);
    if (n[k] > n[k - 1]) {
      bool reverted = false;
      for (std::size_t j = k + 1; j <= k + 2 && j < n.size(); ++j) reverted = reverted || n[j] <= n[k - 1];
      const bool artifact = n[k] - n[k - 1] == 1 && reverted;
      zs.increases.push_back({k, n[k - 1], n[k], artifact});
      if (!artifact) zs.nonincreasing = false;
    }
  }
  return zs;
}

double primitive_f(const ShiftedReaction& reaction, double z, double s) {
  if (z < 0.0) return -0.5 * reaction.rho() * s * s;
  // 8-point Gauss-Legendre on [0, s]
  static constexpr std::array<double, 4> x = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                              0.9602898564975363};
  static constexpr std::array<double, 4> w = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                              0.1012285362903763};
  const GrowthModel& g = reaction.growth();
  const double half = 0.5 * s;
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) sum += w[i] * (g(half * (1.0 + x[i])) + g(half * (1.0 - x[i])));
  return half * sum;
}

double energy(const Field& field, const Grid1D& grid, const ShiftedReaction& reaction, double c, double right_cutoff) {
  if (field.u.size() != static_cast<std::size_t>(grid.n)) throw Error(ErrorKind::InvalidArgument, "field/grid mismatch");
  const int last = grid.index_range(grid.z_min, right_cutoff).second;
  if (last < 1) throw Error(ErrorKind::InvalidArgument, "cutoff left of the grid");
  if (!(std::abs(field.u[static_cast<std::size_t>(last)]) < 1e-8)) {
    std::ostringstream os;
    os << "u = " << field.u[static_cast<std::size_t>(last)] << " at the cutoff z = " << grid.z(last);
    throw Error(ErrorKind::TailTooFat, os.str());
  }
  const auto& u = field.u;
  const double dz = grid.dz;
  double sum = 0.0;
  for (int i = 0; i <= last; ++i) {
    const auto k = static_cast<std::size_t>(i);
    double du;
    if (i == 0) {
      du = (u[1] - u[0]) / dz;
    } else if (i == grid.n - 1) {
      du = (u[k] - u[k - 1]) / dz;
    } else {
      du = (u[k + 1] - u[k - 1]) / (2.0 * dz);
    }
    const double z = grid.z(i);
    const double integrand = std::exp(c * z) * (0.5 * du * du - primitive_f(reaction, z, u[k]));
    sum += (i == 0 || i == last ? 0.5 : 1.0) * integrand;
  }
  return sum * dz;
}

double default_gamma(const ShiftedReaction& reaction, double c) {
  return std::max(0.0, 0.5 * (c * c / 4.0 - reaction.growth().g_prime_0()));
}

namespace {

struct Envelope {
  bool critical = false;
  double rate = 0.0;
  double operator()(double eps, double dz) const {
    if (critical) return eps * (1.0 + std::sqrt(dz)) * std::exp(-rate * dz);
    return eps * std::exp(-rate * dz);
  }
};

Envelope make_envelope(const ShiftedReaction& reaction, double c, double gamma) {
  const double g0 = reaction.growth().g_prime_0();
  const double disc = c * c - 4.0 * g0;
  const double tol = 1e-12 * std::max(1.0, c * c);
  if (disc < -tol) throw Error(ErrorKind::InvalidArgument, "envelope needs c >= 2 sqrt(g'(0))");
  Envelope env;
  if (std::abs(disc) <= tol) {
    env.critical = true;
    env.rate = c / 2.0;
    return env;
  }
  if (c * c - 4.0 * (g0 + gamma) <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "envelope needs c > 2 sqrt(g'(0) + gamma)");
  }
  env.rate = lambda_gamma(reaction, c, gamma);
  return env;
}

}  // namespace

EnvelopeReport exponential_bound_check(const Trace& trace, const Grid1D& grid, const ShiftedReaction& reaction,
                                       double c, double gamma, double eps, double z_eps) {
  if (z_eps < grid.z_min || z_eps > grid.z_max) throw Error(ErrorKind::InvalidArgument, "Z_eps outside the grid");
  const Envelope env = make_envelope(reaction, c, gamma);
  EnvelopeReport rep;
  rep.critical_form = env.critical;
  rep.rate = env.rate;
  rep.eps = eps;
  rep.z_eps = z_eps;
  const int first = grid.index_range(z_eps, grid.z_max).first;
  for (const Field& f : trace.snapshots) {
    double worst = 0.0;
    double wz = z_eps;
    for (int i = first; i < grid.n; ++i) {
      const double u = f.u[static_cast<std::size_t>(i)];
      if (u <= 0.0) continue;
      const double e = env(eps, grid.z(i) - z_eps);
      const double r = e > 0.0 ? u / e : std::numeric_limits<double>::infinity();
      if (r > worst) {
        worst = r;
        wz = grid.z(i);
      }
    }
    rep.times.push_back(f.t);
    rep.ratio_per_snapshot.push_back(worst);
    if (worst > rep.worst_ratio) {
      rep.worst_ratio = worst;
      rep.worst_t = f.t;
      rep.worst_z = wz;
    }
    if (worst > 1.0 + 1e-12 && !rep.first_failure_t) rep.first_failure_t = f.t;
  }
  rep.pass = !rep.first_failure_t.has_value();
  return rep;
}

std::optional<EnvelopeCalibration> calibrate_envelope(const Trace& trace, const Grid1D& grid,
                                                      const ShiftedReaction& reaction, double c, double gamma,
                                                      double z_from, double t_max) {
  const Envelope env = make_envelope(reaction, c, gamma);
  std::vector<const Field*> snaps;
  for (const Field& f : trace.snapshots) {
    if (f.t <= t_max) snaps.push_back(&f);
  }
  if (snaps.empty()) throw Error(ErrorKind::InvalidArgument, "no snapshots to calibrate on");
  const auto n = static_cast<std::size_t>(grid.n);
  const int start = grid.index_range(z_from, grid.z_max).first;
  std::vector<double> eps(n, 0.0);
  for (const Field* f : snaps) {
    for (std::size_t i = 0; i < n; ++i) eps[i] = std::max(eps[i], f->u[i]);
  }
  if (!env.critical) {
    // u <= eps_j e^{-r(z - z_j)} for z >= z_j  <=>  log eps_j + r z_j >= max_{z >= z_j} (log u + r z)
    const double ninf = -std::numeric_limits<double>::infinity();
    std::vector<double> worst(n, ninf);
    std::vector<double> suffix(n);
    for (const Field* f : snaps) {
      double m = ninf;
      for (std::size_t i = n; i-- > 0;) {
        const double u = f->u[i];
        if (u > 0.0) m = std::max(m, std::log(u) + env.rate * grid.z(static_cast<int>(i)));
        suffix[i] = m;
      }
      for (std::size_t i = 0; i < n; ++i) worst[i] = std::max(worst[i], suffix[i]);
    }
    for (std::size_t j = static_cast<std::size_t>(start); j < n; ++j) {
      if (!(eps[j] > 0.0)) continue;
      if (std::log(eps[j]) + env.rate * grid.z(static_cast<int>(j)) + 1e-12 >= worst[j]) {
        return EnvelopeCalibration{eps[j], grid.z(static_cast<int>(j))};
      }
    }
    return std::nullopt;
  }
  for (std::size_t j = static_cast<std::size_t>(start); j < n; ++j) {
    if (!(eps[j] > 0.0)) continue;
    const double zj = grid.z(static_cast<int>(j));
    bool ok = true;
    for (const Field* f : snaps) {
      for (std::size_t i = j; i < n && ok; ++i) {
        ok = f->u[i] <= env(eps[j], grid.z(static_cast<int>(i)) - zj) * (1.0 + 1e-12);
      }
      if (!ok) break;
    }
    if (ok) return EnvelopeCalibration{eps[j], zj};
  }
  return std::nullopt;
}

}  // namespace rangeshift
