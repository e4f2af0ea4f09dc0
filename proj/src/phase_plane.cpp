#include "rangeshift/phase_plane.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rangeshift/error.hpp"
#include "rangeshift/interp.hpp"

namespace rangeshift {

namespace {

using ode::State;

double disc_tol(double c) { return 1e-12 * std::max(1.0, c * c); }

bool below_linear_speed(const ShiftedReaction& r, double c) {
  return c * c - 4.0 * r.growth().g_prime_0() < -disc_tol(c);
}

// Rates of the saddle (1, 0): r^2 + c r + g'(1) = 0.
std::pair<double, double> saddle_rates(const ShiftedReaction& r, double c) {
  const double g1 = r.growth().derivative(1.0);
  const double s = std::sqrt(c * c - 4.0 * g1);
  return {(-c - s) / 2.0, (-c + s) / 2.0};
}

// Cubic Hermite on (z, p, p') samples sorted by z; z must lie within them.
std::pair<double, double> interpolate(const std::vector<PhasePoint>& s, double z) {
  auto it = std::upper_bound(s.begin(), s.end(), z, [](double v, const PhasePoint& pt) { return v < pt.z; });
  std::size_t i = it == s.begin() ? 0 : static_cast<std::size_t>(it - s.begin()) - 1;
  if (i + 1 >= s.size()) i = s.size() - 2;
  const PhasePoint& a = s[i];
  const PhasePoint& b = s[i + 1];
  const double h = b.z - a.z;
  const double t = (z - a.z) / h;
  const double v = hermite(z, a.z, b.z, a.p, b.p, a.dp, b.dp);
  // derivative of the Hermite basis
  const double h00 = 6 * t * t - 6 * t, h10 = 3 * t * t - 4 * t + 1, h01 = -h00, h11 = 3 * t * t - 2 * t;
  const double d = (h00 * a.p + h01 * b.p) / h + h10 * a.dp + h11 * b.dp;
  return {v, d};
}

// Uniform resampling of a shot between z_from and z_to (both inside the
// integrated range); samples are relabelled z -> z - origin.
std::vector<PhasePoint> resample(const Trajectory& tr, double z_from, double z_to, double origin, double dz,
                                 bool include_end) {
  std::vector<PhasePoint> out;
  const double len = z_to - z_from;
  const auto n = static_cast<long>(std::floor(len / dz * (1.0 + 1e-12)));
  out.reserve(static_cast<std::size_t>(n) + 2);
  for (long k = 0; k <= n; ++k) {
    const double z = z_from + static_cast<double>(k) * dz;
    const State y = tr.at(std::min(z, z_to));
    out.push_back({z - origin, y[0], y[1]});
  }
  if (include_end && z_to - (z_from + static_cast<double>(n) * dz) > 1e-9 * dz) {
    const State y = tr.at(z_to);
    out.push_back({z_to - origin, y[0], y[1]});
  }
  return out;
}

ode::Options integrator_options(const ShootingTolerances& tol) {
  ode::Options o;
  o.rtol = tol.tol;
  o.atol = tol.tol * tol.atol_scale;
  o.h_max = 0.5;
  return o;
}

}  // namespace

std::string to_string(TerminalEvent e) {
  switch (e) {
    case TerminalEvent::CrossedPZeroAxis: return "CrossedPZeroAxis";
    case TerminalEvent::CrossedPPrimeAxis: return "CrossedPPrimeAxis";
    case TerminalEvent::ReachedOrigin: return "ReachedOrigin";
    case TerminalEvent::ReachedOne: return "ReachedOne";
    case TerminalEvent::Diverged: return "Diverged";
    case TerminalEvent::HorizonReached: return "HorizonReached";
    case TerminalEvent::CrossedGlueLine: return "CrossedGlueLine";
    case TerminalEvent::CrossedUnitLine: return "CrossedUnitLine";
  }
  return "?";
}

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::Invasion: return "Invasion";
    case ProfileKind::Ground: return "Ground";
    case ProfileKind::CriticalGround: return "CriticalGround";
  }
  return "?";
}

State Trajectory::at(double z) const {
  if (dense.empty()) throw Error(ErrorKind::InvalidArgument, "trajectory has no dense output");
  const bool fwd = dense.front().h > 0;
  auto it = std::partition_point(dense.begin(), dense.end(), [&](const ode::DenseStep& s) {
    return fwd ? s.z1() < z : s.z1() > z;
  });
  if (it == dense.end()) it = std::prev(dense.end());
  return (*it)(z);
}

Trajectory shoot(const ShiftedReaction& reaction, double c, double p0, double q0, std::pair<double, double> z_span,
                 const ShootingTolerances& tol, const ShootOptions& options) {
  const GrowthModel& g = reaction.growth();
  const double z0 = z_span.first;
  const double z_end = z_span.second;
  const double dir = z_end >= z0 ? 1.0 : -1.0;
  const EventMask ev = options.events;

  Trajectory tr;
  tr.samples.push_back({z0, p0, q0});

  if (q0 == 0.0 && g(p0) == 0.0) {
    if (p0 == 0.0 && ev.has(TerminalEvent::ReachedOrigin)) {
      tr.terminal_event = TerminalEvent::ReachedOrigin;
      tr.terminal_z = z0;
      return tr;
    }
    if (p0 == 1.0 && ev.has(TerminalEvent::ReachedOne)) {
      tr.terminal_event = TerminalEvent::ReachedOne;
      tr.terminal_z = z0;
      return tr;
    }
    tr.samples.push_back({z_end, p0, q0});
    if (dir < 0) std::reverse(tr.samples.begin(), tr.samples.end());
    tr.terminal_event = TerminalEvent::HorizonReached;
    tr.terminal_z = z_end;
    return tr;
  }

  const double disc = c * c - 4.0 * g.g_prime_0();
  const bool node = disc >= -disc_tol(c);
  const double lam_plus = (c + std::sqrt(std::max(disc, 0.0))) / 2.0;
  const double mu = options.mu;

  auto origin_hit = [&](const State& y) {
    if (dir < 0 || !node) return false;
    if (std::abs(y[0]) + std::abs(y[1]) >= tol.eps_origin) return false;
    return y[0] > 0.0 && lam_plus * y[0] + y[1] >= 0.0;
  };

  struct Crossing {
    TerminalEvent event;
    std::function<double(double, const State&)> fn;
  };
  std::vector<Crossing> crossings;
  if (ev.has(TerminalEvent::CrossedPZeroAxis))
    crossings.push_back({TerminalEvent::CrossedPZeroAxis, [](double, const State& y) { return y[0]; }});
  if (ev.has(TerminalEvent::CrossedPPrimeAxis))
    crossings.push_back({TerminalEvent::CrossedPPrimeAxis, [](double, const State& y) { return y[1]; }});
  if (ev.has(TerminalEvent::CrossedGlueLine))
    crossings.push_back({TerminalEvent::CrossedGlueLine, [mu](double, const State& y) { return y[1] - mu * y[0]; }});
  if (ev.has(TerminalEvent::CrossedUnitLine))
    crossings.push_back({TerminalEvent::CrossedUnitLine, [](double, const State& y) { return y[0] - 1.0; }});

  const double sdz = options.sample_dz;
  long next_k = 1;
  const double ztol = std::max(tol.tol, 1e-14);
  bool stopped = false;

  auto emit_until = [&](const ode::DenseStep& step, double z_stop) {
    if (sdz > 0.0) {
      while (true) {
        const double z = z0 + dir * static_cast<double>(next_k) * sdz;
        if (dir * (z - z_stop) > 0.0) break;
        const State y = step(z);
        tr.samples.push_back({z, y[0], y[1]});
        ++next_k;
      }
    }
  };

  auto on_step = [&](const ode::DenseStep& step) {
    if (options.keep_dense) tr.dense.push_back(step);
    const double za = step.z0;
    const double zb = step.z1();

    double best_z = zb;
    std::optional<TerminalEvent> best;
    for (const Crossing& cr : crossings) {
      const double fa = cr.fn(za, step.y0);
      const double fb = cr.fn(zb, step.y1);
      if ((fa < 0 && fb > 0) || (fa > 0 && fb < 0) || (fb == 0.0 && fa != 0.0)) {
        const double zr = ode::locate_root(step, cr.fn, ztol);
        if (!best || dir * (zr - best_z) < 0) {
          best = cr.event;
          best_z = zr;
        }
      }
    }
    if (!best) {
      const State& y = step.y1;
      if (ev.has(TerminalEvent::ReachedOrigin) && origin_hit(y)) {
        best = TerminalEvent::ReachedOrigin;
      } else if (ev.has(TerminalEvent::ReachedOne) && std::abs(y[0] - 1.0) + std::abs(y[1]) < tol.eps_origin) {
        best = TerminalEvent::ReachedOne;
      } else if (ev.has(TerminalEvent::Diverged) && (y[0] > g.s_max() || y[0] < -tol.p_floor)) {
        best = TerminalEvent::Diverged;
      }
    }
    emit_until(step, best_z);
    const bool on_grid = sdz > 0.0 && !tr.samples.empty() && tr.samples.back().z == best_z;
    if (best) {
      if (!on_grid) {
        const State y = step(best_z);
        tr.samples.push_back({best_z, y[0], y[1]});
      }
      tr.terminal_event = *best;
      tr.terminal_z = best_z;
      stopped = true;
      return ode::Action::Stop;
    }
    if (sdz <= 0.0) tr.samples.push_back({zb, step.y1[0], step.y1[1]});
    return ode::Action::Continue;
  };

  auto rhs = [&g, c](double, const State& y) { return State{y[1], -c * y[1] - g(y[0])}; };
  const ode::Result res = ode::integrate(rhs, z0, {p0, q0}, z_end, integrator_options(tol), on_step);
  if (!stopped) {
    if (sdz > 0.0 && tr.samples.back().z != res.z) tr.samples.push_back({res.z, res.y[0], res.y[1]});
    tr.terminal_event = TerminalEvent::HorizonReached;
    tr.terminal_z = res.z;
  }
  if (dir < 0) std::reverse(tr.samples.begin(), tr.samples.end());
  return tr;
}

double StationaryProfile::value_at(double z) const {
  if (z < 0.0) return alpha * std::exp(mu_c * z);
  const PhasePoint& last = right_samples.back();
  if (z > last.z) {
    const double e = std::exp(-tail_rate * (z - last.z));
    return kind == ProfileKind::Invasion ? 1.0 - (1.0 - last.p) * e : last.p * e;
  }
  return interpolate(right_samples, z).first;
}

double StationaryProfile::slope_at(double z) const {
  if (z < 0.0) return alpha * mu_c * std::exp(mu_c * z);
  const PhasePoint& last = right_samples.back();
  if (z > last.z) {
    const double e = std::exp(-tail_rate * (z - last.z));
    return kind == ProfileKind::Invasion ? tail_rate * (1.0 - last.p) * e : -tail_rate * last.p * e;
  }
  return interpolate(right_samples, z).second;
}

std::vector<double> StationaryProfile::sample(const std::vector<double>& z) const {
  std::vector<double> out(z.size());
  std::transform(z.begin(), z.end(), out.begin(), [this](double x) { return value_at(x); });
  return out;
}

StationaryProfile invasion_state(const ShiftedReaction& reaction, double c, const ShootingTolerances& tol) {
  if (!(c >= 0.0)) throw Error(ErrorKind::InvalidArgument, "speed must be nonnegative");
  const double mu = mu_c(reaction.rho(), c);
  const auto [r_minus, r_plus] = saddle_rates(reaction, c);
  (void)r_plus;
  const double d = tol.delta_manifold;

  ShootOptions opt;
  opt.events = EventMask{}
                   .with(TerminalEvent::CrossedGlueLine)
                   .with(TerminalEvent::CrossedPZeroAxis)
                   .with(TerminalEvent::Diverged);
  opt.keep_dense = true;
  opt.mu = mu;
  const Trajectory tr = shoot(reaction, c, 1.0 - d, -r_minus * d, {0.0, -tol.horizon}, tol, opt);
  if (tr.terminal_event != TerminalEvent::CrossedGlueLine) {
    throw Error(ErrorKind::ManifoldMiss, "stable manifold of (1,0) ended with " + to_string(tr.terminal_event) +
                                             " before meeting p' = mu_c p");
  }

  StationaryProfile prof;
  prof.kind = ProfileKind::Invasion;
  prof.c = c;
  prof.rho = reaction.rho();
  prof.g_prime_0 = reaction.growth().g_prime_0();
  prof.mu_c = mu;
  prof.tolerances = tol;
  prof.tail_rate = -r_minus;
  const double zc = tr.terminal_z;
  prof.right_samples = resample(tr, zc, 0.0, zc, tol.sample_dz, false);
  const PhasePoint& p0 = prof.right_samples.front();
  prof.alpha = p0.p;
  prof.glue_slope = p0.dp;
  if (std::abs(p0.dp - mu * p0.p) > tol.eps_glue) {
    std::ostringstream os;
    os << "glue mismatch " << std::abs(p0.dp - mu * p0.p);
    throw Error(ErrorKind::ManifoldMiss, os.str());
  }
  if (1.0 - prof.right_samples.back().p > tol.eps_tail) {
    throw Error(ErrorKind::ManifoldMiss, "invasion profile does not reach 1 within eps_tail");
  }
  return prof;
}

namespace {

TerminalEvent glued_fate(const ShiftedReaction& reaction, double c, double mu, double alpha,
                         const ShootingTolerances& tol) {
  ShootOptions opt;
  opt.events = EventMask{}
                   .with(TerminalEvent::CrossedPZeroAxis)
                   .with(TerminalEvent::ReachedOrigin)
                   .with(TerminalEvent::Diverged)
                   .with(TerminalEvent::CrossedUnitLine);
  return shoot(reaction, c, alpha, mu * alpha, {0.0, tol.horizon}, tol, opt).terminal_event;
}

}  // namespace

AlphaStar alpha_star(const ShiftedReaction& reaction, double c, const ShootingTolerances& tol) {
  if (below_linear_speed(reaction, c)) {
    throw Error(ErrorKind::NoGroundStates, "no ground states below the linear speed 2 sqrt(g'(0))");
  }
  const double mu = mu_c(reaction.rho(), c);
  const StationaryProfile inv = invasion_state(reaction, c, tol);
  AlphaStar as;
  as.p_plus0 = inv.alpha;
  double lo = tol.eps_origin;
  double hi = inv.alpha;
  if (glued_fate(reaction, c, mu, lo, tol) != TerminalEvent::ReachedOrigin) {
    throw Error(ErrorKind::NoGroundStates, "small glued amplitudes do not reach the origin");
  }
  while (hi - lo > tol.tol_alpha) {
    const double mid = 0.5 * (lo + hi);
    if (glued_fate(reaction, c, mu, mid, tol) == TerminalEvent::ReachedOrigin) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  as.lo = lo;
  as.hi = hi;
  as.saturated = hi == inv.alpha;
  as.value = as.saturated ? inv.alpha : 0.5 * (lo + hi);
  return as;
}

StationaryProfile ground_state(const ShiftedReaction& reaction, double c, double alpha,
                               const ShootingTolerances& tol, const std::optional<AlphaStar>& known_alpha_star) {
  const AlphaStar as = known_alpha_star ? *known_alpha_star : alpha_star(reaction, c, tol);
  if (!(alpha > 0.0)) throw Error(ErrorKind::AmplitudeOutOfRange, "amplitude must be positive");
  if (alpha > as.value + tol.tol_alpha) {
    std::ostringstream os;
    os << "amplitude " << alpha << " exceeds alpha*_c = " << as.value;
    throw Error(ErrorKind::AmplitudeOutOfRange, os.str());
  }
  ProfileKind kind = ProfileKind::Ground;
  double a = alpha;
  if (as.saturated) {
    if (alpha >= as.p_plus0 - tol.tol_alpha) {
      throw Error(ErrorKind::AmplitudeOutOfRange, "amplitude p_+(0) gives the invasion state, not a ground state");
    }
  } else if (alpha >= as.value - tol.tol_alpha) {
    kind = ProfileKind::CriticalGround;
    a = as.lo;
  }
  const double mu = mu_c(reaction.rho(), c);
  ShootOptions opt;
  opt.events = EventMask{}
                   .with(TerminalEvent::CrossedPZeroAxis)
                   .with(TerminalEvent::ReachedOrigin)
                   .with(TerminalEvent::Diverged)
                   .with(TerminalEvent::CrossedUnitLine);
  opt.keep_dense = true;
  const Trajectory tr = shoot(reaction, c, a, mu * a, {0.0, tol.horizon}, tol, opt);
  if (tr.terminal_event != TerminalEvent::ReachedOrigin) {
    throw Error(ErrorKind::AmplitudeOutOfRange,
                "glued trajectory ended with " + to_string(tr.terminal_event) + " instead of reaching the origin");
  }

  StationaryProfile prof;
  prof.kind = kind;
  prof.c = c;
  prof.rho = reaction.rho();
  prof.g_prime_0 = reaction.growth().g_prime_0();
  prof.mu_c = mu;
  prof.alpha = a;
  prof.glue_slope = mu * a;
  prof.tolerances = tol;
  prof.right_samples = resample(tr, 0.0, tr.terminal_z, 0.0, tol.sample_dz, false);
  const double disc = std::max(c * c - 4.0 * reaction.growth().g_prime_0(), 0.0);
  prof.tail_rate = kind == ProfileKind::CriticalGround ? (c + std::sqrt(disc)) / 2.0 : (c - std::sqrt(disc)) / 2.0;
  try {
    prof.fitted_decay = fit_decay_rate(prof, default_fit_window(prof)).rate;
  } catch (const Error&) {
    prof.fitted_decay.reset();
  }
  return prof;
}

StationaryProfile critical_ground_state(const ShiftedReaction& reaction, double c, const ShootingTolerances& tol,
                                        const std::optional<AlphaStar>& known_alpha_star) {
  const AlphaStar as = known_alpha_star ? *known_alpha_star : alpha_star(reaction, c, tol);
  if (as.saturated) throw Error(ErrorKind::NoGroundStates, "c >= c*: the critical ground state is the invasion state");
  return ground_state(reaction, c, as.value, tol, as);
}

MinimalSpeed minimal_speed(const GrowthModel& model, const ShootingTolerances& tol) {
  const ShiftedReaction reaction(model, 1.0);
  const double d = tol.delta_manifold;
  ShootOptions opt;
  opt.events = EventMask{}
                   .with(TerminalEvent::CrossedPZeroAxis)
                   .with(TerminalEvent::ReachedOrigin)
                   .with(TerminalEvent::Diverged);
  // true when the unstable manifold of (1,0) overshoots p = 0, i.e. c < c*
  auto overshoots = [&](double c) {
    const double r_plus = saddle_rates(reaction, c).second;
    const Trajectory tr = shoot(reaction, c, 1.0 - d, -r_plus * d, {0.0, tol.horizon}, tol, opt);
    return tr.terminal_event == TerminalEvent::CrossedPZeroAxis || tr.terminal_event == TerminalEvent::Diverged;
  };
  MinimalSpeed ms;
  double lo = linear_speed(model);
  if (!overshoots(lo)) {
    ms.value = ms.lo = ms.hi = lo;
    return ms;
  }
  double step = 1.0;
  double hi = lo + step;
  while (overshoots(hi)) {
    lo = hi;
    step *= 2.0;
    hi = lo + step;
    if (hi > tol.c_max_search) {
      throw Error(ErrorKind::BracketFailure, "no front found below c_max_search");
    }
  }
  while (hi - lo > tol.tol_c) {
    const double mid = 0.5 * (lo + hi);
    (overshoots(mid) ? lo : hi) = mid;
  }
  ms.lo = lo;
  ms.hi = hi;
  ms.value = 0.5 * (lo + hi);
  return ms;
}

std::pair<double, double> default_fit_window(const StationaryProfile& profile) {
  const auto& s = profile.right_samples;
  std::size_t peak = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i].p > s[peak].p) peak = i;
  for (std::size_t i = peak; i < s.size(); ++i) {
    if (s[i].p < 0.1 * profile.alpha) return {s[i].z, s.back().z};
  }
  return {s.back().z, s.back().z};
}

DecayFit fit_decay_rate(const StationaryProfile& profile, std::pair<double, double> window) {
  if (profile.kind == ProfileKind::Invasion) {
    throw Error(ErrorKind::InvalidArgument, "decay fits apply to ground states only");
  }
  std::vector<double> z, lp, pv;
  for (const PhasePoint& pt : profile.right_samples) {
    if (pt.z < window.first || pt.z > window.second) continue;
    if (!(pt.p > 0.0)) throw Error(ErrorKind::InvalidArgument, "profile not positive on the fit window");
    if (pt.p >= 0.1 * profile.alpha) {
      throw Error(ErrorKind::InvalidArgument, "fit window must lie where p < 0.1 alpha");
    }
    z.push_back(pt.z);
    lp.push_back(std::log(pt.p));
    pv.push_back(pt.p);
  }
  const int n = static_cast<int>(z.size());
  if (n < 20) throw Error(ErrorKind::WindowTooShort, "fewer than 20 samples in the fit window");

  double zm = 0, lm = 0;
  for (int i = 0; i < n; ++i) {
    zm += z[i];
    lm += lp[i];
  }
  zm /= n;
  lm /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (z[i] - zm) * (z[i] - zm);
    sxy += (z[i] - zm) * (lp[i] - lm);
  }
  const double slope = sxy / sxx;
  double ssr = 0;
  for (int i = 0; i < n; ++i) {
    const double r = lp[i] - (lm + slope * (z[i] - zm));
    ssr += r * r;
  }
  DecayFit fit;
  fit.n = n;
  fit.window = window;
  fit.rate = -slope;
  fit.log_amplitude = lm - slope * zm;
  fit.stderr_rate = n > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
  fit.ci95 = 1.96 * fit.stderr_rate;

  const double c = profile.c;
  fit.critical_speed = std::abs(c * c - 4.0 * profile.g_prime_0) <= disc_tol(c);
  if (fit.critical_speed) {
    // p e^{r z} = A z + B by linear least squares, residual measured on log p
    for (const double r : {c / 2.0, std::sqrt(profile.g_prime_0) / 2.0}) {
      double s1 = 0, sz = 0, szz = 0, sy = 0, szy = 0;
      for (int i = 0; i < n; ++i) {
        const double y = pv[i] * std::exp(r * z[i]);
        s1 += 1;
        sz += z[i];
        szz += z[i] * z[i];
        sy += y;
        szy += z[i] * y;
      }
      const double det = s1 * szz - sz * sz;
      const double a = (s1 * szy - sz * sy) / det;
      const double b = (szz * sy - sz * szy) / det;
      double ss = 0;
      bool positive = true;
      for (int i = 0; i < n; ++i) {
        const double m = a * z[i] + b;
        if (!(m > 0.0)) {
          positive = false;
          break;
        }
        const double e = lp[i] - (std::log(m) - r * z[i]);
        ss += e * e;
      }
      const double rms = positive ? std::sqrt(ss / n) : std::numeric_limits<double>::infinity();
      fit.critical_candidates.push_back({r, a, b, rms});
    }
    const auto best = std::min_element(fit.critical_candidates.begin(), fit.critical_candidates.end(),
                                       [](const auto& x, const auto& y) { return x.rms < y.rms; });
    fit.rate = best->rate;
  }
  return fit;
}

double left_tail_rate(const StationaryProfile& profile) { return profile.mu_c; }

}  // namespace rangeshift

namespace rangeshift {

double theta_critical(const ShiftedReaction& reaction, double c, const ShootingTolerances& tol) {
  if (below_linear_speed(reaction, c)) return 0.0;
  const double disc = std::max(c * c - 4.0 * reaction.growth().g_prime_0(), 0.0);
  const double lam_plus = (c + std::sqrt(disc)) / 2.0;
  const double eps = tol.delta_manifold;
  ShootOptions opt;
  opt.events = EventMask{}
                   .with(TerminalEvent::CrossedPPrimeAxis)
                   .with(TerminalEvent::CrossedUnitLine)
                   .with(TerminalEvent::CrossedPZeroAxis)
                   .with(TerminalEvent::Diverged);
  const Trajectory tr = shoot(reaction, c, eps, -lam_plus * eps, {0.0, -tol.horizon}, tol, opt);
  if (tr.terminal_event == TerminalEvent::CrossedPPrimeAxis) {
    return std::min(tr.samples.front().p, 1.0);
  }
  if (tr.terminal_event == TerminalEvent::CrossedPZeroAxis) {
    throw Error(ErrorKind::ManifoldMiss, "extremal trajectory returned to p = 0");
  }
  return 1.0;
}

CompactBump spreading_bump(const ShiftedReaction& reaction, double c, double theta, const ShootingTolerances& tol,
                           double left_edge) {
  if (!(theta > 0.0 && theta < 1.0)) throw Error(ErrorKind::InvalidArgument, "bump peak must lie in (0, 1)");
  CompactBump bump;
  bump.c = c;
  bump.theta = theta;
  if (!below_linear_speed(reaction, c)) {
    bump.theta_c = theta_critical(reaction, c, tol);
    if (theta <= bump.theta_c) {
      std::ostringstream os;
      os << "theta = " << theta << " <= theta_c = " << bump.theta_c;
      throw Error(ErrorKind::ThetaBelowCritical, os.str());
    }
  }
  ShootOptions opt;
  opt.sample_dz = tol.sample_dz;
  opt.events = EventMask{}
                   .with(TerminalEvent::CrossedPZeroAxis)
                   .with(TerminalEvent::CrossedPPrimeAxis)
                   .with(TerminalEvent::ReachedOrigin)
                   .with(TerminalEvent::CrossedUnitLine)
                   .with(TerminalEvent::Diverged);
  const Trajectory right = shoot(reaction, c, theta, 0.0, {0.0, tol.horizon}, tol, opt);
  if (right.terminal_event == TerminalEvent::ReachedOrigin) {
    throw Error(ErrorKind::ThetaBelowCritical, "trajectory from (theta, 0) enters the origin");
  }
  const Trajectory left = shoot(reaction, c, theta, 0.0, {0.0, -tol.horizon}, tol, opt);
  if (right.terminal_event != TerminalEvent::CrossedPZeroAxis || left.terminal_event != TerminalEvent::CrossedPZeroAxis) {
    throw Error(ErrorKind::ManifoldMiss, "bump trajectory ended with " + to_string(left.terminal_event) + " / " +
                                             to_string(right.terminal_event));
  }
  const double shift = left_edge - left.terminal_z;
  bump.samples.reserve(left.samples.size() + right.samples.size());
  for (const PhasePoint& pt : left.samples) bump.samples.push_back({pt.z + shift, pt.p, pt.dp});
  for (std::size_t i = 1; i < right.samples.size(); ++i) {
    const PhasePoint& pt = right.samples[i];
    bump.samples.push_back({pt.z + shift, pt.p, pt.dp});
  }
  bump.samples.front().p = 0.0;
  bump.samples.back().p = 0.0;
  bump.z_left = bump.samples.front().z;
  bump.z_right = bump.samples.back().z;
  return bump;
}

double CompactBump::value_at(double z) const {
  if (z <= z_left || z >= z_right) return 0.0;
  return std::max(interpolate(samples, z).first, 0.0);
}

ExtinctionCap extinction_cap(const ShiftedReaction& reaction, double c, double alpha, const ShootingTolerances& tol,
                             const std::optional<AlphaStar>& known_alpha_star) {
  if (below_linear_speed(reaction, c)) {
    throw Error(ErrorKind::NoGroundStates, "no ground states below the linear speed 2 sqrt(g'(0))");
  }
  const AlphaStar as = known_alpha_star ? *known_alpha_star : alpha_star(reaction, c, tol);
  if (as.saturated) throw Error(ErrorKind::NoGroundStates, "c >= c*: no critical ground state");
  if (!(alpha > 0.0 && alpha < as.value - tol.tol_alpha)) {
    throw Error(ErrorKind::AmplitudeOutOfRange, "cap amplitude must lie in (0, alpha*_c)");
  }
  ExtinctionCap cap{.c = c,
                    .alpha = alpha,
                    .alpha_star = as.value,
                    .crossing_z = 0.0,
                    .crossings = 0,
                    .lower = ground_state(reaction, c, alpha, tol, as),
                    .critical = critical_ground_state(reaction, c, tol, as)};
  const double dz = tol.sample_dz;
  const double z_max = std::max(cap.lower.z_end(), cap.critical.z_end());
  double prev = cap.lower.value_at(0.0) - cap.critical.value_at(0.0);
  double z_prev = 0.0;
  for (long k = 1;; ++k) {
    const double z = static_cast<double>(k) * dz;
    if (z > z_max) break;
    const double d = cap.lower.value_at(z) - cap.critical.value_at(z);
    if (d == 0.0) continue;
    if (prev != 0.0 && (d > 0) != (prev > 0)) {
      if (cap.crossings == 0) cap.crossing_z = z_prev + (z - z_prev) * prev / (prev - d);
      ++cap.crossings;
    }
    prev = d;
    z_prev = z;
  }
  if (cap.crossings != 1) {
    std::ostringstream os;
    os << "p_alpha - p_alpha* changes sign " << cap.crossings << " times on z > 0";
    throw Error(ErrorKind::ManifoldMiss, os.str());
  }
  return cap;
}

std::vector<PhasePoint> ExtinctionCap::samples() const {
  std::vector<PhasePoint> out;
  const double dz = lower.tolerances.sample_dz;
  const double z_max = std::max(lower.z_end(), critical.z_end());
  const long n = static_cast<long>(std::floor(z_max / dz));
  for (long k = 0; k <= n; ++k) {
    const double z = static_cast<double>(k) * dz;
    const double a = lower.value_at(z);
    const double b = critical.value_at(z);
    out.push_back({z, std::min(a, b), a <= b ? lower.slope_at(z) : critical.slope_at(z)});
  }
  return out;
}

namespace {

Trajectory as_trajectory(const StationaryProfile& prof, TerminalEvent ev) {
  Trajectory tr;
  tr.samples = prof.right_samples;
  tr.terminal_event = ev;
  tr.terminal_z = prof.z_end();
  return tr;
}

}  // namespace

std::vector<PortraitCurve> phase_portrait(const ShiftedReaction& reaction, double c, const std::vector<double>& alphas,
                                          const ShootingTolerances& tol) {
  std::vector<PortraitCurve> out;
  const double mu = mu_c(reaction.rho(), c);
  ShootOptions opt;
  opt.sample_dz = 0.02;
  opt.events = EventMask{}
                   .with(TerminalEvent::CrossedPZeroAxis)
                   .with(TerminalEvent::ReachedOrigin)
                   .with(TerminalEvent::ReachedOne)
                   .with(TerminalEvent::Diverged);
  int id = 0;
  for (const double a : alphas) {
    out.push_back({id++, "glued", a, shoot(reaction, c, a, mu * a, {0.0, 200.0}, tol, opt)});
  }
  const StationaryProfile inv = invasion_state(reaction, c, tol);
  out.push_back({id++, "invasion", inv.alpha, as_trajectory(inv, TerminalEvent::ReachedOne)});
  if (!below_linear_speed(reaction, c)) {
    const AlphaStar as = alpha_star(reaction, c, tol);
    if (!as.saturated) {
      const StationaryProfile crit = critical_ground_state(reaction, c, tol, as);
      out.push_back({id++, "critical_ground", crit.alpha, as_trajectory(crit, TerminalEvent::ReachedOrigin)});
    }
  }
  return out;
}

}  // namespace rangeshift
