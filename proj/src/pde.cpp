#include "rangeshift/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rangeshift/error.hpp"
#include "rangeshift/interp.hpp"

namespace rangeshift {

Grid1D Grid1D::make(double z_min, double z_max, double dz) {
  if (!(dz > 0.0) || !(z_min < 0.0) || !(z_max > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "grid needs z_min < 0 < z_max and dz > 0");
  }
  Grid1D g;
  const long left = std::lround(-z_min / dz);
  const long right = std::lround(z_max / dz);
  g.dz = dz;
  g.index_of_zero = static_cast<int>(left);
  g.n = static_cast<int>(left + right + 1);
  g.z_min = -static_cast<double>(left) * dz;
  g.z_max = static_cast<double>(right) * dz;
  if (g.n < 101) throw Error(ErrorKind::InvalidArgument, "grid needs at least 101 nodes");
  if (left < 1 || right < 1) throw Error(ErrorKind::InvalidArgument, "z = 0 must be an interior node");
  return g;
}

std::vector<double> Grid1D::nodes() const {
  std::vector<double> z(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = this->z(i);
  return z;
}

std::pair<int, int> Grid1D::index_range(double a, double b) const {
  const int first = std::clamp(static_cast<int>(std::ceil(a / dz - 1e-9)) + index_of_zero, 0, n - 1);
  const int last = std::clamp(static_cast<int>(std::floor(b / dz + 1e-9)) + index_of_zero, 0, n - 1);
  return {first, last};
}

InitialDatum InitialDatum::box(double amplitude, double a, double b) {
  if (!(amplitude >= 0.0) || !(a < b)) throw Error(ErrorKind::InvalidArgument, "box needs amplitude >= 0 and a < b");
  std::ostringstream os;
  os << amplitude << "*chi[" << a << "," << b << "]";
  return InitialDatum([=](double z) { return (z >= a && z <= b) ? amplitude : 0.0; }, os.str(),
                      std::make_pair(a, b));
}

InitialDatum InitialDatum::tabulated(std::vector<double> z, std::vector<double> u) {
  if (std::any_of(u.begin(), u.end(), [](double v) { return !(v >= 0.0) || !std::isfinite(v); })) {
    throw Error(ErrorKind::InvalidArgument, "tabulated datum must be finite and nonnegative");
  }
  const double a = z.empty() ? 0.0 : z.front();
  const double b = z.empty() ? 0.0 : z.back();
  auto interp = std::make_shared<MonotoneCubic>(std::move(z), std::move(u));
  return InitialDatum([interp, a, b](double x) { return (x < a || x > b) ? 0.0 : std::max((*interp)(x), 0.0); },
                      "tabulated", std::make_pair(a, b));
}

InitialDatum InitialDatum::profile(const StationaryProfile& p, double scale) {
  auto keep = std::make_shared<StationaryProfile>(p);
  return InitialDatum([keep, scale](double z) { return scale * keep->value_at(z); },
                      "profile:" + to_string(p.kind), std::nullopt);
}

InitialDatum InitialDatum::bump(const CompactBump& b, double scale) {
  auto keep = std::make_shared<CompactBump>(b);
  return InitialDatum([keep, scale](double z) { return scale * keep->value_at(z); }, "bump",
                      std::make_pair(b.z_left, b.z_right));
}

InitialDatum InitialDatum::cap(const ExtinctionCap& cap, double scale) {
  auto keep = std::make_shared<ExtinctionCap>(cap);
  return InitialDatum([keep, scale](double z) { return scale * keep->value_at(z); }, "cap", std::nullopt);
}

InitialDatum InitialDatum::max_of(const InitialDatum& a, const InitialDatum& b) {
  std::optional<std::pair<double, double>> support;
  if (a.support_ && b.support_) {
    support = std::make_pair(std::min(a.support_->first, b.support_->first),
                             std::max(a.support_->second, b.support_->second));
  }
  return InitialDatum([a, b](double z) { return std::max(a(z), b(z)); }, "max(" + a.label_ + "," + b.label_ + ")",
                      support);
}

std::vector<double> InitialDatum::sample(const Grid1D& grid) const {
  if (support_ && (support_->first <= grid.z_min || support_->second >= grid.z_max)) {
    throw Error(ErrorKind::InvalidArgument, "initial datum support must lie inside the grid");
  }
  std::vector<double> u(static_cast<std::size_t>(grid.n));
  for (int i = 0; i < grid.n; ++i) u[static_cast<std::size_t>(i)] = fn_(grid.z(i));
  return u;
}

double dt_monotone(const ShiftedReaction& reaction) { return 1.0 / reaction.lipschitz(); }

Observer sup_norm_observer(const Grid1D&) {
  return {"sup", [](const Field& f) { return *std::max_element(f.u.begin(), f.u.end()); }};
}

Observer window_distance_observer(std::string name, const Grid1D& grid, std::vector<double> ref, double a, double b) {
  const auto [first, last] = grid.index_range(a, b);
  return {std::move(name), [ref = std::move(ref), first, last](const Field& f) {
            double m = 0.0;
            for (int i = first; i <= last; ++i) {
              const auto k = static_cast<std::size_t>(i);
              m = std::max(m, std::abs(f.u[k] - ref[k]));
            }
            return m;
          }};
}

Observer excess_observer(std::string name, std::vector<double> ref) {
  return {std::move(name), [ref = std::move(ref)](const Field& f) {
            double m = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < ref.size(); ++k) m = std::max(m, f.u[k] - ref[k]);
            return m;
          }};
}

const std::vector<double>& Trace::observed(const std::string& name) const {
  auto it = series.find(name);
  if (it == series.end()) throw Error(ErrorKind::MissingReference, "trace has no observer '" + name + "'");
  return it->second;
}

Stepper::Stepper(const ShiftedReaction& reaction, double c, const Grid1D& grid, const SolverConfig& config)
    : reaction_(&reaction), grid_(grid), config_(config), c_(c) {
  if (!(c >= 0.0)) throw Error(ErrorKind::InvalidArgument, "speed must be nonnegative");
  const double bound = dt_monotone(reaction);
  dt_ = config.dt > 0.0 ? config.dt : 0.5 * bound;
  if (config.dt < 0.0 || !std::isfinite(config.dt)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  if (dt_ > bound * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt = " << dt_ << " exceeds 1/L_f = " << bound;
    throw Error(ErrorKind::MonotonicityViolation, os.str());
  }
  const double dz = grid.dz;
  switch (config.advection) {
    case AdvectionScheme::Centered:
      if (c * dz > 2.0) throw Error(ErrorKind::MonotonicityViolation, "centered advection needs c dz <= 2");
      centered_ = true;
      break;
    case AdvectionScheme::Upwind: centered_ = false; break;
    case AdvectionScheme::Auto: centered_ = c * dz <= 2.0; break;
  }

  const auto n = static_cast<std::size_t>(grid.n);
  lower_.assign(n, 0.0);
  diag_.assign(n, 0.0);
  upper_.assign(n, 0.0);
  const double dif = 1.0 / (dz * dz);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (centered_) {
      lower_[i] = dif - c / (2.0 * dz);
      diag_[i] = -2.0 * dif;
      upper_[i] = dif + c / (2.0 * dz);
    } else {
      lower_[i] = dif;
      diag_[i] = -2.0 * dif - c / dz;
      upper_[i] = dif + c / dz;
    }
  }
  // Robin row through the ghost node u_{-1} = u_1 - 2 dz mu u_0
  const double mu = mu_c(reaction.rho(), c);
  upper_[0] = 2.0 * dif;
  diag_[0] = -2.0 * dif - 2.0 * mu / dz;
  if (centered_) {
    diag_[0] += c * mu;
  } else {
    upper_[0] += c / dz;
    diag_[0] -= c / dz;
  }
  if (config.right == RightBoundary::ZeroFlux) {
    // ghost node u_n = u_{n-2}
    lower_[n - 1] = 2.0 * dif;
    diag_[n - 1] = -2.0 * dif;
    if (!centered_) {
      lower_[n - 1] += c / dz;
      diag_[n - 1] -= c / dz;
    }
  }

  const double theta = config.scheme == TimeScheme::ImexEuler ? 1.0 : 0.5;
  std::vector<double> ml(n), md(n), mu_(n);
  for (std::size_t i = 0; i < n; ++i) {
    ml[i] = -theta * dt_ * lower_[i];
    md[i] = 1.0 - theta * dt_ * diag_[i];
    mu_[i] = -theta * dt_ * upper_[i];
  }
  l_.assign(n, 0.0);
  d_inv_.assign(n, 0.0);
  up_ = mu_;
  double d = md[0];
  d_inv_[0] = 1.0 / d;
  for (std::size_t i = 1; i < n; ++i) {
    l_[i] = ml[i] * d_inv_[i - 1];
    d = md[i] - l_[i] * up_[i - 1];
    d_inv_[i] = 1.0 / d;
  }
  rhs_.assign(n, 0.0);
}

double Stepper::reaction(int i, double u) const {
  const int i0 = grid_.index_of_zero;
  if (i < i0) return -reaction_->rho() * u;
  if (i > i0 || config_.interface == InterfaceRule::Favourable) return reaction_->growth()(u);
  return 0.5 * (reaction_->growth()(u) - reaction_->rho() * u);
}

double Stepper::reaction_derivative(int i, double u) const {
  const int i0 = grid_.index_of_zero;
  if (i < i0) return -reaction_->rho();
  if (i > i0 || config_.interface == InterfaceRule::Favourable) return reaction_->growth().derivative(u);
  return 0.5 * (reaction_->growth().derivative(u) - reaction_->rho());
}

std::vector<double> Stepper::residual(const std::vector<double>& v) const {
  const std::size_t n = v.size();
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    double a = diag_[i] * v[i];
    if (i > 0) a += lower_[i] * v[i - 1];
    if (i + 1 < n) a += upper_[i] * v[i + 1];
    r[i] = a + reaction(static_cast<int>(i), v[i]);
  }
  if (config_.right == RightBoundary::Dirichlet) r[n - 1] = v[n - 1];
  return r;
}

std::optional<std::vector<double>> Stepper::stationary(std::vector<double> v, double tol, int max_iter) const {
  const std::size_t n = v.size();
  if (config_.right == RightBoundary::Dirichlet) v[n - 1] = 0.0;
  std::vector<double> lo(n), di(n), up(n), rhs(n);
  for (int it = 0; it < max_iter; ++it) {
    std::vector<double> r = residual(v);
    double norm = 0.0;
    for (const double x : r) norm = std::max(norm, std::abs(x));
    if (norm < tol) return v;
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = lower_[i];
      up[i] = upper_[i];
      di[i] = diag_[i] + reaction_derivative(static_cast<int>(i), v[i]);
      rhs[i] = -r[i];
    }
    if (config_.right == RightBoundary::Dirichlet) {
      lo[n - 1] = 0.0;
      di[n - 1] = 1.0;
    }
    // Thomas on the Jacobian
    for (std::size_t i = 1; i < n; ++i) {
      const double m = lo[i] / di[i - 1];
      di[i] -= m * up[i - 1];
      rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= di[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - up[i] * rhs[i + 1]) / di[i];
    for (std::size_t i = 0; i < n; ++i) v[i] += rhs[i];
    if (!std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); })) return std::nullopt;
  }
  return std::nullopt;
}

void Stepper::advance(std::vector<double>& u) const {
  const std::size_t n = u.size();
  const bool cn = config_.scheme == TimeScheme::CrankNicolsonImex;
  for (std::size_t i = 0; i < n; ++i) {
    double r = u[i] + dt_ * reaction(static_cast<int>(i), u[i]);
    if (cn) {
      double au = diag_[i] * u[i];
      if (i > 0) au += lower_[i] * u[i - 1];
      if (i + 1 < n) au += upper_[i] * u[i + 1];
      r += 0.5 * dt_ * au;
    }
    rhs_[i] = r;
  }
  if (config_.right == RightBoundary::Dirichlet) rhs_[n - 1] = 0.0;
  for (std::size_t i = 1; i < n; ++i) rhs_[i] -= l_[i] * rhs_[i - 1];
  u[n - 1] = rhs_[n - 1] * d_inv_[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) u[i] = (rhs_[i] - up_[i] * u[i + 1]) * d_inv_[i];
  for (std::size_t i = 0; i < n; ++i) {
    if (u[i] < 0.0) {
      if (u[i] > -1e-14) {
        u[i] = 0.0;
      } else {
        std::ostringstream os;
        os << "u = " << u[i] << " at z = " << grid_.z(static_cast<int>(i));
        throw Error(ErrorKind::UndershootError, os.str());
      }
    }
  }
}

std::optional<std::vector<double>> discrete_stationary(const std::vector<double>& guess,
                                                       const ShiftedReaction& reaction, double c, const Grid1D& grid,
                                                       const SolverConfig& config) {
  if (guess.size() != static_cast<std::size_t>(grid.n)) throw Error(ErrorKind::InvalidArgument, "guess/grid mismatch");
  return Stepper(reaction, c, grid, config).stationary(guess);
}

Field step(const Field& field, const ShiftedReaction& reaction, double c, const Grid1D& grid,
           const SolverConfig& config) {
  if (field.u.size() != static_cast<std::size_t>(grid.n)) {
    throw Error(ErrorKind::InvalidArgument, "field does not match the grid");
  }
  const Stepper st(reaction, c, grid, config);
  Field out = field;
  st.advance(out.u);
  out.t += st.dt();
  return out;
}

namespace {

void check_datum(const std::vector<double>& u, const ShiftedReaction& reaction) {
  for (const double v : u) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorKind::InvalidArgument, "initial datum must be finite and >= 0");
    if (v > reaction.growth().s_max()) {
      throw Error(ErrorKind::DomainError, "initial datum exceeds s_max of the growth model");
    }
  }
}

}  // namespace

Trace evolve_field(std::vector<double> u, const ShiftedReaction& reaction, double c, const Grid1D& grid,
                   const SolverConfig& config, const std::vector<Observer>& observers, const SnapshotHook& hook) {
  if (u.size() != static_cast<std::size_t>(grid.n)) throw Error(ErrorKind::InvalidArgument, "field does not match grid");
  if (!(config.horizon > 0.0) || !(config.snapshot_every > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "horizon and snapshot spacing must be positive");
  }
  check_datum(u, reaction);
  const Stepper st(reaction, c, grid, config);
  const double dt = st.dt();
  const long stride = std::max(1L, std::lround(config.snapshot_every / dt));
  const long n_steps = static_cast<long>(std::ceil(config.horizon / dt - 1e-9));
  const GrowthModel& g = reaction.growth();
  const double rho = reaction.rho();
  double bound = std::max(1.0, *std::max_element(u.begin(), u.end()));

  Trace tr;
  tr.dt = dt;
  for (const Observer& ob : observers) tr.series[ob.name];
  const auto probe = static_cast<std::size_t>(std::max(0, grid.n - 11));
  bool warned = false;

  auto snapshot = [&](long k) {
    Field f{static_cast<double>(k) * dt, u};
    tr.times.push_back(f.t);
    for (const Observer& ob : observers) tr.series[ob.name].push_back(ob.fn(f));
    if (!warned && u[probe] > 1e-8) {
      std::ostringstream os;
      os << "u(z_max - 10 dz) = " << u[probe] << " at t = " << f.t << "; the right boundary is felt";
      tr.warnings.push_back(os.str());
      warned = true;
    }
    const bool go_on = hook ? hook(f, tr) : true;
    if (config.keep_fields) tr.snapshots.push_back(std::move(f));
    return go_on;
  };

  if (!snapshot(0)) {
    tr.stopped_early = true;
    return tr;
  }
  for (long k = 1; k <= n_steps; ++k) {
    st.advance(u);
    bound += dt * std::max(g(bound), -rho * bound);
    tr.max_bound_excess = std::max(tr.max_bound_excess, *std::max_element(u.begin(), u.end()) - bound);
    if (k % stride == 0 || k == n_steps) {
      if (!snapshot(k)) {
        tr.stopped_early = true;
        break;
      }
    }
  }
  return tr;
}

Trace evolve(const InitialDatum& u0, const ShiftedReaction& reaction, double c, const Grid1D& grid,
             const SolverConfig& config, const std::vector<Observer>& observers, const SnapshotHook& hook) {
  return evolve_field(u0.sample(grid), reaction, c, grid, config, observers, hook);
}

OrderWitness order_check(const InitialDatum& low, const InitialDatum& high, const ShiftedReaction& reaction, double c,
                         const Grid1D& grid, const SolverConfig& config) {
  const Stepper st(reaction, c, grid, config);
  std::vector<double> a = low.sample(grid);
  std::vector<double> b = high.sample(grid);
  check_datum(a, reaction);
  check_datum(b, reaction);
  OrderWitness w;
  auto compare = [&](double t) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      w.max_violation = std::max(w.max_violation, d);
      if (d > 1e-12 && w.holds) {
        w.holds = false;
        w.t = t;
        w.z = grid.z(static_cast<int>(i));
        w.amount = d;
      }
    }
    return w.holds;
  };
  if (!compare(0.0)) return w;
  const long n_steps = static_cast<long>(std::ceil(config.horizon / st.dt() - 1e-9));
  for (long k = 1; k <= n_steps; ++k) {
    st.advance(a);
    st.advance(b);
    w.steps = k;
    if (!compare(static_cast<double>(k) * st.dt())) break;
  }
  return w;
}

}  // namespace rangeshift
