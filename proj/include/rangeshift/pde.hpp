#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rangeshift/phase_plane.hpp"
#include "rangeshift/reaction.hpp"

namespace rangeshift {

/// Uniform grid on [z_min, z_max] with z = 0 an exact node.
struct Grid1D {
  double z_min = -40.0;
  double z_max = 200.0;
  double dz = 0.05;
  int n = 0;
  int index_of_zero = 0;

  /// Snaps z_min and z_max to integer multiples of dz.
  static Grid1D make(double z_min, double z_max, double dz);

  double z(int i) const { return static_cast<double>(i - index_of_zero) * dz; }
  std::vector<double> nodes() const;
  /// Index range [first, last] of nodes inside [a, b].
  std::pair<int, int> index_range(double a, double b) const;
};

/// Nonnegative initial condition sampled on the grid by its pointwise trace.
class InitialDatum {
 public:
  /// amplitude * indicator of [a, b] (closed).
  static InitialDatum box(double amplitude, double a, double b);
  /// Monotone-cubic through (z, u), zero outside [z.front(), z.back()].
  static InitialDatum tabulated(std::vector<double> z, std::vector<double> u);
  static InitialDatum profile(const StationaryProfile& p, double scale = 1.0);
  static InitialDatum bump(const CompactBump& b, double scale = 1.0);
  static InitialDatum cap(const ExtinctionCap& cap, double scale = 1.0);
  /// Pointwise maximum of two data.
  static InitialDatum max_of(const InitialDatum& a, const InitialDatum& b);

  double operator()(double z) const { return fn_(z); }
  std::vector<double> sample(const Grid1D& grid) const;
  const std::string& label() const { return label_; }
  /// Support for compactly supported data; empty for profiles.
  const std::optional<std::pair<double, double>>& support() const { return support_; }

 private:
  InitialDatum(std::function<double(double)> fn, std::string label, std::optional<std::pair<double, double>> support)
      : fn_(std::move(fn)), label_(std::move(label)), support_(support) {}

  std::function<double(double)> fn_;
  std::string label_;
  std::optional<std::pair<double, double>> support_;
};

struct Field {
  double t = 0.0;
  std::vector<double> u;
};

enum class TimeScheme { ImexEuler, CrankNicolsonImex };
enum class AdvectionScheme { Auto, Centered, Upwind };
enum class InterfaceRule { Averaged, Favourable };
enum class RightBoundary { Dirichlet, ZeroFlux };

struct SolverConfig {
  double dt = 0.0;  // 0: half the monotonicity bound
  TimeScheme scheme = TimeScheme::ImexEuler;
  double horizon = 100.0;
  double snapshot_every = 1.0;
  AdvectionScheme advection = AdvectionScheme::Auto;
  InterfaceRule interface = InterfaceRule::Averaged;
  RightBoundary right = RightBoundary::Dirichlet;
  bool keep_fields = true;
};

/// 1 / max(rho, sup |g'|).
double dt_monotone(const ShiftedReaction& reaction);

/// Named scalar functional of a snapshot.
struct Observer {
  std::string name;
  std::function<double(const Field&)> fn;
};

Observer sup_norm_observer(const Grid1D& grid);
/// sup over nodes in [a, b] of |u - ref|.
Observer window_distance_observer(std::string name, const Grid1D& grid, std::vector<double> ref, double a, double b);
/// max over all nodes of (u - ref).
Observer excess_observer(std::string name, std::vector<double> ref);

struct Trace {
  std::vector<double> times;
  std::vector<Field> snapshots;  // empty unless keep_fields
  std::map<std::string, std::vector<double>> series;
  double dt = 0.0;
  double max_bound_excess = -1.0;  // max over steps of max(u) - M(t); <= 0 when the bound holds
  bool stopped_early = false;
  std::vector<std::string> warnings;

  const std::vector<double>& observed(const std::string& name) const;
};

/// Tridiagonal IMEX stepper for u_t = u_zz + c u_z + f(z, u) with
/// u_z = mu_c u at z_min and u = 0 (or u_z = 0) at z_max.
class Stepper {
 public:
  Stepper(const ShiftedReaction& reaction, double c, const Grid1D& grid, const SolverConfig& config);

  double dt() const { return dt_; }
  bool centered_advection() const { return centered_; }
  /// One step in place; throws UndershootError.
  void advance(std::vector<double>& u) const;
  /// Reaction term at node i and its derivative in u.
  double reaction(int i, double u) const;
  double reaction_derivative(int i, double u) const;
  /// Spatial operator plus reaction, the right-hand side of the semi-discrete system.
  std::vector<double> residual(const std::vector<double>& v) const;
  /// Newton iteration for an exact equilibrium of the scheme near `guess`.
  std::optional<std::vector<double>> stationary(std::vector<double> guess, double tol = 1e-12,
                                                int max_iter = 50) const;

 private:
  const ShiftedReaction* reaction_;
  Grid1D grid_;
  SolverConfig config_;
  double c_;
  double dt_;
  bool centered_;
  // A u = lower u_{i-1} + diag u_i + upper u_{i+1}
  std::vector<double> lower_, diag_, upper_;
  // LU factors of the implicit matrix
  std::vector<double> l_, d_inv_, up_;
  mutable std::vector<double> rhs_;
};

/// Equilibrium of the discrete scheme closest to a sampled profile (Newton);
/// nullopt when the iteration does not converge.
std::optional<std::vector<double>> discrete_stationary(const std::vector<double>& guess,
                                                       const ShiftedReaction& reaction, double c, const Grid1D& grid,
                                                       const SolverConfig& config);

Field step(const Field& field, const ShiftedReaction& reaction, double c, const Grid1D& grid,
           const SolverConfig& config);

/// Called at each snapshot after observers; return false to stop early.
using SnapshotHook = std::function<bool(const Field&, const Trace&)>;

Trace evolve(const InitialDatum& u0, const ShiftedReaction& reaction, double c, const Grid1D& grid,
             const SolverConfig& config, const std::vector<Observer>& observers = {},
             const SnapshotHook& hook = nullptr);
Trace evolve_field(std::vector<double> u0, const ShiftedReaction& reaction, double c, const Grid1D& grid,
                   const SolverConfig& config, const std::vector<Observer>& observers = {},
                   const SnapshotHook& hook = nullptr);

struct OrderWitness {
  bool holds = true;
  double t = 0.0;  // first violation
  double z = 0.0;
  double amount = 0.0;
  double max_violation = 0.0;  // max over all steps of max(u_low - u_high), clipped at 0
  long steps = 0;
};

OrderWitness order_check(const InitialDatum& low, const InitialDatum& high, const ShiftedReaction& reaction, double c,
                         const Grid1D& grid, const SolverConfig& config);

}  // namespace rangeshift
