#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rangeshift/classifier.hpp"

namespace rangeshift {

/// sigma -> initial datum, increasing and L1-continuous in sigma.
struct OrderedFamily {
  std::string name;
  std::function<InitialDatum(double)> generator;

  /// sigma * indicator of [a, b].
  static OrderedFamily amplitude(double a, double b);
  /// amplitude * indicator of [center - sigma, center + sigma].
  static OrderedFamily width(double amplitude, double center = 0.0);
};

struct FamilyCheck {
  bool ordered = true;
  bool continuous = true;
  std::vector<double> l1_steps;  // ||u_{sigma+h} - u_sigma||_1 for the probed h, largest h first
  std::string detail;
  bool ok() const { return ordered && continuous; }
};

/// Samples the ordering and continuity obligations at the given sigmas.
FamilyCheck check_family(const OrderedFamily& family, const std::vector<double>& sigmas);

struct Probe {
  double param = 0.0;
  Verdict verdict = Verdict::Undetermined;  // raw classifier verdict
  std::optional<Verdict> settled;           // Spreading / Extinction, if reached
  double decided_at = 0.0;
  double horizon_used = 0.0;  // base, 2x or 4x base
  double min_dist_ground = 0.0;
  double t_min_dist_ground = 0.0;
  bool abstained() const { return !settled; }
};

enum class Degenerate { None, AtLowEnd, AtHighEnd };

struct ThresholdResult {
  std::string parameter;  // "sigma" or "c"
  double lo = 0.0;
  double hi = 0.0;
  Verdict outcome_lo = Verdict::Undetermined;
  Verdict outcome_hi = Verdict::Undetermined;
  Degenerate degenerate = Degenerate::None;
  double value = 0.0;  // reported threshold (midpoint, degenerate value or clamped value)
  bool clamped = false;
  double raw_value = 0.0;
  std::vector<Probe> runs;  // every evaluated probe, sorted by parameter
  std::optional<Probe> midpoint;
};

struct ThresholdOptions {
  int workers = 1;
  double max_horizon_factor = 4.0;
  bool probe_midpoint = true;
};

/// Outcome-driven bisection for sigma* over a family at fixed c.
ThresholdResult find_sigma_star(const OrderedFamily& family, const ShiftedReaction& reaction, double c,
                                const Grid1D& grid, const SolverConfig& solver, const ClassifierConfig& classifier,
                                double tol_sigma, std::pair<double, double> sigma_range,
                                const ThresholdOptions& options = {});

/// Bisection for c(u0) over [2 sqrt(g'(0)) - 10 tol_c, c* + 10 tol_c]; the
/// result is clamped to [2 sqrt(g'(0)), c*].
ThresholdResult find_critical_speed(const InitialDatum& u0, const ShiftedReaction& reaction, const Grid1D& grid,
                                    const SolverConfig& solver, const ClassifierConfig& classifier, double tol_c,
                                    const ThresholdOptions& options = {});

struct SweepRow {
  double c = 0.0;
  double sigma = 0.0;
  Probe probe;
};

/// (c, sigma) outcome diagram, evaluated in parallel.
std::vector<SweepRow> sweep(const OrderedFamily& family, const ShiftedReaction& reaction,
                            const std::vector<double>& speeds, const std::vector<double>& sigmas, const Grid1D& grid,
                            const SolverConfig& solver, const ClassifierConfig& classifier,
                            const ThresholdOptions& options = {});

/// Runs jobs 0..n-1 on up to `workers` threads; results land by index.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& job);

}  // namespace rangeshift
