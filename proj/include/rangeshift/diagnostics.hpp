#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rangeshift/pde.hpp"

namespace rangeshift {

struct SignChangeCount {
  int first = 0;  // index range [first, last]
  int last = 0;
  int count = 0;
  std::vector<int> zero_runs;  // index where each alternation completes
};

/// Strict sign alternations of h[first..last] after deleting zeros. Throws
/// AllZero when h vanishes on the whole range.
SignChangeCount sign_changes(std::span<const double> h, int first, int last);
SignChangeCount sign_changes(std::span<const double> h);

struct ZeroNumberSeries {
  struct Increase {
    std::size_t index;  // snapshot where the count went up
    int from;
    int to;
    bool artifact;  // magnitude 1 and reversed within 2 snapshots
  };
  std::vector<double> times;
  std::vector<int> counts;
  std::vector<Increase> increases;
  std::vector<std::size_t> drops;  // snapshots with a strict decrease
  bool nonincreasing = true;       // no persistent increase

  std::optional<double> first_drop_time() const;
};

/// |u - reference| below this at an end of I leaves the zero number undefined.
inline constexpr double kEndpointFloor = 1e-12;

/// Z_I[u(t) - reference] at every stored snapshot; reference sampled on the grid.
/// Throws EndpointVanishes when |h| < kEndpointFloor at an end of I at some snapshot.
ZeroNumberSeries zero_number_trace(const Trace& trace, const std::vector<double>& reference, const Grid1D& grid,
                                   std::pair<double, double> interval);

/// F(z, s) = -rho s^2 / 2 for z < 0 and int_0^s g for z >= 0.
double primitive_f(const ShiftedReaction& reaction, double z, double s);

/// Trapezoid quadrature of e^{cz} [(u_z)^2/2 - F(z, u)] over [z_min, right_cutoff].
/// Throws TailTooFat unless u < 1e-8 at the cutoff node.
double energy(const Field& field, const Grid1D& grid, const ShiftedReaction& reaction, double c, double right_cutoff);

struct EnvelopeReport {
  bool pass = true;
  bool critical_form = false;  // (1 + sqrt(z - Z)) e^{-c/2 (z - Z)}
  double rate = 0.0;
  double eps = 0.0;
  double z_eps = 0.0;
  double worst_ratio = 0.0;  // max of u / envelope over all snapshots and z >= Z_eps
  double worst_t = 0.0;
  double worst_z = 0.0;
  std::optional<double> first_failure_t;
  std::vector<double> times;
  std::vector<double> ratio_per_snapshot;
};

/// Checks u(t, z) <= eps e^{-lambda_gamma (z - Z_eps)} (or the critical-speed
/// envelope) for every stored snapshot and node z >= Z_eps.
EnvelopeReport exponential_bound_check(const Trace& trace, const Grid1D& grid, const ShiftedReaction& reaction,
                                       double c, double gamma, double eps, double z_eps);

struct EnvelopeCalibration {
  double eps = 0.0;
  double z_eps = 0.0;
};

/// Smallest node Z >= z_from such that eps = max_t u(t, Z) gives an envelope
/// holding on the snapshots with t <= t_max. Returns nullopt if none does.
std::optional<EnvelopeCalibration> calibrate_envelope(const Trace& trace, const Grid1D& grid,
                                                      const ShiftedReaction& reaction, double c, double gamma,
                                                      double z_from = 0.0,
                                                      double t_max = std::numeric_limits<double>::infinity());

/// Default gamma for the envelope: half the spectral gap c^2/4 - g'(0).
double default_gamma(const ShiftedReaction& reaction, double c);

}  // namespace rangeshift
