#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rangeshift/ode.hpp"
#include "rangeshift/reaction.hpp"

namespace rangeshift {

/// Tolerances for all shooting constructions. Defaults are the artifact's
/// documented choices; every one is overridable from a scenario file.
struct ShootingTolerances {
  double tol = 1e-10;             // integrator rtol, event localization in z
  double atol_scale = 1e-10;      // atol = tol * atol_scale
  double eps_origin = 1e-9;       // |p| + |p'| below this counts as the origin
  double eps_glue = 1e-9;         // |p'(0) - mu_c p(0)|
  double eps_tail = 1e-6;         // profile end must be this close to its limit
  double delta_manifold = 1e-8;   // seed offset along saddle eigenvectors
  double tol_alpha = 1e-9;
  double tol_c = 1e-4;
  double p_floor = 1e-3;          // Diverged when p < -p_floor
  double horizon = 5000.0;        // longest |z| travelled by one shot
  double sample_dz = 2e-3;        // uniform resampling step for profiles and bumps
  double c_max_search = 50.0;
};

enum class TerminalEvent {
  CrossedPZeroAxis,   // p = 0
  CrossedPPrimeAxis,  // p' = 0, sign change only
  ReachedOrigin,      // |p| + |p'| < eps_origin and the linearization predicts decay without a sign change
  ReachedOne,         // |p - 1| + |p'| < eps_origin
  Diverged,           // p > s_max or p < -p_floor
  HorizonReached,
  CrossedGlueLine,    // p' = mu_c p (used by the invasion construction)
  CrossedUnitLine,    // p = 1
};

std::string to_string(TerminalEvent e);

/// Bit set of terminal events a shot stops on.
class EventMask {
 public:
  constexpr EventMask() = default;
  static constexpr EventMask standard() {
    return EventMask{}
        .with(TerminalEvent::CrossedPZeroAxis)
        .with(TerminalEvent::CrossedPPrimeAxis)
        .with(TerminalEvent::ReachedOrigin)
        .with(TerminalEvent::ReachedOne)
        .with(TerminalEvent::Diverged);
  }
  constexpr EventMask with(TerminalEvent e) const {
    EventMask m = *this;
    m.bits_ |= 1u << static_cast<unsigned>(e);
    return m;
  }
  constexpr EventMask without(TerminalEvent e) const {
    EventMask m = *this;
    m.bits_ &= ~(1u << static_cast<unsigned>(e));
    return m;
  }
  constexpr bool has(TerminalEvent e) const { return (bits_ >> static_cast<unsigned>(e)) & 1u; }

 private:
  unsigned bits_ = 0;
};

struct PhasePoint {
  double z;
  double p;
  double dp;
};

struct Trajectory {
  std::vector<PhasePoint> samples;  // strictly increasing in z, whatever the shooting direction
  TerminalEvent terminal_event = TerminalEvent::HorizonReached;
  double terminal_z = 0.0;
  std::vector<ode::DenseStep> dense;  // filled when requested; ordered along the shot

  /// Dense-output state at z; z must lie in the integrated range.
  ode::State at(double z) const;
};

struct ShootOptions {
  EventMask events = EventMask::standard();
  double sample_dz = 0.0;   // > 0: uniform samples anchored at the start; else accepted step ends
  bool keep_dense = false;
  double mu = 0.0;          // glue line slope for CrossedGlueLine
};

/// Integrates p'' + c p' + g(p) = 0 from (p0, q0) at z_span.first towards
/// z_span.second, stopping at the first enabled event.
Trajectory shoot(const ShiftedReaction& reaction, double c, double p0, double q0,
                 std::pair<double, double> z_span, const ShootingTolerances& tol,
                 const ShootOptions& options = {});

enum class ProfileKind { Invasion, Ground, CriticalGround };
std::string to_string(ProfileKind k);

/// Stationary solution of the moving-frame equation. The left tail is stored
/// analytically (alpha e^{mu_c z}); the right part as uniform samples from z = 0.
struct StationaryProfile {
  ProfileKind kind = ProfileKind::Invasion;
  double c = 0.0;
  double rho = 1.0;
  double g_prime_0 = 0.0;
  double mu_c = 0.0;
  double alpha = 0.0;
  double glue_slope = 0.0;
  std::vector<PhasePoint> right_samples;
  std::optional<double> fitted_decay;
  double tail_rate = 0.0;  // rate used to extrapolate past the last sample
  ShootingTolerances tolerances;

  double z_end() const { return right_samples.back().z; }
  double value_at(double z) const;
  double slope_at(double z) const;
  /// Samples value_at on the given nodes.
  std::vector<double> sample(const std::vector<double>& z) const;
};

StationaryProfile invasion_state(const ShiftedReaction& reaction, double c, const ShootingTolerances& tol = {});

struct AlphaStar {
  double value = 0.0;
  double lo = 0.0;  // largest probed amplitude whose trajectory reached the origin
  double hi = 0.0;  // smallest probed amplitude that did not
  double p_plus0 = 0.0;
  bool saturated = false;  // alpha*_c = p_+^c(0), i.e. c >= c*
};

AlphaStar alpha_star(const ShiftedReaction& reaction, double c, const ShootingTolerances& tol = {});

StationaryProfile ground_state(const ShiftedReaction& reaction, double c, double alpha,
                               const ShootingTolerances& tol = {},
                               const std::optional<AlphaStar>& known_alpha_star = std::nullopt);

/// Critical ground state p_{alpha*_c}; throws NoGroundStates outside [2 sqrt(g'(0)), c*).
StationaryProfile critical_ground_state(const ShiftedReaction& reaction, double c,
                                        const ShootingTolerances& tol = {},
                                        const std::optional<AlphaStar>& known_alpha_star = std::nullopt);

struct MinimalSpeed {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

MinimalSpeed minimal_speed(const GrowthModel& model, const ShootingTolerances& tol = {});

struct DecayFit {
  struct Candidate {
    double rate;
    double a;  // coefficient of z
    double b;
    double rms;
  };
  double rate = 0.0;
  double stderr_rate = 0.0;
  double ci95 = 0.0;  // half width
  double log_amplitude = 0.0;
  int n = 0;
  std::pair<double, double> window;
  bool critical_speed = false;
  std::vector<Candidate> critical_candidates;  // (Az+B)e^{-rz} fits at c = 2 sqrt(g'(0))
};

/// Window starting where p first drops below 0.1 alpha, ending at the last sample.
std::pair<double, double> default_fit_window(const StationaryProfile& profile);
DecayFit fit_decay_rate(const StationaryProfile& profile, std::pair<double, double> window);
/// The left tail is analytic, its rate is mu_c exactly.
double left_tail_rate(const StationaryProfile& profile);

enum class BumpRole { SpreadingSubsolution, ExtinctionCap };

struct CompactBump {
  BumpRole role = BumpRole::SpreadingSubsolution;
  double c = 0.0;
  double theta = 0.0;
  double theta_c = 0.0;  // 0 when c < 2 sqrt(g'(0)) (any theta admissible)
  double z_left = 0.0;
  double z_right = 0.0;
  std::vector<PhasePoint> samples;  // on [z_left, z_right], zero at both ends

  double support_length() const { return z_right - z_left; }
  double value_at(double z) const;
};

/// Axis crossing (theta_c, 0) of the extremal trajectory entering the origin
/// along the fast direction; 1 when that trajectory reaches p = 1 first (c >= c*).
double theta_critical(const ShiftedReaction& reaction, double c, const ShootingTolerances& tol = {});

/// Compactly supported stationary subsolution through (theta, 0), shifted so
/// its support starts at left_edge.
CompactBump spreading_bump(const ShiftedReaction& reaction, double c, double theta,
                           const ShootingTolerances& tol = {}, double left_edge = 1.0);

/// min{p_alpha, p_{alpha*_c}}: a generalized stationary supersolution.
struct ExtinctionCap {
  double c = 0.0;
  double alpha = 0.0;
  double alpha_star = 0.0;
  double crossing_z = 0.0;  // p_alpha = p_{alpha*_c} on z > 0
  int crossings = 0;        // sign changes of p_alpha - p_{alpha*_c} on the sampled z > 0
  StationaryProfile lower;
  StationaryProfile critical;

  double value_at(double z) const { return std::min(lower.value_at(z), critical.value_at(z)); }
  std::vector<PhasePoint> samples() const;
};

ExtinctionCap extinction_cap(const ShiftedReaction& reaction, double c, double alpha,
                             const ShootingTolerances& tol = {},
                             const std::optional<AlphaStar>& known_alpha_star = std::nullopt);

struct PortraitCurve {
  int id = 0;
  std::string tag;  // "glued", "invasion", "critical_ground"
  double alpha = 0.0;
  Trajectory trajectory;
};

/// Trajectories launched from the glue half-line p' = mu_c p at the given
/// amplitudes, plus p_+^c and (when defined) the critical ground state.
std::vector<PortraitCurve> phase_portrait(const ShiftedReaction& reaction, double c,
                                          const std::vector<double>& alphas,
                                          const ShootingTolerances& tol = {});

}  // namespace rangeshift
