#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rangeshift/pde.hpp"
#include "rangeshift/phase_plane.hpp"

namespace rangeshift {

enum class Verdict { Spreading, Extinction, Grounding, Undetermined };
std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

struct ClassifierConfig {
  double eps_extinct = 1e-4;
  double eps_spread = 1e-2;
  double eps_ground = 2e-2;
  double window = 20.0;  // |z| <= window for the locally uniform check
  double dwell = 10.0;
  double horizon = 200.0;

  void validate() const;
};

/// Profiles a classification compares against. `critical` must be present
/// whenever `critical_exists` (c in [2 sqrt(g'(0)), c*)).
struct References {
  std::optional<StationaryProfile> invasion;
  std::optional<StationaryProfile> critical;
  bool critical_exists = false;
};

References make_references(const ShiftedReaction& reaction, double c, const ShootingTolerances& tol = {});

// Observer names used by the classifier.
inline constexpr const char* kSup = "sup";
inline constexpr const char* kDistInvasion = "dist_invasion";
inline constexpr const char* kDistGround = "dist_ground";
inline constexpr const char* kExcessInvasion = "excess_invasion";

std::vector<Observer> classifier_observers(const Grid1D& grid, const References& refs, const ClassifierConfig& config);

struct Evidence {
  std::string metric;
  double time;
  double value;
};

struct Outcome {
  Verdict verdict = Verdict::Undetermined;
  double decided_at = 0.0;  // time the winning dwell completed
  double horizon_used = 0.0;
  /// Spreading or Extinction dwell completed after a Grounding verdict.
  std::optional<Verdict> resolution;
  double resolved_at = 0.0;
  double min_dist_ground = 0.0;  // min over snapshots of sup_z |u - p_{alpha*}| (NaN without reference)
  double t_min_dist_ground = 0.0;
  std::vector<Evidence> evidence;  // every metric at every snapshot
  ClassifierConfig config;

  /// Spreading / Extinction when known (directly or via resolution).
  std::optional<Verdict> settled() const;
};

/// Incremental version of classify; feed snapshots in time order.
class OutcomeTracker {
 public:
  OutcomeTracker(ClassifierConfig config, bool ground_available);

  void update(double t, double sup, double dist_invasion, std::optional<double> dist_ground);
  /// True once no further snapshot can change the verdict or its resolution.
  bool finished() const;
  Outcome outcome(double horizon_used) const;

 private:
  struct Dwell {
    std::optional<double> since;
    std::optional<double> completed;
    void feed(double t, bool ok, double d);
  };
  ClassifierConfig config_;
  bool ground_available_;
  Dwell extinct_, spread_, ground_;
  std::optional<Verdict> first_;
  double first_at_ = 0.0;
  std::optional<Verdict> resolution_;
  double resolved_at_ = 0.0;
  double min_ground_ = std::numeric_limits<double>::quiet_NaN();
  double t_min_ground_ = 0.0;
  double last_t_ = 0.0;
};

Outcome classify(const Trace& trace, const References& refs, const ClassifierConfig& config);

struct DistanceMetrics {
  double sup_window = 0.0;
  double sup_global = 0.0;
  double l2_weighted = 0.0;  // (int_{z_min}^{window end} e^{cz} (u - p)^2 dz)^{1/2}
};

DistanceMetrics distance_metrics(const Field& field, const Grid1D& grid, const std::vector<double>& profile,
                                 std::pair<double, double> window, double c);

/// Evolves and classifies, stopping once the outcome is settled.
struct ClassifiedRun {
  Trace trace;
  Outcome outcome;
};
ClassifiedRun run_and_classify(const InitialDatum& u0, const ShiftedReaction& reaction, double c, const Grid1D& grid,
                               SolverConfig solver, const References& refs, const ClassifierConfig& config,
                               const std::vector<Observer>& extra_observers = {});

}  // namespace rangeshift
