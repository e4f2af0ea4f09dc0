#include "rangeshift/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "rangeshift/error.hpp"

namespace rangeshift {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Spreading: return "Spreading";
    case Verdict::Extinction: return "Extinction";
    case Verdict::Grounding: return "Grounding";
    case Verdict::Undetermined: return "Undetermined";
  }
  return "?";
}

Verdict verdict_from_string(const std::string& s) {
  for (const Verdict v : {Verdict::Spreading, Verdict::Extinction, Verdict::Grounding, Verdict::Undetermined}) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown verdict '" + s + "'");
}

void ClassifierConfig::validate() const {
  for (const double v : {eps_extinct, eps_spread, eps_ground, window, dwell, horizon}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "classifier settings must be positive");
  }
  if (!(dwell < horizon)) throw Error(ErrorKind::InvalidArgument, "dwell must be shorter than the horizon");
}

References make_references(const ShiftedReaction& reaction, double c, const ShootingTolerances& tol) {
  References refs;
  refs.invasion = invasion_state(reaction, c, tol);
  const double lin = linear_speed(reaction.growth());
  if (c >= lin - 1e-12) {
    const AlphaStar as = alpha_star(reaction, c, tol);
    if (!as.saturated) {
      refs.critical_exists = true;
      refs.critical = critical_ground_state(reaction, c, tol, as);
    }
  }
  return refs;
}

std::vector<Observer> classifier_observers(const Grid1D& grid, const References& refs, const ClassifierConfig& config) {
  if (!refs.invasion) throw Error(ErrorKind::MissingReference, "invasion state not supplied");
  if (refs.critical_exists && !refs.critical) {
    throw Error(ErrorKind::MissingReference, "critical ground state exists but was not supplied");
  }
  const std::vector<double> z = grid.nodes();
  std::vector<double> inv = refs.invasion->sample(z);
  std::vector<Observer> obs;
  obs.push_back(sup_norm_observer(grid));
  obs.push_back(window_distance_observer(kDistInvasion, grid, inv, -config.window, config.window));
  obs.push_back(excess_observer(kExcessInvasion, inv));
  if (refs.critical) {
    obs.push_back(window_distance_observer(kDistGround, grid, refs.critical->sample(z), grid.z_min, grid.z_max));
  }
  return obs;
}

std::optional<Verdict> Outcome::settled() const {
  if (verdict == Verdict::Spreading || verdict == Verdict::Extinction) return verdict;
  return resolution;
}

void OutcomeTracker::Dwell::feed(double t, bool ok, double d) {
  if (completed) return;
  if (!ok) {
    since.reset();
    return;
  }
  if (!since) since = t;
  if (t - *since >= d - 1e-9) completed = t;
}

OutcomeTracker::OutcomeTracker(ClassifierConfig config, bool ground_available)
    : config_(config), ground_available_(ground_available) {}

void OutcomeTracker::update(double t, double sup, double dist_invasion, std::optional<double> dist_ground) {
  last_t_ = t;
  extinct_.feed(t, sup < config_.eps_extinct, config_.dwell);
  spread_.feed(t, dist_invasion < config_.eps_spread, config_.dwell);
  if (ground_available_ && dist_ground) {
    ground_.feed(t, *dist_ground < config_.eps_ground, config_.dwell);
    if (std::isnan(min_ground_) || *dist_ground < min_ground_) {
      min_ground_ = *dist_ground;
      t_min_ground_ = t;
    }
  }
  if (!first_) {
    if (extinct_.completed) {
      first_ = Verdict::Extinction;
    } else if (spread_.completed) {
      first_ = Verdict::Spreading;
    } else if (ground_.completed) {
      first_ = Verdict::Grounding;
    }
    if (first_) first_at_ = t;
  }
  if (first_ == Verdict::Grounding && !resolution_) {
    if (extinct_.completed) {
      resolution_ = Verdict::Extinction;
      resolved_at_ = t;
    } else if (spread_.completed) {
      resolution_ = Verdict::Spreading;
      resolved_at_ = t;
    }
  }
}

bool OutcomeTracker::finished() const {
  return first_ && (*first_ != Verdict::Grounding || resolution_.has_value());
}

Outcome OutcomeTracker::outcome(double horizon_used) const {
  Outcome o;
  o.verdict = first_.value_or(Verdict::Undetermined);
  o.decided_at = first_ ? first_at_ : horizon_used;
  o.horizon_used = horizon_used;
  o.resolution = resolution_;
  o.resolved_at = resolved_at_;
  o.min_dist_ground = min_ground_;
  o.t_min_dist_ground = t_min_ground_;
  o.config = config_;
  return o;
}

Outcome classify(const Trace& trace, const References& refs, const ClassifierConfig& config) {
  config.validate();
  if (!refs.invasion) throw Error(ErrorKind::MissingReference, "invasion state not supplied");
  if (refs.critical_exists && !refs.critical) {
    throw Error(ErrorKind::MissingReference, "critical ground state exists but was not supplied");
  }
  const auto& sup = trace.observed(kSup);
  const auto& dinv = trace.observed(kDistInvasion);
  const std::vector<double>* dgr = refs.critical_exists ? &trace.observed(kDistGround) : nullptr;
  OutcomeTracker tracker(config, dgr != nullptr);
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    tracker.update(trace.times[k], sup[k], dinv[k], dgr ? std::optional<double>((*dgr)[k]) : std::nullopt);
  }
  Outcome o = tracker.outcome(trace.times.empty() ? 0.0 : trace.times.back());
  for (const auto& [name, values] : trace.series) {
    for (std::size_t k = 0; k < values.size(); ++k) o.evidence.push_back({name, trace.times[k], values[k]});
  }
  return o;
}

DistanceMetrics distance_metrics(const Field& field, const Grid1D& grid, const std::vector<double>& profile,
                                 std::pair<double, double> window, double c) {
  if (field.u.size() != profile.size() || profile.size() != static_cast<std::size_t>(grid.n)) {
    throw Error(ErrorKind::InvalidArgument, "field and profile must be sampled on the grid");
  }
  DistanceMetrics m;
  const auto [first, last] = grid.index_range(window.first, window.second);
  double l2 = 0.0;
  for (int i = 0; i < grid.n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double d = std::abs(field.u[k] - profile[k]);
    m.sup_global = std::max(m.sup_global, d);
    if (i >= first && i <= last) m.sup_window = std::max(m.sup_window, d);
    if (i <= last) {
      const double w = (i == 0 || i == last) ? 0.5 : 1.0;
      l2 += w * std::exp(c * grid.z(i)) * d * d * grid.dz;
    }
  }
  m.l2_weighted = std::sqrt(l2);
  return m;
}

ClassifiedRun run_and_classify(const InitialDatum& u0, const ShiftedReaction& reaction, double c, const Grid1D& grid,
                               SolverConfig solver, const References& refs, const ClassifierConfig& config,
                               const std::vector<Observer>& extra_observers) {
  config.validate();
  std::vector<Observer> obs = classifier_observers(grid, refs, config);
  obs.insert(obs.end(), extra_observers.begin(), extra_observers.end());
  solver.horizon = config.horizon;
  OutcomeTracker tracker(config, refs.critical.has_value());
  const bool ground = refs.critical.has_value();
  auto hook = [&](const Field& f, const Trace& tr) {
    const std::size_t k = tr.times.size() - 1;
    tracker.update(f.t, tr.series.at(kSup)[k], tr.series.at(kDistInvasion)[k],
                   ground ? std::optional<double>(tr.series.at(kDistGround)[k]) : std::nullopt);
    return !tracker.finished();
  };
  ClassifiedRun run;
  run.trace = evolve(u0, reaction, c, grid, solver, obs, hook);
  run.outcome = classify(run.trace, refs, config);
  return run;
}

}  // namespace rangeshift
