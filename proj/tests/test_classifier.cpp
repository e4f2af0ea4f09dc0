#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracle.hpp"
#include "rangeshift/classifier.hpp"

using namespace rangeshift;
using oracle::kind_of;

namespace {

const ShiftedReaction& kpp() {
  static const ShiftedReaction r(kpp_model());
  return r;
}

const ShiftedReaction& fig1() {
  static const ShiftedReaction r(figure1_model());
  return r;
}

const Grid1D& grid() {
  static const Grid1D g = Grid1D::make(-40, 200, 0.05);
  return g;
}

// Hand-made trace with one value per unit time.
Trace synthetic(const std::vector<double>& sup, const std::vector<double>& dinv,
                const std::vector<double>& dground = {}) {
  Trace tr;
  for (std::size_t k = 0; k < sup.size(); ++k) tr.times.push_back(static_cast<double>(k));
  tr.series[kSup] = sup;
  tr.series[kDistInvasion] = dinv;
  if (!dground.empty()) tr.series[kDistGround] = dground;
  return tr;
}

Verdict run(const InitialDatum& u0, const ShiftedReaction& r, double c, double horizon = 200) {
  ClassifierConfig cfg;
  cfg.horizon = horizon;
  return run_and_classify(u0, r, c, grid(), {}, make_references(r, c), cfg).outcome.verdict;
}

}  // namespace

TEST_CASE("config validation") {
  ClassifierConfig c;
  CHECK_NOTHROW(c.validate());
  c.dwell = 300;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::InvalidArgument);
  c = {};
  c.eps_spread = -1;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("dwell and precedence on synthetic traces") {
  References refs;
  refs.invasion = invasion_state(kpp(), 1.0);
  ClassifierConfig cfg;
  cfg.dwell = 5;
  cfg.horizon = 30;

  std::vector<double> small(31, 1e-6), big(31, 0.5);
  CHECK(classify(synthetic(small, big), refs, cfg).verdict == Verdict::Extinction);
  CHECK(classify(synthetic(small, big), refs, cfg).decided_at == 5.0);
  CHECK(classify(synthetic(big, std::vector<double>(31, 1e-3)), refs, cfg).verdict == Verdict::Spreading);
  CHECK(classify(synthetic(big, big), refs, cfg).verdict == Verdict::Undetermined);

  // A criterion that stops holding before its dwell completes does not count.
  std::vector<double> blip = big;
  for (int k = 3; k < 7; ++k) blip[k] = 1e-6;
  CHECK(classify(synthetic(blip, big), refs, cfg).verdict == Verdict::Undetermined);

  // The first dwell to complete wins.
  std::vector<double> late_small = big, early_close = big;
  for (int k = 10; k <= 30; ++k) late_small[k] = 1e-6;
  for (int k = 2; k <= 30; ++k) early_close[k] = 1e-3;
  CHECK(classify(synthetic(late_small, early_close), refs, cfg).verdict == Verdict::Spreading);

  // Grounding needs the critical ground state, and is resolved later if possible.
  refs.critical_exists = true;
  CHECK(kind_of([&] { classify(synthetic(small, big), refs, cfg); }) == ErrorKind::MissingReference);
  refs.critical = critical_ground_state(fig1(), 1.5);
  std::vector<double> near(31, 0.5);
  for (int k = 0; k <= 12; ++k) near[k] = 1e-3;
  const Outcome o = classify(synthetic(late_small, big, near), refs, cfg);
  CHECK(o.verdict == Verdict::Grounding);
  REQUIRE(o.resolution.has_value());
  CHECK(*o.resolution == Verdict::Extinction);
  CHECK(o.settled() == Verdict::Extinction);
  CHECK(o.min_dist_ground == 1e-3);
  CHECK_FALSE(o.evidence.empty());

  CHECK(kind_of([&] { classify(synthetic(small, big), References{}, cfg); }) == ErrorKind::MissingReference);
}

TEST_CASE("distance metrics") {
  const StationaryProfile p = invasion_state(kpp(), 1.0);
  const std::vector<double> ref = p.sample(grid().nodes());
  const DistanceMetrics same = distance_metrics({0.0, ref}, grid(), ref, {-20, 20}, 1.0);
  CHECK(same.sup_window == 0.0);
  CHECK(same.sup_global == 0.0);
  CHECK(same.l2_weighted == 0.0);
  const DistanceMetrics zero = distance_metrics({0.0, std::vector<double>(grid().n, 0.0)}, grid(), ref, {-20, 20}, 1.0);
  double expected = 0.0;
  const auto [i0, i1] = grid().index_range(-20, 20);
  for (int i = i0; i <= i1; ++i) expected = std::max(expected, ref[i]);
  CHECK(zero.sup_window == expected);
  CHECK(zero.sup_global >= zero.sup_window);
}

TEST_CASE("regimes for KPP") {
  ClassifierConfig cfg;
  const ClassifiedRun spread = run_and_classify(InitialDatum::box(0.5, 0, 1), kpp(), 1.0, grid(), {},
                                                make_references(kpp(), 1.0), cfg);
  CHECK(spread.outcome.verdict == Verdict::Spreading);
  const StationaryProfile p = invasion_state(kpp(), 1.0);
  const DistanceMetrics d = distance_metrics(spread.trace.snapshots.back(), grid(), p.sample(grid().nodes()),
                                             {-20, 20}, 1.0);
  CHECK(d.sup_window < cfg.eps_spread);
  CHECK(run(InitialDatum::box(1.0, -5, 5), kpp(), 2.5) == Verdict::Extinction);
  // Below the linear speed there is no critical ground state, hence no Grounding reference.
  CHECK_FALSE(make_references(kpp(), 1.0).critical.has_value());
}

TEST_CASE("both outcomes in the bistable range") {
  const double lin = 2 * std::sqrt(0.4);
  const double c = 0.5 * (lin + minimal_speed(figure1_model()).value);
  const AlphaStar as = alpha_star(fig1(), c);
  const InitialDatum cap = InitialDatum::cap(extinction_cap(fig1(), c, as.value / 2, {}, as), 0.5);
  CHECK(run(cap, fig1(), c) == Verdict::Extinction);
  const double theta = 0.5 * (theta_critical(fig1(), c) + 1);
  CHECK(run(InitialDatum::bump(spreading_bump(fig1(), c, theta)), fig1(), c) == Verdict::Spreading);

  // Ordered data never get reversed verdicts.
  CHECK(run(InitialDatum::box(1.0, 0, 1), fig1(), c) == Verdict::Extinction);
  CHECK(run(InitialDatum::box(2.0, 0, 1), fig1(), c) == Verdict::Spreading);
}

TEST_CASE("approach to the invasion state from above") {
  ClassifierConfig cfg;
  const ClassifiedRun r = run_and_classify(InitialDatum::box(1.4, -5, 30), kpp(), 1.0, grid(), {},
                                           make_references(kpp(), 1.0), cfg);
  const auto& excess = r.trace.observed(kExcessInvasion);
  CHECK(excess.front() > 0.3);
  CHECK(excess.back() < cfg.eps_spread);
}

TEST_CASE("no spreading at the minimal speed") {
  // KPP at c = c* = 2: compact data do not spread and eventually die out.
  ClassifierConfig cfg;
  cfg.horizon = 800;
  const Outcome o = run_and_classify(InitialDatum::box(0.5, 0, 1), kpp(), 2.0, grid(), {},
                                     make_references(kpp(), 2.0), cfg).outcome;
  CHECK(o.verdict != Verdict::Spreading);
  CHECK(o.verdict == Verdict::Extinction);
}
