#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "oracle.hpp"
#include "rangeshift/thresholds.hpp"

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

double midway() {
  static const double c = 0.5 * (2 * std::sqrt(0.4) + minimal_speed(figure1_model()).value);
  return c;
}

int flips(const std::vector<Probe>& runs) {
  int n = 0;
  std::optional<Verdict> prev;
  for (const Probe& p : runs) {
    if (!p.settled) continue;
    if (prev && *prev != *p.settled) ++n;
    prev = p.settled;
  }
  return n;
}

}  // namespace

TEST_CASE("family obligations") {
  const std::vector<double> sigmas = {0.2, 0.5, 1.0, 1.7};
  CHECK(check_family(OrderedFamily::amplitude(0, 1), sigmas).ok());
  CHECK(check_family(OrderedFamily::width(1.0, 0.0), sigmas).ok());

  OrderedFamily reversed{"reversed", [](double s) { return InitialDatum::box(3 - s, 0, 1); }};
  CHECK_FALSE(check_family(reversed, sigmas).ordered);

  OrderedFamily jump{"jump", [](double s) { return InitialDatum::box(s < 1.0 ? s : s + 1, 0, 1); }};
  const FamilyCheck fc = check_family(jump, {0.999999});
  CHECK(fc.ordered);
  CHECK_FALSE(fc.continuous);
}

TEST_CASE("degenerate thresholds for KPP") {
  ClassifierConfig cfg;
  const OrderedFamily fam = OrderedFamily::amplitude(0, 1);
  const ThresholdResult low = find_sigma_star(fam, kpp(), 1.0, grid(), {}, cfg, 1e-3, {0.1, 1.0});
  CHECK(low.degenerate == Degenerate::AtLowEnd);
  CHECK(low.value == 0.0);
  const ThresholdResult high = find_sigma_star(fam, kpp(), 2.5, grid(), {}, cfg, 1e-3, {0.1, 1.0});
  CHECK(high.degenerate == Degenerate::AtHighEnd);
  CHECK(std::isinf(high.value));
}

TEST_CASE("finite sigma star in the bistable range") {
  ClassifierConfig cfg;
  cfg.horizon = 400;
  const OrderedFamily fam = OrderedFamily::amplitude(0, 1);
  const ThresholdResult r = find_sigma_star(fam, fig1(), midway(), grid(), {}, cfg, 1e-2, {0.1, 2.5});
  CHECK(r.degenerate == Degenerate::None);
  CHECK(r.hi - r.lo <= 1e-2);
  CHECK(r.outcome_lo == Verdict::Extinction);
  CHECK(r.outcome_hi == Verdict::Spreading);
  CHECK(flips(r.runs) == 1);
  REQUIRE(r.midpoint.has_value());
  CHECK(r.midpoint->min_dist_ground < 0.3);

  // Same answer, bit for bit, with speculative parallel probes.
  ThresholdOptions par;
  par.workers = 3;
  const ThresholdResult again = find_sigma_star(fam, fig1(), midway(), grid(), {}, cfg, 1e-2, {0.1, 2.5}, par);
  CHECK(again.lo == r.lo);
  CHECK(again.hi == r.hi);
}

TEST_CASE("a reversed family is rejected") {
  ClassifierConfig cfg;
  cfg.horizon = 400;
  OrderedFamily reversed{"reversed", [](double s) { return InitialDatum::box(2.6 - s, 0, 1); }};
  CHECK(kind_of([&] { find_sigma_star(reversed, fig1(), midway(), grid(), {}, cfg, 1e-2, {0.1, 2.5}); }) ==
        ErrorKind::NonMonotoneOutcomes);
}

TEST_CASE("critical speed") {
  ClassifierConfig cfg;
  cfg.horizon = 400;
  // KPP: the admissible interval collapses to {2}.
  const ThresholdResult k = find_critical_speed(InitialDatum::box(1.0, 0, 2), kpp(), grid(), {}, cfg, 1e-2);
  CHECK(std::abs(k.value - 2.0) <= 1e-2);

  // Figure-1 growth: a datum under the extinction cap at the linear speed stalls exactly there,
  // a taller one persists to a larger speed.
  const double lin = 2 * std::sqrt(0.4);
  const ThresholdResult small = find_critical_speed(InitialDatum::box(0.1, 0, 1), fig1(), grid(), {}, cfg, 1e-2);
  const ThresholdResult large = find_critical_speed(InitialDatum::box(2.0, 0, 1), fig1(), grid(), {}, cfg, 1e-2);
  CHECK(small.value == doctest::Approx(lin).epsilon(1e-12));
  CHECK(small.hi == doctest::Approx(lin).epsilon(1e-12));
  CHECK(small.outcome_hi == Verdict::Extinction);
  CHECK(large.hi - large.lo <= 1e-2);
  CHECK(small.value <= large.value);
  CHECK(large.value <= minimal_speed(figure1_model()).value);
}

TEST_CASE("sweep") {
  ClassifierConfig cfg;
  ThresholdOptions opt;
  opt.workers = 2;
  const auto rows = sweep(OrderedFamily::amplitude(0, 1), kpp(), {1.0, 2.5}, {0.3, 0.6}, grid(), {}, cfg, opt);
  REQUIRE(rows.size() == 4);
  for (const SweepRow& r : rows) {
    CHECK(r.probe.settled == (r.c < 2 ? Verdict::Spreading : Verdict::Extinction));
    CHECK(r.probe.param == r.sigma);
  }
}

TEST_CASE("parallel_for") {
  std::vector<int> hits(50, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  std::atomic<int> ran{0};
  try {
    parallel_for(20, 3, [&](std::size_t i) {
      ++ran;
      if (i == 7 || i == 13) throw std::runtime_error("job " + std::to_string(i));
    });
    FAIL("no exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "job 7");
  }
  CHECK(ran == 20);
}
