// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rangeshift/classifier.hpp"
#include "rangeshift/diagnostics.hpp"
#include "rangeshift/error.hpp"
#include "rangeshift/thresholds.hpp"

using namespace rangeshift;

namespace {

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int n, const std::string& title, double budget_s, const std::function<void(Check&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Check check;
  check.detail.precision(7);
  try {
    body(check);
  } catch (const std::exception& e) {
    check.pass = false;
    check.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    check.pass = false;
    check.detail << " [over the " << budget_s << " s budget]";
  }
  if (!check.pass) ++failures;
  std::printf("criterion %2d: %s  %s:%s (%.1f s)\n", n, check.pass ? "PASS" : "FAIL", title.c_str(),
              check.detail.str().c_str(), secs);
  std::fflush(stdout);
}

const Grid1D& grid() {
  static const Grid1D g = Grid1D::make(-40, 200, 0.05);
  return g;
}

ClassifierConfig horizon(double t) {
  ClassifierConfig cfg;
  cfg.horizon = t;
  return cfg;
}

// Equilibrium of the scheme next to a profile, or the sampled profile when Newton fails.
std::vector<double> reference(const StationaryProfile& p, const ShiftedReaction& r, double c) {
  const std::vector<double> sampled = p.sample(grid().nodes());
  return discrete_stationary(sampled, r, c, grid(), SolverConfig{}).value_or(sampled);
}

// Snapshots before u first meets the reference at an end of the interval.
Trace resolvable_prefix(const Trace& tr, const std::vector<double>& ref, std::pair<double, double> interval) {
  const auto [first, last] = grid().index_range(interval.first, interval.second);
  Trace out;
  for (const Field& f : tr.snapshots) {
    if (std::abs(f.u[first] - ref[first]) < kEndpointFloor || std::abs(f.u[last] - ref[last]) < kEndpointFloor) break;
    out.times.push_back(f.t);
    out.snapshots.push_back(f);
  }
  return out;
}

std::string series(const ZeroNumberSeries& zs) {
  std::ostringstream s;
  int prev = -1;
  for (std::size_t k = 0; k < zs.counts.size(); ++k) {
    if (zs.counts[k] == prev) continue;
    s << (prev < 0 ? "" : ">") << zs.counts[k] << "@" << std::lround(zs.times[k]);
    prev = zs.counts[k];
  }
  return s.str();
}

double first_time_below(const Trace& tr, const std::string& metric, double bound) {
  const auto& v = tr.observed(metric);
  for (std::size_t k = 0; k < v.size(); ++k)
    if (v[k] < bound) return tr.times[k];
  return INFINITY;
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

int main() {
  const ShiftedReaction kpp(kpp_model());
  const ShiftedReaction fig1(figure1_model());
  const double lin = 2 * std::sqrt(0.4);
  const double cstar = minimal_speed(figure1_model()).value;
  const double mid = 0.5 * (lin + cstar);
  std::printf("figure-1 growth: linear speed %.6f, minimal speed %.6f, midway speed %.6f\n", lin, cstar, mid);

  criterion(1, "KPP minimal speed", 10, [&](Check& ck) {
    const MinimalSpeed m = minimal_speed(kpp_model());
    ck.detail << " c* = " << m.value << " vs 2";
    ck.require(std::abs(m.value - 2.0) <= 5e-3, "|c* - 2| <= 5e-3");
  });

  criterion(2, "weak Allee minimal speed", 0, [&](Check& ck) {
    // g = s(1-s)(1+4s) has the front p' = -sqrt(2) p (1 - p), so c* = sqrt(2) + 1/sqrt(2).
    const double oracle = std::sqrt(2.0) + 1 / std::sqrt(2.0);
    const MinimalSpeed m = minimal_speed(cubic_allee_model(4.0));
    ck.detail << " c* = " << m.value << " vs " << oracle;
    ck.require(std::abs(m.value - oracle) <= 5e-3, "|c* - 3/sqrt(2)| <= 5e-3");
  });

  criterion(3, "invasion state stays put under the solver", 60, [&](Check& ck) {
    SolverConfig cfg;
    cfg.horizon = 50;
    cfg.dt = dt_monotone(kpp) / 2;
    cfg.right = RightBoundary::ZeroFlux;
    cfg.keep_fields = false;
    const StationaryProfile p = invasion_state(kpp, 1.0);
    const std::vector<double> ref = p.sample(grid().nodes());
    const Trace tr = evolve(InitialDatum::profile(p), kpp, 1.0, grid(), cfg,
                            {window_distance_observer("d", grid(), ref, grid().z_min, grid().z_max)});
    const auto& d = tr.observed("d");
    const double worst = *std::max_element(d.begin(), d.end());
    ck.detail << " max |u - p+| = " << worst << " through T = " << tr.times.back();
    ck.require(worst < 1e-4, "max |u - p+| < 1e-4");
    ck.require(tr.times.back() >= 50 - 1e-9, "reached T = 50");
  });

  // Regime runs, reused by criteria 9 and 10.
  const References kpp1_refs = make_references(kpp, 1.0);
  const References kpp25_refs = make_references(kpp, 2.5);
  const References mid_refs = make_references(fig1, mid);
  const AlphaStar as_mid = alpha_star(fig1, mid);
  std::optional<ClassifiedRun> kpp_spread, kpp_extinct, fig_cap, fig_bump;

  criterion(4, "regimes", 0, [&](Check& ck) {
    kpp_spread = run_and_classify(InitialDatum::box(0.5, 0, 1), kpp, 1.0, grid(), {}, kpp1_refs, horizon(200));
    const double t_close = first_time_below(kpp_spread->trace, kDistInvasion, 1e-2);
    ck.detail << " (a) " << to_string(kpp_spread->outcome.verdict) << ", |u - p+| < 1e-2 on |z| <= 20 at t = "
              << t_close << ";";
    ck.require(kpp_spread->outcome.verdict == Verdict::Spreading, "(a) Spreading");
    ck.require(t_close <= 200, "(a) within T = 200");

    kpp_extinct = run_and_classify(InitialDatum::box(0.5, 0, 1), kpp, 2.5, grid(), {}, kpp25_refs, horizon(100));
    const double t_small = first_time_below(kpp_extinct->trace, kSup, 1e-4);
    ck.detail << " (b) " << to_string(kpp_extinct->outcome.verdict) << ", sup u < 1e-4 at t = " << t_small << ";";
    ck.require(kpp_extinct->outcome.verdict == Verdict::Extinction, "(b) Extinction");
    ck.require(t_small <= 100, "(b) within T = 100");

    const ExtinctionCap cap = extinction_cap(fig1, mid, as_mid.value / 2, {}, as_mid);
    fig_cap = run_and_classify(InitialDatum::cap(cap, 0.5), fig1, mid, grid(), {}, mid_refs, horizon(400));
    const double theta_c = theta_critical(fig1, mid);
    const double theta = 0.5 * (theta_c + 1);
    fig_bump = run_and_classify(InitialDatum::bump(spreading_bump(fig1, mid, theta)), fig1, mid, grid(), {},
                                mid_refs, horizon(400));
    ck.detail << " (c) 0.5 cap " << to_string(fig_cap->outcome.verdict) << " at t = " << fig_cap->outcome.decided_at
              << ", bump theta = " << theta << " > theta_c = " << theta_c << " "
              << to_string(fig_bump->outcome.verdict) << " at t = " << fig_bump->outcome.decided_at;
    ck.require(fig_cap->outcome.verdict == Verdict::Extinction, "(c) cap Extinction");
    ck.require(fig_bump->outcome.verdict == Verdict::Spreading, "(c) bump Spreading");
  });

  criterion(5, "tail rates of ground states at c = 1.5", 0, [&](Check& ck) {
    const AlphaStar as = alpha_star(fig1, 1.5);
    const DecayPair l = lambda_pm(fig1, 1.5);
    const StationaryProfile half = ground_state(fig1, 1.5, as.value / 2, {}, as);
    const StationaryProfile crit = critical_ground_state(fig1, 1.5, {}, as);
    const double slow = half.fitted_decay.value_or(NAN);
    const double fast = crit.fitted_decay.value_or(NAN);
    ck.detail << " p_{alpha*/2} rate " << slow << " vs lambda- " << l.minus << ", p_{alpha*} rate " << fast
              << " vs lambda+ " << l.plus;
    ck.require(std::abs(slow / l.minus - 1) < 0.05, "within 5% of lambda-");
    ck.require(std::abs(fast / l.plus - 1) < 0.05, "within 5% of lambda+");
  });

  std::optional<ThresholdResult> sigma_star;
  criterion(6, "sharp amplitude threshold", 1800, [&](Check& ck) {
    ThresholdOptions opt;
    opt.workers = 8;
    sigma_star = find_sigma_star(OrderedFamily::amplitude(0, 1), fig1, mid, grid(), {}, horizon(400), 1e-3,
                                 {0.1, 2.5}, opt);
    const ThresholdResult& r = *sigma_star;
    ck.detail << " sigma* in [" << r.lo << ", " << r.hi << "], " << r.runs.size() << " probes, " << flips(r.runs)
              << " flip";
    ck.require(r.degenerate == Degenerate::None, "finite threshold");
    ck.require(r.hi - r.lo <= 1e-3, "bracket width <= 1e-3");
    ck.require(flips(r.runs) == 1, "exactly one outcome flip");
    ck.require(r.midpoint.has_value(), "midpoint probed");
    if (r.midpoint) {
      ck.detail << "; midpoint min_t sup|u - p_alpha*| = " << r.midpoint->min_dist_ground << " at t = "
                << r.midpoint->t_min_dist_ground;
      ck.require(r.midpoint->min_dist_ground < 5e-2, "grounding dip < 5e-2");
    }
  });

  criterion(7, "sharp speed threshold", 0, [&](Check& ck) {
    const ClassifierConfig cfg = horizon(400);
    struct Datum {
      const char* name;
      InitialDatum u0;
    };
    const std::vector<Datum> data = {{"0.5 x [0,1]", InitialDatum::box(0.5, 0, 1)},
                                     {"2 x [0,1]", InitialDatum::box(2.0, 0, 1)},
                                     {"1 x [0,2]", InitialDatum::box(1.0, 0, 2)}};
    std::vector<double> speeds;
    for (const Datum& d : data) {
      const ThresholdResult r = find_critical_speed(d.u0, fig1, grid(), {}, cfg, 1e-3);
      speeds.push_back(r.value);
      ck.detail << " c(" << d.name << ") = " << r.value << ";";
      ck.require(r.value >= lin - 1e-3 && r.value <= cstar + 1e-3, std::string("c(") + d.name + ") admissible");
    }
    // 0.5 x [0,1] <= 2 x [0,1] and 0.5 x [0,1] <= 1 x [0,2]
    ck.detail << " ordered pairs nondecreasing";
    ck.require(speeds[0] <= speeds[1], "c(0.5 x [0,1]) <= c(2 x [0,1])");
    ck.require(speeds[0] <= speeds[2], "c(0.5 x [0,1]) <= c(1 x [0,2])");
  });

  criterion(8, "comparison principle", 0, [&](Check& ck) {
    SolverConfig cfg;
    cfg.horizon = 50;
    struct Pair {
      const char* name;
      const ShiftedReaction* r;
      double c;
      InitialDatum low, high;
    };
    const ExtinctionCap cap = extinction_cap(fig1, mid, as_mid.value / 2, {}, as_mid);
    const std::vector<Pair> pairs = {
        {"KPP c=1", &kpp, 1.0, InitialDatum::box(0.5, 0, 1), InitialDatum::box(1.0, 0, 2)},
        {"fig-1 c=1", &fig1, 1.0, InitialDatum::box(0.1, 0, 1),
         InitialDatum::profile(invasion_state(fig1, 1.0))},
        {"fig-1 midway caps", &fig1, mid, InitialDatum::cap(cap, 0.5), InitialDatum::cap(cap, 1.0)},
        {"fig-1 midway boxes", &fig1, mid, InitialDatum::box(1.3, 0, 1), InitialDatum::box(2.0, 0, 1)},
        {"fig-1 c=2", &fig1, 2.0, InitialDatum::box(1.0, 0, 1), InitialDatum::box(2.0, -2, 2)},
    };
    double worst = 0.0;
    for (const Pair& p : pairs) {
      const OrderWitness w = order_check(p.low, p.high, *p.r, p.c, grid(), cfg);
      worst = std::max(worst, w.max_violation);
      ck.require(w.holds && w.max_violation <= 1e-12, std::string(p.name) + " ordered");
    }
    ck.detail << " " << pairs.size() << " pairs, max violation " << worst;
  });

  criterion(9, "zero number", 0, [&](Check& ck) {
    const std::pair<double, double> wide{-20, 150};
    const std::pair<double, double> narrow{-10, 10};
    const std::vector<double> kpp1_p = reference(*kpp1_refs.invasion, kpp, 1.0);
    const std::vector<double> kpp25_p = reference(*kpp25_refs.invasion, kpp, 2.5);
    const std::vector<double> mid_p = reference(*mid_refs.invasion, fig1, mid);
    const std::vector<double> mid_g = reference(*mid_refs.critical, fig1, mid);

    // A spreading run converges onto p+ at the ends of the interval; past that
    // point the zero number is undefined and the series stops.
    auto check = [&](const char* name, const ClassifiedRun& run, const std::vector<double>& ref,
                     std::pair<double, double> interval) -> ZeroNumberSeries {
      const Trace tr = resolvable_prefix(run.trace, ref, interval);
      const ZeroNumberSeries zs = zero_number_trace(tr, ref, grid(), interval);
      ck.detail << " " << name << " " << series(zs);
      if (tr.snapshots.size() < run.trace.snapshots.size()) ck.detail << " (to t = " << tr.times.back() << ")";
      ck.detail << ";";
      ck.require(zs.nonincreasing, std::string(name) + " nonincreasing");
      return zs;
    };
    check("KPP c=1 vs p+", *kpp_spread, kpp1_p, wide);
    check("KPP c=2.5 vs p+", *kpp_extinct, kpp25_p, wide);
    check("cap vs p+", *fig_cap, mid_p, wide);
    check("cap vs p_alpha*", *fig_cap, mid_g, narrow);
    check("bump vs p+", *fig_bump, mid_p, wide);
    check("bump vs p_alpha*", *fig_bump, mid_g, narrow);

    if (!sigma_star || !sigma_star->midpoint) {
      ck.require(false, "criterion 6 near-threshold run available");
      return;
    }
    const double sigma = sigma_star->midpoint->param;
    const ClassifiedRun near = run_and_classify(InitialDatum::box(sigma, 0, 1), fig1, mid, grid(), {}, mid_refs,
                                                horizon(1600));
    const ZeroNumberSeries zs = check("near-threshold vs p_alpha*", near, mid_g, narrow);
    const double t_tangent = near.outcome.t_min_dist_ground;
    const bool drop_after =
        std::any_of(zs.drops.begin(), zs.drops.end(), [&](std::size_t k) { return zs.times[k] > t_tangent; });
    ck.detail << " closest approach at t = " << t_tangent;
    ck.require(drop_after, "strict drop after the closest approach");
  });

  criterion(10, "exponential envelope on the extinction run", 0, [&](Check& ck) {
    if (!fig_cap) {
      ck.require(false, "criterion 4(c) run available");
      return;
    }
    const Trace& tr = fig_cap->trace;
    const double gamma = default_gamma(fig1, mid);
    const double t_cal = tr.times.back() / 2;
    const auto cal = calibrate_envelope(tr, grid(), fig1, mid, gamma, 0.0, t_cal);
    ck.require(cal.has_value(), "calibration on t <= T/2");
    if (!cal) return;
    const EnvelopeReport rep = exponential_bound_check(tr, grid(), fig1, mid, gamma, cal->eps, cal->z_eps);
    ck.detail << " lambda_gamma = " << rep.rate << ", eps = " << cal->eps << ", Z_eps = " << cal->z_eps
              << " (calibrated on t <= " << t_cal << "), worst u/envelope = " << rep.worst_ratio << " over "
              << rep.ratio_per_snapshot.size() << " snapshots";
    ck.require(rep.pass, "envelope holds at every snapshot");
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
