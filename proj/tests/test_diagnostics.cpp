#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "rangeshift/classifier.hpp"
#include "rangeshift/diagnostics.hpp"

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

int count(std::vector<double> h) { return sign_changes(h).count; }

// Trace whose snapshots are the given fields at t = 0, 1, 2, ...
Trace frames(const std::vector<std::vector<double>>& fields) {
  Trace tr;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    tr.times.push_back(static_cast<double>(k));
    tr.snapshots.push_back({static_cast<double>(k), fields[k]});
  }
  return tr;
}

// Field on a 101-node grid with `n` sign changes.
std::vector<double> alternating(int n) {
  std::vector<double> h(101, 1.0);
  for (int k = 0; k < n; ++k) {
    const int start = 10 + 80 * (k + 1) / (n + 1);
    for (int i = start; i < 101; ++i) h[i] = -h[i];
  }
  return h;
}

}  // namespace

TEST_CASE("sign changes") {
  CHECK(count({1, -1}) == 1);
  CHECK(count({1, 2, 3}) == 0);
  CHECK(count({1, 0, -1, 0, 1}) == 2);
  CHECK(kind_of([] { count({0, 0, 0}); }) == ErrorKind::AllZero);
  const std::vector<double> h = {0.5, -0.2, 0.0, -0.1, 0.3, 0.0, 0.4, -2.0};
  const SignChangeCount s = sign_changes(h, 1, 6);
  CHECK(s.count == 1);
  CHECK(s.zero_runs == std::vector<int>{4});

  // Invariant under positive scaling and under refinement by interpolated samples.
  std::vector<double> scaled, refined;
  for (double v : h) scaled.push_back(7.5 * v);
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    refined.push_back(h[i]);
    refined.push_back(0.5 * (h[i] + h[i + 1]));
  }
  refined.push_back(h.back());
  CHECK(count(scaled) == count(h));
  CHECK(count(refined) == count(h));
}

TEST_CASE("artifact rule") {
  const Grid1D g = Grid1D::make(-5, 5, 0.1);
  const std::vector<double> zero(g.n, 0.0);
  REQUIRE(g.n == 101);
  for (int n : {0, 1, 2, 3}) CHECK(count(alternating(n)) == n);

  const auto blip = zero_number_trace(frames({alternating(2), alternating(3), alternating(2), alternating(2)}), zero,
                                      g, {g.z_min, g.z_max});
  CHECK(blip.counts == std::vector<int>{2, 3, 2, 2});
  REQUIRE(blip.increases.size() == 1);
  CHECK(blip.increases[0].artifact);
  CHECK(blip.nonincreasing);

  const auto stuck = zero_number_trace(frames({alternating(2), alternating(3), alternating(3), alternating(3)}), zero,
                                       g, {g.z_min, g.z_max});
  CHECK_FALSE(stuck.nonincreasing);
  const auto jump = zero_number_trace(frames({alternating(1), alternating(3), alternating(1)}), zero, g,
                                      {g.z_min, g.z_max});
  CHECK_FALSE(jump.nonincreasing);

  const auto down = zero_number_trace(frames({alternating(3), alternating(1), alternating(1)}), zero, g,
                                      {g.z_min, g.z_max});
  CHECK(down.nonincreasing);
  CHECK(down.first_drop_time() == 1.0);

  std::vector<double> touching = alternating(2);
  touching.front() = 0.0;
  CHECK(kind_of([&] { zero_number_trace(frames({touching}), zero, g, {g.z_min, g.z_max}); }) ==
        ErrorKind::EndpointVanishes);
}

TEST_CASE("zero number on solver runs") {
  // A perturbed equilibrium stays on one side: Z = 0 throughout.
  const Grid1D g = Grid1D::make(-20, 60, 0.05);
  SolverConfig cfg;
  cfg.right = RightBoundary::ZeroFlux;
  cfg.horizon = 10;
  const StationaryProfile p = invasion_state(kpp(), 1.0);
  const auto eq = discrete_stationary(p.sample(g.nodes()), kpp(), 1.0, g, cfg);
  REQUIRE(eq.has_value());
  std::vector<double> u0 = *eq;
  for (double& v : u0) v *= 1.0001;
  const auto z0 = zero_number_trace(evolve_field(u0, kpp(), 1.0, g, cfg), *eq, g, {-10, 60});
  for (int n : z0.counts) CHECK(n == 0);

  // Spreading in the bistable range, against the critical ground state.
  const double c = 1.4733;
  const Grid1D big = Grid1D::make(-40, 200, 0.05);
  SolverConfig run;
  run.horizon = 150;
  const auto crit = discrete_stationary(critical_ground_state(fig1(), c).sample(big.nodes()), fig1(), c, big, run);
  REQUIRE(crit.has_value());
  const Trace tr = evolve(InitialDatum::box(2.0, 0, 1), fig1(), c, big, run);
  const auto zs = zero_number_trace(tr, *crit, big, {-10, 10});
  CHECK(zs.nonincreasing);
  CHECK(zs.counts.front() >= zs.counts.back());
}

TEST_CASE("energy") {
  const Grid1D g = Grid1D::make(-20, 130, 0.05);
  const std::vector<double> zero(g.n, 0.0);
  CHECK(energy({0, zero}, g, fig1(), 1.5, 100) == 0.0);

  auto smooth_bump = [&](double a, double b) {
    std::vector<double> u(g.n, 0.0);
    for (int i = 0; i < g.n; ++i) {
      const double z = g.z(i);
      if (z > a && z < b) u[i] = 0.3 * std::pow(std::sin(M_PI * (z - a) / (b - a)), 2);
    }
    return u;
  };
  const auto left = smooth_bump(-10, -5);
  CHECK(energy({0, left}, g, fig1(), 1.5, 100) > 0.0);

  const auto right = smooth_bump(2, 4);
  std::vector<double> both(g.n);
  for (int i = 0; i < g.n; ++i) both[i] = left[i] + right[i];
  const double sum = energy({0, left}, g, fig1(), 1.5, 100) + energy({0, right}, g, fig1(), 1.5, 100);
  CHECK(std::abs(energy({0, both}, g, fig1(), 1.5, 100) - sum) < 1e-10);

  // Critical ground state decays faster than e^{-cz/2}: the weighted integral converges.
  const std::vector<double> crit = critical_ground_state(fig1(), 1.5).sample(g.nodes());
  const double e60 = energy({0, crit}, g, fig1(), 1.5, 60);
  const double e120 = energy({0, crit}, g, fig1(), 1.5, 120);
  CHECK(std::abs(e60 - e120) < 1e-8);

  CHECK(kind_of([&] { energy({0, std::vector<double>(g.n, 0.5)}, g, fig1(), 1.5, 100); }) == ErrorKind::TailTooFat);
}

TEST_CASE("primitive of f") {
  CHECK(primitive_f(kpp(), -1.0, 0.4) == doctest::Approx(-0.08));
  CHECK(primitive_f(kpp(), 0.0, 0.4) == doctest::Approx(0.08 - 0.064 / 3).epsilon(1e-14));
}

TEST_CASE("exponential envelope") {
  const double c = 1.4733;
  const Grid1D g = Grid1D::make(-40, 200, 0.05);
  const double gamma = default_gamma(fig1(), c);
  SolverConfig cfg;
  cfg.horizon = 60;

  Trace zero = frames({std::vector<double>(g.n, 0.0)});
  CHECK(exponential_bound_check(zero, g, fig1(), c, gamma, 1e-3, 0.0).pass);

  const AlphaStar as = alpha_star(fig1(), c);
  const Trace die = evolve(InitialDatum::cap(extinction_cap(fig1(), c, as.value / 2, {}, as), 0.5), fig1(), c, g, cfg);
  const auto cal = calibrate_envelope(die, g, fig1(), c, gamma, 0.0, 30.0);
  REQUIRE(cal.has_value());
  const EnvelopeReport rep = exponential_bound_check(die, g, fig1(), c, gamma, cal->eps, cal->z_eps);
  CHECK(rep.pass);
  CHECK(rep.worst_ratio <= 1.0 + 1e-12);
  CHECK(rep.ratio_per_snapshot.size() == die.times.size());

  // A spreading run breaks any envelope fitted to its early profile.
  const Trace grow = evolve(InitialDatum::box(2.0, 0, 1), fig1(), c, g, cfg);
  const auto early = calibrate_envelope(grow, g, fig1(), c, gamma, 0.0, 5.0);
  REQUIRE(early.has_value());
  const EnvelopeReport fail = exponential_bound_check(grow, g, fig1(), c, gamma, early->eps, early->z_eps);
  CHECK_FALSE(fail.pass);
  REQUIRE(fail.first_failure_t.has_value());
  CHECK(*fail.first_failure_t > 5.0);

  // At the linear speed the critical envelope is used.
  const double lin = 2 * std::sqrt(0.4);
  CHECK(exponential_bound_check(zero, g, fig1(), lin, 0.0, 1e-3, 0.0).critical_form);
}
