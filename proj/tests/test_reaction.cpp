#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rangeshift/error.hpp"
#include "rangeshift/reaction.hpp"
#include "oracle.hpp"

using namespace rangeshift;
using oracle::kind_of;

namespace {

bool check_passed(const ValidationReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.hypothesis == name) return c.passed;
  }
  FAIL("missing check " << name);
  return false;
}

}  // namespace

TEST_CASE("eval_g on the bundled models") {
  CHECK(eval_g(kpp_model(), 0.5) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(eval_g(figure1_model(), 0.0) == 0.0);
  CHECK(kind_of([] { eval_g(kpp_model(), -0.1); }) == ErrorKind::DomainError);
  CHECK(kind_of([] { eval_g(kpp_model(1.5), 1.6); }) == ErrorKind::DomainError);
}

TEST_CASE("figure-1 slope at zero") {
  const GrowthModel m = figure1_model();
  const double h = 1e-6;
  const double fd = (m(h) - m(-h)) / (2 * h);
  CHECK(std::abs(fd - 4 * (std::sin(0.0) + 0.1)) < 1e-6);
  CHECK(std::abs(m.g_prime_0() - 0.4) < 1e-6);
}

TEST_CASE("eval_f branches") {
  const ShiftedReaction kpp(kpp_model(), 1.0);
  CHECK(eval_f(kpp, -3.0, 0.5) == -0.5);
  CHECK(eval_f(kpp, 0.0, 0.5) == 0.25);
  CHECK(eval_f(kpp, 2.0, 1.0) == 0.0);
  const ShiftedReaction fig(figure1_model(), 2.5);
  for (double s : {0.0, 0.1, 0.7, 1.0, 2.0}) {
    CHECK(eval_f(fig, -1e-9, s) == -2.5 * s);
    CHECK(eval_f(fig, 0.0, s) == eval_g(fig.growth(), s));
    CHECK(eval_f(fig, 7.0, s) == eval_g(fig.growth(), s));
  }
}

TEST_CASE("f is nondecreasing in z on [0,1]") {
  const ShiftedReaction fig(figure1_model());
  for (int i = 0; i <= 100; ++i) {
    const double s = i / 100.0;
    CHECK(eval_f(fig, -0.5, s) <= eval_f(fig, 0.0, s));
  }
}

TEST_CASE("validate_monostable") {
  CHECK(validate_monostable(kpp_model(), 1000).ok());
  const GrowthModel degenerate("s^2(1-s)", [](double s) { return s * s * (1 - s); },
                               [](double s) { return 2 * s - 3 * s * s; }, 1.5);
  const auto r = validate_monostable(degenerate, 1000);
  CHECK_FALSE(r.ok());
  CHECK_FALSE(check_passed(r, "g'(0)>0"));

  // Independent scan: sin s + 0.1 changes sign just past pi, so g > 0 there.
  const GrowthModel wide = figure1_model(4.0);
  double positive_at = -1;
  for (int i = 1; i <= 3000; ++i) {
    const double s = 1.0 + 3.0 * i / 3000.0;
    if (4 * s * (1 - s) * (std::sin(s) + 0.1) > 0) {
      positive_at = s;
      break;
    }
  }
  REQUIRE(positive_at > M_PI);
  const auto rw = validate_monostable(wide, 1000);
  CHECK_FALSE(check_passed(rw, "g(s)<0 on (1,s_max]"));
  for (const auto& c : rw.checks) {
    if (c.hypothesis == "g(s)<0 on (1,s_max]") CHECK(c.worst_s > positive_at - 0.01);
  }
  CHECK(kind_of([] { ShiftedReaction bad(figure1_model(4.0)); }) == ErrorKind::DomainError);
}

TEST_CASE("validate_monostable is monotone under refinement") {
  // g > 0 on (1, 1.0101]: a coarse grid can miss the violation, a refined one keeps it.
  const GrowthModel bump("bump", [](double s) { return s * (1 - s) + (s > 1.0 && s < 1.0101 ? 1.0 : 0.0); },
                         std::nullopt, 2.0);
  bool failed_before = false;
  for (int n = 10; n <= 10240; n *= 2) {
    const bool ok = check_passed(validate_monostable(bump, n), "g(s)<0 on (1,s_max]");
    if (failed_before) CHECK_FALSE(ok);
    failed_before = failed_before || !ok;
  }
  CHECK(failed_before);
}

TEST_CASE("linear rates") {
  const ShiftedReaction kpp(kpp_model());
  const LinearRates r0 = linear_rates(kpp, 0.0);
  CHECK(r0.mu_c == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r0.nu_c == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_FALSE(r0.lambda_minus.has_value());
  CHECK(kind_of([&] { lambda_pm(kpp, 1.0); }) == ErrorKind::RateUndefined);

  const LinearRates r2 = linear_rates(kpp, 2.0);
  REQUIRE(r2.lambda_minus.has_value());
  CHECK(*r2.lambda_minus == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*r2.lambda_plus == doctest::Approx(1.0).epsilon(1e-12));

  const LinearRates r3 = linear_rates(kpp, 3.0);
  CHECK(*r3.lambda_minus == doctest::Approx((3 - std::sqrt(5.0)) / 2).epsilon(1e-14));
  CHECK(*r3.lambda_plus == doctest::Approx((3 + std::sqrt(5.0)) / 2).epsilon(1e-14));
}

TEST_CASE("rates satisfy their characteristic equations") {
  for (double rho : {0.5, 1.0, 3.0}) {
    const ShiftedReaction fig(figure1_model(), rho);
    const double g0 = fig.growth().g_prime_0();
    for (double c : {0.0, 0.7, 1.3, 1.5, 2.0, 4.0}) {
      const LinearRates r = linear_rates(fig, c, 0.01);
      CHECK(std::abs(r.mu_c * r.mu_c + c * r.mu_c - rho) < 1e-12);
      CHECK(std::abs(r.mu_c * r.nu_c - rho) < 1e-12);
      CHECK(r.mu_c > 0);
      if (c >= 2 * std::sqrt(g0)) {
        REQUIRE(r.lambda_minus.has_value());
        for (double l : {*r.lambda_minus, *r.lambda_plus}) CHECK(std::abs(l * l - c * l + g0) < 1e-12);
        CHECK(*r.lambda_minus <= *r.lambda_plus);
        CHECK(std::abs(*r.lambda_minus + *r.lambda_plus - c) < 1e-12);
      } else {
        CHECK_FALSE(r.lambda_plus.has_value());
      }
      if (c >= 2 * std::sqrt(g0 + 0.01)) {
        const double lg = *r.lambda_gamma;
        CHECK(std::abs(lg * lg - c * lg + g0 + 0.01) < 1e-12);
      }
    }
  }
}

TEST_CASE("linear speed") {
  CHECK(linear_speed(kpp_model()) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(linear_speed(figure1_model()) == doctest::Approx(2 * std::sqrt(0.4)).epsilon(1e-9));
}

TEST_CASE("tabulated model") {
  std::vector<double> s, g;
  for (int i = 0; i <= 30; ++i) {
    s.push_back(1.5 * i / 30);
    g.push_back(s.back() * (1 - s.back()));
  }
  const GrowthModel t = tabulated_model(s, g);
  CHECK(t(0.5) == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(t.s_max() == 1.5);
  CHECK(validate_monostable(t, 200).ok());
}
