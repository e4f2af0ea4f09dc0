#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rangeshift {

/// Monostable growth nonlinearity g together with the metadata the solvers
/// need. The callable is defined on the whole real line (shooting trajectories
/// may step slightly outside [0, 1]); range checks belong to eval_g.
class GrowthModel {
 public:
  using Fn = std::function<double(double)>;

  GrowthModel(std::string name, Fn g, std::optional<Fn> dg, double s_max, double holder_r = 1.0);

  const std::string& name() const { return name_; }
  double s_max() const { return s_max_; }
  double holder_r() const { return holder_r_; }
  double g_prime_0() const { return g_prime_0_; }
  bool analytic_derivative() const { return dg_.has_value(); }

  /// g(s) without range checks.
  double operator()(double s) const { return g_(s); }
  /// g'(s): analytic when supplied, else central difference, h = 1e-6 max(1, |s|).
  double derivative(double s) const;

 private:
  std::string name_;
  Fn g_;
  std::optional<Fn> dg_;
  double s_max_;
  double holder_r_;
  double g_prime_0_;
};

/// g(s) = s(1 - s).
GrowthModel kpp_model(double s_max = 1.5);
/// g(s) = 4 s (1 - s)(sin s + 0.1); g'(0) = 0.4, non-KPP.
GrowthModel figure1_model(double s_max = 3.0);
/// g(s) = s (1 - s)(1 + nu s); for nu > 2 the minimal speed is sqrt(2/nu) + sqrt(nu/2).
GrowthModel cubic_allee_model(double nu, double s_max = 1.5);
/// Monotone-cubic interpolant through (s_i, g_i); s_max is the last knot.
GrowthModel tabulated_model(std::vector<double> s, std::vector<double> g);

/// Checked g(s); throws DomainError outside [0, s_max].
double eval_g(const GrowthModel& model, double s);

struct MonostableCheck {
  std::string hypothesis;
  bool passed = true;
  double worst_s = 0.0;      // sample with the largest violation (or the checked point)
  double worst_value = 0.0;  // g or g' at that sample
};

struct ValidationReport {
  std::vector<MonostableCheck> checks;
  bool ok() const;
  std::string summary() const;
};

/// Samples the monostable hypotheses on s_i = i/n in (0,1) and
/// 1 + i (s_max - 1)/n in (1, s_max]. Doubling n refines the same grid.
ValidationReport validate_monostable(const GrowthModel& model, int n_samples);

/// f(z, s) = -rho s for z < 0 and g(s) for z >= 0. Construction validates the
/// growth model (1000 samples) and throws DomainError on failure.
class ShiftedReaction {
 public:
  explicit ShiftedReaction(GrowthModel growth, double rho = 1.0);

  const GrowthModel& growth() const { return growth_; }
  double rho() const { return rho_; }
  /// max(rho, sup_{[0, s_max]} |g'|), sampled.
  double lipschitz() const { return lipschitz_; }

  double operator()(double z, double s) const { return z < 0.0 ? -rho_ * s : growth_(s); }

 private:
  GrowthModel growth_;
  double rho_;
  double lipschitz_;
};

double eval_f(const ShiftedReaction& reaction, double z, double s);

struct LinearRates {
  double mu_c = 0.0;  // left tail growth, mu^2 + c mu - rho = 0
  double nu_c = 0.0;  // mu nu = rho
  std::optional<double> lambda_minus;  // lambda^2 - c lambda + g'(0) = 0
  std::optional<double> lambda_plus;
  std::optional<double> lambda_gamma;  // (c + sqrt(c^2 - 4(g'(0)+gamma)))/2
};

/// Closed-form linear rates. The lambda fields are left empty when their
/// discriminant is negative.
LinearRates linear_rates(const ShiftedReaction& reaction, double c, double gamma = 0.0);

/// Left-tail exponent mu_c for a given rho.
double mu_c(double rho, double c);

struct DecayPair {
  double minus;
  double plus;
};

/// lambda_-(c), lambda_+(c); throws RateUndefined when c < 2 sqrt(g'(0)).
DecayPair lambda_pm(const ShiftedReaction& reaction, double c);
/// Throws RateUndefined when c < 2 sqrt(g'(0) + gamma).
double lambda_gamma(const ShiftedReaction& reaction, double c, double gamma);

/// 2 sqrt(g'(0)), the linear (pulled) speed.
double linear_speed(const GrowthModel& model);

}  // namespace rangeshift
