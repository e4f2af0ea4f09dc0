#include "rangeshift/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "rangeshift/error.hpp"
#include "rangeshift/interp.hpp"

namespace rangeshift {

namespace {

constexpr double kZeroTol = 1e-12;

// Discriminants this close to zero are the double-root case, so that
// c = 2 sqrt(g'(0)) computed in floating point still has lambda_- = lambda_+.
double clamp_discriminant(double disc, double scale) {
  if (disc < 0.0 && disc > -1e-12 * std::max(1.0, scale)) return 0.0;
  return disc;
}

}  // namespace

GrowthModel::GrowthModel(std::string name, Fn g, std::optional<Fn> dg, double s_max, double holder_r)
    : name_(std::move(name)), g_(std::move(g)), dg_(std::move(dg)), s_max_(s_max), holder_r_(holder_r) {
  if (!(s_max_ > 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "s_max must exceed 1");
  }
  if (!(holder_r_ > 0.0 && holder_r_ <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "Hoelder exponent must lie in (0, 1]");
  }
  g_prime_0_ = derivative(0.0);
}

double GrowthModel::derivative(double s) const {
  if (dg_) return (*dg_)(s);
  const double h = 1e-6 * std::max(1.0, std::abs(s));
  return (g_(s + h) - g_(s - h)) / (2.0 * h);
}

GrowthModel kpp_model(double s_max) {
  return GrowthModel(
      "kpp", [](double s) { return s * (1.0 - s); }, [](double s) { return 1.0 - 2.0 * s; }, s_max);
}

GrowthModel figure1_model(double s_max) {
  return GrowthModel(
      "figure1", [](double s) { return 4.0 * s * (1.0 - s) * (std::sin(s) + 0.1); },
      [](double s) {
        return 4.0 * (1.0 - 2.0 * s) * (std::sin(s) + 0.1) + 4.0 * s * (1.0 - s) * std::cos(s);
      },
      s_max);
}

GrowthModel cubic_allee_model(double nu, double s_max) {
  if (!(nu >= 0.0)) throw Error(ErrorKind::InvalidArgument, "cubic_allee needs nu >= 0");
  return GrowthModel(
      "cubic_allee", [nu](double s) { return s * (1.0 - s) * (1.0 + nu * s); },
      [nu](double s) { return 1.0 + 2.0 * (nu - 1.0) * s - 3.0 * nu * s * s; }, s_max);
}

GrowthModel tabulated_model(std::vector<double> s, std::vector<double> g) {
  if (s.empty() || s.front() > 0.0) {
    throw Error(ErrorKind::InvalidArgument, "tabulated growth must start at s <= 0");
  }
  const double s_max = s.back();
  auto interp = std::make_shared<MonotoneCubic>(std::move(s), std::move(g), true);
  return GrowthModel(
      "tabulated", [interp](double v) { return (*interp)(v); },
      [interp](double v) { return interp->derivative(v); }, s_max);
}

double eval_g(const GrowthModel& model, double s) {
  if (!(s >= 0.0 && s <= model.s_max())) {
    std::ostringstream os;
    os << "density " << s << " outside [0, " << model.s_max() << "]";
    throw Error(ErrorKind::DomainError, os.str());
  }
  return model(s);
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.passed ? "pass " : "FAIL ") << c.hypothesis << " (worst s=" << c.worst_s
       << ", value=" << c.worst_value << ")\n";
  }
  return os.str();
}

ValidationReport validate_monostable(const GrowthModel& model, int n_samples) {
  if (n_samples < 10) throw Error(ErrorKind::InvalidArgument, "validate_monostable needs n_samples >= 10");
  ValidationReport report;
  const double g0 = model(0.0);
  const double g1 = model(1.0);
  report.checks.push_back({"g(0)=0", std::abs(g0) <= kZeroTol, 0.0, g0});
  report.checks.push_back({"g(1)=0", std::abs(g1) <= kZeroTol, 1.0, g1});

  MonostableCheck inner{"g(s)>0 on (0,1)", true, 0.0, 0.0};
  double worst = INFINITY;
  for (int i = 1; i < n_samples; ++i) {
    const double s = static_cast<double>(i) / n_samples;
    const double v = model(s);
    if (v < worst) {
      worst = v;
      inner.worst_s = s;
      inner.worst_value = v;
    }
  }
  inner.passed = worst > 0.0;
  report.checks.push_back(inner);

  MonostableCheck outer{"g(s)<0 on (1,s_max]", true, 1.0, 0.0};
  worst = -INFINITY;
  for (int i = 1; i <= n_samples; ++i) {
    const double s = 1.0 + (model.s_max() - 1.0) * static_cast<double>(i) / n_samples;
    const double v = model(s);
    if (v > worst) {
      worst = v;
      outer.worst_s = s;
      outer.worst_value = v;
    }
  }
  outer.passed = worst < 0.0;
  report.checks.push_back(outer);

  const double dg0 = model.g_prime_0();
  const double dg1 = model.derivative(1.0);
  report.checks.push_back({"g'(0)>0", dg0 > 0.0, 0.0, dg0});
  report.checks.push_back({"g'(1)<0", dg1 < 0.0, 1.0, dg1});
  return report;
}

ShiftedReaction::ShiftedReaction(GrowthModel growth, double rho) : growth_(std::move(growth)), rho_(rho) {
  if (!(rho_ > 0.0)) throw Error(ErrorKind::InvalidArgument, "rho must be positive");
  const auto report = validate_monostable(growth_, 1000);
  if (!report.ok()) {
    throw Error(ErrorKind::DomainError, "growth model '" + growth_.name() + "' is not monostable:\n" +
                                            report.summary());
  }
  double lip = rho_;
  constexpr int kLipSamples = 4000;
  for (int i = 0; i <= kLipSamples; ++i) {
    const double s = growth_.s_max() * static_cast<double>(i) / kLipSamples;
    lip = std::max(lip, std::abs(growth_.derivative(s)));
  }
  lipschitz_ = lip;
}

double eval_f(const ShiftedReaction& reaction, double z, double s) {
  eval_g(reaction.growth(), s);  // range check only
  return reaction(z, s);
}

double mu_c(double rho, double c) { return 0.5 * (-c + std::sqrt(c * c + 4.0 * rho)); }

LinearRates linear_rates(const ShiftedReaction& reaction, double c, double gamma) {
  if (!(c >= 0.0)) throw Error(ErrorKind::InvalidArgument, "speed must be nonnegative");
  if (!(gamma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be nonnegative");
  LinearRates r;
  const double root = std::sqrt(c * c + 4.0 * reaction.rho());
  r.mu_c = 0.5 * (-c + root);
  r.nu_c = 0.5 * (c + root);
  const double g0 = reaction.growth().g_prime_0();
  const double disc = clamp_discriminant(c * c - 4.0 * g0, c * c);
  if (disc >= 0.0) {
    r.lambda_minus = 0.5 * (c - std::sqrt(disc));
    r.lambda_plus = 0.5 * (c + std::sqrt(disc));
  }
  const double disc_g = clamp_discriminant(c * c - 4.0 * (g0 + gamma), c * c);
  if (disc_g >= 0.0) r.lambda_gamma = 0.5 * (c + std::sqrt(disc_g));
  return r;
}

DecayPair lambda_pm(const ShiftedReaction& reaction, double c) {
  const auto r = linear_rates(reaction, c);
  if (!r.lambda_minus) {
    std::ostringstream os;
    os << "lambda_pm undefined for c=" << c << " < 2 sqrt(g'(0)) = " << linear_speed(reaction.growth());
    throw Error(ErrorKind::RateUndefined, os.str());
  }
  return {*r.lambda_minus, *r.lambda_plus};
}

double lambda_gamma(const ShiftedReaction& reaction, double c, double gamma) {
  const auto r = linear_rates(reaction, c, gamma);
  if (!r.lambda_gamma) {
    std::ostringstream os;
    os << "lambda_gamma undefined for c=" << c << ", gamma=" << gamma;
    throw Error(ErrorKind::RateUndefined, os.str());
  }
  return *r.lambda_gamma;
}

double linear_speed(const GrowthModel& model) { return 2.0 * std::sqrt(std::max(0.0, model.g_prime_0())); }

}  // namespace rangeshift
