#pragma once

#include <array>
#include <functional>

namespace rangeshift::ode {

using State = std::array<double, 2>;
using Rhs = std::function<State(double, const State&)>;

/// One accepted Dormand-Prince step with its fourth-order continuous extension.
struct DenseStep {
  double z0 = 0.0;
  double h = 0.0;  // signed; negative when integrating backward
  State y0{};
  State y1{};
  std::array<State, 5> rcont{};

  double z1() const { return z0 + h; }
  State operator()(double z) const;
};

struct Options {
  double rtol = 1e-10;
  double atol = 1e-20;
  double h_init = 1e-2;
  double h_max = 1.0;
  long max_steps = 2'000'000;
};

enum class Action { Continue, Stop };

struct Result {
  bool reached_end = false;  // false when the step callback stopped early
  double z = 0.0;
  State y{};
  long steps = 0;
};

/// Adaptive DOPRI5(4) from z0 towards z_end (either direction). on_step sees every
/// accepted step and may stop the integration. Throws StepFailure when the step
/// size underflows.
Result integrate(const Rhs& rhs, double z0, const State& y0, double z_end, const Options& opts,
                 const std::function<Action(const DenseStep&)>& on_step);

/// Root of fn(z, y(z)) inside the step, located on the dense output by
/// safeguarded regula falsi (Illinois) to |dz| <= ztol. fn must change sign
/// between the step ends.
double locate_root(const DenseStep& step, const std::function<double(double, const State&)>& fn,
                   double ztol);

}  // namespace rangeshift::ode
