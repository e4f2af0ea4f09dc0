#pragma once

#include <span>
#include <vector>

namespace rangeshift {

/// Cubic Hermite evaluation on [x0, x1] given end values and slopes.
double hermite(double x, double x0, double x1, double y0, double y1, double d0, double d1);

/// Piecewise cubic Hermite interpolant with Fritsch-Carlson limited slopes
/// (monotone data stay monotone). Outside the knot range the end values are
/// held constant unless `extrapolate_linear` is set.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y, bool extrapolate_linear = false);

  double operator()(double x) const;
  double derivative(double x) const;

  std::span<const double> knots() const { return x_; }
  std::span<const double> values() const { return y_; }
  bool empty() const { return x_.empty(); }

 private:
  std::size_t segment(double x) const;

  std::vector<double> x_, y_, d_;
  bool extrapolate_linear_ = false;
};

/// Samples (x_i, y_i, dy_i) interpolated with exact-slope cubic Hermite.
/// Used for shooting output where the derivative is part of the state.
class HermiteSamples {
 public:
  HermiteSamples() = default;
  HermiteSamples(std::vector<double> x, std::vector<double> y, std::vector<double> dy);

  double operator()(double x) const;
  double derivative(double x) const;
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

 private:
  std::vector<double> x_, y_, dy_;
};

}  // namespace rangeshift
