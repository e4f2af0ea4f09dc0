#include "rangeshift/interp.hpp"

#include <algorithm>
#include <cmath>

#include "rangeshift/error.hpp"

namespace rangeshift {

double hermite(double x, double x0, double x1, double y0, double y1, double d0, double d1) {
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
}

namespace {

double hermite_slope(double x, double x0, double x1, double y0, double y1, double d0, double d1) {
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s;
  const double dh00 = (6 * s2 - 6 * s) / h;
  const double dh10 = 3 * s2 - 4 * s + 1;
  const double dh01 = (-6 * s2 + 6 * s) / h;
  const double dh11 = 3 * s2 - 2 * s;
  return dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1;
}

void check_knots(const std::vector<double>& x, std::size_t ny) {
  if (x.size() < 2 || x.size() != ny) {
    throw Error(ErrorKind::InvalidArgument, "interpolation needs at least two matching samples");
  }
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "interpolation knots must be strictly increasing");
    }
  }
}

std::size_t locate(const std::vector<double>& x, double v) {
  auto it = std::upper_bound(x.begin(), x.end(), v);
  std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  return std::min(i, x.size() - 2);
}

}  // namespace

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y, bool extrapolate_linear)
    : x_(std::move(x)), y_(std::move(y)), extrapolate_linear_(extrapolate_linear) {
  check_knots(x_, y_.size());
  const std::size_t n = x_.size();
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = delta[0];
    return;
  }
  // Interior: weighted harmonic mean (Fritsch-Butland), zero at extrema.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0) {
      d_[i] = 0;
    } else {
      const double w1 = 2 * h[i] + h[i - 1];
      const double w2 = h[i] + 2 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto end_slope = [](double h0, double h1, double m0, double m1) {
    double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (d * m0 <= 0) {
      d = 0;
    } else if (m0 * m1 <= 0 && std::abs(d) > std::abs(3 * m0)) {
      d = 3 * m0;
    }
    return d;
  };
  d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

std::size_t MonotoneCubic::segment(double x) const { return locate(x_, x); }

double MonotoneCubic::operator()(double x) const {
  if (x <= x_.front()) {
    return extrapolate_linear_ ? y_.front() + d_.front() * (x - x_.front()) : y_.front();
  }
  if (x >= x_.back()) {
    return extrapolate_linear_ ? y_.back() + d_.back() * (x - x_.back()) : y_.back();
  }
  const std::size_t i = segment(x);
  return hermite(x, x_[i], x_[i + 1], y_[i], y_[i + 1], d_[i], d_[i + 1]);
}

double MonotoneCubic::derivative(double x) const {
  if (x <= x_.front()) return extrapolate_linear_ ? d_.front() : 0.0;
  if (x >= x_.back()) return extrapolate_linear_ ? d_.back() : 0.0;
  const std::size_t i = segment(x);
  return hermite_slope(x, x_[i], x_[i + 1], y_[i], y_[i + 1], d_[i], d_[i + 1]);
}

HermiteSamples::HermiteSamples(std::vector<double> x, std::vector<double> y, std::vector<double> dy)
    : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)) {
  check_knots(x_, y_.size());
  if (dy_.size() != x_.size()) {
    throw Error(ErrorKind::InvalidArgument, "derivative samples do not match knots");
  }
}

double HermiteSamples::operator()(double x) const {
  const std::size_t i = locate(x_, x);
  return hermite(x, x_[i], x_[i + 1], y_[i], y_[i + 1], dy_[i], dy_[i + 1]);
}

double HermiteSamples::derivative(double x) const {
  const std::size_t i = locate(x_, x);
  return hermite_slope(x, x_[i], x_[i + 1], y_[i], y_[i + 1], dy_[i], dy_[i + 1]);
}

}  // namespace rangeshift
