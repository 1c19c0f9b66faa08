#include "dislogen/geometry.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dislogen/errors.hpp"

namespace dislogen {

CubicSpline2D::CubicSpline2D(std::vector<Point> knots) : knots_(std::move(knots)) {
  const std::size_t n = knots_.size();
  if (n < 2) throw ParameterError("spline needs at least 2 points");

  t_.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double d = distance(knots_[i], knots_[i - 1]);
    if (!(d > 0.0)) throw ParameterError("spline has repeated consecutive points");
    t_[i] = t_[i - 1] + d;
  }
  const double total = t_.back();
  for (auto& t : t_) t /= total;
  t_.back() = 1.0;

  // Tridiagonal system for the natural spline (M_0 = M_{n-1} = 0), solved
  // with the Thomas algorithm for both coordinates at once.
  m_.assign(n, Point{});
  if (n < 3) return;
  const std::size_t k = n - 2;
  std::vector<double> diag(k), upper(k), lower(k);
  std::vector<Point> rhs(k);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = t_[i] - t_[i - 1];
    const double h1 = t_[i + 1] - t_[i];
    lower[i - 1] = h0;
    diag[i - 1] = 2.0 * (h0 + h1);
    upper[i - 1] = h1;
    rhs[i - 1] = 6.0 * ((1.0 / h1) * (knots_[i + 1] - knots_[i]) -
                        (1.0 / h0) * (knots_[i] - knots_[i - 1]));
  }
  for (std::size_t i = 1; i < k; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m_[k] = (1.0 / diag[k - 1]) * rhs[k - 1];
  for (std::size_t i = k - 1; i >= 1; --i) {
    m_[i] = (1.0 / diag[i - 1]) * (rhs[i - 1] - upper[i - 1] * m_[i + 1]);
  }
}

std::size_t CubicSpline2D::segment(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw ParameterError("spline parameter outside [0,1]");
  if (knots_.empty()) throw ParameterError("empty spline");
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - t_.begin());
  if (i == 0) i = 1;
  if (i >= t_.size()) i = t_.size() - 1;
  return i - 1;
}

Point CubicSpline2D::eval(double t) const {
  const std::size_t i = segment(t);
  const double h = t_[i + 1] - t_[i];
  const double a = (t_[i + 1] - t) / h;
  const double b = (t - t_[i]) / h;
  // Exact knot hits return the knot itself.
  if (b == 0.0) return knots_[i];
  if (a == 0.0) return knots_[i + 1];
  return a * knots_[i] + b * knots_[i + 1] +
         ((a * a * a - a) * h * h / 6.0) * m_[i] + ((b * b * b - b) * h * h / 6.0) * m_[i + 1];
}

Point CubicSpline2D::derivative(double t) const {
  const std::size_t i = segment(t);
  const double h = t_[i + 1] - t_[i];
  const double a = (t_[i + 1] - t) / h;
  const double b = (t - t_[i]) / h;
  return (1.0 / h) * (knots_[i + 1] - knots_[i]) +
         (-(3.0 * a * a - 1.0) * h / 6.0) * m_[i] + ((3.0 * b * b - 1.0) * h / 6.0) * m_[i + 1];
}

double CubicSpline2D::length() const {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < t_.size(); ++i) {
    const double lo = t_[i];
    const double hi = t_[i + 1];
    // Evaluate inside the piece so the segment lookup never straddles a knot.
    const double h = hi - lo;
    const Point p0 = knots_[i], p1 = knots_[i + 1], m0 = m_[i], m1 = m_[i + 1];
    auto speed = [&](double t) {
      const double a = (hi - t) / h;
      const double b = (t - lo) / h;
      const Point d = (1.0 / h) * (p1 - p0) + (-(3.0 * a * a - 1.0) * h / 6.0) * m0 +
                      ((3.0 * b * b - 1.0) * h / 6.0) * m1;
      return norm(d);
    };
    total += gauss_kronrod<double, 15>::integrate(speed, lo, hi, 15, 1e-12);
  }
  return total;
}

std::vector<Point> CubicSpline2D::sample(std::size_t count) const {
  if (count < 2) throw ParameterError("spline sampling needs at least 2 points");
  std::vector<Point> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = eval(static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return out;
}

}  // namespace dislogen
