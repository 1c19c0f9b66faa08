#pragma once

#include <cmath>
#include <vector>

#include "json.hpp"

namespace dislogen {

// 2D point in pixel units: x along columns, y along rows (downwards).
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
  Point& operator+=(Point o) { x += o.x; y += o.y; return *this; }
  Point& operator-=(Point o) { x -= o.x; y -= o.y; return *this; }
  friend Point operator+(Point a, Point b) { return a += b; }
  friend Point operator-(Point a, Point b) { return a -= b; }
  friend Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
  friend Point operator*(Point p, double s) { return {s * p.x, s * p.y}; }
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

// Distance from p to the closed segment [a, b].
inline double distance_to_segment(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  double t = dot(p - a, ab) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return distance(p, a + t * ab);
}

inline void to_json(nlohmann::json& j, const Point& p) { j = nlohmann::json::array({p.x, p.y}); }
inline void from_json(const nlohmann::json& j, Point& p) {
  p.x = j.at(0).get<double>();
  p.y = j.at(1).get<double>();
}

// Natural (C2) cubic spline through a sequence of points, parameterized by
// normalized cumulative chord length so t runs over [0, 1].
class CubicSpline2D {
 public:
  CubicSpline2D() = default;
  // Needs >= 2 points and no repeated consecutive points.
  explicit CubicSpline2D(std::vector<Point> knots);

  const std::vector<Point>& knots() const noexcept { return knots_; }
  // Parameter value of each knot; first is 0, last is 1.
  const std::vector<double>& knot_params() const noexcept { return t_; }

  Point eval(double t) const;
  Point derivative(double t) const;

  // Arc length by adaptive Gauss-Kronrod quadrature on each spline piece.
  double length() const;

  // `count` points at equal parameter steps, endpoints included.
  std::vector<Point> sample(std::size_t count) const;

 private:
  std::size_t segment(double t) const;

  std::vector<Point> knots_;
  std::vector<double> t_;
  std::vector<Point> m_;  // second derivatives at the knots
};

}  // namespace dislogen
