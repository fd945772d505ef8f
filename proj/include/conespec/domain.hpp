#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace conespec {

/// Intrinsic coordinates of a point in a model domain.
///
/// interval: (x, unused); polygon: (x, y); circle: (angle in [0, 2pi), circle index).
using Point = Eigen::Vector2d;

struct Box {
  Eigen::Vector2d lo{0.0, 0.0};
  Eigen::Vector2d hi{0.0, 0.0};

  double extent(int axis) const { return hi[axis] - lo[axis]; }
  bool empty() const { return !(hi[0] > lo[0]) || !(hi[1] >= lo[1]); }
};

struct Rect {
  double x0, y0, x1, y1;
  double area() const { return (x1 - x0) * (y1 - y0); }
};

struct Circle {
  Eigen::Vector2d center{0.0, 0.0};
  double radius = 1.0;
};

/// Closed real interval, used for cross sections.
using Span1 = std::pair<double, double>;

/// Where densities live: an interval, a union of axis-aligned rectangles with
/// disjoint interiors, or one or more disjoint circles.
class Domain {
 public:
  enum class Kind { interval, polygon, circle };

  static Domain interval(double lo, double hi);
  static Domain polygon(std::vector<Rect> rects);
  static Domain circles(std::vector<Circle> circles);
  static Domain unit_circle() { return circles({Circle{}}); }

  Kind kind() const { return kind_; }
  int intrinsic_dim() const { return kind_ == Kind::polygon ? 2 : 1; }
  int ambient_dim() const { return kind_ == Kind::interval ? 1 : 2; }

  bool contains(const Point& p) const;
  /// Bounding box in intrinsic coordinates. For circles, axis 0 is the angle
  /// range [0, 2pi) and axis 1 the circle index range.
  Box bounding_box() const;
  double diameter() const;
  /// Lebesgue measure (length, area, or total circumference).
  double volume() const;

  Eigen::VectorXd to_ambient(const Point& p) const;
  /// Inverse of to_ambient. For circles the nearest circle is chosen.
  Point from_ambient(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  const std::vector<Rect>& rects() const { return rects_; }
  const std::vector<Circle>& circle_list() const { return circles_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  /// Cross section of a polygon domain by the line {x_axis = t}, as merged
  /// intervals of the other coordinate. side < 0 uses rectangles covering
  /// t from the left, side > 0 from the right, side == 0 either.
  std::vector<Span1> cross_section(int axis, double t, int side = 0) const;

  /// Area of the intersection of a box with a polygon domain.
  double intersection_area(const Box& b) const;
  /// Centroid of box intersected with the polygon domain (requires area > 0).
  Eigen::Vector2d intersection_centroid(const Box& b) const;

 private:
  Kind kind_ = Kind::interval;
  double lo_ = 0.0, hi_ = 1.0;
  std::vector<Rect> rects_;
  std::vector<Circle> circles_;
};

/// Length of the intersection of two sorted, merged interval lists.
double overlap_length(const std::vector<Span1>& a, const std::vector<Span1>& b);
/// Restrict merged intervals to [lo, hi].
std::vector<Span1> clip(const std::vector<Span1>& spans, double lo, double hi);

}  // namespace conespec
