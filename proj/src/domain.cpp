#include "conespec/domain.hpp"

#include "conespec/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace conespec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<Span1> merge(std::vector<Span1> spans) {
  std::sort(spans.begin(), spans.end());
  std::vector<Span1> out;
  for (const auto& s : spans) {
    if (!(s.second > s.first)) continue;
    if (!out.empty() && s.first <= out.back().second) {
      out.back().second = std::max(out.back().second, s.second);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

double rect_lo(const Rect& r, int axis) { return axis == 0 ? r.x0 : r.y0; }
double rect_hi(const Rect& r, int axis) { return axis == 0 ? r.x1 : r.y1; }

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::singular_point: return "singular-point";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::disconnected: return "disconnected";
    case ErrorKind::isolated_vertex: return "isolated-vertex";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::sampler: return "sampler-inefficiency";
    case ErrorKind::rank_deficient: return "rank-deficient";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

Domain Domain::interval(double lo, double hi) {
  if (!(hi > lo)) throw Error(ErrorKind::invalid_argument, "interval domain needs lo < hi");
  Domain d;
  d.kind_ = Kind::interval;
  d.lo_ = lo;
  d.hi_ = hi;
  return d;
}

Domain Domain::polygon(std::vector<Rect> rects) {
  if (rects.empty()) throw Error(ErrorKind::invalid_argument, "polygon domain needs at least one rectangle");
  for (const auto& r : rects) {
    if (!(r.x1 > r.x0) || !(r.y1 > r.y0))
      throw Error(ErrorKind::invalid_argument, "degenerate rectangle in polygon domain");
  }
  for (std::size_t i = 0; i < rects.size(); ++i) {
    for (std::size_t j = i + 1; j < rects.size(); ++j) {
      const double w = std::min(rects[i].x1, rects[j].x1) - std::max(rects[i].x0, rects[j].x0);
      const double h = std::min(rects[i].y1, rects[j].y1) - std::max(rects[i].y0, rects[j].y0);
      if (w > 0 && h > 0)
        throw Error(ErrorKind::invalid_argument, "polygon rectangles must have disjoint interiors");
    }
  }
  Domain d;
  d.kind_ = Kind::polygon;
  d.rects_ = std::move(rects);
  return d;
}

Domain Domain::circles(std::vector<Circle> circles) {
  if (circles.empty()) throw Error(ErrorKind::invalid_argument, "circle domain needs at least one circle");
  for (std::size_t i = 0; i < circles.size(); ++i) {
    if (!(circles[i].radius > 0)) throw Error(ErrorKind::invalid_argument, "circle radius must be positive");
    for (std::size_t j = 0; j < i; ++j) {
      const double dist = (circles[i].center - circles[j].center).norm();
      if (dist <= circles[i].radius + circles[j].radius &&
          dist >= std::abs(circles[i].radius - circles[j].radius))
        throw Error(ErrorKind::invalid_argument, "circles in a domain must not intersect");
    }
  }
  Domain d;
  d.kind_ = Kind::circle;
  d.circles_ = std::move(circles);
  return d;
}

bool Domain::contains(const Point& p) const {
  switch (kind_) {
    case Kind::interval:
      return p[0] >= lo_ && p[0] <= hi_;
    case Kind::polygon:
      return std::any_of(rects_.begin(), rects_.end(), [&](const Rect& r) {
        return p[0] >= r.x0 && p[0] <= r.x1 && p[1] >= r.y0 && p[1] <= r.y1;
      });
    case Kind::circle: {
      const double idx = p[1];
      return std::isfinite(p[0]) && idx >= 0 && idx == std::floor(idx) &&
             idx < static_cast<double>(circles_.size());
    }
  }
  return false;
}

Box Domain::bounding_box() const {
  Box b;
  switch (kind_) {
    case Kind::interval:
      b.lo = {lo_, 0.0};
      b.hi = {hi_, 0.0};
      break;
    case Kind::polygon:
      b.lo = {rects_[0].x0, rects_[0].y0};
      b.hi = {rects_[0].x1, rects_[0].y1};
      for (const auto& r : rects_) {
        b.lo = b.lo.cwiseMin(Eigen::Vector2d(r.x0, r.y0));
        b.hi = b.hi.cwiseMax(Eigen::Vector2d(r.x1, r.y1));
      }
      break;
    case Kind::circle:
      b.lo = {0.0, 0.0};
      b.hi = {kTwoPi, static_cast<double>(circles_.size() - 1)};
      break;
  }
  return b;
}

double Domain::diameter() const {
  switch (kind_) {
    case Kind::interval: return hi_ - lo_;
    case Kind::polygon: {
      const Box b = bounding_box();
      return (b.hi - b.lo).norm();
    }
    case Kind::circle: {
      double d = 0.0;
      for (const auto& c : circles_) {
        for (const auto& e : circles_) d = std::max(d, (c.center - e.center).norm() + c.radius + e.radius);
      }
      return d;
    }
  }
  return 0.0;
}

double Domain::volume() const {
  switch (kind_) {
    case Kind::interval: return hi_ - lo_;
    case Kind::polygon: {
      double a = 0.0;
      for (const auto& r : rects_) a += r.area();
      return a;
    }
    case Kind::circle: {
      double l = 0.0;
      for (const auto& c : circles_) l += kTwoPi * c.radius;
      return l;
    }
  }
  return 0.0;
}

Eigen::VectorXd Domain::to_ambient(const Point& p) const {
  switch (kind_) {
    case Kind::interval: {
      Eigen::VectorXd x(1);
      x[0] = p[0];
      return x;
    }
    case Kind::polygon:
      return Eigen::VectorXd(p);
    case Kind::circle: {
      const auto& c = circles_.at(static_cast<std::size_t>(p[1]));
      Eigen::VectorXd x(2);
      x[0] = c.center[0] + c.radius * std::cos(p[0]);
      x[1] = c.center[1] + c.radius * std::sin(p[0]);
      return x;
    }
  }
  return {};
}

Point Domain::from_ambient(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != ambient_dim())
    throw Error(ErrorKind::dimension, "point has " + std::to_string(x.size()) +
                                          " coordinates, domain expects " + std::to_string(ambient_dim()));
  switch (kind_) {
    case Kind::interval: return {x[0], 0.0};
    case Kind::polygon: return {x[0], x[1]};
    case Kind::circle: {
      std::size_t best = 0;
      double best_gap = INFINITY;
      for (std::size_t i = 0; i < circles_.size(); ++i) {
        const double gap = std::abs((Eigen::Vector2d(x[0], x[1]) - circles_[i].center).norm() - circles_[i].radius);
        if (gap < best_gap) {
          best_gap = gap;
          best = i;
        }
      }
      const auto& c = circles_[best];
      double angle = std::atan2(x[1] - c.center[1], x[0] - c.center[0]);
      if (angle < 0) angle += kTwoPi;
      if (angle >= kTwoPi) angle -= kTwoPi;
      return {angle, static_cast<double>(best)};
    }
  }
  return {};
}

std::vector<Span1> Domain::cross_section(int axis, double t, int side) const {
  if (kind_ != Kind::polygon) throw Error(ErrorKind::invalid_argument, "cross sections need a polygon domain");
  const int other = 1 - axis;
  std::vector<Span1> spans;
  for (const auto& r : rects_) {
    const double a = rect_lo(r, axis), b = rect_hi(r, axis);
    bool hit = false;
    if (side < 0) hit = a < t && t <= b;
    else if (side > 0) hit = a <= t && t < b;
    else hit = a <= t && t <= b;
    if (hit) spans.emplace_back(rect_lo(r, other), rect_hi(r, other));
  }
  return merge(std::move(spans));
}

double Domain::intersection_area(const Box& b) const {
  double area = 0.0;
  for (const auto& r : rects_) {
    const double w = std::min(r.x1, b.hi[0]) - std::max(r.x0, b.lo[0]);
    const double h = std::min(r.y1, b.hi[1]) - std::max(r.y0, b.lo[1]);
    if (w > 0 && h > 0) area += w * h;
  }
  return area;
}

Eigen::Vector2d Domain::intersection_centroid(const Box& b) const {
  double area = 0.0;
  Eigen::Vector2d moment = Eigen::Vector2d::Zero();
  for (const auto& r : rects_) {
    const double x0 = std::max(r.x0, b.lo[0]), x1 = std::min(r.x1, b.hi[0]);
    const double y0 = std::max(r.y0, b.lo[1]), y1 = std::min(r.y1, b.hi[1]);
    if (x1 > x0 && y1 > y0) {
      const double a = (x1 - x0) * (y1 - y0);
      area += a;
      moment += a * Eigen::Vector2d(0.5 * (x0 + x1), 0.5 * (y0 + y1));
    }
  }
  if (!(area > 0)) return 0.5 * (b.lo + b.hi);
  return moment / area;
}

double overlap_length(const std::vector<Span1>& a, const std::vector<Span1>& b) {
  double total = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].first, b[j].first);
    const double hi = std::min(a[i].second, b[j].second);
    if (hi > lo) total += hi - lo;
    if (a[i].second < b[j].second) ++i;
    else ++j;
  }
  return total;
}

std::vector<Span1> clip(const std::vector<Span1>& spans, double lo, double hi) {
  std::vector<Span1> out;
  for (const auto& s : spans) {
    const double a = std::max(s.first, lo), b = std::min(s.second, hi);
    if (b > a) out.emplace_back(a, b);
  }
  return out;
}

}  // namespace conespec
