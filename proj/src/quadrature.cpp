#include "conespec/quadrature.hpp"

#include "conespec/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace conespec {

namespace {

constexpr int kGaussOrder = 8;

std::vector<double> panel_edges(double a, double b, const std::vector<double>& breakpoints) {
  std::vector<double> edges{a};
  for (double p : breakpoints) {
    if (p > a && p < b) edges.push_back(p);
  }
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

// Composite rule along one axis of [a, b], with `total` nodes spread over
// `extent` (the full region length along that axis).
void axis_rule(double a, double b, double extent, const std::vector<double>& breakpoints, const QuadratureSpec& spec,
               std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.clear();
  weights.clear();
  const auto edges = panel_edges(a, b, breakpoints);
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double len = edges[p + 1] - edges[p];
    const int count = std::max(16, static_cast<int>(std::ceil(spec.nodes_per_axis * len / extent)));
    std::vector<double> n, w;
    rule_1d(edges[p], edges[p + 1], count, spec.rule, n, w);
    nodes.insert(nodes.end(), n.begin(), n.end());
    weights.insert(weights.end(), w.begin(), w.end());
  }
}

}  // namespace

void QuadratureSpec::validate() const {
  if (nodes_per_axis < 16) throw Error(ErrorKind::invalid_argument, "quadrature needs at least 16 nodes per axis");
  if (!(truncation_threshold > 0.0) || truncation_threshold > 1e-6)
    throw Error(ErrorKind::invalid_argument, "truncation threshold must lie in (0, 1e-6]");
}

QuadratureSpec QuadratureSpec::refined() const {
  QuadratureSpec out = *this;
  out.nodes_per_axis *= 2;
  return out;
}

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(order, 0.0);
  weights.assign(order, 0.0);
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[order - 1 - i] = x;
    weights[i] = weights[order - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

void rule_1d(double a, double b, int count, QuadratureSpec::Rule rule, std::vector<double>& nodes,
             std::vector<double>& weights) {
  nodes.clear();
  weights.clear();
  if (!(b > a)) return;
  if (rule == QuadratureSpec::Rule::composite_simpson) {
    int m = std::max(2, count - 1);
    if (m % 2) ++m;
    const double h = (b - a) / m;
    for (int i = 0; i <= m; ++i) {
      nodes.push_back(a + i * h);
      const double c = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      weights.push_back(c * h / 3.0);
    }
    return;
  }
  static const auto table = [] {
    std::pair<std::vector<double>, std::vector<double>> t;
    gauss_legendre(kGaussOrder, t.first, t.second);
    return t;
  }();
  const int panels = std::max(1, (count + kGaussOrder - 1) / kGaussOrder);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int q = 0; q < kGaussOrder; ++q) {
      nodes.push_back(mid + 0.5 * h * table.first[q]);
      weights.push_back(0.5 * h * table.second[q]);
    }
  }
}

QuadratureNodes build_nodes(const Domain& domain, const Box& region, const Breakpoints& breakpoints,
                            const QuadratureSpec& spec) {
  spec.validate();
  QuadratureNodes out;
  std::vector<double> xs, wx, ys, wy;
  switch (domain.kind()) {
    case Domain::Kind::interval: {
      const double a = std::max(domain.lo(), region.lo[0]);
      const double b = std::min(domain.hi(), region.hi[0]);
      if (!(b > a)) break;
      axis_rule(a, b, b - a, breakpoints[0], spec, xs, wx);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        out.points.emplace_back(xs[i], 0.0);
        out.weights.push_back(wx[i]);
      }
      break;
    }
    case Domain::Kind::polygon: {
      const double ex = region.extent(0), ey = region.extent(1);
      const double extent = std::max(ex, ey);
      for (const auto& r : domain.rects()) {
        const double x0 = std::max(r.x0, region.lo[0]), x1 = std::min(r.x1, region.hi[0]);
        const double y0 = std::max(r.y0, region.lo[1]), y1 = std::min(r.y1, region.hi[1]);
        if (!(x1 > x0) || !(y1 > y0)) continue;
        axis_rule(x0, x1, extent, breakpoints[0], spec, xs, wx);
        axis_rule(y0, y1, extent, breakpoints[1], spec, ys, wy);
        for (std::size_t i = 0; i < xs.size(); ++i) {
          for (std::size_t j = 0; j < ys.size(); ++j) {
            out.points.emplace_back(xs[i], ys[j]);
            out.weights.push_back(wx[i] * wy[j]);
          }
        }
      }
      break;
    }
    case Domain::Kind::circle: {
      const auto& circles = domain.circle_list();
      const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(region.lo[1])));
      const auto last = std::min(circles.size() - 1, static_cast<std::size_t>(std::floor(region.hi[1])));
      const double two_pi = 2.0 * std::numbers::pi;
      const double a = std::max(0.0, region.lo[0]), b = std::min(two_pi, region.hi[0]);
      for (std::size_t c = first; c <= last; ++c) {
        axis_rule(a, b, two_pi, breakpoints[0], spec, xs, wx);
        for (std::size_t i = 0; i < xs.size(); ++i) {
          out.points.emplace_back(xs[i], static_cast<double>(c));
          out.weights.push_back(wx[i] * circles[c].radius);
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace conespec
