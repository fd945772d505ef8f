#include "conespec/continuum.hpp"

#include "conespec/error.hpp"
#include "conespec/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <string>

namespace conespec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Face {
  int p, q;
  double weight;
};

std::vector<Span1> intersect(const std::vector<Span1>& a, const std::vector<Span1>& b) {
  std::vector<Span1> out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].first, b[j].first);
    const double hi = std::min(a[i].second, b[j].second);
    if (hi > lo) out.emplace_back(lo, hi);
    if (a[i].second < b[j].second) ++i;
    else ++j;
  }
  return out;
}

// Integral of f over [a, b] with Gauss-Legendre panels split at breakpoints.
double integrate(const std::function<double(double)>& f, double a, double b, const std::vector<double>& breaks,
                 int nodes) {
  if (!(b > a)) return 0.0;
  std::vector<double> edges{a, b};
  for (double p : breaks) {
    if (p > a && p < b) edges.push_back(p);
  }
  std::sort(edges.begin(), edges.end());
  double total = 0.0;
  std::vector<double> xs, ws;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const int count = std::max(8, static_cast<int>(std::ceil(nodes * (edges[e + 1] - edges[e]) / (b - a))));
    rule_1d(edges[e], edges[e + 1], count, QuadratureSpec::Rule::gauss_legendre, xs, ws);
    for (std::size_t i = 0; i < xs.size(); ++i) total += ws[i] * f(xs[i]);
  }
  return total;
}

void label_components(GridOperator& g, const std::vector<Face>& faces) {
  std::vector<std::vector<int>> adj(g.size());
  for (const auto& f : faces) {
    if (f.weight > 0) {
      adj[f.p].push_back(f.q);
      adj[f.q].push_back(f.p);
    }
  }
  g.component_of.assign(g.size(), -1);
  g.components = 0;
  for (int s = 0; s < g.size(); ++s) {
    if (g.component_of[s] >= 0) continue;
    std::deque<int> queue{s};
    g.component_of[s] = g.components;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int u : adj[v]) {
        if (g.component_of[u] < 0) {
          g.component_of[u] = g.components;
          queue.push_back(u);
        }
      }
    }
    ++g.components;
  }
}

double circle_step(const Domain& d, int c, int resolution) { return kTwoPi * d.circle_list()[c].radius / resolution; }

}  // namespace

Eigen::MatrixXd GridOperator::component_indicators() const {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(size(), components);
  for (int i = 0; i < size(); ++i) y(i, component_of[i]) = 1.0;
  return y;
}

DensityFn component_fn(const MixtureModel& model, std::size_t k) {
  return [&model, k](const Point& x) { return model.component_density(k, x); };
}

DensityFn mixture_fn(const MixtureModel& model) {
  return [&model](const Point& x) {
    double r = 0.0;
    for (std::size_t k = 0; k < model.size(); ++k) r += model.weights()[k] * model.component_density(k, x);
    return r;
  };
}

GridOperator discretize(const DensityFn& density, const Domain& domain, int resolution, double drop_threshold) {
  if (resolution < 4) throw Error(ErrorKind::invalid_argument, "grid resolution must be at least 4");
  GridOperator g;
  g.domain = domain;
  g.resolution = resolution;

  struct Cell {
    int i, j;
    Point centroid;
    double volume, rho;
  };
  std::vector<Cell> cells;
  switch (domain.kind()) {
    case Domain::Kind::interval: {
      g.h = (domain.hi() - domain.lo()) / resolution;
      g.nx = resolution;
      g.ny = 1;
      g.origin = {domain.lo(), 0.0};
      for (int i = 0; i < resolution; ++i) {
        const Point c(domain.lo() + (i + 0.5) * g.h, 0.0);
        cells.push_back({i, 0, c, g.h, density(c)});
      }
      break;
    }
    case Domain::Kind::polygon: {
      const Box bb = domain.bounding_box();
      g.h = std::max(bb.extent(0), bb.extent(1)) / resolution;
      g.nx = std::max(1, static_cast<int>(std::ceil(bb.extent(0) / g.h - 1e-9)));
      g.ny = std::max(1, static_cast<int>(std::ceil(bb.extent(1) / g.h - 1e-9)));
      g.origin = bb.lo;
      for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
          Box cell;
          cell.lo = g.origin + Eigen::Vector2d(i * g.h, j * g.h);
          cell.hi = cell.lo + Eigen::Vector2d(g.h, g.h);
          const double vol = domain.intersection_area(cell);
          if (!(vol > 1e-12 * g.h * g.h)) continue;
          const Point c = domain.intersection_centroid(cell);
          cells.push_back({i, j, c, vol, density(c)});
        }
      }
      break;
    }
    case Domain::Kind::circle: {
      const int nc = static_cast<int>(domain.circle_list().size());
      g.h = circle_step(domain, 0, resolution);
      g.nx = resolution;
      g.ny = nc;
      g.origin = {0.0, 0.0};
      for (int c = 0; c < nc; ++c) {
        const double hc = circle_step(domain, c, resolution);
        for (int i = 0; i < resolution; ++i) {
          const Point p((i + 0.5) * kTwoPi / resolution, c);
          cells.push_back({i, c, p, hc, density(p)});
        }
      }
      break;
    }
  }

  double rho_max = 0.0;
  for (const auto& c : cells) {
    if (!std::isfinite(c.rho) || c.rho < 0) throw Error(ErrorKind::invalid_argument, "density must be finite and non-negative");
    rho_max = std::max(rho_max, c.rho);
  }
  if (!(rho_max > 0)) throw Error(ErrorKind::invalid_argument, "density vanishes on the whole grid");
  g.cell_index.assign(static_cast<std::size_t>(g.nx) * g.ny, -1);
  std::vector<double> rho;
  for (const auto& c : cells) {
    if (!(c.rho >= drop_threshold * rho_max) || c.rho == 0.0) continue;
    g.cell_index[static_cast<std::size_t>(c.j) * g.nx + c.i] = g.size();
    g.nodes.push_back(c.centroid);
    g.volumes.push_back(c.volume);
    rho.push_back(c.rho);
  }
  const int n = g.size();
  if (n < 2) throw Error(ErrorKind::invalid_argument, "fewer than two active grid cells");

  auto index = [&](int i, int j) { return g.cell_index[static_cast<std::size_t>(j) * g.nx + i]; };
  std::vector<Face> faces;
  auto add_face = [&](int p, int q, double length_over_h) {
    if (p < 0 || q < 0 || !(length_over_h > 0)) return;
    faces.push_back({p, q, 0.5 * (rho[p] + rho[q]) * length_over_h});
  };
  switch (domain.kind()) {
    case Domain::Kind::interval:
      for (int i = 0; i + 1 < g.nx; ++i) add_face(index(i, 0), index(i + 1, 0), 1.0 / g.h);
      break;
    case Domain::Kind::polygon: {
      // Faces that land on a rectangle edge up to rounding are moved onto it.
      std::array<std::vector<double>, 2> edges;
      for (const auto& r : domain.rects()) {
        edges[0].insert(edges[0].end(), {r.x0, r.x1});
        edges[1].insert(edges[1].end(), {r.y0, r.y1});
      }
      auto snap = [&](int axis, double v) {
        for (double e : edges[axis]) {
          if (std::abs(v - e) <= 1e-9 * g.h) return e;
        }
        return v;
      };
      for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
          const double x0 = g.origin[0] + i * g.h, y0 = g.origin[1] + j * g.h;
          if (i + 1 < g.nx && index(i, j) >= 0 && index(i + 1, j) >= 0) {
            const double x = snap(0, x0 + g.h);
            const auto shared = intersect(clip(domain.cross_section(0, x, -1), y0, y0 + g.h),
                                          clip(domain.cross_section(0, x, +1), y0, y0 + g.h));
            double len = 0.0;
            for (const auto& s : shared) len += s.second - s.first;
            add_face(index(i, j), index(i + 1, j), len / g.h);
          }
          if (j + 1 < g.ny && index(i, j) >= 0 && index(i, j + 1) >= 0) {
            const double y = snap(1, y0 + g.h);
            const auto shared = intersect(clip(domain.cross_section(1, y, -1), x0, x0 + g.h),
                                          clip(domain.cross_section(1, y, +1), x0, x0 + g.h));
            double len = 0.0;
            for (const auto& s : shared) len += s.second - s.first;
            add_face(index(i, j), index(i, j + 1), len / g.h);
          }
        }
      }
      break;
    }
    case Domain::Kind::circle:
      for (int c = 0; c < g.ny; ++c) {
        const double hc = circle_step(domain, c, resolution);
        for (int i = 0; i < g.nx; ++i) add_face(index(i, c), index((i + 1) % g.nx, c), 1.0 / hc);
      }
      break;
  }

  std::vector<Triplet> t;
  t.reserve(3 * faces.size());
  for (const auto& f : faces) {
    t.push_back({f.p, f.p, f.weight});
    t.push_back({f.q, f.q, f.weight});
    t.push_back({f.p, f.q, -f.weight});
  }
  g.stiffness = SymmetricSparse::from_triplets(n, t);
  g.mass.resize(n);
  for (int i = 0; i < n; ++i) g.mass[i] = rho[i] * g.volumes[i];
  label_components(g, faces);
  return g;
}

GridOperator discretize_mixture(const MixtureModel& model, int resolution) {
  GridOperator g = discretize(mixture_fn(model), model.domain(), resolution);
  if (g.components > 1)
    throw Error(ErrorKind::disconnected, "the mixture density's active set has " + std::to_string(g.components) +
                                             " connected components; its operator needs a connected support");
  return g;
}

GridOperator discretize_component(const MixtureModel& model, std::size_t k, int resolution) {
  return discretize(component_fn(model, k), model.domain(), resolution);
}

ContinuumSpectrum grid_spectrum(std::shared_ptr<const GridOperator> grid, int count, double tolerance) {
  if (count < 1 || count >= grid->size())
    throw Error(ErrorKind::invalid_argument, "requested more eigenpairs than the grid supports");
  EigenRequest req;
  req.stiffness = &grid->stiffness;
  req.mass = grid->mass;
  req.k = count;
  req.tolerance = tolerance;
  req.preconditioner = EigenRequest::Preconditioner::factorized;
  const Eigen::MatrixXd ind = grid->component_indicators();
  req.null_space = ind.leftCols(std::min<Eigen::Index>(ind.cols(), count));
  const EigenResult r = smallest_eigenpairs(req);
  ContinuumSpectrum out;
  out.eigenvalues = r.values;
  out.eigenfunctions = r.vectors;
  out.residuals = r.residuals;
  out.grid = std::move(grid);
  return out;
}

Eigen::VectorXd ContinuumSpectrum::evaluate(const Point& x, int count) const {
  const GridOperator& g = *grid;
  if (count > eigenfunctions.cols()) throw Error(ErrorKind::invalid_argument, "not enough eigenfunctions");
  std::vector<std::pair<int, double>> stencil;
  auto at = [&](int i, int j) -> int {
    if (g.domain.kind() == Domain::Kind::circle) i = ((i % g.nx) + g.nx) % g.nx;
    if (i < 0 || j < 0 || i >= g.nx || j >= g.ny) return -1;
    return g.cell_index[static_cast<std::size_t>(j) * g.nx + i];
  };
  switch (g.domain.kind()) {
    case Domain::Kind::interval: {
      const double s = (x[0] - g.origin[0]) / g.h - 0.5;
      const int i0 = static_cast<int>(std::floor(s));
      const double f = s - i0;
      stencil = {{at(std::clamp(i0, 0, g.nx - 1), 0), 1.0 - f}, {at(std::clamp(i0 + 1, 0, g.nx - 1), 0), f}};
      break;
    }
    case Domain::Kind::circle: {
      const int c = static_cast<int>(x[1]);
      const double s = x[0] / (kTwoPi / g.nx) - 0.5;
      const int i0 = static_cast<int>(std::floor(s));
      const double f = s - i0;
      stencil = {{at(i0, c), 1.0 - f}, {at(i0 + 1, c), f}};
      break;
    }
    case Domain::Kind::polygon: {
      const double sx = (x[0] - g.origin[0]) / g.h - 0.5, sy = (x[1] - g.origin[1]) / g.h - 0.5;
      const int i0 = static_cast<int>(std::floor(sx)), j0 = static_cast<int>(std::floor(sy));
      const double fx = sx - i0, fy = sy - j0;
      stencil = {{at(i0, j0), (1 - fx) * (1 - fy)},
                 {at(i0 + 1, j0), fx * (1 - fy)},
                 {at(i0, j0 + 1), (1 - fx) * fy},
                 {at(i0 + 1, j0 + 1), fx * fy}};
      break;
    }
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(count);
  double total = 0.0;
  for (const auto& [idx, w] : stencil) {
    if (idx < 0 || !(w > 0)) continue;
    out += w * eigenfunctions.row(idx).head(count).transpose();
    total += w;
  }
  if (total > 0) return out / total;
  // No active neighbour: fall back to the nearest active cell.
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.size(); ++i) {
    const double d = (g.nodes[i] - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return eigenfunctions.row(best).head(count).transpose();
}

IndivisibilityResult indivisibility_parameter(const MixtureModel& model, int resolution) {
  IndivisibilityResult out;
  out.resolution = resolution;
  for (std::size_t k = 0; k < model.size(); ++k) {
    auto grid = std::make_shared<const GridOperator>(discretize_component(model, k, resolution));
    const int pieces = grid->components;
    const auto spec = grid_spectrum(std::move(grid), 2);
    out.per_component.push_back(std::max(0.0, spec.eigenvalues[1]));
    out.support_components.push_back(pieces);
    out.residuals.push_back(spec.residuals.maxCoeff());
  }
  out.value = *std::min_element(out.per_component.begin(), out.per_component.end());
  return out;
}

ContinuumSpectrum continuum_embedding_spectrum(const MixtureModel& model, int n_clusters, int resolution) {
  if (n_clusters < 1) throw Error(ErrorKind::invalid_argument, "N must be positive");
  auto grid = std::make_shared<const GridOperator>(discretize_mixture(model, resolution));
  return grid_spectrum(std::move(grid), n_clusters + 1);
}

EigenvalueBounds eigenvalue_bounds(double S, double C, double theta, int n_clusters) {
  EigenvalueBounds b;
  const double n = n_clusters;
  if (!(S >= 0) || !(C >= 0) || !(theta >= 0) || n_clusters < 1)
    throw Error(ErrorKind::invalid_argument, "eigenvalue bounds need S, C, Theta >= 0 and N >= 1");
  if (n * std::sqrt(S) < 1.0) {
    b.lambda_n_upper.value = n * C / (1.0 - n * std::sqrt(S));
  } else {
    b.lambda_n_upper.reason = "N sqrt(S) >= 1";
  }
  if (n * S < 1.0) {
    const double bracket = std::sqrt(theta * (1.0 - n * S)) - std::sqrt(C * n * S) / (1.0 - S);
    if (bracket >= 0) b.lambda_n1_lower.value = bracket * bracket;
    else b.lambda_n1_lower.reason = "sqrt(Theta(1 - N S)) < sqrt(C N S)/(1 - S)";
  } else {
    b.lambda_n1_lower.reason = "N S >= 1";
  }
  return b;
}

// ---------------------------------------------------------------- Cheeger

namespace {

constexpr int kLineNodes = 128;

struct SweepGeometry {
  const DensityFn& density;
  const Domain& domain;
  Box support;
  int axis;
  Breakpoints breaks;

  // Weighted size of {x_axis = t}.
  double boundary(double t) const {
    switch (domain.kind()) {
      case Domain::Kind::interval:
        return (t >= support.lo[0] && t <= support.hi[0]) ? density(Point(t, 0.0)) : 0.0;
      case Domain::Kind::polygon: {
        const int other = 1 - axis;
        const auto spans = clip(intersect(domain.cross_section(axis, t, -1), domain.cross_section(axis, t, +1)),
                                support.lo[other], support.hi[other]);
        double total = 0.0;
        for (const auto& s : spans) {
          total += integrate(
              [&](double u) {
                Point p;
                p[axis] = t;
                p[other] = u;
                return density(p);
              },
              s.first, s.second, breaks[other], kLineNodes);
        }
        return total;
      }
      case Domain::Kind::circle: {
        double total = 0.0;
        const auto& circles = domain.circle_list();
        for (std::size_t c = 0; c < circles.size(); ++c) {
          const double u = (t - circles[c].center[axis]) / circles[c].radius;
          if (std::abs(u) >= 1.0) continue;
          const double phase = axis == 0 ? 0.0 : 0.5 * std::numbers::pi;
          for (double sgn : {-1.0, 1.0}) {
            double a = std::fmod(phase + sgn * std::acos(u) + 2 * kTwoPi, kTwoPi);
            total += density(Point(a, static_cast<double>(c)));
          }
        }
        return total;
      }
    }
    return 0.0;
  }

  // Mass of {x_axis <= t} on circles, by direct arc integration.
  double circle_left_mass(double t) const {
    double total = 0.0;
    const auto& circles = domain.circle_list();
    const double phase = axis == 0 ? 0.0 : 0.5 * std::numbers::pi;
    for (std::size_t c = 0; c < circles.size(); ++c) {
      const double r = circles[c].radius;
      const double u = std::clamp((t - circles[c].center[axis]) / r, -1.0, 1.0);
      const double a0 = phase + std::acos(u), a1 = phase + kTwoPi - std::acos(u);
      // Split the arc where it wraps past 2pi.
      auto f = [&](double a) { return r * density(Point(std::fmod(a + 2 * kTwoPi, kTwoPi), static_cast<double>(c))); };
      std::vector<double> br;
      for (double b : breaks[0]) {
        for (double shift : {0.0, kTwoPi}) br.push_back(b + shift);
      }
      br.push_back(kTwoPi);
      total += integrate(f, a0, a1, br, 512);
    }
    return total;
  }
};

}  // namespace

CheegerSweep cheeger_sweep(const DensityFn& density, const Domain& domain, const Box& support, int axis,
                           int resolution, const Breakpoints& breakpoints, double truncation) {
  if (resolution < 3) throw Error(ErrorKind::invalid_argument, "sweep resolution must be at least 3");
  if (axis < 0 || axis > 1 || (domain.kind() == Domain::Kind::interval && axis != 0))
    throw Error(ErrorKind::invalid_argument, "sweep axis out of range");
  SweepGeometry geo{density, domain, support, axis, breakpoints};
  double lo, hi;
  std::vector<double> axis_breaks = breakpoints[domain.kind() == Domain::Kind::circle ? 0 : axis];
  if (domain.kind() == Domain::Kind::circle) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (const auto& c : domain.circle_list()) {
      lo = std::min(lo, c.center[axis] - c.radius);
      hi = std::max(hi, c.center[axis] + c.radius);
    }
  } else {
    const Box bb = domain.bounding_box();
    lo = std::max(support.lo[axis], bb.lo[axis]);
    hi = std::min(support.hi[axis], bb.hi[axis]);
    if (domain.kind() == Domain::Kind::polygon) {
      for (const auto& r : domain.rects()) {
        axis_breaks.push_back(axis == 0 ? r.x0 : r.y0);
        axis_breaks.push_back(axis == 0 ? r.x1 : r.y1);
      }
    }
  }
  if (!(hi > lo)) throw Error(ErrorKind::invalid_argument, "sweep range is empty");

  CheegerSweep out;
  for (int i = 0; i < resolution; ++i) out.t.push_back(lo + (hi - lo) * i / (resolution - 1));

  if (domain.kind() == Domain::Kind::circle) {
    for (double t : out.t) out.left_mass.push_back(geo.circle_left_mass(t));
    out.total_mass = geo.circle_left_mass(hi + 1.0);
  } else {
    // Cumulative mass: integrate the boundary measure between consecutive nodes.
    std::vector<double> grid = out.t;
    for (double b : axis_breaks) {
      if (b > lo && b < hi) grid.push_back(b);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::vector<double> cum(grid.size(), 0.0);
    std::vector<double> xs, ws;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      rule_1d(grid[i], grid[i + 1], 8, QuadratureSpec::Rule::gauss_legendre, xs, ws);
      double piece = 0.0;
      for (std::size_t q = 0; q < xs.size(); ++q) piece += ws[q] * geo.boundary(xs[q]);
      cum[i + 1] = cum[i] + piece;
    }
    out.total_mass = cum.back();
    for (double t : out.t) {
      const auto it = std::lower_bound(grid.begin(), grid.end(), t);
      out.left_mass.push_back(cum[it - grid.begin()]);
    }
  }

  out.min_cut = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    const double b = geo.boundary(out.t[i]);
    out.boundary.push_back(b);
    const double smaller = std::min(out.left_mass[i], out.total_mass - out.left_mass[i]);
    if (smaller > truncation * out.total_mass && smaller > 0) {
      out.cut.push_back(b / smaller);
      if (out.cut.back() < out.min_cut) {
        out.min_cut = out.cut.back();
        out.t_at_min = out.t[i];
      }
    } else {
      out.cut.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  if (!std::isfinite(out.min_cut))
    throw Error(ErrorKind::invalid_argument, "degenerate sweep: one side carries all the mass for every t");
  out.lower_bound = 0.25 * out.min_cut * out.min_cut;
  return out;
}

CheegerSweep cheeger_sweep(const MixtureModel& model, std::size_t k, int axis, int resolution) {
  return cheeger_sweep(component_fn(model, k), model.domain(), model.component(k).support(), axis, resolution,
                       model.component(k).breakpoints());
}

double cut_value(const DensityFn& density, const Domain& domain, const Box& support, int axis, double t,
                 const Breakpoints& breakpoints) {
  // A three-point sweep over [lo, t, hi] shares the mass bookkeeping.
  SweepGeometry geo{density, domain, support, axis, breakpoints};
  if (domain.kind() == Domain::Kind::circle) {
    const double left = geo.circle_left_mass(t);
    const double total = geo.circle_left_mass(std::numeric_limits<double>::max());
    return geo.boundary(t) / std::min(left, total - left);
  }
  const Box bb = domain.bounding_box();
  const double lo = std::max(support.lo[axis], bb.lo[axis]);
  const double hi = std::min(support.hi[axis], bb.hi[axis]);
  std::vector<double> breaks = breakpoints[axis];
  if (domain.kind() == Domain::Kind::polygon) {
    for (const auto& r : domain.rects()) {
      breaks.push_back(axis == 0 ? r.x0 : r.y0);
      breaks.push_back(axis == 0 ? r.x1 : r.y1);
    }
  }
  auto f = [&](double s) { return geo.boundary(s); };
  const double left = integrate(f, lo, t, breaks, 4096);
  const double right = integrate(f, t, hi, breaks, 4096);
  return geo.boundary(t) / std::min(left, right);
}

}  // namespace conespec
