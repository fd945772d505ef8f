#include "conespec/mixture.hpp"

#include "conespec/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace conespec {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kGaussianReach = 12.0;

// Antiderivative of the dumbbell profile from 0.
double profile_integral(double t, double w) {
  if (t <= 0) return 0.0;
  const double half = 0.5 * w;
  if (t <= half) return t - 2.0 * t * t * t / (3.0 * w * w);
  const double at_half = half - w / 12.0;
  const double u = std::min(t, w);
  return at_half + 2.0 / (3.0 * w * w) * (std::pow(u - w, 3) + std::pow(half, 3));
}

class ShiftedComponent final : public DensityComponent {
 public:
  ShiftedComponent(ComponentPtr inner, Eigen::Vector2d shift) : inner_(std::move(inner)), shift_(shift) {}
  std::string kind() const override { return inner_->kind(); }
  double evaluate(const Point& x) const override { return inner_->evaluate(x - shift_); }
  std::optional<Eigen::Vector2d> analytic_gradient(const Point& x) const override {
    return inner_->analytic_gradient(x - shift_);
  }
  Box support() const override {
    Box b = inner_->support();
    b.lo += shift_;
    b.hi += shift_;
    return b;
  }
  Breakpoints breakpoints() const override {
    Breakpoints b = inner_->breakpoints();
    for (int a = 0; a < 2; ++a) {
      for (double& v : b[a]) v += shift_[a];
    }
    return b;
  }
  double max_density() const override { return inner_->max_density(); }

 private:
  ComponentPtr inner_;
  Eigen::Vector2d shift_;
};

bool in_box(const Box& b, const Point& x, int dim) {
  for (int a = 0; a < dim; ++a) {
    if (x[a] < b.lo[a] || x[a] > b.hi[a]) return false;
  }
  return true;
}

// Per-node quantities shared by the S and C integrals.
struct NodeScan {
  QuadratureNodes nodes;
  std::vector<char> keep;
  double truncated_mass = 0.0;
};

NodeScan scan_nodes(const MixtureModel& model, const QuadratureSpec& quad) {
  NodeScan scan;
  QuadratureSpec coarse = quad;
  coarse.nodes_per_axis = 256;
  double rho_max = 0.0;
  for (const auto& p : build_nodes(model.domain(), model.integration_region(), model.breakpoints(), coarse).points)
    rho_max = std::max(rho_max, model.density(p));
  scan.nodes = build_nodes(model.domain(), model.integration_region(), model.breakpoints(), quad);
  scan.keep.assign(scan.nodes.size(), 1);
  const double cutoff = quad.truncation_threshold * rho_max;
  for (std::size_t i = 0; i < scan.nodes.size(); ++i) {
    const double rho = model.density(scan.nodes.points[i]);
    if (!(rho > cutoff)) {
      scan.keep[i] = 0;
      scan.truncated_mass += scan.nodes.weights[i] * rho;
    }
  }
  return scan;
}

Eigen::MatrixXd overlap_matrix(const MixtureModel& model, const QuadratureSpec& quad, double* truncated) {
  const std::size_t n = model.size();
  const NodeScan scan = scan_nodes(model, quad);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd r(n);
  for (std::size_t i = 0; i < scan.nodes.size(); ++i) {
    if (!scan.keep[i]) continue;
    const Point& p = scan.nodes.points[i];
    double rho = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      r[k] = model.component_density(k, p);
      rho += model.weights()[k] * r[k];
    }
    out.noalias() += (scan.nodes.weights[i] / rho) * r * r.transpose();
  }
  if (truncated) *truncated = scan.truncated_mass;
  return out;
}

double max_off_diagonal(const Eigen::MatrixXd& m) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != j) s = std::max(s, m(i, j));
    }
  }
  return s;
}

std::vector<double> coupling_values(const MixtureModel& model, const QuadratureSpec& quad,
                                    std::vector<double>* excluded) {
  const std::size_t n = model.size();
  const NodeScan scan = scan_nodes(model, quad);
  std::vector<double> comp_max(n, 0.0);
  QuadratureSpec coarse = quad;
  coarse.nodes_per_axis = 256;
  for (const auto& p : build_nodes(model.domain(), model.integration_region(), model.breakpoints(), coarse).points) {
    for (std::size_t k = 0; k < n; ++k) comp_max[k] = std::max(comp_max[k], model.component_density(k, p));
  }
  std::vector<double> c(n, 0.0), ex(n, 0.0);
  std::vector<double> r(n);
  std::vector<Eigen::Vector2d> g(n);
  for (std::size_t i = 0; i < scan.nodes.size(); ++i) {
    if (!scan.keep[i]) continue;
    const Point& p = scan.nodes.points[i];
    const double w = scan.nodes.weights[i];
    double rho = 0.0;
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < n; ++k) {
      r[k] = model.component_density(k, p);
      rho += model.weights()[k] * r[k];
    }
    bool need_grad = false;
    for (std::size_t k = 0; k < n; ++k) need_grad |= r[k] > quad.truncation_threshold * comp_max[k];
    if (!need_grad) {
      for (std::size_t k = 0; k < n; ++k) ex[k] += w * r[k];
      continue;
    }
    for (std::size_t k = 0; k < n; ++k) {
      g[k] = model.component_gradient(k, p);
      grad += model.weights()[k] * g[k];
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (!(r[k] > quad.truncation_threshold * comp_max[k])) {
        ex[k] += w * r[k];
        continue;
      }
      // |grad rho_k / rho_k - grad rho / rho|^2 rho_k, written without dividing twice.
      const Eigen::Vector2d v = g[k] - (r[k] / rho) * grad;
      c[k] += 0.25 * w * v.squaredNorm() / r[k];
    }
  }
  if (excluded) *excluded = ex;
  return c;
}

}  // namespace

double dumbbell_profile(double t, double w) {
  if (t <= 0) return 1.0;
  if (t <= 0.5 * w) return 1.0 - 2.0 * t * t / (w * w);
  if (t <= w) return 2.0 * (t - w) * (t - w) / (w * w);
  return 0.0;
}

double dumbbell_profile_derivative(double t, double w) {
  if (t <= 0 || t >= w) return 0.0;
  if (t <= 0.5 * w) return -4.0 * t / (w * w);
  return 4.0 * (t - w) / (w * w);
}

// ---------------------------------------------------------------- Gaussian

GaussianComponent::GaussianComponent(Eigen::Vector2d mean, double sd, int dim) : mean_(mean), sd_(sd), dim_(dim) {
  if (!(sd > 0) || !std::isfinite(sd)) throw Error(ErrorKind::invalid_argument, "gaussian sd must be positive");
  if (dim != 1 && dim != 2) throw Error(ErrorKind::invalid_argument, "gaussian dimension must be 1 or 2");
  if (dim == 1) mean_[1] = 0.0;
}

double GaussianComponent::evaluate(const Point& x) const {
  const double r2 = (dim_ == 1 ? std::pow(x[0] - mean_[0], 2) : (x - mean_).squaredNorm()) / (sd_ * sd_);
  const double norm = dim_ == 1 ? 1.0 / (std::sqrt(2.0 * kPi) * sd_) : 1.0 / (2.0 * kPi * sd_ * sd_);
  return norm * std::exp(-0.5 * r2);
}

std::optional<Eigen::Vector2d> GaussianComponent::analytic_gradient(const Point& x) const {
  Eigen::Vector2d d = (mean_ - x) / (sd_ * sd_);
  if (dim_ == 1) d[1] = 0.0;
  return evaluate(x) * d;
}

Box GaussianComponent::support() const {
  Box b;
  b.lo = mean_ - Eigen::Vector2d::Constant(kGaussianReach * sd_);
  b.hi = mean_ + Eigen::Vector2d::Constant(kGaussianReach * sd_);
  if (dim_ == 1) b.lo[1] = b.hi[1] = 0.0;
  return b;
}

double GaussianComponent::max_density() const { return evaluate(mean_); }

// ---------------------------------------------------------------- Uniform

std::shared_ptr<UniformComponent> UniformComponent::on_interval(double a, double b) {
  if (!(b > a)) throw Error(ErrorKind::invalid_argument, "uniform interval needs a < b");
  Box box;
  box.lo = {a, 0.0};
  box.hi = {b, 0.0};
  return std::shared_ptr<UniformComponent>(new UniformComponent(box, 1.0 / (b - a), 1));
}

std::shared_ptr<UniformComponent> UniformComponent::on_box(const Domain& domain, const Box& box) {
  if (domain.kind() != Domain::Kind::polygon)
    throw Error(ErrorKind::invalid_argument, "uniform box component needs a polygon domain");
  const double area = domain.intersection_area(box);
  if (!(area > 0)) throw Error(ErrorKind::invalid_argument, "uniform box does not meet the domain");
  return std::shared_ptr<UniformComponent>(new UniformComponent(box, 1.0 / area, 2));
}

std::shared_ptr<UniformComponent> UniformComponent::on_arc(const Domain& domain, int index, double a0, double a1) {
  if (domain.kind() != Domain::Kind::circle)
    throw Error(ErrorKind::invalid_argument, "uniform arc component needs a circle domain");
  if (index < 0 || index >= static_cast<int>(domain.circle_list().size()))
    throw Error(ErrorKind::invalid_argument, "circle index out of range");
  if (!(a0 >= 0) || !(a1 > a0) || a1 > kTwoPi + 1e-12)
    throw Error(ErrorKind::invalid_argument, "arc must satisfy 0 <= a0 < a1 <= 2pi");
  Box box;
  box.lo = {a0, static_cast<double>(index)};
  box.hi = {std::min(a1, kTwoPi), static_cast<double>(index)};
  const double length = domain.circle_list()[index].radius * (box.hi[0] - a0);
  return std::shared_ptr<UniformComponent>(new UniformComponent(box, 1.0 / length, 1));
}

double UniformComponent::evaluate(const Point& x) const {
  // In 1-D the second coordinate is the circle index (0 for intervals).
  if (dim_ == 1 && x[1] != box_.lo[1]) return 0.0;
  return in_box(box_, x, dim_) ? value_ : 0.0;
}

std::optional<Eigen::Vector2d> UniformComponent::analytic_gradient(const Point&) const {
  return Eigen::Vector2d::Zero();
}

Breakpoints UniformComponent::breakpoints() const {
  Breakpoints b;
  b[0] = {box_.lo[0], box_.hi[0]};
  if (dim_ == 2) b[1] = {box_.lo[1], box_.hi[1]};
  return b;
}

// ---------------------------------------------------------------- Dumbbell

DumbbellComponent::DumbbellComponent(double vartheta, double width, Partition partition, Side side, Profile profile)
    : vartheta_(vartheta), width_(width), ell_(side_length(vartheta)), partition_(partition), side_(side),
      profile_(profile) {
  if (!(vartheta > 0)) throw Error(ErrorKind::invalid_argument, "dumbbell vartheta must be positive");
  if (!(width > 0) || !(width < 0.5 * ell_))
    throw Error(ErrorKind::invalid_argument, "dumbbell transition width must lie in (0, l/2)");
  if (partition == Partition::good) {
    raw_mass_ = 0.5 + 2.0 * vartheta_ * profile_integral(width_, width_);
  } else {
    // Cross-section length at height y: bar (for y < vartheta) plus both squares.
    raw_mass_ = 0.5 + ell_ * profile_integral(width_, width_) + ell_ * profile_integral(std::min(vartheta_, width_), width_);
  }
}

double DumbbellComponent::side_length(double vartheta) { return -vartheta + std::sqrt(vartheta * vartheta + 1.0); }

Domain DumbbellComponent::make_domain(double vartheta) {
  const double l = side_length(vartheta);
  return Domain::polygon({Rect{-l / 2, -vartheta, l / 2, vartheta}, Rect{l / 2, -l / 2, l, l / 2},
                          Rect{-l, -l / 2, -l / 2, l / 2}});
}

double DumbbellComponent::evaluate(const Point& x) const {
  const double s = sign() * x[axis()];
  const double a = dumbbell_profile(s, width_);
  if (profile_ == Profile::raw) return a / raw_mass_;
  const double b = dumbbell_profile(-s, width_);
  return 2.0 * a / (a + b);
}

std::optional<Eigen::Vector2d> DumbbellComponent::analytic_gradient(const Point& x) const {
  const double s = sign() * x[axis()];
  const double a = dumbbell_profile(s, width_);
  const double da = dumbbell_profile_derivative(s, width_);
  double ds;
  if (profile_ == Profile::raw) {
    ds = da / raw_mass_;
  } else {
    const double b = dumbbell_profile(-s, width_);
    const double db = -dumbbell_profile_derivative(-s, width_);
    ds = 2.0 * (da * b - a * db) / ((a + b) * (a + b));
  }
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  g[axis()] = sign() * ds;
  return g;
}

Box DumbbellComponent::support() const {
  Box b;
  b.lo = {-ell_, -ell_ / 2};
  b.hi = {ell_, ell_ / 2};
  if (side_ == Side::left) b.hi[axis()] = width_;
  else b.lo[axis()] = -width_;
  return b;
}

Breakpoints DumbbellComponent::breakpoints() const {
  Breakpoints b;
  b[axis()] = {-width_, -0.5 * width_, 0.0, 0.5 * width_, width_};
  return b;
}

double DumbbellComponent::max_density() const { return profile_ == Profile::raw ? 1.0 / raw_mass_ : 2.0; }

// ---------------------------------------------------------------- Table

TableComponent::TableComponent(std::vector<double> xs, std::vector<double> values)
    : xs_(std::move(xs)), values_(std::move(values)) {
  if (xs_.size() < 2 || xs_.size() != values_.size())
    throw Error(ErrorKind::invalid_argument, "table component needs at least two (x, density) rows");
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    if (i > 0 && !(xs_[i] > xs_[i - 1])) throw Error(ErrorKind::invalid_argument, "table x values must increase");
    if (!(values_[i] >= 0) || !std::isfinite(values_[i]))
      throw Error(ErrorKind::invalid_argument, "table densities must be finite and non-negative");
  }
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < xs_.size(); ++i) mass += 0.5 * (values_[i] + values_[i + 1]) * (xs_[i + 1] - xs_[i]);
  if (!(mass > 0)) throw Error(ErrorKind::invalid_argument, "table density has zero mass");
  for (double& v : values_) v /= mass;
}

double TableComponent::evaluate(const Point& x) const {
  const double t = x[0];
  if (t < xs_.front() || t > xs_.back()) return 0.0;
  auto it = std::upper_bound(xs_.begin(), xs_.end(), t);
  std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - xs_.begin() - 1, 0), xs_.size() - 2);
  const double f = (t - xs_[i]) / (xs_[i + 1] - xs_[i]);
  return values_[i] + f * (values_[i + 1] - values_[i]);
}

std::optional<Eigen::Vector2d> TableComponent::analytic_gradient(const Point& x) const {
  const double t = x[0];
  if (t < xs_.front() || t > xs_.back()) return Eigen::Vector2d::Zero();
  auto it = std::upper_bound(xs_.begin(), xs_.end(), t);
  std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - xs_.begin() - 1, 0), xs_.size() - 2);
  return Eigen::Vector2d((values_[i + 1] - values_[i]) / (xs_[i + 1] - xs_[i]), 0.0);
}

Box TableComponent::support() const {
  Box b;
  b.lo = {xs_.front(), 0.0};
  b.hi = {xs_.back(), 0.0};
  return b;
}

Breakpoints TableComponent::breakpoints() const { return {xs_, {}}; }

double TableComponent::max_density() const { return *std::max_element(values_.begin(), values_.end()); }

// ---------------------------------------------------------------- Mixture

MixtureModel::MixtureModel(Domain domain, std::vector<ComponentPtr> components, std::vector<double> weights)
    : domain_(std::move(domain)), components_(std::move(components)), weights_(std::move(weights)) {
  if (components_.size() < 2) throw Error(ErrorKind::invalid_argument, "a mixture needs at least two components");
  if (weights_.size() != components_.size())
    throw Error(ErrorKind::invalid_argument, "expected " + std::to_string(components_.size()) + " weights, got " +
                                                 std::to_string(weights_.size()));
  double total = 0.0;
  for (double w : weights_) {
    if (!(w > 0) || !std::isfinite(w)) throw Error(ErrorKind::invalid_argument, "mixture weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw Error(ErrorKind::invalid_argument, "mixture weights must sum to 1 (got " + std::to_string(total) + ")");
  for (const auto& c : components_) {
    if (!c) throw Error(ErrorKind::invalid_argument, "null mixture component");
  }
}

double MixtureModel::w_min() const { return *std::min_element(weights_.begin(), weights_.end()); }
double MixtureModel::w_max() const { return *std::max_element(weights_.begin(), weights_.end()); }

double MixtureModel::component_density(std::size_t k, const Point& x) const {
  const auto& c = *components_[k];
  if (!in_box(c.support(), x, domain_.intrinsic_dim())) return 0.0;
  if (domain_.kind() == Domain::Kind::circle && x[1] != c.support().lo[1]) return 0.0;
  return c.evaluate(x);
}

double MixtureModel::density(const Point& x) const {
  if (!domain_.contains(x)) throw Error(ErrorKind::domain, "point lies outside the model domain");
  double rho = 0.0;
  for (std::size_t k = 0; k < size(); ++k) rho += weights_[k] * component_density(k, x);
  return rho;
}

Eigen::Vector2d MixtureModel::component_gradient(std::size_t k, const Point& x) const {
  Eigen::Vector2d g;
  if (auto a = components_[k]->analytic_gradient(x)) {
    g = *a;
  } else {
    const double h = 1e-5 * domain_.diameter();
    g.setZero();
    for (int a = 0; a < domain_.intrinsic_dim(); ++a) {
      Point e = Point::Zero();
      e[a] = h;
      g[a] = (components_[k]->evaluate(x + e) - components_[k]->evaluate(x - e)) / (2.0 * h);
    }
  }
  if (domain_.kind() == Domain::Kind::circle) {
    // Angle derivative to arc-length derivative.
    g[0] /= domain_.circle_list()[static_cast<std::size_t>(x[1])].radius;
    g[1] = 0.0;
  }
  return g;
}

Eigen::Vector2d MixtureModel::gradient(const Point& x) const {
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (std::size_t k = 0; k < size(); ++k) {
    if (in_box(components_[k]->support(), x, domain_.intrinsic_dim())) g += weights_[k] * component_gradient(k, x);
  }
  return g;
}

Box MixtureModel::integration_region() const {
  Box hull = components_[0]->support();
  for (const auto& c : components_) {
    const Box b = c->support();
    hull.lo = hull.lo.cwiseMin(b.lo);
    hull.hi = hull.hi.cwiseMax(b.hi);
  }
  const Box d = domain_.bounding_box();
  hull.lo = hull.lo.cwiseMax(d.lo);
  hull.hi = hull.hi.cwiseMin(d.hi);
  return hull;
}

Breakpoints MixtureModel::breakpoints() const {
  Breakpoints out;
  for (const auto& c : components_) {
    const Breakpoints b = c->breakpoints();
    for (int a = 0; a < 2; ++a) out[a].insert(out[a].end(), b[a].begin(), b[a].end());
  }
  for (const auto& c : components_) {
    const Box s = c->support();
    for (int a = 0; a < domain_.intrinsic_dim(); ++a) {
      out[a].push_back(s.lo[a]);
      out[a].push_back(s.hi[a]);
    }
  }
  return out;
}

MixtureModel translate(const MixtureModel& model, const Eigen::Vector2d& shift) {
  const Domain& d = model.domain();
  Domain moved = d;
  switch (d.kind()) {
    case Domain::Kind::interval:
      moved = Domain::interval(d.lo() + shift[0], d.hi() + shift[0]);
      break;
    case Domain::Kind::polygon: {
      std::vector<Rect> rects = d.rects();
      for (auto& r : rects) r = Rect{r.x0 + shift[0], r.y0 + shift[1], r.x1 + shift[0], r.y1 + shift[1]};
      moved = Domain::polygon(std::move(rects));
      break;
    }
    case Domain::Kind::circle:
      throw Error(ErrorKind::invalid_argument, "translate supports interval and polygon domains");
  }
  Eigen::Vector2d s = shift;
  if (d.kind() == Domain::Kind::interval) s[1] = 0.0;
  std::vector<ComponentPtr> comps;
  for (const auto& c : model.components()) comps.push_back(std::make_shared<ShiftedComponent>(c, s));
  return MixtureModel(std::move(moved), std::move(comps), model.weights());
}

double mixture_density(const MixtureModel& model, const Point& x) { return model.density(x); }

Eigen::VectorXd likelihood_vector(const MixtureModel& model, const Point& x) {
  const double rho = model.density(x);
  if (!(rho > 0)) throw Error(ErrorKind::singular_point, "mixture density vanishes at the query point");
  Eigen::VectorXd q(model.size());
  for (std::size_t k = 0; k < model.size(); ++k)
    q[k] = std::sqrt(std::min(1.0, model.weights()[k] * model.component_density(k, x) / rho));
  return q;
}

OverlapResult overlap_parameter(const MixtureModel& model, const QuadratureSpec& quad) {
  quad.validate();
  OverlapResult out;
  out.pairwise = overlap_matrix(model, quad, &out.truncated_mass);
  out.value = max_off_diagonal(out.pairwise);
  const double refined = max_off_diagonal(overlap_matrix(model, quad.refined(), nullptr));
  out.refinement_change = std::abs(refined - out.value);
  out.accuracy_warning = out.refinement_change > 1e-6;
  return out;
}

CouplingResult coupling_parameter(const MixtureModel& model, const QuadratureSpec& quad) {
  quad.validate();
  CouplingResult out;
  out.per_component = coupling_values(model, quad, &out.excluded_mass);
  out.value = *std::max_element(out.per_component.begin(), out.per_component.end());
  const auto refined = coupling_values(model, quad.refined(), nullptr);
  out.refinement_change = std::abs(*std::max_element(refined.begin(), refined.end()) - out.value);
  out.accuracy_warning = out.refinement_change > 1e-6;
  return out;
}

std::vector<double> likelihood_self_norms(const MixtureModel& model, const QuadratureSpec& quad) {
  quad.validate();
  const Eigen::MatrixXd m = overlap_matrix(model, quad, nullptr);
  std::vector<double> out(model.size());
  for (std::size_t j = 0; j < model.size(); ++j) out[j] = model.weights()[j] * m(j, j);
  return out;
}

std::vector<double> component_masses(const MixtureModel& model, const QuadratureSpec& quad) {
  quad.validate();
  const auto nodes = build_nodes(model.domain(), model.integration_region(), model.breakpoints(), quad);
  std::vector<double> out(model.size(), 0.0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t k = 0; k < model.size(); ++k) out[k] += nodes.weights[i] * model.component_density(k, nodes.points[i]);
  }
  return out;
}

// ---------------------------------------------------------------- Sampling

namespace {

// Exact sampler for the piecewise-linear interpolant of a 1-D density.
class LinearCdf {
 public:
  LinearCdf(const MixtureModel& model, std::size_t k) {
    const Box region = model.component(k).support();
    const Box dom = model.domain().bounding_box();
    const double a = std::max(region.lo[0], dom.lo[0]);
    const double b = std::min(region.hi[0], dom.hi[0]);
    index_ = region.lo[1];
    if (!(b > a)) throw Error(ErrorKind::sampler, "component support does not meet the domain");
    constexpr int cells = 8192;
    for (int i = 0; i <= cells; ++i) xs_.push_back(a + (b - a) * i / cells);
    for (double p : model.component(k).breakpoints()[0]) {
      if (p > a && p < b) {
        // Bracket the kink so that the interpolant captures jumps.
        xs_.push_back(std::nextafter(p, a));
        xs_.push_back(p);
        xs_.push_back(std::nextafter(p, b));
      }
    }
    std::sort(xs_.begin(), xs_.end());
    xs_.erase(std::unique(xs_.begin(), xs_.end()), xs_.end());
    for (double x : xs_) fs_.push_back(model.component_density(k, Point(x, index_)));
    cdf_.assign(xs_.size(), 0.0);
    for (std::size_t i = 1; i < xs_.size(); ++i)
      cdf_[i] = cdf_[i - 1] + 0.5 * (fs_[i] + fs_[i - 1]) * (xs_[i] - xs_[i - 1]);
    if (!(cdf_.back() > 0)) throw Error(ErrorKind::sampler, "component has no mass inside the domain");
  }

  Point draw(double u) const {
    const double target = u * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - cdf_.begin() - 1, 0), xs_.size() - 2);
    while (i + 2 < xs_.size() && !(cdf_[i + 1] > cdf_[i])) ++i;
    const double h = xs_[i + 1] - xs_[i];
    const double f0 = fs_[i], f1 = fs_[i + 1];
    const double m = target - cdf_[i];
    // Solve f0 s + (f1 - f0) s^2 / (2h) = m for s in [0, h].
    const double slope = (f1 - f0) / h;
    double s;
    if (std::abs(slope) * h < 1e-12 * std::max(f0, f1)) {
      s = f0 > 0 ? m / f0 : 0.5 * h;
    } else {
      const double disc = std::max(0.0, f0 * f0 + 2.0 * slope * m);
      s = 2.0 * m / (f0 + std::sqrt(disc));
    }
    return Point(xs_[i] + std::clamp(s, 0.0, h), index_);
  }

 private:
  std::vector<double> xs_, fs_, cdf_;
  double index_ = 0.0;
};

}  // namespace

SampleSet sample(const MixtureModel& model, int n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::invalid_argument, "sample size must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> cum(model.size());
  std::partial_sum(model.weights().begin(), model.weights().end(), cum.begin());

  const bool planar = model.domain().intrinsic_dim() == 2;
  std::vector<std::optional<LinearCdf>> cdfs(model.size());
  std::vector<Box> boxes(model.size());
  std::vector<double> bounds(model.size(), 0.0);
  for (std::size_t k = 0; k < model.size(); ++k) {
    if (!planar) {
      cdfs[k].emplace(model, k);
      continue;
    }
    Box b = model.component(k).support();
    const Box d = model.domain().bounding_box();
    b.lo = b.lo.cwiseMax(d.lo);
    b.hi = b.hi.cwiseMin(d.hi);
    boxes[k] = b;
    double bound = model.component(k).max_density();
    if (!(bound > 0)) {
      for (int i = 0; i <= 256; ++i) {
        for (int j = 0; j <= 256; ++j) {
          const Point p(b.lo[0] + b.extent(0) * i / 256.0, b.lo[1] + b.extent(1) * j / 256.0);
          bound = std::max(bound, model.component(k).evaluate(p));
        }
      }
      bound *= 2.0;
    }
    bounds[k] = bound;
  }

  SampleSet out;
  out.ambient.resize(n, model.domain().ambient_dim());
  out.intrinsic.reserve(n);
  out.labels.reserve(n);
  std::vector<std::uint64_t> proposals(model.size(), 0), accepted(model.size(), 0);
  for (int i = 0; i < n; ++i) {
    const double u = unit(rng) * cum.back();
    const auto k = static_cast<std::size_t>(
        std::min<std::ptrdiff_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin(), model.size() - 1));
    Point p;
    if (!planar) {
      p = cdfs[k]->draw(unit(rng));
    } else {
      for (;;) {
        const Point c(boxes[k].lo[0] + boxes[k].extent(0) * unit(rng), boxes[k].lo[1] + boxes[k].extent(1) * unit(rng));
        const double v = unit(rng) * bounds[k];
        ++proposals[k];
        if (model.domain().contains(c) && v < model.component_density(k, c)) {
          p = c;
          ++accepted[k];
          break;
        }
        if (proposals[k] >= 100000 && static_cast<double>(accepted[k]) < 1e-4 * static_cast<double>(proposals[k]))
          throw Error(ErrorKind::sampler, "rejection sampler acceptance rate fell below 1e-4 for component " +
                                              std::to_string(k));
      }
    }
    out.intrinsic.push_back(p);
    out.labels.push_back(static_cast<int>(k));
    out.ambient.row(i) = model.domain().to_ambient(p).transpose();
  }
  return out;
}

}  // namespace conespec
