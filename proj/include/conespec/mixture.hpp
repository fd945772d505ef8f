#pragma once

#include "conespec/domain.hpp"
#include "conespec/quadrature.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace conespec {

/// One probability density rho_k of a mixture. Implementations are immutable.
class DensityComponent {
 public:
  virtual ~DensityComponent() = default;

  virtual std::string kind() const = 0;
  virtual double evaluate(const Point& x) const = 0;
  /// Analytic gradient in intrinsic coordinates, if the component has one.
  virtual std::optional<Eigen::Vector2d> analytic_gradient(const Point& /*x*/) const { return std::nullopt; }
  /// Region outside of which the density is treated as zero.
  virtual Box support() const = 0;
  /// Coordinates where the density or its derivative may be non-smooth.
  virtual Breakpoints breakpoints() const { return {}; }
  /// Upper bound on the density, used by rejection sampling. Zero if unknown.
  virtual double max_density() const { return 0.0; }
};

using ComponentPtr = std::shared_ptr<const DensityComponent>;

/// The dumbbell transition profile: 1 for t <= 0, then two quadratic pieces
/// meeting at t = width/2, and 0 for t >= width.
double dumbbell_profile(double t, double width);
double dumbbell_profile_derivative(double t, double width);

class GaussianComponent final : public DensityComponent {
 public:
  /// Isotropic normal in `dim` (1 or 2) intrinsic dimensions.
  GaussianComponent(Eigen::Vector2d mean, double sd, int dim);
  std::string kind() const override { return "gaussian"; }
  double evaluate(const Point& x) const override;
  std::optional<Eigen::Vector2d> analytic_gradient(const Point& x) const override;
  Box support() const override;
  double max_density() const override;

  const Eigen::Vector2d& mean() const { return mean_; }
  double sd() const { return sd_; }

 private:
  Eigen::Vector2d mean_;
  double sd_;
  int dim_;
};

/// Uniform density on an interval, on a box intersected with a polygon domain,
/// or on an arc of one circle.
class UniformComponent final : public DensityComponent {
 public:
  static std::shared_ptr<UniformComponent> on_interval(double a, double b);
  static std::shared_ptr<UniformComponent> on_box(const Domain& domain, const Box& box);
  /// Arc [a0, a1] (radians, 0 <= a0 < a1 <= 2pi) of circle `index`.
  static std::shared_ptr<UniformComponent> on_arc(const Domain& domain, int index, double a0, double a1);

  std::string kind() const override { return "uniform"; }
  double evaluate(const Point& x) const override;
  std::optional<Eigen::Vector2d> analytic_gradient(const Point& x) const override;
  Box support() const override { return box_; }
  Breakpoints breakpoints() const override;
  double max_density() const override { return value_; }

 private:
  UniformComponent(Box box, double value, int dim) : box_(box), value_(value), dim_(dim) {}
  Box box_;
  double value_;
  int dim_;
};

/// Components of the dumbbell partition: the domain is two squares of side l
/// joined by a bar of half width vartheta with l^2 + 2 l vartheta = 1.
class DumbbellComponent final : public DensityComponent {
 public:
  enum class Partition { good, bad };  // good cuts across the bar, bad along the axis
  enum class Side { left, right };
  /// normalized: 2 psi / (psi + psi_mirror); raw: psi itself, rescaled to unit mass.
  enum class Profile { normalized, raw };

  DumbbellComponent(double vartheta, double width, Partition partition, Side side, Profile profile);

  static double side_length(double vartheta);
  static Domain make_domain(double vartheta);

  std::string kind() const override { return side_ == Side::left ? "dumbbell_left" : "dumbbell_right"; }
  double evaluate(const Point& x) const override;
  std::optional<Eigen::Vector2d> analytic_gradient(const Point& x) const override;
  Box support() const override;
  Breakpoints breakpoints() const override;
  double max_density() const override;

  double vartheta() const { return vartheta_; }
  double width() const { return width_; }
  Partition partition() const { return partition_; }
  Profile profile() const { return profile_; }

 private:
  int axis() const { return partition_ == Partition::good ? 0 : 1; }
  double sign() const { return side_ == Side::left ? 1.0 : -1.0; }

  double vartheta_, width_, ell_;
  Partition partition_;
  Side side_;
  Profile profile_;
  double raw_mass_;
};

/// Piecewise-linear density through (x, value) knots on an interval, rescaled
/// to unit mass; zero outside the knot range.
class TableComponent final : public DensityComponent {
 public:
  TableComponent(std::vector<double> xs, std::vector<double> values);
  std::string kind() const override { return "table"; }
  double evaluate(const Point& x) const override;
  std::optional<Eigen::Vector2d> analytic_gradient(const Point& x) const override;
  Box support() const override;
  Breakpoints breakpoints() const override;
  double max_density() const override;

 private:
  std::vector<double> xs_, values_;
};

/// rho = sum_k w_k rho_k on a domain.
class MixtureModel {
 public:
  MixtureModel(Domain domain, std::vector<ComponentPtr> components, std::vector<double> weights);

  std::size_t size() const { return components_.size(); }
  const Domain& domain() const { return domain_; }
  const std::vector<double>& weights() const { return weights_; }
  const DensityComponent& component(std::size_t k) const { return *components_[k]; }
  const std::vector<ComponentPtr>& components() const { return components_; }
  double w_min() const;
  double w_max() const;

  /// Mixture density; throws a domain error outside the domain.
  double density(const Point& x) const;
  /// Component density, zero outside its support box.
  double component_density(std::size_t k, const Point& x) const;
  /// Analytic gradient, or central differences with step 1e-5 * diameter.
  Eigen::Vector2d component_gradient(std::size_t k, const Point& x) const;
  Eigen::Vector2d gradient(const Point& x) const;

  /// Hull of the component supports, clipped to the domain's bounding box.
  Box integration_region() const;
  Breakpoints breakpoints() const;

 private:
  Domain domain_;
  std::vector<ComponentPtr> components_;
  std::vector<double> weights_;
};

/// Returns a model whose domain and components are translated by `shift`
/// (polygon and interval domains only).
MixtureModel translate(const MixtureModel& model, const Eigen::Vector2d& shift);

double mixture_density(const MixtureModel& model, const Point& x);

/// (q_1(x), ..., q_N(x)) with q_k = sqrt(w_k rho_k / rho).
Eigen::VectorXd likelihood_vector(const MixtureModel& model, const Point& x);

struct OverlapResult {
  double value = 0.0;            // S = max_{i != j} int rho_i rho_j / rho
  Eigen::MatrixXd pairwise;      // all int rho_i rho_j / rho (diagonal included)
  double refinement_change = 0;  // |S(2 nodes) - S(nodes)|
  bool accuracy_warning = false;
  double truncated_mass = 0.0;   // mixture mass at dropped nodes
};

struct CouplingResult {
  std::vector<double> per_component;  // C_k
  double value = 0.0;                 // C = max_k C_k
  double refinement_change = 0.0;
  bool accuracy_warning = false;
  std::vector<double> excluded_mass;  // rho_k mass at nodes below threshold
};

OverlapResult overlap_parameter(const MixtureModel& model, const QuadratureSpec& quad);
CouplingResult coupling_parameter(const MixtureModel& model, const QuadratureSpec& quad);

/// <q_j, q_j>_{rho_j} = int w_j rho_j^2 / rho for every j.
std::vector<double> likelihood_self_norms(const MixtureModel& model, const QuadratureSpec& quad);

/// Mass of each component computed by quadrature.
std::vector<double> component_masses(const MixtureModel& model, const QuadratureSpec& quad);

struct SampleSet {
  Eigen::MatrixXd ambient;       // n x ambient_dim
  std::vector<Point> intrinsic;  // n points in intrinsic coordinates
  std::vector<int> labels;       // generating component of each draw
};

/// i.i.d. draws: component chosen by weight, then inverse-CDF (intrinsic
/// dimension 1) or rejection on the support box (dimension 2).
SampleSet sample(const MixtureModel& model, int n, std::uint64_t seed);

}  // namespace conespec
