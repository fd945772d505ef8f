#pragma once

#include "conespec/eigensolver.hpp"
#include "conespec/mixture.hpp"
#include "conespec/sparse.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace conespec {

using DensityFn = std::function<double(const Point&)>;

/// Cell-centred finite-volume discretization of u -> -div(rho grad u) with
/// no-flux boundaries. Cells are squares of side h (arc length on circles)
/// intersected with the domain.
struct GridOperator {
  SymmetricSparse stiffness;
  Eigen::VectorXd mass;         // rho(x_i) |cell_i|
  std::vector<Point> nodes;     // cell centroids, intrinsic coordinates
  std::vector<double> volumes;  // |cell_i ∩ domain|
  double h = 0.0;
  int resolution = 0;
  Domain domain = Domain::interval(0, 1);

  // Structured layout: active index of grid cell (i, j), or -1.
  int nx = 0, ny = 0;
  Eigen::Vector2d origin{0.0, 0.0};
  std::vector<int> cell_index;

  std::vector<int> component_of;  // connected component label per active cell
  int components = 0;

  int size() const { return static_cast<int>(nodes.size()); }
  /// Indicator vectors of the connected components (one column each).
  Eigen::MatrixXd component_indicators() const;
};

/// Nodes with density below drop_threshold * max are inactive. A disconnected
/// active set is recorded in `components`; callers decide if that is an error.
GridOperator discretize(const DensityFn& density, const Domain& domain, int resolution,
                        double drop_threshold = 1e-12);
/// Operator for the mixture density; throws a disconnected error if the
/// active set is not connected.
GridOperator discretize_mixture(const MixtureModel& model, int resolution);
/// Operator for component k; disconnected supports are allowed.
GridOperator discretize_component(const MixtureModel& model, std::size_t k, int resolution);

struct ContinuumSpectrum {
  Eigen::VectorXd eigenvalues;     // ascending
  Eigen::MatrixXd eigenfunctions;  // mass-orthonormal columns on the active cells
  Eigen::VectorXd residuals;
  std::shared_ptr<const GridOperator> grid;

  /// (u_1(x), ..., u_count(x)) by linear (1-D) or bilinear (2-D) interpolation.
  Eigen::VectorXd evaluate(const Point& x, int count) const;
};

/// Lowest `count` pairs of a grid operator. Exact component indicators are
/// used as the null space.
ContinuumSpectrum grid_spectrum(std::shared_ptr<const GridOperator> grid, int count, double tolerance = 1e-9);

struct IndivisibilityResult {
  std::vector<double> per_component;  // Theta_k
  double value = 0.0;                 // min_k Theta_k
  std::vector<int> support_components;
  std::vector<double> residuals;
  int resolution = 0;
};

IndivisibilityResult indivisibility_parameter(const MixtureModel& model, int resolution);

/// lambda_1..lambda_{N+1} of the mixture operator and u_1..u_N.
ContinuumSpectrum continuum_embedding_spectrum(const MixtureModel& model, int n_clusters, int resolution);

struct BoundValue {
  std::optional<double> value;
  std::string reason;  // set when value is empty
};

struct EigenvalueBounds {
  BoundValue lambda_n_upper;   // N C / (1 - N sqrt(S))
  BoundValue lambda_n1_lower;  // (sqrt(Theta (1 - N S)) - sqrt(C N S) / (1 - S))^2
};

EigenvalueBounds eigenvalue_bounds(double S, double C, double theta, int n_clusters);

struct CheegerSweep {
  std::vector<double> t;
  std::vector<double> cut;         // NaN where one side carries too little mass
  std::vector<double> left_mass;   // mass of {x_axis <= t}
  std::vector<double> boundary;    // weighted size of {x_axis = t}
  double min_cut = 0.0;
  double t_at_min = 0.0;
  double lower_bound = 0.0;        // min_cut^2 / 4
  double total_mass = 0.0;
};

/// Cut(A_t) for A_t = {x in M : x_axis <= t}, on `resolution` values of t
/// spread over the support. Circles sweep the ambient coordinate.
CheegerSweep cheeger_sweep(const DensityFn& density, const Domain& domain, const Box& support, int axis,
                           int resolution, const Breakpoints& breakpoints = {}, double truncation = 1e-14);
CheegerSweep cheeger_sweep(const MixtureModel& model, std::size_t k, int axis, int resolution);

/// Cut(A_t) at a single t.
double cut_value(const DensityFn& density, const Domain& domain, const Box& support, int axis, double t,
                 const Breakpoints& breakpoints = {});

/// Density functor for component k or the whole mixture, without domain checks.
DensityFn component_fn(const MixtureModel& model, std::size_t k);
DensityFn mixture_fn(const MixtureModel& model);

}  // namespace conespec
