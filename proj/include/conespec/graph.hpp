#pragma once

#include "conespec/eigensolver.hpp"
#include "conespec/sparse.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace conespec {

/// Radial kernel eta on [0, 1], normalized so that the integral of eta(|x|)
/// over R^m is one.
class KernelProfile {
 public:
  enum class Shape { tent, indicator };

  /// eta(t) proportional to (1 - t)_+. Lipschitz.
  static KernelProfile tent(int m);
  /// eta(t) proportional to 1[t < 1]. Not Lipschitz.
  static KernelProfile indicator(int m);

  Shape shape() const { return shape_; }
  int dimension() const { return m_; }
  bool lipschitz() const { return shape_ == Shape::tent; }
  std::string name() const { return shape_ == Shape::tent ? "tent" : "indicator"; }

  double eta(double t) const;
  /// eta_eps(r) = eta(r / eps) / eps^m.
  double eta_eps(double r, double eps) const;
  double normalization() const { return c_; }
  /// Integral of eta(r) r^(m+1) over [0, inf).
  double alpha() const { return alpha_; }
  /// Second moment: integral of eta(|x|) x_1^2 over R^m, equal to (|S^(m-1)| / m) alpha.
  double sigma() const { return sigma_; }
  /// Integral of eta(|x|) over R^m by radial quadrature (should be 1).
  double mass() const;

 private:
  KernelProfile(Shape shape, int m);
  double shape_value(double t) const;

  Shape shape_;
  int m_;
  double c_ = 1.0, alpha_ = 0.0, sigma_ = 0.0;
};

/// Surface area of the unit sphere in R^m.
double sphere_area(int m);

/// Rows of `points` are points in R^d. Pairs (i, j), i < j, with
/// |x_i - x_j| < eps, sorted. Uniform binning with cell size eps for d <= 3,
/// a direct scan otherwise.
std::vector<std::pair<int, int>> neighbor_pairs(const Eigen::MatrixXd& points, double eps);

/// d_eps(x_i) = sum_j eta_eps(|x_i - x_j|), self term included.
Eigen::VectorXd degree_function(const Eigen::MatrixXd& points, double eps, const KernelProfile& kernel);

struct GraphLaplacian {
  enum class Variant { kernelized, gamma };

  SymmetricSparse weights;    // W, self-loops included
  Eigen::VectorXd degrees;    // D = row sums of W
  SymmetricSparse laplacian;  // D - W
  Eigen::VectorXd kde;        // d_eps (kernelized) or d~ (gamma)
  double epsilon = 0.0;
  KernelProfile kernel = KernelProfile::tent(1);
  Variant variant = Variant::kernelized;
  double gamma = 0.5;
  std::vector<int> component_of;  // connected components of the eps-graph
  int components = 0;

  int size() const { return laplacian.rows(); }
  /// Indicator vectors of the connected components.
  Eigen::MatrixXd component_indicators() const;
  /// Eigen request for the k smallest pairs. Kernelized: D - W with identity
  /// mass. Gamma: the generalized problem (D - W) v = lambda D v, which has the
  /// spectrum and eigenvectors of I - D^-1 W.
  EigenRequest request(int k) const;
  /// Dense I - D^-1 W (gamma) or D - W (kernelized).
  Eigen::MatrixXd dense_operator() const;
  /// D^-1/2 (D - W) D^-1/2 for the gamma variant.
  SymmetricSparse symmetric_conjugate() const;
};

/// W_ij = 2 eta_eps(|x_i - x_j|) / (sigma_eta eps^2 sqrt(d_i d_j)), Delta_n = D - W.
GraphLaplacian kernelized_weights(const Eigen::MatrixXd& points, double eps, const KernelProfile& kernel);

/// W_ij = eta_eps(|x_i - x_j|) / (d~_i^gamma d~_j^gamma), Delta = I - D^-1 W.
GraphLaplacian gamma_laplacian(const Eigen::MatrixXd& points, double eps, const KernelProfile& kernel, double gamma);

/// Exponent p_m in the default length scale: 1 for m = 1, 3/4 for m = 2, 1/m above.
double epsilon_exponent(int m);
/// multiplier * (log(n)^p_m / n^(1/m))^(1/2).
double default_epsilon(double n, int m, double multiplier = 1.0);

/// Longest edge of a Euclidean minimum spanning tree: the eps-graph is
/// connected exactly when eps exceeds it. Zero for a single point.
double connecting_epsilon(const Eigen::MatrixXd& points);

}  // namespace conespec
