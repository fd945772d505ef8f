#pragma once

#include "conespec/continuum.hpp"
#include "conespec/graph.hpp"
#include "conespec/mixture.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace conespec {

/// Point masses in R^N.
struct EmbeddedCloud {
  enum class Normalization { empirical_l2, weighted_l2, none };

  Eigen::MatrixXd points;  // n x N
  Eigen::VectorXd masses;  // sums to 1
  Normalization normalization = Normalization::none;

  int size() const { return static_cast<int>(points.rows()); }
  int dimension() const { return static_cast<int>(points.cols()); }
  /// Throws unless masses are non-negative and sum to one within 1e-12.
  void validate() const;
  bool uniform() const;

  static EmbeddedCloud uniform_cloud(Eigen::MatrixXd points);
};

/// Rows are (u_1(x_i), ..., u_N(x_i)) for the first N eigenvectors of the graph
/// Laplacian, each scaled to (1/n) sum u(x_i)^2 = 1. A graph with more than N
/// connected components is rejected; with at most N the component indicators
/// span the first eigenvectors. With `spectrum` set, max(N, spectrum_count)
/// eigenpairs are computed and returned there.
EmbeddedCloud discrete_embedding(const GraphLaplacian& lap, int n_clusters, std::uint64_t seed = 0,
                                 double tolerance = 1e-9, EigenResult* spectrum = nullptr, int spectrum_count = 0);

/// Grid cells weighted by rho |cell|, at the first N continuum eigenfunctions.
EmbeddedCloud continuum_cloud(const ContinuumSpectrum& spectrum, int n_clusters);

/// Rows (q_1(x)/sqrt(w_1), ..., q_N(x)/sqrt(w_N)) at intrinsic points.
EmbeddedCloud fq_embedding(const MixtureModel& model, const std::vector<Point>& points);

struct ConeStructure {
  Eigen::MatrixXd basis;  // columns e_1..e_N
  double sigma = 0.0;
  double r = 0.0;
  double delta = 1.0;  // mass outside all cones
  std::vector<double> per_cone_mass;
};

/// z lies in cone j iff z.e_j > |z| cos(sigma) and |z| > r.
ConeStructure verify_cone_structure(const EmbeddedCloud& cloud, const Eigen::MatrixXd& basis, double sigma, double r);

struct ConeCandidate {
  double sigma = 0.0;
  double r = 0.0;
  bool detected = false;
  std::string failure;  // set when detected is false
  ConeStructure cones;
  bool pareto = false;  // not dominated in (smaller sigma, larger r, smaller delta)
};

/// Greedy cap picking on the normalized survivors |z| > r, corrected to the
/// nearest orthonormal basis and verified, for every (sigma, r) on the grid.
std::vector<ConeCandidate> detect_cone_structure(const EmbeddedCloud& cloud, int n_clusters,
                                                 const std::vector<double>& sigma_grid,
                                                 const std::vector<double>& r_grid);

struct OrthonormalFit {
  Eigen::MatrixXd basis;     // V (V^T V)^(-1/2)
  double coherence = 0.0;    // max |<v_i, v_j>|, i != j
  std::optional<double> bound;  // sqrt(N) (1/sqrt(1 - N delta) - 1) when N delta < 1
  double max_deviation = 0.0;   // max_j |v_j - v~_j|
  bool warning = false;         // 2 N delta >= 1
};

/// Columns of V must be linearly independent unit vectors.
OrthonormalFit nearest_orthonormal_basis(const Eigen::MatrixXd& v);

struct TransportResult {
  double value = 0.0;        // W2 (exact, or an upper bound from a feasible plan)
  double lower_bound = 0.0;  // from a feasible dual pair
  bool exact = false;
  int iterations = 0;
};

/// Exact assignment for equal-size uniform clouds with n <= exact_limit,
/// entropic transport with a decreasing regularizer otherwise.
TransportResult wasserstein2(const EmbeddedCloud& a, const EmbeddedCloud& b, int exact_limit = 512);

/// Minimum-cost perfect matching for a square cost matrix; returns col[row].
std::vector<int> optimal_assignment(const Eigen::MatrixXd& cost);

struct Alignment {
  Eigen::MatrixXd rotation;  // orthogonal, det may be -1
  EmbeddedCloud aligned;     // rows O a_i
  double residual = 0.0;     // sqrt(sum m_i |O a_i - b_i|^2)
  bool ambiguous = false;    // cross-covariance rank < N
};

/// Orthogonal Procrustes with point i of a paired to point i of b.
Alignment align_embeddings(const EmbeddedCloud& a, const EmbeddedCloud& b);

void write_cloud_csv(std::ostream& out, const EmbeddedCloud& cloud, bool with_masses = true);
/// Rows of comma-separated numbers; a header line is skipped if it does not
/// parse. With has_masses the last column is the mass.
EmbeddedCloud read_cloud_csv(std::istream& in, bool has_masses);

}  // namespace conespec
