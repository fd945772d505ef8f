#pragma once

#include "conespec/error.hpp"
#include "conespec/sparse.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace conespec {

/// Generalized problem K v = lambda M v with M diagonal positive.
struct EigenRequest {
  const SymmetricSparse* stiffness = nullptr;
  Eigen::VectorXd mass;  // diagonal of M; empty means identity
  int k = 1;
  double tolerance = 1e-9;  // target for |K v - lambda M v| / |M v|
  int max_iterations = 5000;
  std::uint64_t seed = 0;
  /// Columns known to satisfy K y = 0. They are returned first (M-orthonormalized)
  /// and the solver works on their M-orthogonal complement.
  Eigen::MatrixXd null_space;
  /// Problems of at most this dimension are solved densely.
  int dense_threshold = 512;
  /// jacobi: inverse diagonal of K + shift M. factorized: sparse LDL^T of
  /// K + shift M, for grid operators whose condition grows like 1/h^2.
  enum class Preconditioner { jacobi, factorized };
  Preconditioner preconditioner = Preconditioner::jacobi;

  int dimension() const { return stiffness ? stiffness->rows() : 0; }
  void validate() const;
};

struct EigenResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // M-orthonormal columns
  Eigen::VectorXd residuals;
  std::vector<bool> converged;
  int iterations = 0;
  bool dense = false;
};

class EigenConvergenceError : public ConvergenceError {
 public:
  EigenConvergenceError(const std::string& what, double residual, EigenResult partial, std::vector<int> unconverged)
      : ConvergenceError(what, residual), partial_(std::move(partial)), unconverged_(std::move(unconverged)) {}
  const EigenResult& partial() const { return partial_; }
  const std::vector<int>& unconverged() const { return unconverged_; }

 private:
  EigenResult partial_;
  std::vector<int> unconverged_;
};

/// k smallest eigenpairs. Dense solve at or below dense_threshold, otherwise
/// block LOBPCG with a Jacobi preconditioner and soft locking.
EigenResult smallest_eigenpairs(const EigenRequest& req);

/// Same request through the dense path (dimension at most 2048); returns the
/// largest eigenvalue discrepancy against `result`.
double validate_against_dense(const EigenRequest& req, const EigenResult& result);

/// Flip each column so that its first entry of non-negligible magnitude is positive.
void normalize_signs(Eigen::MatrixXd& vectors);

}  // namespace conespec
