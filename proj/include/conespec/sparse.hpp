#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <vector>

namespace conespec {

struct Triplet {
  int row, col;
  double value;
};

/// Symmetric sparse matrix. Only the upper triangle (diagonal included) is
/// stored, in compressed rows; the lower triangle is implied.
class SymmetricSparse {
 public:
  SymmetricSparse() = default;

  /// Entries may reference either triangle; (i, j) and (j, i) are treated as
  /// the same entry and duplicates are summed. Magnitudes <= 1e-15 are dropped.
  static SymmetricSparse from_triplets(int n, const std::vector<Triplet>& entries);
  /// Like from_triplets, but entries describe the full matrix; throws if
  /// |A_ij - A_ji| exceeds tol * max|A|.
  static SymmetricSparse from_full_triplets(int n, const std::vector<Triplet>& entries, double tol = 1e-12);
  /// Throws if the dense matrix is not symmetric to tol * max|A|.
  static SymmetricSparse from_dense(const Eigen::MatrixXd& a, double tol = 1e-12);
  static SymmetricSparse diagonal(const Eigen::VectorXd& d);

  int rows() const { return n_; }
  std::size_t stored_entries() const { return values_.size(); }

  Eigen::MatrixXd multiply(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd diagonal() const;
  double coeff(int i, int j) const;
  double trace() const;
  double max_abs() const;
  Eigen::MatrixXd to_dense() const;
  /// Full (both triangles) Eigen sparse matrix.
  Eigen::SparseMatrix<double> to_eigen() const;
  /// P^T A P for the permutation sending index i to perm[i].
  SymmetricSparse permuted(const std::vector<int>& perm) const;

  /// Matrix Market "coordinate real symmetric" (lower triangle, 1-based).
  void write_matrix_market(std::ostream& out) const;

  const std::vector<int>& row_start() const { return row_start_; }
  const std::vector<int>& col_index() const { return cols_; }
  const std::vector<double>& values() const { return values_; }

 private:
  int n_ = 0;
  std::vector<int> row_start_{0};
  std::vector<int> cols_;
  std::vector<double> values_;
};

}  // namespace conespec
