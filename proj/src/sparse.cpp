#include "conespec/sparse.hpp"

#include "conespec/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <string>

namespace conespec {

namespace {

constexpr double kDropTolerance = 1e-15;

void check_index(int n, const Triplet& t) {
  if (t.row < 0 || t.col < 0 || t.row >= n || t.col >= n)
    throw Error(ErrorKind::dimension, "sparse entry (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                                          ") outside a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
}

}  // namespace

SymmetricSparse SymmetricSparse::from_triplets(int n, const std::vector<Triplet>& entries) {
  if (n < 0) throw Error(ErrorKind::dimension, "negative matrix dimension");
  std::vector<Triplet> upper;
  upper.reserve(entries.size());
  for (const auto& t : entries) {
    check_index(n, t);
    upper.push_back(t.row <= t.col ? t : Triplet{t.col, t.row, t.value});
  }
  std::sort(upper.begin(), upper.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  SymmetricSparse m;
  m.n_ = n;
  m.row_start_.assign(n + 1, 0);
  std::size_t i = 0;
  for (int r = 0; r < n; ++r) {
    while (i < upper.size() && upper[i].row == r) {
      const int c = upper[i].col;
      double v = 0.0;
      while (i < upper.size() && upper[i].row == r && upper[i].col == c) v += upper[i++].value;
      if (std::abs(v) > kDropTolerance) {
        m.cols_.push_back(c);
        m.values_.push_back(v);
      }
    }
    m.row_start_[r + 1] = static_cast<int>(m.cols_.size());
  }
  return m;
}

SymmetricSparse SymmetricSparse::from_full_triplets(int n, const std::vector<Triplet>& entries, double tol) {
  std::map<std::pair<int, int>, double> full;
  double scale = 0.0;
  for (const auto& t : entries) {
    check_index(n, t);
    full[{t.row, t.col}] += t.value;
  }
  for (const auto& [key, v] : full) scale = std::max(scale, std::abs(v));
  std::vector<Triplet> upper;
  for (const auto& [key, v] : full) {
    const auto [i, j] = key;
    const auto it = full.find({j, i});
    const double mirror = it == full.end() ? 0.0 : it->second;
    if (std::abs(v - mirror) > tol * std::max(scale, 1e-300))
      throw Error(ErrorKind::invalid_argument, "matrix is not symmetric at (" + std::to_string(i) + ", " +
                                                   std::to_string(j) + ")");
    if (i <= j) upper.push_back({i, j, v});
  }
  return from_triplets(n, upper);
}

SymmetricSparse SymmetricSparse::from_dense(const Eigen::MatrixXd& a, double tol) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::dimension, "symmetric matrix must be square");
  const double scale = a.cwiseAbs().maxCoeff();
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol * scale)
    throw Error(ErrorKind::invalid_argument, "matrix is not symmetric");
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = i; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) t.push_back({static_cast<int>(i), static_cast<int>(j), 0.5 * (a(i, j) + a(j, i))});
    }
  }
  return from_triplets(static_cast<int>(a.rows()), t);
}

SymmetricSparse SymmetricSparse::diagonal(const Eigen::VectorXd& d) {
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < d.size(); ++i) t.push_back({static_cast<int>(i), static_cast<int>(i), d[i]});
  return from_triplets(static_cast<int>(d.size()), t);
}

Eigen::MatrixXd SymmetricSparse::multiply(const Eigen::MatrixXd& x) const {
  if (x.rows() != n_) throw Error(ErrorKind::dimension, "matrix-block product dimension mismatch");
  using RowBlock = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowBlock xr = x;
  RowBlock y = RowBlock::Zero(n_, x.cols());
  for (int r = 0; r < n_; ++r) {
    for (int p = row_start_[r]; p < row_start_[r + 1]; ++p) {
      const int c = cols_[p];
      const double v = values_[p];
      y.row(r) += v * xr.row(c);
      if (c != r) y.row(c) += v * xr.row(r);
    }
  }
  return y;
}

Eigen::VectorXd SymmetricSparse::multiply(const Eigen::VectorXd& x) const {
  if (x.size() != n_) throw Error(ErrorKind::dimension, "matrix-vector product dimension mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n_);
  for (int r = 0; r < n_; ++r) {
    double acc = 0.0;
    for (int p = row_start_[r]; p < row_start_[r + 1]; ++p) {
      const int c = cols_[p];
      acc += values_[p] * x[c];
      if (c != r) y[c] += values_[p] * x[r];
    }
    y[r] += acc;
  }
  return y;
}

Eigen::VectorXd SymmetricSparse::diagonal() const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n_);
  for (int r = 0; r < n_; ++r) {
    if (row_start_[r] < row_start_[r + 1] && cols_[row_start_[r]] == r) d[r] = values_[row_start_[r]];
  }
  return d;
}

double SymmetricSparse::coeff(int i, int j) const {
  if (i > j) std::swap(i, j);
  const auto begin = cols_.begin() + row_start_[i], end = cols_.begin() + row_start_[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  return it != end && *it == j ? values_[it - cols_.begin()] : 0.0;
}

double SymmetricSparse::trace() const { return diagonal().sum(); }

double SymmetricSparse::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Eigen::MatrixXd SymmetricSparse::to_dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  for (int r = 0; r < n_; ++r) {
    for (int p = row_start_[r]; p < row_start_[r + 1]; ++p) {
      a(r, cols_[p]) = values_[p];
      a(cols_[p], r) = values_[p];
    }
  }
  return a;
}

Eigen::SparseMatrix<double> SymmetricSparse::to_eigen() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * values_.size());
  for (int r = 0; r < n_; ++r) {
    for (int p = row_start_[r]; p < row_start_[r + 1]; ++p) {
      t.emplace_back(r, cols_[p], values_[p]);
      if (cols_[p] != r) t.emplace_back(cols_[p], r, values_[p]);
    }
  }
  Eigen::SparseMatrix<double> a(n_, n_);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

SymmetricSparse SymmetricSparse::permuted(const std::vector<int>& perm) const {
  if (static_cast<int>(perm.size()) != n_) throw Error(ErrorKind::dimension, "permutation length mismatch");
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (int r = 0; r < n_; ++r) {
    for (int p = row_start_[r]; p < row_start_[r + 1]; ++p) t.push_back({perm[r], perm[cols_[p]], values_[p]});
  }
  return from_triplets(n_, t);
}

void SymmetricSparse::write_matrix_market(std::ostream& out) const {
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << n_ << ' ' << n_ << ' ' << values_.size() << '\n';
  out << std::setprecision(17);
  for (int r = 0; r < n_; ++r) {
    for (int p = row_start_[r]; p < row_start_[r + 1]; ++p) out << cols_[p] + 1 << ' ' << r + 1 << ' ' << values_[p] << '\n';
  }
}

}  // namespace conespec
