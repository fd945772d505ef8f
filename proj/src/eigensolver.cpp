#include "conespec/eigensolver.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

namespace conespec {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// The solver works on B = D^{-1/2} K D^{-1/2}, D = diag(M), so that Ritz
// vectors are orthonormal in the standard inner product.
struct Transformed {
  const SymmetricSparse& k;
  Vector inv_sqrt_mass;
  Vector sqrt_mass;

  Matrix apply(const Matrix& x) const {
    Matrix y = inv_sqrt_mass.asDiagonal() * x;
    y = k.multiply(y);
    return inv_sqrt_mass.asDiagonal() * y;
  }
};

// Orthonormal basis of span(v) in the standard inner product (SVQB with
// dropping of nearly dependent directions). Returns the transform G with
// v * G orthonormal.
Matrix svqb(const Matrix& v) {
  if (v.cols() == 0) return Matrix(0, 0);
  Matrix gram = v.transpose() * v;
  Vector d = gram.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  Matrix scaled = d.asDiagonal() * gram * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (scaled + scaled.transpose()));
  const double top = es.eigenvalues().maxCoeff();
  std::vector<int> keep;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()[i] > 1e-13 * std::max(top, 1e-300)) keep.push_back(i);
  }
  Matrix g(v.cols(), keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j)
    g.col(j) = d.asDiagonal() * es.eigenvectors().col(keep[j]) / std::sqrt(es.eigenvalues()[keep[j]]);
  return g;
}

Matrix orthonormalize(const Matrix& v) {
  Matrix q = v * svqb(v);
  return q * svqb(q);
}

void project_out(Matrix& v, const Matrix& basis) {
  if (basis.cols() == 0 || v.cols() == 0) return;
  v -= basis * (basis.transpose() * v);
}

Vector residual_norms(const SymmetricSparse& k, const Vector& mass, const Vector& values, const Matrix& vectors) {
  const Matrix kv = k.multiply(vectors);
  Vector out(values.size());
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const Vector mv = mass.cwiseProduct(vectors.col(j));
    out[j] = (kv.col(j) - values[j] * mv).norm() / std::max(mv.norm(), 1e-300);
  }
  return out;
}

Vector effective_mass(const EigenRequest& req) {
  return req.mass.size() ? req.mass : Vector::Ones(req.dimension());
}

// M-orthonormal null basis in transformed coordinates (columns orthonormal).
Matrix transformed_null_basis(const EigenRequest& req, const Vector& sqrt_mass) {
  if (req.null_space.cols() == 0) return Matrix(req.dimension(), 0);
  Matrix z = sqrt_mass.asDiagonal() * req.null_space;
  Matrix q = orthonormalize(z);
  if (q.cols() < z.cols()) throw Error(ErrorKind::rank_deficient, "null-space columns are linearly dependent");
  return q;
}

struct Partial {
  Matrix x;  // transformed Ritz vectors (orthonormal)
  Vector theta;
  int iterations = 0;
};

Partial dense_complement(const EigenRequest& req, const Transformed& t, const Matrix& z, int count) {
  Matrix b = t.inv_sqrt_mass.asDiagonal() * t.k.to_dense() * t.inv_sqrt_mass.asDiagonal();
  b = 0.5 * (b + b.transpose());
  if (z.cols() > 0) {
    const Matrix p = Matrix::Identity(b.rows(), b.cols()) - z * z.transpose();
    const double lift = 2.0 * b.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
    b = p * b * p + lift * z * z.transpose();
    b = 0.5 * (b + b.transpose());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(b);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense symmetric eigensolver failed", INFINITY);
  Partial out;
  out.x = es.eigenvectors().leftCols(count);
  out.theta = es.eigenvalues().head(count);
  (void)req;
  return out;
}

Partial lobpcg(const EigenRequest& req, const Transformed& t, const Matrix& z, int count, std::vector<int>& unconverged,
               double& worst) {
  const int n = req.dimension();
  const int block = std::min(n - static_cast<int>(z.cols()), std::max(count + 2, std::min(2 * count, count + 6)));
  std::mt19937_64 rng(req.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(n, block);
  for (int j = 0; j < block; ++j) {
    for (int i = 0; i < n; ++i) x(i, j) = normal(rng);
  }

  // Preconditioner in transformed coordinates: D^{1/2} (K + shift M)^{-1} D^{1/2}.
  const Vector kdiag = req.stiffness->diagonal();
  Vector jacobi;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  if (req.preconditioner == EigenRequest::Preconditioner::jacobi) {
    const double shift = 1e-8 * kdiag.sum() / n;
    jacobi.resize(n);
    for (int i = 0; i < n; ++i) jacobi[i] = 1.0 / (kdiag[i] * t.inv_sqrt_mass[i] * t.inv_sqrt_mass[i] + shift);
    if (!jacobi.allFinite() || (jacobi.array() <= 0).any()) jacobi.setOnes();
  } else {
    // A shift near the low end of the spectrum keeps the factor well conditioned.
    const double shift = 1e-3 * kdiag.sum() / t.sqrt_mass.squaredNorm();
    Eigen::SparseMatrix<double> a = req.stiffness->to_eigen();
    for (int i = 0; i < n; ++i) a.coeffRef(i, i) += shift * t.sqrt_mass[i] * t.sqrt_mass[i];
    ldlt.compute(a);
    if (ldlt.info() != Eigen::Success) throw ConvergenceError("preconditioner factorization failed", INFINITY);
  }
  auto precondition = [&](const Matrix& r) -> Matrix {
    if (jacobi.size()) return jacobi.asDiagonal() * r;
    Matrix y = ldlt.solve(Matrix(t.sqrt_mass.asDiagonal() * r));
    return t.sqrt_mass.asDiagonal() * y;
  };

  project_out(x, z);
  x = orthonormalize(x);
  project_out(x, z);
  x = orthonormalize(x);
  Matrix ax = t.apply(x);
  Vector theta;
  {
    Matrix h = x.transpose() * ax;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.transpose()));
    x = x * es.eigenvectors();
    ax = ax * es.eigenvectors();
    theta = es.eigenvalues();
  }

  Matrix p(n, 0), ap(n, 0);
  Partial out;
  for (int it = 1; it <= req.max_iterations; ++it) {
    out.iterations = it;
    const Matrix r = ax - x * theta.asDiagonal();
    std::vector<int> active;
    worst = 0.0;
    bool done = true;
    for (int j = 0; j < x.cols(); ++j) {
      const double res = t.sqrt_mass.cwiseProduct(r.col(j)).norm() / t.sqrt_mass.cwiseProduct(x.col(j)).norm();
      if (res > req.tolerance) {
        active.push_back(j);
        if (j < count) {
          done = false;
          worst = std::max(worst, res);
        }
      }
    }
    if (done) break;
    if (it == req.max_iterations) {
      for (int j = 0; j < count; ++j) {
        if (std::find(active.begin(), active.end(), j) != active.end()) unconverged.push_back(j);
      }
      break;
    }

    Matrix ra(n, active.size());
    for (std::size_t a = 0; a < active.size(); ++a) ra.col(a) = r.col(active[a]);
    Matrix w = precondition(ra);
    project_out(w, z);

    // Search directions [W, P], made orthogonal to X and Z and orthonormal.
    Matrix v(n, w.cols() + p.cols());
    v << w, p;
    Matrix av(n, v.cols());
    Matrix aw = t.apply(w);
    av << aw, ap;
    for (int pass = 0; pass < 2; ++pass) {
      Matrix coef = x.transpose() * v;
      v -= x * coef;
      av -= ax * coef;
      if (z.cols() > 0) {
        Matrix zc = z.transpose() * v;
        v -= z * zc;  // z spans exact null vectors, so B z = 0
      }
      const Matrix g = svqb(v);
      v = v * g;
      av = av * g;
    }

    Matrix s(n, x.cols() + v.cols()), as(n, x.cols() + v.cols());
    s << x, v;
    as << ax, av;
    Matrix h = s.transpose() * as;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.transpose()));
    const Matrix c = es.eigenvectors().leftCols(block);
    theta = es.eigenvalues().head(block);
    const Matrix cv = c.bottomRows(v.cols());
    p = v * cv;
    ap = av * cv;
    x = s * c;
    ax = as * c;

    if (it % 25 == 0) {
      // Limit drift of the implicitly updated products.
      project_out(x, z);
      x = orthonormalize(x);
      ax = t.apply(x);
      Matrix h2 = x.transpose() * ax;
      Eigen::SelfAdjointEigenSolver<Matrix> es2(0.5 * (h2 + h2.transpose()));
      x = x * es2.eigenvectors();
      ax = ax * es2.eigenvectors();
      theta = es2.eigenvalues();
      p.resize(n, 0);
      ap.resize(n, 0);
    }
  }
  out.x = x.leftCols(count);
  out.theta = theta.head(count);
  return out;
}

EigenResult finish(const EigenRequest& req, const Transformed& t, const Matrix& z, const Partial& part, bool dense) {
  const int n = req.dimension();
  const int nz = static_cast<int>(z.cols());
  const Vector mass = effective_mass(req);
  Matrix vectors(n, req.k);
  Vector values(req.k);
  for (int j = 0; j < nz; ++j) vectors.col(j) = t.inv_sqrt_mass.cwiseProduct(z.col(j));
  for (int j = 0; j < req.k - nz; ++j) vectors.col(nz + j) = t.inv_sqrt_mass.cwiseProduct(part.x.col(j));
  const Matrix kv = req.stiffness->multiply(vectors);
  for (int j = 0; j < req.k; ++j) values[j] = vectors.col(j).dot(kv.col(j)) / vectors.col(j).dot(mass.cwiseProduct(vectors.col(j)));

  std::vector<int> order(req.k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
  EigenResult out;
  out.values.resize(req.k);
  out.vectors.resize(n, req.k);
  for (int j = 0; j < req.k; ++j) {
    out.values[j] = values[order[j]];
    out.vectors.col(j) = vectors.col(order[j]);
  }
  normalize_signs(out.vectors);
  out.residuals = residual_norms(*req.stiffness, mass, out.values, out.vectors);
  out.converged.resize(req.k);
  for (int j = 0; j < req.k; ++j) out.converged[j] = out.residuals[j] <= req.tolerance;
  out.iterations = part.iterations;
  out.dense = dense;
  return out;
}

EigenResult solve(const EigenRequest& req, bool force_dense) {
  req.validate();
  const Vector mass = effective_mass(req);
  Transformed t{*req.stiffness, mass.cwiseSqrt().cwiseInverse(), mass.cwiseSqrt()};
  const Matrix z = transformed_null_basis(req, t.sqrt_mass);
  const int count = req.k - static_cast<int>(z.cols());
  const bool dense = force_dense || req.dimension() <= req.dense_threshold;
  Partial part;
  std::vector<int> unconverged;
  double worst = 0.0;
  if (count == 0) {
    part.x = Matrix(req.dimension(), 0);
  } else if (dense) {
    part = dense_complement(req, t, z, count);
  } else {
    part = lobpcg(req, t, z, count, unconverged, worst);
  }
  EigenResult result = finish(req, t, z, part, dense);
  if (!unconverged.empty()) {
    std::ostringstream msg;
    msg << "eigensolver did not converge in " << req.max_iterations << " iterations; unconverged pairs:";
    for (int j : unconverged) msg << ' ' << j + z.cols();
    throw EigenConvergenceError(msg.str(), worst, result, unconverged);
  }
  return result;
}

}  // namespace

void EigenRequest::validate() const {
  if (!stiffness) throw Error(ErrorKind::invalid_argument, "eigen request has no matrix");
  const int n = stiffness->rows();
  if (k < 1 || k >= n)
    throw Error(ErrorKind::invalid_argument,
                "requested " + std::to_string(k) + " eigenpairs of a " + std::to_string(n) + "-dimensional problem");
  if (!(tolerance >= 1e-12 && tolerance <= 1e-4))
    throw Error(ErrorKind::invalid_argument, "eigensolver tolerance must lie in [1e-12, 1e-4]");
  if (max_iterations < 1) throw Error(ErrorKind::invalid_argument, "max_iterations must be positive");
  if (mass.size() != 0) {
    if (mass.size() != n) throw Error(ErrorKind::dimension, "mass diagonal length does not match the matrix");
    if (!(mass.array() > 0).all() || !mass.allFinite())
      throw Error(ErrorKind::invalid_argument, "mass diagonal must be strictly positive");
  }
  if (null_space.cols() > 0) {
    if (null_space.rows() != n) throw Error(ErrorKind::dimension, "null-space vectors have the wrong length");
    if (null_space.cols() > k) throw Error(ErrorKind::invalid_argument, "more null-space vectors than requested pairs");
  }
}

void normalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    const double scale = vectors.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      if (std::abs(vectors(i, j)) > 1e-8 * scale) {
        if (vectors(i, j) < 0) vectors.col(j) *= -1.0;
        break;
      }
    }
  }
}

EigenResult smallest_eigenpairs(const EigenRequest& req) { return solve(req, false); }

double validate_against_dense(const EigenRequest& req, const EigenResult& result) {
  if (req.dimension() > 2048) throw Error(ErrorKind::invalid_argument, "dense validation is limited to dimension 2048");
  const EigenResult dense = solve(req, true);
  return (dense.values - result.values).cwiseAbs().maxCoeff();
}

}  // namespace conespec
