#include "conespec/embedding.hpp"

#include "conespec/error.hpp"
#include "conespec/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace conespec {

void EmbeddedCloud::validate() const {
  if (masses.size() != points.rows()) throw Error(ErrorKind::dimension, "one mass per point is required");
  if (points.rows() == 0) throw Error(ErrorKind::invalid_argument, "empty cloud");
  if ((masses.array() < 0).any()) throw Error(ErrorKind::invalid_argument, "masses must be non-negative");
  if (std::abs(masses.sum() - 1.0) > 1e-12) throw Error(ErrorKind::invalid_argument, "masses must sum to one");
  if (!points.allFinite()) throw Error(ErrorKind::invalid_argument, "cloud coordinates must be finite");
}

bool EmbeddedCloud::uniform() const {
  if (masses.size() == 0) return true;
  return (masses.array() - 1.0 / masses.size()).abs().maxCoeff() <= 1e-12 / masses.size();
}

EmbeddedCloud EmbeddedCloud::uniform_cloud(Eigen::MatrixXd points) {
  EmbeddedCloud c;
  c.masses = Eigen::VectorXd::Constant(points.rows(), 1.0 / std::max<Eigen::Index>(1, points.rows()));
  c.points = std::move(points);
  return c;
}

EmbeddedCloud discrete_embedding(const GraphLaplacian& lap, int n_clusters, std::uint64_t seed, double tolerance,
                                 EigenResult* spectrum, int spectrum_count) {
  if (n_clusters < 1) throw Error(ErrorKind::invalid_argument, "N must be positive");
  if (lap.components > n_clusters) {
    std::vector<int> sizes(lap.components, 0);
    for (int c : lap.component_of) ++sizes[c];
    std::ostringstream msg;
    msg << "the eps-graph has " << lap.components << " connected components (sizes";
    for (int i = 0; i < std::min(lap.components, 10); ++i) msg << ' ' << sizes[i];
    if (lap.components > 10) msg << " ...";
    msg << ") but N = " << n_clusters << "; increase epsilon";
    throw Error(ErrorKind::disconnected, msg.str());
  }
  const int count = spectrum ? std::min(std::max(n_clusters, spectrum_count), lap.size()) : n_clusters;
  auto req = lap.request(count);
  req.seed = seed;
  req.tolerance = tolerance;
  const EigenResult r = smallest_eigenpairs(req);
  const double n = lap.size();
  EmbeddedCloud cloud = EmbeddedCloud::uniform_cloud(r.vectors.leftCols(n_clusters));
  for (int j = 0; j < n_clusters; ++j) cloud.points.col(j) *= std::sqrt(n / cloud.points.col(j).squaredNorm());
  cloud.normalization = EmbeddedCloud::Normalization::empirical_l2;
  if (spectrum) *spectrum = r;
  return cloud;
}

EmbeddedCloud continuum_cloud(const ContinuumSpectrum& spectrum, int n_clusters) {
  if (n_clusters < 1 || n_clusters > spectrum.eigenfunctions.cols())
    throw Error(ErrorKind::invalid_argument, "not enough continuum eigenfunctions");
  EmbeddedCloud cloud;
  cloud.points = spectrum.eigenfunctions.leftCols(n_clusters);
  cloud.masses = spectrum.grid->mass / spectrum.grid->mass.sum();
  cloud.normalization = EmbeddedCloud::Normalization::weighted_l2;
  return cloud;
}

EmbeddedCloud fq_embedding(const MixtureModel& model, const std::vector<Point>& points) {
  const int n = static_cast<int>(points.size());
  const int k = static_cast<int>(model.size());
  Eigen::MatrixXd z(n, k);
  Eigen::VectorXd inv_root(k);
  for (int j = 0; j < k; ++j) inv_root[j] = 1.0 / std::sqrt(model.weights()[j]);
  for (int i = 0; i < n; ++i) z.row(i) = likelihood_vector(model, points[i]).cwiseProduct(inv_root).transpose();
  return EmbeddedCloud::uniform_cloud(std::move(z));
}

// ---------------------------------------------------------------- cones

namespace {

void check_cone_arguments(const EmbeddedCloud& cloud, const Eigen::MatrixXd& basis, double sigma, double r) {
  if (basis.rows() != cloud.dimension()) throw Error(ErrorKind::dimension, "basis and cloud dimensions differ");
  if (basis.cols() < 1 || basis.cols() > basis.rows())
    throw Error(ErrorKind::dimension, "basis needs between 1 and dim columns");
  const Eigen::MatrixXd gram = basis.transpose() * basis;
  if ((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-8)
    throw Error(ErrorKind::invalid_argument, "cone basis is not orthonormal");
  if (!(sigma > 0 && sigma < std::numbers::pi / 4))
    throw Error(ErrorKind::invalid_argument, "cone half-angle must lie in (0, pi/4)");
  if (!(r >= 0) || !std::isfinite(r)) throw Error(ErrorKind::invalid_argument, "cone radius must be non-negative");
}

}  // namespace

ConeStructure verify_cone_structure(const EmbeddedCloud& cloud, const Eigen::MatrixXd& basis, double sigma, double r) {
  cloud.validate();
  check_cone_arguments(cloud, basis, sigma, r);
  ConeStructure out;
  out.basis = basis;
  out.sigma = sigma;
  out.r = r;
  out.per_cone_mass.assign(basis.cols(), 0.0);
  const double c = std::cos(sigma);
  double outside = 0.0;
  for (int i = 0; i < cloud.size(); ++i) {
    const double norm = cloud.points.row(i).norm();
    int hit = -1;
    if (norm > r && norm > 0) {
      for (int j = 0; j < basis.cols(); ++j) {
        if (cloud.points.row(i).dot(basis.col(j)) > norm * c) {
          hit = j;
          break;
        }
      }
    }
    if (hit >= 0) out.per_cone_mass[hit] += cloud.masses[i];
    else outside += cloud.masses[i];
  }
  out.delta = outside;
  return out;
}

OrthonormalFit nearest_orthonormal_basis(const Eigen::MatrixXd& v) {
  const int n = static_cast<int>(v.cols());
  if (n < 1 || n > v.rows()) throw Error(ErrorKind::dimension, "need between 1 and dim vectors");
  const Eigen::MatrixXd gram = v.transpose() * v;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const Eigen::VectorXd ev = es.eigenvalues();
  if (!(ev.minCoeff() > 1e-12 * std::max(1.0, ev.maxCoeff())))
    throw Error(ErrorKind::rank_deficient, "vectors are not linearly independent");
  const Eigen::MatrixXd inv_sqrt =
      es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  OrthonormalFit fit;
  fit.basis = v * inv_sqrt;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) fit.coherence = std::max(fit.coherence, std::abs(gram(i, j)));
  if (n * fit.coherence < 1.0) fit.bound = std::sqrt(static_cast<double>(n)) * (1.0 / std::sqrt(1.0 - n * fit.coherence) - 1.0);
  fit.warning = 2.0 * n * fit.coherence >= 1.0;
  fit.max_deviation = (v - fit.basis).colwise().norm().maxCoeff();
  return fit;
}

namespace {

constexpr int kMaxCandidates = 1024;

ConeCandidate detect_one(const EmbeddedCloud& cloud, int n_clusters, double sigma, double r) {
  ConeCandidate cand;
  cand.sigma = sigma;
  cand.r = r;
  std::vector<int> alive;
  for (int i = 0; i < cloud.size(); ++i) {
    if (cloud.points.row(i).norm() > r && cloud.points.row(i).norm() > 0) alive.push_back(i);
  }
  if (static_cast<int>(alive.size()) < n_clusters) {
    cand.failure = "fewer than N points outside radius r";
    return cand;
  }
  Eigen::MatrixXd unit(alive.size(), cloud.dimension());
  for (std::size_t a = 0; a < alive.size(); ++a) unit.row(a) = cloud.points.row(alive[a]).normalized();
  const double c = std::cos(sigma);
  std::vector<char> taken(alive.size(), 0);
  Eigen::MatrixXd picked(cloud.dimension(), n_clusters);
  for (int round = 0; round < n_clusters; ++round) {
    std::vector<int> remaining;
    for (std::size_t a = 0; a < alive.size(); ++a)
      if (!taken[a]) remaining.push_back(static_cast<int>(a));
    if (remaining.empty()) {
      cand.failure = "no uncaptured points left for direction " + std::to_string(round + 1);
      return cand;
    }
    const std::size_t stride = (remaining.size() + kMaxCandidates - 1) / kMaxCandidates;
    int best = -1;
    double best_mass = -1.0;
    for (std::size_t q = 0; q < remaining.size(); q += stride) {
      const int cnd = remaining[q];
      double mass = 0.0;
      for (int a : remaining)
        if (unit.row(a).dot(unit.row(cnd)) > c) mass += cloud.masses[alive[a]];
      if (mass > best_mass) {
        best_mass = mass;
        best = cnd;
      }
    }
    picked.col(round) = unit.row(best).transpose();
    for (int a : remaining)
      if (unit.row(a).dot(unit.row(best)) > c) taken[a] = 1;
  }
  OrthonormalFit fit;
  try {
    fit = nearest_orthonormal_basis(picked);
  } catch (const Error& e) {
    cand.failure = std::string("picked directions are degenerate: ") + e.what();
    return cand;
  }
  cand.cones = verify_cone_structure(cloud, fit.basis, sigma, r);
  cand.detected = true;
  return cand;
}

}  // namespace

std::vector<ConeCandidate> detect_cone_structure(const EmbeddedCloud& cloud, int n_clusters,
                                                 const std::vector<double>& sigma_grid,
                                                 const std::vector<double>& r_grid) {
  cloud.validate();
  if (n_clusters < 1 || n_clusters > cloud.dimension())
    throw Error(ErrorKind::dimension, "N must not exceed the embedding dimension");
  for (double s : sigma_grid)
    if (!(s > 0 && s < std::numbers::pi / 4)) throw Error(ErrorKind::invalid_argument, "sigma grid outside (0, pi/4)");
  for (double r : r_grid)
    if (!(r >= 0)) throw Error(ErrorKind::invalid_argument, "r grid must be non-negative");
  std::vector<ConeCandidate> out(sigma_grid.size() * r_grid.size());
  parallel_for(out.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      out[i] = detect_one(cloud, n_clusters, sigma_grid[i / r_grid.size()], r_grid[i % r_grid.size()]);
  });
  for (auto& a : out) {
    if (!a.detected) continue;
    a.pareto = true;
    for (const auto& b : out) {
      if (!b.detected || &a == &b) continue;
      const bool weak = b.sigma <= a.sigma && b.r >= a.r && b.cones.delta <= a.cones.delta;
      const bool strict = b.sigma < a.sigma || b.r > a.r || b.cones.delta < a.cones.delta;
      if (weak && strict) {
        a.pareto = false;
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- transport

std::vector<int> optimal_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw Error(ErrorKind::dimension, "assignment needs a square cost matrix");
  const double inf = std::numeric_limits<double>::infinity();
  // Shortest augmenting paths with row/column potentials (1-based, column 0 is a sentinel).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> col(n);
  for (int j = 1; j <= n; ++j) col[p[j] - 1] = j - 1;
  return col;
}

namespace {

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd c = (-2.0 * a * b.transpose()).colwise() + a.rowwise().squaredNorm();
  c.rowwise() += b.rowwise().squaredNorm().transpose();
  return c.cwiseMax(0.0);
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().sum());
}

TransportResult entropic(const EmbeddedCloud& a, const EmbeddedCloud& b) {
  const Eigen::MatrixXd cost = squared_distances(a.points, b.points);
  const int n = a.size(), m = b.size();
  const double scale = std::max(cost.maxCoeff(), 1e-300);
  const Eigen::VectorXd la = a.masses.array().log(), lb = b.masses.array().log();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n), g = Eigen::VectorXd::Zero(m);
  TransportResult res;
  Eigen::VectorXd tmp_n(n), tmp_m(m);
  double reg = scale;
  for (; reg >= 1e-4 * scale; reg *= 0.5) {
    for (int it = 0; it < 500; ++it, ++res.iterations) {
      for (int i = 0; i < n; ++i) {
        tmp_m = (g - cost.row(i).transpose()) / reg;
        f[i] = reg * (la[i] - log_sum_exp(tmp_m));
      }
      double err = 0.0;
      for (int j = 0; j < m; ++j) {
        tmp_n = (f - cost.col(j)) / reg;
        const double lse = log_sum_exp(tmp_n);
        err += std::abs(std::exp(lse + g[j] / reg) - b.masses[j]);
        g[j] = reg * (lb[j] - lse);
      }
      if (err < 1e-9) break;
    }
  }
  reg *= 2.0;
  // Plan from the last potentials, rounded onto the exact marginals.
  Eigen::MatrixXd plan(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) plan(i, j) = std::exp((f[i] + g[j] - cost(i, j)) / reg);
  Eigen::VectorXd rs = plan.rowwise().sum();
  for (int i = 0; i < n; ++i)
    if (rs[i] > a.masses[i]) plan.row(i) *= a.masses[i] / rs[i];
  Eigen::VectorXd cs = plan.colwise().sum().transpose();
  for (int j = 0; j < m; ++j)
    if (cs[j] > b.masses[j]) plan.col(j) *= b.masses[j] / cs[j];
  const Eigen::VectorXd ea = a.masses - plan.rowwise().sum();
  const Eigen::VectorXd eb = b.masses - plan.colwise().sum().transpose();
  const double missing = ea.sum();
  if (missing > 0) plan += ea * eb.transpose() / missing;
  const double primal = (plan.array() * cost.array()).sum();
  // Dual lower bound: c-transforms make (f, g) feasible.
  for (int j = 0; j < m; ++j) g[j] = (cost.col(j) - f).minCoeff();
  for (int i = 0; i < n; ++i) f[i] = (cost.row(i).transpose() - g).minCoeff();
  const double dual = a.masses.dot(f) + b.masses.dot(g);
  res.value = std::sqrt(std::max(0.0, primal));
  res.lower_bound = std::sqrt(std::max(0.0, std::min(dual, primal)));
  return res;
}

}  // namespace

TransportResult wasserstein2(const EmbeddedCloud& a, const EmbeddedCloud& b, int exact_limit) {
  a.validate();
  b.validate();
  if (a.dimension() != b.dimension()) throw Error(ErrorKind::dimension, "clouds live in different dimensions");
  if (a.size() == b.size() && a.size() <= exact_limit && a.uniform() && b.uniform()) {
    const Eigen::MatrixXd cost = squared_distances(a.points, b.points);
    const auto col = optimal_assignment(cost);
    double total = 0.0;
    for (int i = 0; i < a.size(); ++i) total += (a.points.row(i) - b.points.row(col[i])).squaredNorm();
    TransportResult res;
    res.value = res.lower_bound = std::sqrt(total / a.size());
    res.exact = true;
    return res;
  }
  return entropic(a, b);
}

Alignment align_embeddings(const EmbeddedCloud& a, const EmbeddedCloud& b) {
  a.validate();
  if (a.dimension() != b.dimension() || a.size() != b.size())
    throw Error(ErrorKind::dimension, "aligned clouds need the same shape");
  const Eigen::MatrixXd h = a.points.transpose() * a.masses.asDiagonal() * b.points;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Alignment out;
  out.rotation = svd.matrixV() * svd.matrixU().transpose();
  const Eigen::VectorXd s = svd.singularValues();
  out.ambiguous = s.size() > 0 && !(s.minCoeff() > 1e-12 * std::max(1e-300, s.maxCoeff()));
  out.aligned = a;
  out.aligned.points = a.points * out.rotation.transpose();
  out.residual = std::sqrt((a.masses.asDiagonal() * (out.aligned.points - b.points).rowwise().squaredNorm()).sum());
  return out;
}

// ---------------------------------------------------------------- csv

void write_cloud_csv(std::ostream& out, const EmbeddedCloud& cloud, bool with_masses) {
  const auto old = out.precision(17);
  for (int j = 0; j < cloud.dimension(); ++j) out << (j ? "," : "") << 'z' << (j + 1);
  if (with_masses) out << ",mass";
  out << '\n';
  for (int i = 0; i < cloud.size(); ++i) {
    for (int j = 0; j < cloud.dimension(); ++j) out << (j ? "," : "") << cloud.points(i, j);
    if (with_masses) out << ',' << cloud.masses[i];
    out << '\n';
  }
  out.precision(old);
}

namespace {

bool parse_row(const std::string& line, std::vector<double>& row) {
  row.clear();
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    if (b == std::string::npos) return false;
    const std::string t = cell.substr(b, e - b + 1);
    std::size_t used = 0;
    try {
      row.push_back(std::stod(t, &used));
    } catch (const std::exception&) {
      return false;
    }
    if (used != t.size()) return false;
  }
  return !row.empty();
}

}  // namespace

EmbeddedCloud read_cloud_csv(std::istream& in, bool has_masses) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::vector<double> row;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!parse_row(line, row)) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw Error(ErrorKind::io, "cannot parse CSV line " + std::to_string(line_no));
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorKind::io, "CSV line " + std::to_string(line_no) + " has a different column count");
    rows.push_back(row);
  }
  if (rows.empty()) throw Error(ErrorKind::io, "CSV contains no data rows");
  const int cols = static_cast<int>(rows.front().size()) - (has_masses ? 1 : 0);
  if (cols < 1) throw Error(ErrorKind::io, "CSV has no coordinate columns");
  Eigen::MatrixXd pts(rows.size(), cols);
  Eigen::VectorXd mass(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < cols; ++j) pts(i, j) = rows[i][j];
    mass[i] = has_masses ? rows[i][cols] : 1.0;
  }
  EmbeddedCloud c;
  c.points = std::move(pts);
  c.masses = mass / mass.sum();
  return c;
}

}  // namespace conespec
