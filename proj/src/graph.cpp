#include "conespec/graph.hpp"

#include "conespec/error.hpp"
#include "conespec/parallel.hpp"
#include "conespec/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <unordered_map>

namespace conespec {

double sphere_area(int m) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m);
}

namespace {

// Integral of f over [0, 1]; the shapes are polynomial there, so 32 Gauss
// nodes are exact to rounding.
template <class F>
double radial_integral(F f) {
  std::vector<double> x, w;
  gauss_legendre(32, x, w);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += 0.5 * w[i] * f(0.5 * (x[i] + 1.0));
  return s;
}

}  // namespace

KernelProfile::KernelProfile(Shape shape, int m) : shape_(shape), m_(m) {
  if (m < 1) throw Error(ErrorKind::invalid_argument, "kernel dimension must be positive");
  const double raw_mass = sphere_area(m) * radial_integral([&](double t) { return shape_value(t) * std::pow(t, m - 1); });
  c_ = 1.0 / raw_mass;
  alpha_ = c_ * radial_integral([&](double t) { return shape_value(t) * std::pow(t, m + 1); });
  sigma_ = sphere_area(m) / m * alpha_;
}

KernelProfile KernelProfile::tent(int m) { return KernelProfile(Shape::tent, m); }
KernelProfile KernelProfile::indicator(int m) { return KernelProfile(Shape::indicator, m); }

double KernelProfile::shape_value(double t) const {
  if (t < 0) t = -t;
  if (t >= 1.0) return 0.0;
  return shape_ == Shape::tent ? 1.0 - t : 1.0;
}

double KernelProfile::eta(double t) const { return c_ * shape_value(t); }

double KernelProfile::eta_eps(double r, double eps) const { return eta(r / eps) / std::pow(eps, m_); }

double KernelProfile::mass() const {
  return sphere_area(m_) * radial_integral([&](double t) { return eta(t) * std::pow(t, m_ - 1); });
}

std::vector<std::pair<int, int>> neighbor_pairs(const Eigen::MatrixXd& points, double eps) {
  if (!(eps > 0) || !std::isfinite(eps)) throw Error(ErrorKind::invalid_argument, "epsilon must be positive");
  const int n = static_cast<int>(points.rows());
  const int d = static_cast<int>(points.cols());
  if (!points.allFinite()) throw Error(ErrorKind::invalid_argument, "points must be finite");
  const double eps2 = eps * eps;
  std::vector<std::vector<int>> found(n);

  if (d <= 3 && n > 0) {
    const Eigen::RowVectorXd lo = points.colwise().minCoeff();
    constexpr std::int64_t kOffset = 1 << 20;
    auto bin_of = [&](int i, int axis) {
      return static_cast<std::int64_t>(std::floor((points(i, axis) - lo[axis]) / eps));
    };
    for (int a = 0; a < d; ++a) {
      const double span = (points.col(a).maxCoeff() - lo[a]) / eps;
      if (span >= kOffset - 2) throw Error(ErrorKind::invalid_argument, "point cloud too wide for epsilon binning");
    }
    auto key = [&](const std::int64_t* b) {
      std::uint64_t k = 0;
      for (int a = 0; a < 3; ++a) k = (k << 21) | static_cast<std::uint64_t>((a < d ? b[a] : 0) + kOffset);
      return k;
    };
    std::unordered_map<std::uint64_t, std::vector<int>> bins;
    for (int i = 0; i < n; ++i) {
      std::int64_t b[3] = {0, 0, 0};
      for (int a = 0; a < d; ++a) b[a] = bin_of(i, a);
      bins[key(b)].push_back(i);
    }
    const int reach[3] = {1, d > 1 ? 1 : 0, d > 2 ? 1 : 0};
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (int i = static_cast<int>(begin); i < static_cast<int>(end); ++i) {
        std::int64_t b[3] = {0, 0, 0};
        for (int a = 0; a < d; ++a) b[a] = bin_of(i, a);
        for (int dx = -reach[0]; dx <= reach[0]; ++dx) {
          for (int dy = -reach[1]; dy <= reach[1]; ++dy) {
            for (int dz = -reach[2]; dz <= reach[2]; ++dz) {
              const std::int64_t nb[3] = {b[0] + dx, b[1] + dy, b[2] + dz};
              const auto it = bins.find(key(nb));
              if (it == bins.end()) continue;
              for (int j : it->second) {
                if (j > i && (points.row(i) - points.row(j)).squaredNorm() < eps2) found[i].push_back(j);
              }
            }
          }
        }
        std::sort(found[i].begin(), found[i].end());
      }
    });
  } else {
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (int i = static_cast<int>(begin); i < static_cast<int>(end); ++i) {
        for (int j = i + 1; j < n; ++j) {
          if ((points.row(i) - points.row(j)).squaredNorm() < eps2) found[i].push_back(j);
        }
      }
    });
  }
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j : found[i]) pairs.emplace_back(i, j);
  }
  return pairs;
}

namespace {

struct Neighbourhood {
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> kernel;  // eta_eps on each pair
  Eigen::VectorXd degree;      // self term included
};

Neighbourhood neighbourhood(const Eigen::MatrixXd& points, double eps, const KernelProfile& kernel) {
  if (points.rows() < 1) throw Error(ErrorKind::invalid_argument, "empty point cloud");
  Neighbourhood nb;
  nb.pairs = neighbor_pairs(points, eps);
  nb.kernel.resize(nb.pairs.size());
  nb.degree = Eigen::VectorXd::Constant(points.rows(), kernel.eta_eps(0.0, eps));
  for (std::size_t p = 0; p < nb.pairs.size(); ++p) {
    const auto [i, j] = nb.pairs[p];
    nb.kernel[p] = kernel.eta_eps((points.row(i) - points.row(j)).norm(), eps);
    nb.degree[i] += nb.kernel[p];
    nb.degree[j] += nb.kernel[p];
  }
  for (Eigen::Index i = 0; i < nb.degree.size(); ++i) {
    if (!(nb.degree[i] > 0))
      throw Error(ErrorKind::isolated_vertex, "vertex " + std::to_string(i) + " has zero degree");
  }
  return nb;
}

int find_root(std::vector<int>& parent, int v) {
  while (parent[v] != v) v = parent[v] = parent[parent[v]];
  return v;
}

void assemble(GraphLaplacian& g, const Neighbourhood& nb, const Eigen::VectorXd& self, const std::vector<double>& w) {
  const int n = static_cast<int>(nb.degree.size());
  std::vector<Triplet> wt, lt;
  wt.reserve(n + w.size());
  lt.reserve(n + w.size());
  g.degrees = self;
  for (int i = 0; i < n; ++i) wt.push_back({i, i, self[i]});
  for (std::size_t p = 0; p < w.size(); ++p) {
    const auto [i, j] = nb.pairs[p];
    wt.push_back({i, j, w[p]});
    lt.push_back({i, j, -w[p]});
    g.degrees[i] += w[p];
    g.degrees[j] += w[p];
  }
  // D - W: the self-loop cancels on the diagonal.
  for (int i = 0; i < n; ++i) lt.push_back({i, i, g.degrees[i] - self[i]});
  g.weights = SymmetricSparse::from_triplets(n, wt);
  g.laplacian = SymmetricSparse::from_triplets(n, lt);

  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t p = 0; p < w.size(); ++p) {
    if (!(w[p] > 0)) continue;
    const int a = find_root(parent, nb.pairs[p].first), b = find_root(parent, nb.pairs[p].second);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  g.component_of.assign(n, -1);
  std::vector<int> label(n, -1);
  g.components = 0;
  for (int i = 0; i < n; ++i) {
    const int r = find_root(parent, i);
    if (label[r] < 0) label[r] = g.components++;
    g.component_of[i] = label[r];
  }
}

}  // namespace

Eigen::VectorXd degree_function(const Eigen::MatrixXd& points, double eps, const KernelProfile& kernel) {
  return neighbourhood(points, eps, kernel).degree;
}

GraphLaplacian kernelized_weights(const Eigen::MatrixXd& points, double eps, const KernelProfile& kernel) {
  const Neighbourhood nb = neighbourhood(points, eps, kernel);
  GraphLaplacian g;
  g.epsilon = eps;
  g.kernel = kernel;
  g.variant = GraphLaplacian::Variant::kernelized;
  g.kde = nb.degree;
  const double scale = 2.0 / (kernel.sigma() * eps * eps);
  const Eigen::VectorXd root = nb.degree.cwiseSqrt();
  Eigen::VectorXd self = scale * kernel.eta_eps(0.0, eps) * nb.degree.cwiseInverse();
  std::vector<double> w(nb.pairs.size());
  for (std::size_t p = 0; p < w.size(); ++p) {
    const auto [i, j] = nb.pairs[p];
    w[p] = scale * nb.kernel[p] / (root[i] * root[j]);
  }
  assemble(g, nb, self, w);
  return g;
}

GraphLaplacian gamma_laplacian(const Eigen::MatrixXd& points, double eps, const KernelProfile& kernel, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorKind::invalid_argument, "gamma must lie in [0, 1]");
  const Neighbourhood nb = neighbourhood(points, eps, kernel);
  GraphLaplacian g;
  g.epsilon = eps;
  g.kernel = kernel;
  g.variant = GraphLaplacian::Variant::gamma;
  g.gamma = gamma;
  g.kde = nb.degree;
  const Eigen::VectorXd power = nb.degree.array().pow(gamma);
  Eigen::VectorXd self = kernel.eta_eps(0.0, eps) * power.array().square().inverse();
  std::vector<double> w(nb.pairs.size());
  for (std::size_t p = 0; p < w.size(); ++p) {
    const auto [i, j] = nb.pairs[p];
    w[p] = nb.kernel[p] / (power[i] * power[j]);
  }
  assemble(g, nb, self, w);
  return g;
}

Eigen::MatrixXd GraphLaplacian::component_indicators() const {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(size(), components);
  for (int i = 0; i < size(); ++i) y(i, component_of[i]) = 1.0;
  return y;
}

EigenRequest GraphLaplacian::request(int k) const {
  EigenRequest req;
  req.stiffness = &laplacian;
  req.mass = variant == Variant::gamma ? degrees : Eigen::VectorXd::Ones(size());
  req.k = k;
  const Eigen::MatrixXd ind = component_indicators();
  req.null_space = ind.leftCols(std::min<Eigen::Index>(ind.cols(), k));
  return req;
}

Eigen::MatrixXd GraphLaplacian::dense_operator() const {
  Eigen::MatrixXd a = laplacian.to_dense();
  if (variant == Variant::gamma) a = degrees.cwiseInverse().asDiagonal() * a;
  return a;
}

SymmetricSparse GraphLaplacian::symmetric_conjugate() const {
  const Eigen::VectorXd s = degrees.cwiseSqrt().cwiseInverse();
  std::vector<Triplet> t;
  const auto& rs = laplacian.row_start();
  const auto& cs = laplacian.col_index();
  const auto& vs = laplacian.values();
  for (int i = 0; i < size(); ++i) {
    for (int p = rs[i]; p < rs[i + 1]; ++p) t.push_back({i, cs[p], s[i] * vs[p] * s[cs[p]]});
  }
  return SymmetricSparse::from_triplets(size(), t);
}

double epsilon_exponent(int m) {
  if (m < 1) throw Error(ErrorKind::invalid_argument, "intrinsic dimension must be positive");
  if (m == 1) return 1.0;
  if (m == 2) return 0.75;
  return 1.0 / m;
}

double default_epsilon(double n, int m, double multiplier) {
  if (!(n >= 2)) throw Error(ErrorKind::invalid_argument, "default epsilon needs n >= 2");
  if (!(multiplier > 0)) throw Error(ErrorKind::invalid_argument, "epsilon multiplier must be positive");
  const double ln = std::log(n);
  return multiplier * std::sqrt(std::pow(ln, epsilon_exponent(m)) / std::pow(n, 1.0 / m));
}

double connecting_epsilon(const Eigen::MatrixXd& points) {
  const int n = static_cast<int>(points.rows());
  if (n < 1) throw Error(ErrorKind::invalid_argument, "empty point cloud");
  if (n == 1) return 0.0;
  const Eigen::RowVectorXd lo = points.colwise().minCoeff(), hi = points.colwise().maxCoeff();
  const double diameter = (hi - lo).norm();
  if (!(diameter > 0)) return 0.0;
  // Grow the radius until the candidate graph connects, then run Kruskal on it.
  double eps = std::max(diameter * 1e-3, diameter / n);
  for (;;) {
    const double reach = std::min(eps, diameter) * (1 + 1e-12) + 1e-300;
    auto pairs = neighbor_pairs(points, reach);
    std::vector<double> len(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) len[p] = (points.row(pairs[p].first) - points.row(pairs[p].second)).norm();
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return len[a] < len[b]; });
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    int merged = 0;
    double longest = 0.0;
    for (std::size_t p : order) {
      const int a = find_root(parent, pairs[p].first), b = find_root(parent, pairs[p].second);
      if (a == b) continue;
      parent[std::max(a, b)] = std::min(a, b);
      longest = len[p];
      if (++merged == n - 1) return longest;
    }
    if (eps >= diameter) throw Error(ErrorKind::invalid_argument, "non-finite coordinates");
    eps *= 2.0;
  }
}

}  // namespace conespec
