#include "doctest.h"

#include "conespec/error.hpp"
#include "conespec/graph.hpp"
#include "conespec/mixture.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace conespec;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd uniform_points(int n, int d, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd p(n, d);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < d; ++a) p(i, a) = u(rng);
  return p;
}

std::vector<std::pair<int, int>> brute_pairs(const Eigen::MatrixXd& p, double eps) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < p.rows(); ++i)
    for (int j = i + 1; j < p.rows(); ++j)
      if ((p.row(i) - p.row(j)).norm() < eps) out.emplace_back(i, j);
  return out;
}

Eigen::VectorXd dense_spectrum(const SymmetricSparse& a) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a.to_dense(), Eigen::EigenvaluesOnly).eigenvalues();
}

}  // namespace

TEST_CASE("kernel profiles") {
  const auto t1 = KernelProfile::tent(1);
  CHECK(t1.normalization() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(t1.alpha() == doctest::Approx(1.0 / 12).epsilon(1e-12));
  CHECK(t1.sigma() == doctest::Approx(1.0 / 6).epsilon(1e-12));
  const auto t2 = KernelProfile::tent(2);
  CHECK(t2.normalization() == doctest::Approx(3 / kPi).epsilon(1e-12));
  CHECK(t2.alpha() == doctest::Approx(0.0477464829275686007).epsilon(1e-12));
  CHECK(t2.sigma() == doctest::Approx(kPi * t2.alpha()).epsilon(1e-12));
  const auto i2 = KernelProfile::indicator(2);
  CHECK(i2.alpha() == doctest::Approx(0.0795774715459476679).epsilon(1e-12));
  CHECK_FALSE(i2.lipschitz());
  for (int m = 1; m <= 4; ++m) {
    for (const auto& k : {KernelProfile::tent(m), KernelProfile::indicator(m)}) {
      CHECK(std::abs(k.mass() - 1.0) < 1e-8);
      CHECK(k.alpha() > 0);
      CHECK(k.eta(1.0) == 0.0);
      CHECK(k.eta(1.5) == 0.0);
      for (double t = 0; t < 1; t += 0.01) CHECK(k.eta(t + 0.01) <= k.eta(t));
    }
  }
  CHECK(sphere_area(1) == doctest::Approx(2.0));
  CHECK(sphere_area(3) == doctest::Approx(4 * kPi));
  CHECK_THROWS_AS(KernelProfile::tent(0), Error);
}

TEST_CASE("binned neighbour search matches a direct scan") {
  for (int d = 1; d <= 4; ++d) {
    const auto p = uniform_points(500, d, 7 + d);
    for (double eps : {0.03, 0.1, 0.35}) CHECK(neighbor_pairs(p, eps) == brute_pairs(p, eps));
  }
  // Clustered and negative coordinates.
  Eigen::MatrixXd q = uniform_points(300, 2, 3, -5.0, -4.9);
  q.bottomRows(100).array() += 20.0;
  CHECK(neighbor_pairs(q, 0.02) == brute_pairs(q, 0.02));
  CHECK_THROWS_AS(neighbor_pairs(q, 0.0), Error);
}

TEST_CASE("degree function") {
  const auto k = KernelProfile::tent(2);
  Eigen::MatrixXd one(1, 2);
  one << 0.3, 0.4;
  CHECK(degree_function(one, 0.1, k)[0] == doctest::Approx(k.eta(0) / 0.01));
  Eigen::MatrixXd two(2, 2);
  two << 0, 0, 1, 0;
  const auto d = degree_function(two, 0.5, k);
  CHECK(d[0] == doctest::Approx(k.eta(0) / 0.25));
  CHECK(d[1] == doctest::Approx(k.eta(0) / 0.25));
}

TEST_CASE("degree function is a kernel density estimate") {
  const int n = 2000;
  const double eps = 0.05;
  const auto k = KernelProfile::tent(1);

  // Equispaced sample: the estimate is within 0.1 of the density inside.
  Eigen::MatrixXd grid(n, 1);
  for (int i = 0; i < n; ++i) grid(i, 0) = (i + 0.5) / n;
  const auto dg = degree_function(grid, eps, k);
  for (int i = 0; i < n; ++i) {
    if (grid(i, 0) >= 0.1 && grid(i, 0) <= 0.9) CHECK(std::abs(dg[i] / n - 1.0) <= 0.1);
  }

  // i.i.d. sample: binned sums equal direct sums at ten interior probes, and
  // deviations stay within five standard deviations of the estimator.
  const auto p = uniform_points(n, 1, 11);
  const auto d = degree_function(p, eps, k);
  const double sd = std::sqrt(2.0 / 3.0 / (n * eps));
  int probes = 0;
  double mean = 0.0;
  int interior = 0;
  for (int i = 0; i < n; ++i) {
    if (p(i, 0) < 0.1 || p(i, 0) > 0.9) continue;
    mean += d[i] / n;
    ++interior;
    if (probes < 10) {
      double direct = 0.0;
      for (int j = 0; j < n; ++j) direct += k.eta_eps(std::abs(p(i, 0) - p(j, 0)), eps);
      CHECK(d[i] == doctest::Approx(direct).epsilon(1e-12));
      CHECK(std::abs(d[i] / n - 1.0) <= 5 * sd);
      ++probes;
    }
  }
  CHECK(std::abs(mean / interior - 1.0) < 0.02);
}

TEST_CASE("kernelized weights") {
  const auto k = KernelProfile::tent(2);
  Eigen::MatrixXd two(2, 2);
  two << 0, 0, 1, 0;
  const auto g2 = kernelized_weights(two, 0.5, k);
  CHECK(g2.weights.coeff(0, 1) == 0.0);
  CHECK(g2.laplacian.coeff(0, 1) == 0.0);
  CHECK(g2.components == 2);

  const auto p = uniform_points(400, 2, 5);
  const auto g = kernelized_weights(p, 0.15, k);
  const Eigen::MatrixXd w = g.weights.to_dense();
  CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(400);
  CHECK(g.laplacian.multiply(ones).cwiseAbs().maxCoeff() < 1e-10 * g.laplacian.max_abs());
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd v(400);
    for (auto& x : v) x = z(rng);
    CHECK(v.dot(g.laplacian.multiply(v)) >= 0.0);
  }
  // Formula check on one pair.
  const auto pairs = neighbor_pairs(p, 0.15);
  const auto [i, j] = pairs[pairs.size() / 2];
  const double expected = 2 * k.eta_eps((p.row(i) - p.row(j)).norm(), 0.15) /
                          (k.sigma() * 0.15 * 0.15 * std::sqrt(g.kde[i] * g.kde[j]));
  CHECK(g.weights.coeff(i, j) == doctest::Approx(expected).epsilon(1e-14));
  // Sparsity: entries bounded by n times the largest neighbour count.
  std::vector<int> count(400, 1);
  for (const auto& [a, b] : pairs) {
    ++count[a];
    ++count[b];
  }
  CHECK(g.weights.stored_entries() <= 400u * *std::max_element(count.begin(), count.end()));
}

TEST_CASE("graph spectrum on the circle approaches the continuum spectrum") {
  const Domain circle = Domain::unit_circle();
  const MixtureModel m(circle,
                       {UniformComponent::on_arc(circle, 0, 0, kPi), UniformComponent::on_arc(circle, 0, kPi, 2 * kPi)},
                       {0.5, 0.5});
  const auto s = sample(m, 2000, 42);
  const auto g = kernelized_weights(s.ambient, 0.15, KernelProfile::tent(1));
  REQUIRE(g.components == 1);
  auto req = g.request(4);
  const auto r = smallest_eigenpairs(req);
  CHECK(std::abs(r.values[0]) < 1e-10);
  const double expected[3] = {1, 1, 4};
  for (int q = 0; q < 3; ++q) CHECK(r.values[q + 1] == doctest::Approx(expected[q]).epsilon(0.1));
  // Constant first eigenvector.
  CHECK(r.vectors.col(0).maxCoeff() - r.vectors.col(0).minCoeff() < 1e-10);
}

TEST_CASE("spectrum is invariant under permutation of the points") {
  const auto p = uniform_points(300, 2, 9);
  std::vector<int> perm(300);
  for (int i = 0; i < 300; ++i) perm[i] = (i * 7 + 3) % 300;
  Eigen::MatrixXd q(300, 2);
  for (int i = 0; i < 300; ++i) q.row(perm[i]) = p.row(i);
  const auto k = KernelProfile::tent(2);
  const auto a = dense_spectrum(kernelized_weights(p, 0.2, k).laplacian);
  const auto b = dense_spectrum(kernelized_weights(q, 0.2, k).laplacian);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12 * a.cwiseAbs().maxCoeff());
}

TEST_CASE("disconnected graphs have one zero eigenvalue per component") {
  Eigen::MatrixXd p = uniform_points(600, 2, 4, 0.0, 0.3);
  p.block(200, 0, 200, 1).array() += 1.0;
  p.block(400, 1, 200, 1).array() += 1.0;
  const auto g = kernelized_weights(p, 0.1, KernelProfile::tent(2));
  REQUIRE(g.components == 3);
  const auto r = smallest_eigenpairs(g.request(4));
  for (int q = 0; q < 3; ++q) CHECK(std::abs(r.values[q]) < 1e-10);
  CHECK(r.values[3] > 1e-3);
  // The null space is spanned by the component indicators.
  const Eigen::MatrixXd y = g.component_indicators();
  const Eigen::MatrixXd proj = y * (y.transpose() * y).inverse() * y.transpose() * r.vectors.leftCols(3);
  CHECK((proj - r.vectors.leftCols(3)).norm() < 1e-8);
}

TEST_CASE("gamma family") {
  const auto p = uniform_points(60, 2, 21);
  const auto k = KernelProfile::tent(2);
  const double eps = 0.35;
  for (double gamma : {0.0, 0.25, 0.5, 1.0}) {
    const auto g = gamma_laplacian(p, eps, k, gamma);
    const Eigen::MatrixXd a = g.dense_operator();
    CHECK((a * Eigen::VectorXd::Ones(60)).cwiseAbs().maxCoeff() < 1e-12);
    // Random walk eigenvalues equal those of the symmetric conjugate.
    Eigen::VectorXd rw = Eigen::EigenSolver<Eigen::MatrixXd>(a, false).eigenvalues().real();
    std::sort(rw.data(), rw.data() + rw.size());
    const auto sym = dense_spectrum(g.symmetric_conjugate());
    CHECK((rw - sym).cwiseAbs().maxCoeff() < 1e-10);
    const auto r = smallest_eigenpairs(g.request(3));
    CHECK((r.values - sym.head(3)).cwiseAbs().maxCoeff() < 1e-10);
  }
  // gamma = 0: random walk Laplacian of the raw kernel weights.
  const auto g0 = gamma_laplacian(p, eps, k, 0.0);
  Eigen::MatrixXd w(60, 60);
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 60; ++j) w(i, j) = k.eta_eps((p.row(i) - p.row(j)).norm(), eps);
  const Eigen::VectorXd rows = w.rowwise().sum();
  const Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(60, 60) - rows.cwiseInverse().asDiagonal() * w;
  CHECK((g0.dense_operator() - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(gamma_laplacian(p, eps, k, 1.5), Error);
}

TEST_CASE("default epsilon") {
  CHECK(default_epsilon(std::exp(1.0), 2) == doctest::Approx(std::exp(-0.25)).epsilon(1e-14));
  CHECK(default_epsilon(1e4, 2) == doctest::Approx(0.229934098217358790).epsilon(1e-13));
  CHECK(default_epsilon(1e4, 2, 2.0) == doctest::Approx(2 * 0.229934098217358790).epsilon(1e-13));
  for (int m = 1; m <= 4; ++m) {
    for (long n = 8; n < 100000; n = n * 3 / 2) CHECK(default_epsilon(n * 3 / 2, m) < default_epsilon(n, m));
  }
  CHECK(epsilon_exponent(1) == 1.0);
  CHECK(epsilon_exponent(3) == doctest::Approx(1.0 / 3));
  CHECK_THROWS_AS(default_epsilon(1, 2), Error);
}

TEST_CASE("laplacian exports to matrix market") {
  Eigen::MatrixXd p(3, 1);
  p << 0.0, 0.1, 0.5;
  const auto g = kernelized_weights(p, 0.2, KernelProfile::tent(1));
  std::ostringstream out;
  g.laplacian.write_matrix_market(out);
  const std::string s = out.str();
  CHECK(s.rfind("%%MatrixMarket matrix coordinate real symmetric", 0) == 0);
  CHECK(s.find("3 3 3") != std::string::npos);
}

TEST_CASE("connecting epsilon is the spanning-tree bottleneck") {
  for (int d = 1; d <= 3; ++d) {
    std::mt19937_64 rng(40 + d);
    std::normal_distribution<double> z;
    Eigen::MatrixXd p(150, d);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = z(rng);
    // Prim on the dense distance matrix.
    const int n = static_cast<int>(p.rows());
    std::vector<double> best(n, 1e300);
    std::vector<bool> in(n, false);
    best[0] = 0;
    double longest = 0;
    for (int it = 0; it < n; ++it) {
      int u = -1;
      for (int v = 0; v < n; ++v)
        if (!in[v] && (u < 0 || best[v] < best[u])) u = v;
      in[u] = true;
      longest = std::max(longest, best[u]);
      for (int v = 0; v < n; ++v)
        if (!in[v]) best[v] = std::min(best[v], (p.row(u) - p.row(v)).norm());
    }
    const double e = connecting_epsilon(p);
    CHECK(e == doctest::Approx(longest).epsilon(1e-14));
    const auto kernel = KernelProfile::tent(d);
    CHECK(kernelized_weights(p, e * (1 + 1e-9), kernel).components == 1);
  }
  Eigen::MatrixXd one(1, 2);
  one << 0.3, 0.4;
  CHECK(connecting_epsilon(one) == 0.0);
}
