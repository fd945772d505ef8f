#include "doctest.h"

#include "conespec/embedding.hpp"
#include "conespec/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace conespec;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd rotation(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = z(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1;
  return q;
}

Eigen::MatrixXd random_matrix(int n, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = z(rng);
  return a;
}

MixtureModel gaussian_pair(double gamma) {
  return MixtureModel(Domain::interval(-12.0, gamma + 12.0),
                      {std::make_shared<GaussianComponent>(Eigen::Vector2d(0, 0), 1.0, 1),
                       std::make_shared<GaussianComponent>(Eigen::Vector2d(gamma, 0), 1.0, 1)},
                      {0.5, 0.5});
}

// Three tight clusters on the axes of R^3, slightly jittered.
EmbeddedCloud axis_clusters(int per, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 0.02);
  Eigen::MatrixXd p(3 * per, 3);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < per; ++i) {
      p.row(c * per + i) << z(rng), z(rng), z(rng);
      p(c * per + i, c) += 1.5;
    }
  return EmbeddedCloud::uniform_cloud(p);
}

}  // namespace

TEST_CASE("embedding of two separated clusters takes two orthogonal values") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  Eigen::MatrixXd p(300, 2);
  for (int i = 0; i < 300; ++i) p.row(i) << u(rng) + (i < 150 ? 0.0 : 2.0), u(rng);
  const auto g = kernelized_weights(p, 0.1, KernelProfile::tent(2));
  REQUIRE(g.components == 2);
  const auto f = discrete_embedding(g, 2);
  CHECK(f.normalization == EmbeddedCloud::Normalization::empirical_l2);
  for (int j = 0; j < 2; ++j) CHECK(f.points.col(j).squaredNorm() / 300 == doctest::Approx(1.0).epsilon(1e-8));
  for (int i = 1; i < 150; ++i) CHECK((f.points.row(i) - f.points.row(0)).norm() < 1e-8);
  for (int i = 151; i < 300; ++i) CHECK((f.points.row(i) - f.points.row(150)).norm() < 1e-8);
  CHECK(std::abs(f.points.row(0).dot(f.points.row(150))) < 1e-8);
  CHECK_THROWS_AS(discrete_embedding(g, 1), Error);
}

TEST_CASE("embedding distances are invariant under rigid motions of the input") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd p(300, 2);
  for (int i = 0; i < 300; ++i) p.row(i) << u(rng) * 0.4 + (i % 2) * 0.6, u(rng);
  const Eigen::MatrixXd q = (p * rotation(2, 8).transpose()).rowwise() + Eigen::RowVector2d(3.0, -1.0);
  const auto k = KernelProfile::tent(2);
  const auto a = discrete_embedding(kernelized_weights(p, 0.25, k), 2);
  const auto b = discrete_embedding(kernelized_weights(q, 0.25, k), 2);
  double worst = 0.0;
  for (int i = 0; i < 300; i += 7)
    for (int j = 0; j < 300; j += 11)
      worst = std::max(worst, std::abs((a.points.row(i) - a.points.row(j)).norm() -
                                       (b.points.row(i) - b.points.row(j)).norm()));
  CHECK(worst < 1e-7);
}

TEST_CASE("gaussian pair embedding has a cone structure") {
  const auto m = gaussian_pair(6.0);
  const auto s = sample(m, 2000, 7);
  // The default scale leaves the tails disconnected at this n.
  const double eps = 0.5;
  CHECK(connecting_epsilon(s.ambient) < eps);
  const auto g = kernelized_weights(s.ambient, eps, KernelProfile::tent(1));
  REQUIRE(g.components == 1);
  const auto f = discrete_embedding(g, 2);
  const auto found = detect_cone_structure(f, 2, {kPi / 8}, {0.5});
  REQUIRE(found[0].detected);
  CHECK(found[0].cones.delta <= 0.05);
  CHECK(found[0].cones.delta == doctest::Approx(1.0 / 2000).epsilon(1e-12));
  const auto again = verify_cone_structure(f, found[0].cones.basis, kPi / 8, 0.5);
  CHECK(again.delta == found[0].cones.delta);
}

TEST_CASE("F^Q rows") {
  const auto m = gaussian_pair(4.0);
  const auto s = sample(m, 500, 1);
  const auto f = fq_embedding(m, s.intrinsic);
  CHECK(f.points.rowwise().norm().minCoeff() >= 1.0 / std::sqrt(m.w_max()) - 1e-10);

  const Domain d = Domain::interval(0, 1);
  const MixtureModel disjoint(d, {UniformComponent::on_interval(0, 0.5), UniformComponent::on_interval(0.5, 1)},
                              {0.3, 0.7});
  const auto g = fq_embedding(disjoint, {Point(0.2, 0), Point(0.8, 0)});
  CHECK((g.points.row(0) - Eigen::RowVector2d(1 / std::sqrt(0.3), 0)).norm() < 1e-12);
  CHECK((g.points.row(1) - Eigen::RowVector2d(0, 1 / std::sqrt(0.7))).norm() < 1e-12);

  const MixtureModel same(d, {UniformComponent::on_interval(0, 1), UniformComponent::on_interval(0, 1)}, {0.5, 0.5});
  const auto h = fq_embedding(same, {Point(0.1, 0), Point(0.9, 0)});
  CHECK((h.points.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("cone verification") {
  const Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(2, 2);
  const double sigma = kPi / 8, r = 0.5;
  Eigen::MatrixXd on_axes(2, 2);
  on_axes << 2 * r, 0, 0, 2 * r;
  CHECK(verify_cone_structure(EmbeddedCloud::uniform_cloud(on_axes), basis, sigma, r).delta == 0.0);
  CHECK(verify_cone_structure(EmbeddedCloud::uniform_cloud(Eigen::MatrixXd::Zero(1, 2)), basis, sigma, r).delta == 1.0);

  // Half on 2 e_1, half exactly at angle sigma from e_2.
  Eigen::MatrixXd p(1000, 2);
  for (int i = 0; i < 500; ++i) p.row(i) << 2.0, 0.0;
  for (int i = 500; i < 1000; ++i) p.row(i) << 2.0 * std::sin(sigma), 2.0 * std::cos(sigma);
  const auto edge = verify_cone_structure(EmbeddedCloud::uniform_cloud(p), basis, sigma, r);
  const double c = std::cos(sigma);
  // The boundary point counts as outside whenever rounding puts it on or outside the cap.
  if (p.row(999).dot(basis.col(1)) <= p.row(999).norm() * c) CHECK(edge.delta == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(edge.per_cone_mass[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(edge.delta == doctest::Approx(1.0 - edge.per_cone_mass[0] - edge.per_cone_mass[1]).epsilon(1e-12));

  CHECK_THROWS_AS(verify_cone_structure(EmbeddedCloud::uniform_cloud(on_axes), basis, kPi / 4, r), Error);
  CHECK_THROWS_AS(verify_cone_structure(EmbeddedCloud::uniform_cloud(on_axes), 2 * basis, sigma, r), Error);
}

TEST_CASE("cone verification is rotation invariant") {
  const auto cloud = axis_clusters(100, 2);
  const Eigen::MatrixXd q = rotation(3, 4);
  EmbeddedCloud rotated = cloud;
  rotated.points = cloud.points * q.transpose();
  const Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(3, 3);
  for (double sigma : {0.01, 0.03, 0.2}) {
    const double a = verify_cone_structure(cloud, basis, sigma, 1.0).delta;
    const double b = verify_cone_structure(rotated, q * basis, sigma, 1.0).delta;
    CHECK(std::abs(a - b) <= 1e-12);
  }
}

TEST_CASE("cone detection") {
  // Antipodal clusters cannot be split into orthogonal cones.
  Eigen::MatrixXd p(200, 2);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 0.01);
  for (int i = 0; i < 200; ++i) p.row(i) << (i < 100 ? 1.0 : -1.0) + z(rng), z(rng);
  const auto anti = detect_cone_structure(EmbeddedCloud::uniform_cloud(p), 2, {kPi / 8}, {0.5});
  CHECK((!anti[0].detected || anti[0].cones.delta >= 0.5));

  const auto cloud = axis_clusters(100, 6);
  const auto base = detect_cone_structure(cloud, 3, {kPi / 16, kPi / 8}, {0.0, 0.5, 1.0, 2.0});
  for (const auto& c : base) {
    if (c.r < 1.4) {
      REQUIRE(c.detected);
      CHECK(c.cones.delta == 0.0);
    } else {
      CHECK_FALSE(c.detected);
    }
    if (c.detected)
      CHECK(verify_cone_structure(cloud, c.cones.basis, c.sigma, c.r).delta == c.cones.delta);
  }
  // Only the smallest sigma with the largest passing r survives.
  int pareto = 0;
  for (const auto& c : base) {
    if (c.pareto) {
      ++pareto;
      CHECK(c.sigma == doctest::Approx(kPi / 16));
      CHECK(c.r == 1.0);
    }
  }
  CHECK(pareto == 1);

  EmbeddedCloud rotated = cloud;
  const Eigen::MatrixXd q = rotation(3, 10);
  rotated.points = cloud.points * q.transpose();
  const auto rot = detect_cone_structure(rotated, 3, {kPi / 16, kPi / 8}, {0.0, 0.5, 1.0, 2.0});
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(rot[i].detected == base[i].detected);
    if (base[i].detected) CHECK(std::abs(rot[i].cones.delta - base[i].cones.delta) <= 1e-9);
  }
}

TEST_CASE("nearest orthonormal basis") {
  const Eigen::MatrixXd q = rotation(4, 3);
  const auto same = nearest_orthonormal_basis(q);
  CHECK((same.basis - q).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXd v(2, 2);
  v << 1.0, 0.1, 0.0, std::sqrt(0.99);
  const auto fit = nearest_orthonormal_basis(v);
  // 2x2 oracle: (V^T V)^(-1/2) for the Gram [[1, c], [c, 1]] is
  // [[a, b], [b, a]] with a = (1/sqrt(1+c) + 1/sqrt(1-c))/2, b = (1/sqrt(1+c) - 1/sqrt(1-c))/2.
  const double c = 0.1;
  const double a = 0.5 * (1 / std::sqrt(1 + c) + 1 / std::sqrt(1 - c));
  const double b = 0.5 * (1 / std::sqrt(1 + c) - 1 / std::sqrt(1 - c));
  Eigen::MatrixXd s(2, 2);
  s << a, b, b, a;
  CHECK((fit.basis - v * s).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(fit.bound);
  CHECK(*fit.bound == doctest::Approx(std::sqrt(2.0) * (1 / std::sqrt(0.8) - 1)));
  CHECK(*fit.bound == doctest::Approx(0.1661).epsilon(1e-3));
  CHECK(fit.max_deviation <= *fit.bound);
  CHECK_FALSE(fit.warning);

  Eigen::MatrixXd dep(2, 2);
  dep << 1, -1, 0, 0;
  CHECK_THROWS_AS(nearest_orthonormal_basis(dep), Error);

  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> pick(1, 6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int held = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = pick(rng);
    const double target = 0.1 / n;
    // Perturb an orthonormal frame and renormalize until the coherence fits.
    Eigen::MatrixXd w = rotation(n, 100 + trial);
    Eigen::MatrixXd e(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) e(i, j) = u(rng);
    double scale = target;
    Eigen::MatrixXd cand;
    for (;;) {
      cand = (w + scale * e).colwise().normalized();
      const Eigen::MatrixXd gram = cand.transpose() * cand - Eigen::MatrixXd::Identity(n, n);
      if (gram.cwiseAbs().maxCoeff() <= target) break;
      scale *= 0.5;
    }
    const auto f = nearest_orthonormal_basis(cand);
    REQUIRE(f.bound);
    CHECK(((f.basis.transpose() * f.basis) - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    if (f.max_deviation <= *f.bound + 1e-15) ++held;
  }
  CHECK(held == 1000);
}

TEST_CASE("wasserstein distance") {
  std::mt19937_64 rng(77);
  const auto a = EmbeddedCloud::uniform_cloud(random_matrix(50, 3, rng));
  CHECK(wasserstein2(a, a).value == 0.0);

  Eigen::MatrixXd x(1, 2), y(1, 2);
  x << 1, 2;
  y << 4, 6;
  CHECK(wasserstein2(EmbeddedCloud::uniform_cloud(x), EmbeddedCloud::uniform_cloud(y)).value ==
        doctest::Approx(5.0).epsilon(1e-14));

  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd p = random_matrix(4, 2, rng), q = random_matrix(4, 2, rng);
    std::vector<int> perm{0, 1, 2, 3};
    double best = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (int i = 0; i < 4; ++i) c += (p.row(i) - q.row(perm[i])).squaredNorm();
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const auto r = wasserstein2(EmbeddedCloud::uniform_cloud(p), EmbeddedCloud::uniform_cloud(q));
    CHECK(r.exact);
    CHECK(r.value == doctest::Approx(std::sqrt(best / 4)).epsilon(1e-10));
  }

  // Metric properties on random triples.
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = EmbeddedCloud::uniform_cloud(random_matrix(30, 2, rng));
    const auto q = EmbeddedCloud::uniform_cloud(random_matrix(30, 2, rng));
    const auto s = EmbeddedCloud::uniform_cloud(random_matrix(30, 2, rng));
    const double pq = wasserstein2(p, q).value, qp = wasserstein2(q, p).value;
    CHECK(std::abs(pq - qp) < 1e-12);
    CHECK(pq <= wasserstein2(p, s).value + wasserstein2(s, q).value + 1e-9);
    // Zero for a permuted copy.
    EmbeddedCloud shuffled = p;
    shuffled.points = p.points.colwise().reverse();
    CHECK(wasserstein2(p, shuffled).value < 1e-12);
  }

  // Entropic path brackets the exact value.
  const auto p = EmbeddedCloud::uniform_cloud(random_matrix(80, 2, rng));
  const auto q = EmbeddedCloud::uniform_cloud(random_matrix(80, 2, rng));
  const double exact = wasserstein2(p, q).value;
  const auto approx = wasserstein2(p, q, 0);
  CHECK_FALSE(approx.exact);
  CHECK(approx.value >= exact - 1e-9);
  CHECK(approx.lower_bound <= exact + 1e-9);
  CHECK(approx.value - exact < 0.02 * exact);

  // Unequal sizes go through the entropic path.
  const auto small = EmbeddedCloud::uniform_cloud(p.points.topRows(40));
  const auto both = wasserstein2(small, q);
  CHECK(both.lower_bound <= both.value);

  CHECK_THROWS_AS(wasserstein2(a, p), Error);
}

TEST_CASE("procrustes alignment") {
  std::mt19937_64 rng(9);
  const auto a = EmbeddedCloud::uniform_cloud(random_matrix(40, 3, rng));
  const Eigen::MatrixXd q = rotation(3, 21);
  EmbeddedCloud b = a;
  b.points = a.points * q.transpose();
  const auto al = align_embeddings(a, b);
  CHECK((al.rotation - q).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(al.residual < 1e-10);

  const auto id = align_embeddings(a, a);
  CHECK((id.rotation - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);

  EmbeddedCloud mirrored = a;
  mirrored.points.col(1) *= -1;
  const auto refl = align_embeddings(a, mirrored);
  CHECK(refl.rotation.determinant() == doctest::Approx(-1.0));
  CHECK(refl.residual < 1e-10);

  EmbeddedCloud flat = a;
  flat.points.col(2).setZero();
  CHECK(align_embeddings(flat, flat).ambiguous);
}

TEST_CASE("cone structure survives small transport perturbations") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> z;
  const auto base = axis_clusters(60, 8);
  const Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(3, 3);
  const double sigma = 0.1, r = 1.0;
  const auto mu1 = verify_cone_structure(base, basis, sigma, r);
  const int n_cones = 3;
  for (int trial = 0; trial < 50; ++trial) {
    const double s = 0.05 + 0.1 * (trial % 5) / 5.0;
    const double t = 0.1 + 0.05 * (trial % 7);
    const double budget = r * t * std::sin(s) / std::sqrt(n_cones);
    // Random displacement rescaled to the budget (W2 <= rms displacement).
    Eigen::MatrixXd d = random_matrix(base.size(), 3, rng);
    if (trial % 3 == 0) d.bottomRows(base.size() - 5).setZero();  // a few large moves
    d *= budget / std::sqrt(d.rowwise().squaredNorm().mean());
    EmbeddedCloud moved = base;
    moved.points += d;
    const auto w = wasserstein2(base, moved).value;
    REQUIRE(w <= budget * (1 + 1e-12));
    const auto mu2 = verify_cone_structure(moved, basis, sigma + s, r * (1 - std::sin(s)));
    CHECK(mu2.delta <= mu1.delta + t * t + 1e-9);
  }
}

TEST_CASE("cloud csv round trip") {
  std::mt19937_64 rng(4);
  EmbeddedCloud a = EmbeddedCloud::uniform_cloud(random_matrix(7, 3, rng));
  a.masses << 0.1, 0.2, 0.1, 0.2, 0.1, 0.2, 0.1;
  std::stringstream buf;
  write_cloud_csv(buf, a);
  const auto b = read_cloud_csv(buf, true);
  CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.masses - b.masses).cwiseAbs().maxCoeff() < 1e-15);

  std::stringstream bad("1,2\n3\n");
  CHECK_THROWS_AS(read_cloud_csv(bad, false), Error);
}
