#include "doctest.h"

#include "conespec/continuum.hpp"
#include "conespec/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace conespec;

namespace {

constexpr double kPi = std::numbers::pi;

// Theta for the dumbbell (vartheta 0.01, width 0.1) at resolution 256, from an
// independent scipy finite-volume eigensolve of the same grid.
constexpr double kThetaGood256 = 9.10606618900838;
constexpr double kThetaBad256 = 0.07749326394209373;

using D = DumbbellComponent;

MixtureModel dumbbell(D::Partition part, D::Profile profile = D::Profile::normalized) {
  return MixtureModel(D::make_domain(0.01),
                      {std::make_shared<D>(0.01, 0.1, part, D::Side::left, profile),
                       std::make_shared<D>(0.01, 0.1, part, D::Side::right, profile)},
                      {0.5, 0.5});
}

MixtureModel uniform_interval() {
  return MixtureModel(Domain::interval(0, 1), {UniformComponent::on_interval(0, 0.5), UniformComponent::on_interval(0.5, 1)},
                      {0.5, 0.5});
}

MixtureModel uniform_circle() {
  const Domain d = Domain::unit_circle();
  return MixtureModel(d, {UniformComponent::on_arc(d, 0, 0, kPi), UniformComponent::on_arc(d, 0, kPi, 2 * kPi)},
                      {0.5, 0.5});
}

std::shared_ptr<const GridOperator> unit_grid(int res) {
  return std::make_shared<const GridOperator>(discretize([](const Point&) { return 1.0; }, Domain::interval(0, 1), res));
}

}  // namespace

TEST_CASE("uniform interval spectrum") {
  const auto spec = grid_spectrum(unit_grid(512), 4);
  CHECK(std::abs(spec.eigenvalues[0]) < 1e-10);
  for (int k = 1; k < 4; ++k) CHECK(spec.eigenvalues[k] == doctest::Approx(std::pow(k * kPi, 2)).epsilon(1e-3));
  // Cell-centred Neumann eigenvalues are known in closed form.
  const double h = 1.0 / 512;
  for (int k = 1; k < 4; ++k)
    CHECK(spec.eigenvalues[k] == doctest::Approx(std::pow(2 / h * std::sin(k * kPi * h / 2), 2)).epsilon(1e-9));
  CHECK(spec.residuals.maxCoeff() < 1e-7);
}

TEST_CASE("eigenfunctions are mass-orthonormal") {
  const auto spec = grid_spectrum(unit_grid(700), 5);
  const auto& m = spec.grid->mass;
  const Eigen::MatrixXd g = spec.eigenfunctions.transpose() * m.asDiagonal() * spec.eigenfunctions;
  CHECK((g - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("grid convergence is second order") {
  double err[3];
  const int res[3] = {128, 256, 512};
  for (int i = 0; i < 3; ++i) err[i] = std::abs(grid_spectrum(unit_grid(res[i]), 2).eigenvalues[1] - kPi * kPi);
  CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
  CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("circle spectrum") {
  const auto m = uniform_circle();
  const auto spec = continuum_embedding_spectrum(m, 4, 512);
  const double expected[5] = {0, 1, 1, 4, 4};
  for (int k = 0; k < 5; ++k) CHECK(spec.eigenvalues[k] == doctest::Approx(expected[k]).epsilon(1e-3).scale(1));
}

TEST_CASE("disconnected support has a double zero eigenvalue") {
  auto bumps = [](const Point& x) { return std::abs(x[0] - 0.5) > 0.1 ? 1.0 : 0.0; };
  auto grid = std::make_shared<const GridOperator>(discretize(bumps, Domain::interval(0, 1), 400));
  CHECK(grid->components == 2);
  const auto spec = grid_spectrum(grid, 3);
  CHECK(std::abs(spec.eigenvalues[1]) < 1e-8);
  CHECK(spec.eigenvalues[2] > 1.0);
}

TEST_CASE("disconnected mixture is rejected") {
  const MixtureModel m(Domain::interval(0, 1),
                       {UniformComponent::on_interval(0, 0.4), UniformComponent::on_interval(0.6, 1)}, {0.5, 0.5});
  try {
    discretize_mixture(m, 200);
    FAIL("expected a disconnected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::disconnected);
  }
}

TEST_CASE("interpolated eigenfunctions") {
  const auto spec = grid_spectrum(unit_grid(512), 3);
  // u_1 = sqrt(2) cos(pi x) up to sign.
  const double s = spec.eigenfunctions(0, 1) > 0 ? 1.0 : -1.0;
  for (double x : {0.1, 0.37, 0.5, 0.91}) {
    const auto v = spec.evaluate(Point(x, 0), 3);
    CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(s * v[1] == doctest::Approx(std::sqrt(2.0) * std::cos(kPi * x)).epsilon(1e-4).scale(1));
  }
}

TEST_CASE("indivisibility of uniform halves") {
  const auto theta = indivisibility_parameter(uniform_interval(), 512);
  // Each half has length 1/2, so Theta_k = (2 pi)^2.
  for (double t : theta.per_component) CHECK(t == doctest::Approx(4 * kPi * kPi).epsilon(1e-3));
}

TEST_CASE("dumbbell indivisibility separates good and bad partitions") {
  const auto good = indivisibility_parameter(dumbbell(D::Partition::good), 256);
  const auto bad = indivisibility_parameter(dumbbell(D::Partition::bad), 256);
  CHECK(good.value == doctest::Approx(kThetaGood256).epsilon(1e-7));
  CHECK(bad.value == doctest::Approx(kThetaBad256).epsilon(1e-7));
  CHECK(good.value >= 0.1);
  CHECK(bad.value < good.value / 10);
  CHECK(good.per_component[0] == doctest::Approx(good.per_component[1]).epsilon(1e-6));
}

TEST_CASE("cut values") {
  const Domain unit = Domain::interval(0, 1);
  Box all;
  all.lo = Point(0, 0);
  all.hi = Point(1, 0);
  CHECK(cut_value([](const Point&) { return 1.0; }, unit, all, 0, 0.5) == doctest::Approx(2.0).epsilon(1e-10));

  const auto m = dumbbell(D::Partition::good, D::Profile::raw);
  const auto& c = m.component(0);
  const double eps = 0.1;
  CHECK(cut_value(component_fn(m, 0), m.domain(), c.support(), 0, eps / 2, c.breakpoints()) ==
        doctest::Approx(6 / eps).epsilon(1e-6));

  const auto sweep = cheeger_sweep(m, 0, 0, 1024);
  double prev = 0.0;
  int inside = 0;
  for (std::size_t i = 0; i < sweep.t.size(); ++i) {
    if (sweep.t[i] < eps / 2 || sweep.t[i] > eps || std::isnan(sweep.cut[i])) continue;
    CHECK(sweep.cut[i] >= prev - 1e-9);
    prev = sweep.cut[i];
    ++inside;
    if (std::abs(sweep.t[i] - eps / 2) < 1e-3) CHECK(sweep.cut[i] == doctest::Approx(6 / eps).epsilon(0.05));
  }
  CHECK(inside > 10);
}

TEST_CASE("cheeger bound never exceeds the spectral gap") {
  for (const auto& m : {uniform_interval(), dumbbell(D::Partition::good), dumbbell(D::Partition::bad)}) {
    const auto theta = indivisibility_parameter(m, 256);
    for (std::size_t k = 0; k < m.size(); ++k) {
      // The minimum over both sweep directions is the one that bounds Theta.
      double bound = std::numeric_limits<double>::infinity();
      for (int axis = 0; axis < m.domain().intrinsic_dim(); ++axis)
        bound = std::min(bound, cheeger_sweep(m, k, axis, 512).lower_bound);
      CHECK(bound <= theta.per_component[k] + 1e-6);
    }
  }
}

TEST_CASE("eigenvalue bounds") {
  const auto b = eigenvalue_bounds(0.01, 0.02, 10.0, 2);
  REQUIRE(b.lambda_n_upper.value);
  CHECK(*b.lambda_n_upper.value == doctest::Approx(2 * 0.02 / (1 - 2 * 0.1)));
  REQUIRE(b.lambda_n1_lower.value);
  const double expected = std::pow(std::sqrt(10 * 0.98) - std::sqrt(0.02 * 2 * 0.01) / 0.99, 2);
  CHECK(*b.lambda_n1_lower.value == doctest::Approx(expected));

  const auto none = eigenvalue_bounds(0.3, 0.02, 10.0, 2);
  CHECK_FALSE(none.lambda_n_upper.value);
  CHECK_FALSE(none.lambda_n_upper.reason.empty());

  const auto neg = eigenvalue_bounds(0.01, 50.0, 0.01, 2);
  CHECK_FALSE(neg.lambda_n1_lower.value);
}

TEST_CASE("continuum spectrum lies inside the eigenvalue bounds") {
  const MixtureModel m(Domain::interval(-12.0, 22.0),
                       {std::make_shared<GaussianComponent>(Eigen::Vector2d(0, 0), 1.0, 1),
                        std::make_shared<GaussianComponent>(Eigen::Vector2d(10, 0), 1.0, 1)},
                       {0.5, 0.5});
  const auto S = overlap_parameter(m, {}).value;
  const auto C = coupling_parameter(m, {}).value;
  const auto theta = indivisibility_parameter(m, 2048).value;
  const auto spec = continuum_embedding_spectrum(m, 2, 2048);
  const auto b = eigenvalue_bounds(S, C, theta, 2);
  REQUIRE(b.lambda_n_upper.value);
  REQUIRE(b.lambda_n1_lower.value);
  CHECK(spec.eigenvalues[1] <= *b.lambda_n_upper.value + 1e-6);
  CHECK(spec.eigenvalues[2] >= *b.lambda_n1_lower.value - 1e-6);
}
