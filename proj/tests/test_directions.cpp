#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "iap/directions.hpp"
#include "iap/generators.hpp"
#include "support.hpp"

using namespace iap;
using std::numbers::pi;
using testing::random_unit_vec;

namespace {

std::vector<Vec> ray(const Vec& u, int count) {
  std::vector<Vec> out;
  for (int t = 1; t <= count; ++t) out.push_back(static_cast<double>(t) * u);
  return out;
}

double angle_between(const Vec& a, const Vec& b) {
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

double nearest_angle(const Vec& u, const std::vector<Vec>& set) {
  double best = pi;
  for (const auto& v : set) best = std::min(best, angle_between(u, v));
  return best;
}

std::vector<Vec> grid_plane(double radius, double step) {
  std::vector<Vec> out;
  for (double x = -radius; x <= radius; x += step) {
    for (double y = -radius; y <= radius; y += step) {
      if (x * x + y * y <= radius * radius) out.push_back(Vec{x, y});
    }
  }
  return out;
}

DirectionSet set_of(std::size_t n, std::vector<Vec> dirs) {
  return DirectionSet(n, std::move(dirs), {});
}

}  // namespace

TEST_CASE("central projection examples") {
  CHECK(max_abs_diff(central_project(Vec{3, 4}), Vec{0.6, 0.8}) < 1e-15);
  CHECK(central_project(Vec{-2, 0}) == Vec{-1, 0});
  CHECK_THROWS_AS(central_project(Vec{0, 0}), InvalidInput);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec x = testing::random_vec(4, rng);
    CHECK(max_abs_diff(central_project(7.5 * x), central_project(x)) < 1e-15);
  }
}

TEST_CASE("direction sets validate unit norms") {
  CHECK_THROWS_AS(DirectionSet(2, {Vec{1, 1}}, {}), InvalidInput);
  CHECK_THROWS_AS(DirectionSet(2, {Vec{1, 0, 0}}, {}), DimensionMismatch);
  const DirectionSet s(2, {Vec{1, 0}}, {});
  CHECK(s.counts() == std::vector<std::size_t>{1});
  CHECK(s.rank() == 1);
  CHECK_FALSE(s.spans());
}

TEST_CASE("cluster directions of rays") {
  DirectionEstimatorParams half;
  half.cutoff_fraction = 0.5;
  const auto one = estimate_cluster_directions(ray(Vec{1, 0}, 100), half);
  REQUIRE(one.size() == 1);
  CHECK(max_abs_diff(one.directions()[0], Vec{1, 0}) < 1e-15);
  CHECK(one.counts()[0] == 51);

  auto both = ray(Vec{1, 0}, 100);
  for (const auto& p : ray(Vec{-1, 0}, 100)) both.push_back(p);
  const auto two = estimate_cluster_directions(both, half);
  REQUIRE(two.size() == 2);
  CHECK(nearest_angle(Vec{1, 0}, two.directions()) < 1e-12);
  CHECK(nearest_angle(Vec{-1, 0}, two.directions()) < 1e-12);

  CHECK_THROWS_AS(estimate_cluster_directions(std::vector<Vec>{Vec{0, 0}, Vec{0, 0}}), InvalidInput);
  CHECK_THROWS_AS(estimate_cluster_directions(std::vector<Vec>{}), InvalidInput);
}

TEST_CASE("cluster directions of a 3d cone stay inside the cone") {
  const ConeSpec cone{Vec{0, 0, 1}, pi / 6, false};
  const auto pts = gen_cone(cone, 10000, {1.0, 100.0}, 7);
  DirectionEstimatorParams params;
  params.cutoff_fraction = 0.7;
  params.merge_angle = 0.05;
  const auto dirs = estimate_cluster_directions(pts, params);
  REQUIRE_FALSE(dirs.empty());
  for (const auto& u : dirs.directions()) CHECK(u[2] >= std::cos(pi / 6) - 0.02);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    for (std::size_t j = i + 1; j < dirs.size(); ++j) {
      CHECK(angle_between(dirs.directions()[i], dirs.directions()[j]) >= params.merge_angle);
    }
  }
  for (std::size_t i = 1; i < dirs.size(); ++i) CHECK(dirs.counts()[i - 1] >= dirs.counts()[i]);
}

TEST_CASE("sigma examples") {
  const auto e1 = set_of(2, {Vec{1, 0}});
  CHECK(sigma(Vec{1, 0}, e1) == 1.0);
  CHECK(sigma(Vec{0, 1}, e1) == 0.0);
  const double h = 1.0 / std::sqrt(2.0);
  CHECK(sigma(Vec{h, h}, set_of(2, {Vec{1, 0}, Vec{0, 1}})) == doctest::Approx(h));
  CHECK(sigma(Vec{1, 0}, DirectionSet(2)) == 0.0);
  CHECK_THROWS_AS(sigma(Vec{1, 1}, e1), InvalidInput);
}

TEST_CASE("sigma is even in e") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    std::vector<Vec> dirs;
    for (int k = 0; k < 5; ++k) dirs.push_back(random_unit_vec(3, rng));
    const auto x = set_of(3, dirs);
    const Vec e = random_unit_vec(3, rng);
    CHECK(sigma(-e, x) == sigma(e, x));
  }
}

TEST_CASE("mu1 examples") {
  CHECK(mu1(DirectionSet(2)) == 0.0);
  CHECK(mu1(set_of(2, {Vec{1, 0}})) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(mu1(set_of(2, {Vec{1, 0}, Vec{0, 1}})) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));
  CHECK(testing::grid_min_max_2d({Vec{1, 0}, Vec{0, 1}}) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
  for (std::size_t n = 1; n <= 8; ++n) {
    std::vector<Vec> axes;
    for (std::size_t i = 0; i < n; ++i) axes.push_back(Vec::unit(n, i));
    const auto m = mu1_minimizer(set_of(n, axes));
    CHECK(m.value == doctest::Approx(1.0 / std::sqrt(static_cast<double>(n))).epsilon(1e-8));
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(m.direction[i]) == doctest::Approx(m.value).epsilon(1e-6));
  }
  CHECK(testing::grid_min_max_3d({Vec{1, 0, 0}, Vec{0, 1, 0}, Vec{0, 0, 1}}) ==
        doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-6));
}

TEST_CASE("mu1 of non-spanning families is zero") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + trial % 4;
    std::vector<Vec> dirs;
    for (std::size_t k = 0; k < n + 3; ++k) {
      Vec v = random_unit_vec(n, rng);
      std::vector<double> c = v.to_vector();
      c.back() = 0.0;
      dirs.push_back(central_project(Vec(c)));
    }
    CHECK(mu1(set_of(n, dirs)) <= 1e-12);
  }
}

TEST_CASE("mu1 matches the grid oracle in dimensions 2 and 3") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = trial % 2 == 0 ? 2 : 3;
    std::vector<Vec> dirs;
    const int count = 2 + trial % 6;
    for (int k = 0; k < count; ++k) dirs.push_back(random_unit_vec(n, rng));
    const double got = mu1(set_of(n, dirs));
    const double oracle = n == 2 ? testing::grid_min_max_2d(dirs) : testing::grid_min_max_3d(dirs, 200000);
    CHECK(std::abs(got - oracle) <= 1e-4);
    CHECK(got <= oracle + 1e-9);
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
  }
}

TEST_CASE("mu1 is monotone under adding directions") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 4;
    std::vector<Vec> dirs;
    for (std::size_t k = 0; k < n + 1; ++k) dirs.push_back(random_unit_vec(n, rng));
    const double small = mu1(set_of(n, dirs));
    for (int k = 0; k < 4; ++k) dirs.push_back(random_unit_vec(n, rng));
    CHECK(small <= mu1(set_of(n, dirs)) + 1e-7);
  }
}

TEST_CASE("mu of standard sets") {
  const auto plane = grid_plane(100.0, 2.0);
  CHECK(mu_of_sample(plane) == doctest::Approx(1.0).epsilon(0.05));

  std::vector<Vec> half;
  for (const auto& p : plane) {
    if (p[0] >= 0.0) half.push_back(p);
  }
  CHECK(mu_of_sample(half) == doctest::Approx(1.0).epsilon(0.05));

  const auto cone = gen_cone({Vec{1, 0, 0}, pi / 6, false}, 10000, {1.0, 100.0}, 11);
  CHECK(std::abs(mu_of_sample(cone) - 0.5) <= 0.05);
  CHECK(mu_of_sample(ray(Vec{0, 1}, 50)) <= 1e-12);
}

TEST_CASE("thickness examples") {
  CHECK(thickness(std::vector<Vec>{Vec{0, 0}, Vec{1, 0}}) == doctest::Approx(0.0).epsilon(1e-12));
  const std::vector<Vec> square{Vec{0, 0}, Vec{1, 0}, Vec{0, 1}, Vec{1, 1}};
  CHECK(thickness(square) == doctest::Approx(1.0).epsilon(1e-9));
  std::vector<Vec> circle;
  for (int k = 0; k < 100; ++k) {
    const double a = 2.0 * pi * k / 100.0;
    circle.push_back(Vec{std::cos(a), std::sin(a)});
  }
  const double t = thickness(circle);
  CHECK(t >= 1.99);
  CHECK(t <= 2.0);
  CHECK(thickness(std::vector<Vec>{Vec{3, 3}}) == 0.0);
  CHECK_THROWS_AS(thickness(std::vector<Vec>{}), InvalidInput);
}

TEST_CASE("thickness of the regular simplex is attained along edge midpoints") {
  // Width of the unit triangle is its height.
  CHECK(thickness(testing::regular_simplex(2)) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-8));
}

TEST_CASE("thickness of a symmetrized direction set is twice mu1") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 2;
    std::vector<Vec> dirs;
    for (int k = 0; k < 5; ++k) dirs.push_back(random_unit_vec(n, rng));
    std::vector<Vec> sym = dirs;
    for (const auto& u : dirs) sym.push_back(-u);
    CHECK(thickness(sym) == doctest::Approx(2.0 * mu1(set_of(n, dirs))).epsilon(1e-6));
  }
}

TEST_CASE("cluster directions are equivariant under orthogonal maps") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 2 + seed % 3;
    const auto pts = gen_whole_space(n, 300, {1.0, 100.0}, seed);
    const Matrix r = random_orthogonal(n, 1000 + seed);
    std::vector<Vec> turned;
    for (const auto& p : pts) turned.push_back(apply_linear(r, p));
    const auto a = estimate_cluster_directions(pts);
    const auto b = estimate_cluster_directions(turned);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(max_abs_diff(apply_linear(r, a.directions()[i]), b.directions()[i]) < 1e-9);
      CHECK(a.counts()[i] == b.counts()[i]);
    }
  }
}

TEST_CASE("cluster directions move little under small translations") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 3;
    std::vector<Vec> pts;
    std::vector<Vec> rays;
    for (int k = 0; k < 3; ++k) {
      rays.push_back(random_unit_vec(n, rng));
      for (const auto& p : ray(rays.back(), 100)) pts.push_back(p);
    }
    double max_norm = 100.0;
    const Vec b = (0.01 * max_norm) * random_unit_vec(n, rng);
    std::vector<Vec> moved;
    for (const auto& p : pts) moved.push_back(p + b);
    const DirectionEstimatorParams params;
    const auto a = estimate_cluster_directions(pts, params);
    const auto c = estimate_cluster_directions(moved, params);
    const double allowed = params.merge_angle + 2.0 * b.norm() / (params.cutoff_fraction * max_norm);
    for (const auto& u : c.directions()) CHECK(nearest_angle(u, a.directions()) <= allowed);
    for (const auto& u : a.directions()) CHECK(nearest_angle(u, c.directions()) <= allowed);
  }
}

TEST_CASE("tau of standard sets") {
  const auto plane = gen_whole_space(2, 20000, {1.0, 100.0}, 3);
  CHECK(tau_phi_estimate(plane).tau <= 0.05);

  const auto cone = gen_cone({Vec{1, 0}, pi / 6, false}, 20000, {1.0, 100.0}, 4);
  const auto est = tau_phi_estimate(cone);
  CHECK(std::abs(est.tau - std::cos(pi / 6)) <= 0.05);
  CHECK(est.phi == doctest::Approx(std::asin(est.tau)));

  const auto line = ray(Vec{1, 0}, 200);
  CHECK(std::abs(tau_phi_estimate(line).tau - 1.0) <= 0.05);

  CHECK_THROWS_AS(tau_phi_estimate(std::vector<Vec>{Vec{1, 0}, Vec{2, 0}}), InvalidInput);
}

TEST_CASE("mu and tau agree on cones and the plane") {
  const auto c6 = gen_cone({Vec{1, 0}, pi / 6, false}, 20000, {1.0, 100.0}, 21);
  const auto r6 = check_mu_tau_consistency(c6);
  CHECK(r6.passed);
  CHECK(std::abs(r6.mu - 0.5) <= 0.05);
  CHECK(std::abs(r6.mu_from_tau - 0.5) <= 0.08);

  const auto c4 = gen_cone({Vec{1, 0}, pi / 4, false}, 20000, {1.0, 100.0}, 22);
  const auto r4 = check_mu_tau_consistency(c4);
  CHECK(r4.passed);
  CHECK(std::abs(r4.mu - std::sqrt(0.5)) <= 0.05);

  const auto plane = gen_whole_space(2, 20000, {1.0, 100.0}, 23);
  const auto rp = check_mu_tau_consistency(plane);
  CHECK(rp.passed);
  CHECK(rp.mu == doctest::Approx(1.0).epsilon(0.05));
  CHECK(rp.mu_from_tau == doctest::Approx(1.0).epsilon(0.05));
}
