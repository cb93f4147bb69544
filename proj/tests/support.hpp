#pragma once

// Helpers and independent oracles shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "iap/geomcore.hpp"

namespace testing {

using iap::Vec;

inline Vec random_vec(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> c(n);
  for (auto& v : c) v = normal(rng);
  return Vec(c);
}

inline Vec random_unit_vec(std::size_t n, std::mt19937_64& rng) {
  for (;;) {
    const Vec v = random_vec(n, rng);
    if (v.norm() > 1e-6) return v / v.norm();
  }
}

inline double max_abs_dot(const Vec& e, const std::vector<Vec>& dirs) {
  double best = 0.0;
  for (const auto& u : dirs) best = std::max(best, std::abs(u.dot(e)));
  return best;
}

/// min over unit e of max |u.e| by a dense angle grid (n = 2).
inline double grid_min_max_2d(const std::vector<Vec>& dirs, std::size_t steps = 1'000'000) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < steps; ++k) {
    const double a = std::numbers::pi * static_cast<double>(k) / static_cast<double>(steps);
    best = std::min(best, max_abs_dot(Vec{std::cos(a), std::sin(a)}, dirs));
  }
  return best;
}

/// Same for n = 3: Fibonacci sphere grid followed by a shrinking tangent
/// pattern search around the best nodes.
inline double grid_min_max_3d(const std::vector<Vec>& dirs, std::size_t nodes = 1'000'000) {
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  struct Node {
    double value;
    Vec e;
  };
  std::vector<Node> best;
  const std::size_t keep = 24;
  for (std::size_t k = 0; k < nodes; ++k) {
    const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(nodes);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double a = golden * static_cast<double>(k);
    Vec e{r * std::cos(a), r * std::sin(a), z};
    const double v = max_abs_dot(e, dirs);
    if (best.size() < keep || v < best.back().value) {
      best.push_back({v, e});
      std::sort(best.begin(), best.end(), [](const Node& x, const Node& y) { return x.value < y.value; });
      if (best.size() > keep) best.pop_back();
    }
  }
  double result = best.front().value;
  const double spacing = std::sqrt(4.0 * std::numbers::pi / static_cast<double>(nodes));
  for (auto node : best) {
    Vec e = node.e;
    double v = node.value;
    for (double h = 2.0 * spacing; h > 1e-9; h /= 3.0) {
      // tangent basis at e
      const Vec helper = std::abs(e[0]) < 0.9 ? Vec{1, 0, 0} : Vec{0, 1, 0};
      Vec t1 = helper - helper.dot(e) * e;
      t1 = t1 / t1.norm();
      const Vec t2{e[1] * t1[2] - e[2] * t1[1], e[2] * t1[0] - e[0] * t1[2], e[0] * t1[1] - e[1] * t1[0]};
      bool moved = true;
      while (moved) {
        moved = false;
        for (int i = -5; i <= 5; ++i) {
          for (int j = -5; j <= 5; ++j) {
            if (i == 0 && j == 0) continue;
            Vec c = e + (h * i / 5.0) * t1 + (h * j / 5.0) * t2;
            c = c / c.norm();
            const double cv = max_abs_dot(c, dirs);
            if (cv < v) {
              v = cv;
              e = c;
              moved = true;
            }
          }
        }
      }
    }
    result = std::min(result, v);
  }
  return result;
}

/// Smallest enclosing ball by enumerating all support sets of size 1..n+1
/// (circumcenters solved in the affine hull) and keeping the smallest ball
/// that contains every point. Exponential; for a dozen points at most.
inline double brute_force_enclosing_radius(const std::vector<Vec>& pts) {
  const std::size_t m = pts.size();
  const std::size_t n = pts.front().dim();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx;
  auto consider = [&](const std::vector<std::size_t>& s) {
    const Vec& p0 = pts[s[0]];
    const std::size_t k = s.size() - 1;
    Vec center = p0;
    if (k > 0) {
      Eigen::MatrixXd a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
      Eigen::VectorXd b(static_cast<Eigen::Index>(k));
      std::vector<Vec> d;
      for (std::size_t i = 1; i <= k; ++i) d.push_back(pts[s[i]] - p0);
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 2.0 * d[i].dot(d[j]);
        b[static_cast<Eigen::Index>(i)] = d[i].squared_norm();
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd lam = lu.solve(b);
      for (std::size_t i = 0; i < k; ++i) center = center + lam[static_cast<Eigen::Index>(i)] * d[i];
    }
    const double r = center.distance(p0);
    for (const auto& p : pts) {
      if (center.distance(p) > r * (1.0 + 1e-12) + 1e-12) return;
    }
    best = std::min(best, r);
  };
  // all subsets of size 1..n+1
  for (std::size_t size = 1; size <= std::min(n + 1, m); ++size) {
    std::vector<std::size_t> s(size);
    for (std::size_t i = 0; i < size; ++i) s[i] = i;
    for (;;) {
      consider(s);
      std::size_t i = size;
      while (i > 0 && s[i - 1] == m - size + (i - 1)) --i;
      if (i == 0) break;
      ++s[i - 1];
      for (std::size_t j = i; j < size; ++j) s[j] = s[j - 1] + 1;
    }
  }
  return best;
}

/// Vertices of a regular simplex in R^n with unit edge length.
inline std::vector<Vec> regular_simplex(std::size_t n) {
  // e_1..e_{n+1} in R^{n+1} lie in the hyperplane sum = 1; map it isometrically to R^n.
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    basis(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1.0;
    basis(static_cast<Eigen::Index>(j + 1), static_cast<Eigen::Index>(j)) = -1.0;
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n));
  std::vector<Vec> out;
  for (std::size_t i = 0; i <= n; ++i) {
    Eigen::VectorXd v = q.row(static_cast<Eigen::Index>(i)).transpose() / std::sqrt(2.0);
    out.emplace_back(v);
  }
  return out;
}

}  // namespace testing
