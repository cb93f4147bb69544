#include "iap/directions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "sphere_minmax.hpp"

namespace iap {

namespace {

detail::MinMaxOptions to_minmax(const SphereSearchOptions& o) {
  return {o.random_starts, o.iterations, o.seed};
}

std::vector<Eigen::VectorXd> axis_seeds(Eigen::Index n) {
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(Eigen::VectorXd::Unit(n, i));
  return out;
}

bool lexicographic_less(const Vec& a, const Vec& b) {
  for (std::size_t i = 0; i < a.dim(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

struct Cluster {
  Eigen::VectorXd sum;
  Eigen::VectorXd mean;
  std::size_t count = 0;
};

}  // namespace

// ---------------------------------------------------------------- DirectionSet

DirectionSet::DirectionSet(std::size_t dim, std::vector<Vec> directions,
                           std::vector<std::size_t> counts)
    : dim_(dim), directions_(std::move(directions)), counts_(std::move(counts)) {
  if (counts_.empty()) counts_.assign(directions_.size(), 1);
  if (counts_.size() != directions_.size()) {
    throw InvalidInput("direction set: counts and directions differ in length");
  }
  for (const auto& u : directions_) {
    if (u.dim() != dim_) throw DimensionMismatch("direction set: direction dimension");
    if (std::abs(u.norm() - 1.0) > 1e-9) throw InvalidInput("direction set: non-unit direction");
  }
}

std::size_t DirectionSet::rank() const {
  if (directions_.empty() || dim_ == 0) return 0;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(directions_.size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < directions_.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = directions_[i].eigen().transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > 1e-8 * sv[0]) ++r;
  }
  return r;
}

// ---------------------------------------------------------------- estimation

Vec central_project(const Vec& x) {
  const double n = x.norm();
  if (!(n > 0.0)) throw InvalidInput("central projection of the zero vector");
  return x / n;
}

DirectionSet estimate_cluster_directions(std::span<const Vec> points,
                                         const DirectionEstimatorParams& params) {
  if (!(params.cutoff_fraction > 0.0 && params.cutoff_fraction < 1.0)) {
    throw InvalidInput("cutoff fraction must lie in (0, 1)");
  }
  if (!(params.merge_angle > 0.0 && params.merge_angle < std::numbers::pi / 2)) {
    throw InvalidInput("merge angle must lie in (0, pi/2)");
  }
  if (points.empty()) throw InvalidInput("no points to estimate directions from");
  const std::size_t n = points.front().dim();
  double max_norm = 0.0;
  for (const auto& p : points) {
    if (p.dim() != n) throw DimensionMismatch("direction estimate: mixed dimensions");
    max_norm = std::max(max_norm, p.norm());
  }
  if (!(max_norm > 0.0)) throw InvalidInput("all points lie at the origin");

  const double cutoff = params.cutoff_fraction * max_norm;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].norm() >= cutoff) kept.push_back(i);
  }
  std::stable_sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
    const double na = points[a].norm();
    const double nb = points[b].norm();
    if (na != nb) return na > nb;
    return lexicographic_less(points[a], points[b]);
  });

  const double cos_merge = std::cos(params.merge_angle);
  std::vector<Cluster> clusters;
  for (std::size_t i : kept) {
    const Eigen::VectorXd u = points[i].eigen() / points[i].norm();
    auto hit = std::find_if(clusters.begin(), clusters.end(),
                            [&](const Cluster& c) { return c.mean.dot(u) >= cos_merge; });
    if (hit == clusters.end()) {
      clusters.push_back({u, u, 1});
    } else {
      hit->sum += u;
      hit->mean = hit->sum.normalized();
      ++hit->count;
    }
  }

  for (bool fused = true; fused;) {
    fused = false;
    for (std::size_t a = 0; a < clusters.size() && !fused; ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        if (clusters[a].mean.dot(clusters[b].mean) >= cos_merge) {
          clusters[a].sum += clusters[b].sum;
          clusters[a].mean = clusters[a].sum.normalized();
          clusters[a].count += clusters[b].count;
          clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(b));
          fused = true;
          break;
        }
      }
    }
  }

  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const Cluster& a, const Cluster& b) { return a.count > b.count; });
  std::vector<Vec> dirs;
  std::vector<std::size_t> counts;
  for (const auto& c : clusters) {
    dirs.emplace_back(c.mean);
    counts.push_back(c.count);
  }
  return DirectionSet(n, std::move(dirs), std::move(counts));
}

double sigma(const Vec& e, const DirectionSet& x) {
  if (std::abs(e.norm() - 1.0) > 1e-9) throw InvalidInput("sigma: e must be a unit vector");
  if (x.empty()) return 0.0;
  if (e.dim() != x.dim()) throw DimensionMismatch("sigma: dimension mismatch");
  double best = 0.0;
  for (const auto& u : x.directions()) best = std::max(best, std::abs(u.dot(e)));
  return best;
}

// ---------------------------------------------------------------- sphere minima

SphereMinimizer mu1_minimizer(const DirectionSet& x, const SphereSearchOptions& options) {
  const auto n = static_cast<Eigen::Index>(x.dim());
  if (x.empty() || n == 0) return {n > 0 ? Vec::unit(x.dim(), 0) : Vec{}, 0.0};
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(x.size()), n);
  for (std::size_t i = 0; i < x.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = x.directions()[i].eigen().transpose();
  }
  auto seeds = detail::singular_seeds(rows);
  for (auto& a : axis_seeds(n)) seeds.push_back(std::move(a));
  const detail::RowFamily family(rows);
  const auto best = detail::minimize_on_sphere(family, seeds, to_minmax(options));
  return {Vec(best.argmin), std::clamp(best.value, 0.0, 1.0)};
}

double mu1(const DirectionSet& x, const SphereSearchOptions& options) {
  return mu1_minimizer(x, options).value;
}

double mu_of_sample(std::span<const Vec> points, const DirectionEstimatorParams& params,
                    const SphereSearchOptions& options) {
  return mu1(estimate_cluster_directions(points, params), options);
}

double thickness(std::span<const Vec> points, const SphereSearchOptions& options) {
  if (points.empty()) throw InvalidInput("thickness of an empty set");
  const auto n = static_cast<Eigen::Index>(points.front().dim());
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd p(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& v = points[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(v.dim()) != n) throw DimensionMismatch("thickness: mixed dimensions");
    p.row(i) = v.eigen().transpose();
  }
  if (m == 1) return 0.0;
  p.rowwise() -= p.colwise().mean();
  if (n == 1) return p.col(0).maxCoeff() - p.col(0).minCoeff();
  auto seeds = detail::singular_seeds(p);
  for (auto& a : axis_seeds(n)) seeds.push_back(std::move(a));
  const detail::WidthFamily family(p);
  return detail::minimize_on_sphere(family, seeds, to_minmax(options)).value;
}

// ---------------------------------------------------------------- tau / phi

namespace {

std::vector<Eigen::VectorXd> probe_directions(Eigen::Index n, const TauGridParams& grid) {
  std::vector<Eigen::VectorXd> out;
  if (n == 1) {
    out.push_back(Eigen::VectorXd::Ones(1));
  } else if (n == 2) {
    for (std::size_t k = 0; k < grid.angle_steps; ++k) {
      const double a = std::numbers::pi * static_cast<double>(k) / static_cast<double>(grid.angle_steps);
      Eigen::VectorXd e(2);
      e << std::cos(a), std::sin(a);
      out.push_back(e);
    }
  } else if (n == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    const auto count = static_cast<double>(grid.sphere_nodes);
    for (std::size_t k = 0; k < grid.sphere_nodes; ++k) {
      const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * static_cast<double>(k);
      Eigen::VectorXd e(3);
      e << r * std::cos(a), r * std::sin(a), z;
      out.push_back(e);
    }
  } else {
    std::mt19937_64 rng(grid.seed);
    std::normal_distribution<double> normal;
    for (auto& a : axis_seeds(n)) out.push_back(std::move(a));
    while (out.size() < grid.sphere_nodes) {
      Eigen::VectorXd e(n);
      for (Eigen::Index c = 0; c < n; ++c) e[c] = normal(rng);
      if (e.norm() > 0.0) out.push_back(e.normalized());
    }
  }
  return out;
}

// Points sorted by norm so that a nearest-neighbor search around |q| can
// stop once the norm gap alone exceeds the best distance.
class NormIndex {
 public:
  explicit NormIndex(std::span<const Vec> points) {
    const auto m = points.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> norms(m);
    for (std::size_t i = 0; i < m; ++i) norms[i] = points[i].norm();
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return norms[a] < norms[b]; });
    const auto n = static_cast<Eigen::Index>(points.front().dim());
    pts_.resize(n, static_cast<Eigen::Index>(m));
    norms_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      pts_.col(static_cast<Eigen::Index>(k)) = points[order[k]].eigen();
      norms_[k] = norms[order[k]];
    }
  }

  /// min(cap, distance from q to the nearest point).
  double nearest(const Eigen::VectorXd& q, double cap) const {
    const double qn = q.norm();
    const auto start = static_cast<std::ptrdiff_t>(
        std::lower_bound(norms_.begin(), norms_.end(), qn) - norms_.begin());
    double best = cap;
    std::ptrdiff_t lo = start - 1;
    auto hi = start;
    const auto m = static_cast<std::ptrdiff_t>(norms_.size());
    bool lo_open = lo >= 0;
    bool hi_open = hi < m;
    while (lo_open || hi_open) {
      if (hi_open) {
        if (norms_[static_cast<std::size_t>(hi)] - qn >= best) {
          hi_open = false;
        } else {
          best = std::min(best, (pts_.col(hi) - q).norm());
          hi_open = ++hi < m;
        }
      }
      if (lo_open) {
        if (qn - norms_[static_cast<std::size_t>(lo)] >= best) {
          lo_open = false;
        } else {
          best = std::min(best, (pts_.col(lo) - q).norm());
          lo_open = --lo >= 0;
        }
      }
    }
    return best;
  }

 private:
  Eigen::MatrixXd pts_;
  std::vector<double> norms_;
};

}  // namespace

TauPhiEstimate tau_phi_estimate(std::span<const Vec> points, const TauGridParams& grid) {
  if (points.empty()) throw InvalidInput("tau estimate of an empty sample");
  if (grid.t_steps == 0 || !(grid.t_min_fraction > 0.0) ||
      !(grid.t_max_fraction >= grid.t_min_fraction)) {
    throw InvalidInput("tau estimate: invalid probe scales");
  }
  const std::size_t n = points.front().dim();
  double max_norm = 0.0;
  double min_norm = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    if (p.dim() != n) throw DimensionMismatch("tau estimate: mixed dimensions");
    const double r = p.norm();
    max_norm = std::max(max_norm, r);
    if (r > 0.0) min_norm = std::min(min_norm, r);
  }
  if (!(max_norm > 0.0) || max_norm < 10.0 * min_norm) {
    throw InvalidInput("tau estimate: degenerate sample (need max|x| >= 10 min|x|)");
  }

  std::vector<double> scales;
  for (std::size_t k = 0; k < grid.t_steps; ++k) {
    const double frac =
        grid.t_steps == 1
            ? grid.t_max_fraction
            : grid.t_min_fraction + (grid.t_max_fraction - grid.t_min_fraction) *
                                        static_cast<double>(k) / static_cast<double>(grid.t_steps - 1);
    scales.push_back(frac * max_norm);
  }
  // Largest scales first: they are the best proxy for the limit.
  std::reverse(scales.begin(), scales.end());

  const NormIndex index(points);
  TauPhiEstimate best{0.0, 0.0, Vec::unit(n, 0)};
  for (const auto& e : probe_directions(static_cast<Eigen::Index>(n), grid)) {
    double ratio = std::numeric_limits<double>::infinity();
    for (double t : scales) {
      for (double sign : {1.0, -1.0}) {
        const double cap = std::isfinite(ratio) ? ratio * t : std::numeric_limits<double>::infinity();
        ratio = std::min(ratio, index.nearest(sign * t * e, cap) / t);
        if (ratio <= best.tau) break;
      }
      if (ratio <= best.tau) break;
    }
    if (ratio > best.tau) best = {ratio, 0.0, Vec(e)};
  }
  best.tau = std::min(best.tau, 1.0);
  best.phi = std::asin(best.tau);
  return best;
}

MuTauReport check_mu_tau_consistency(std::span<const Vec> points,
                                     const DirectionEstimatorParams& params,
                                     const TauGridParams& grid, double tolerance) {
  MuTauReport r;
  r.mu = mu_of_sample(points, params);
  r.tau = tau_phi_estimate(points, grid).tau;
  r.mu_from_tau = std::sqrt(std::max(0.0, 1.0 - r.tau * r.tau));
  r.difference = std::abs(r.mu - r.mu_from_tau);
  r.tolerance = tolerance;
  r.passed = r.difference <= tolerance;
  return r;
}

}  // namespace iap
