#pragma once

// Cluster directions of sampled unbounded sets and the directional
// invariants built on them: sigma(e, X), mu1(X), mu(A), thickness, tau/phi.

#include <cstdint>
#include <span>
#include <vector>

#include "iap/geomcore.hpp"

namespace iap {

/// Finite approximation of the set of cluster directions of a point set.
class DirectionSet {
 public:
  DirectionSet() = default;
  /// Every direction must have unit norm within 1e-9.
  DirectionSet(std::size_t dim, std::vector<Vec> directions, std::vector<std::size_t> counts);
  explicit DirectionSet(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return directions_.size(); }
  bool empty() const { return directions_.empty(); }
  const std::vector<Vec>& directions() const { return directions_; }
  const std::vector<std::size_t>& counts() const { return counts_; }

  /// Numerical rank of the direction matrix (relative singular tolerance 1e-8).
  std::size_t rank() const;
  bool spans() const { return dim_ > 0 && rank() == dim_; }

 private:
  std::size_t dim_ = 0;
  std::vector<Vec> directions_;
  std::vector<std::size_t> counts_;
};

struct DirectionEstimatorParams {
  double cutoff_fraction = 0.6;  // keep |x| >= cutoff_fraction * max|x|
  double merge_angle = 0.02;     // radians
};

/// x / |x|; throws InvalidInput for the zero vector.
Vec central_project(const Vec& x);

/// Keeps the points with |x| >= rho * max|x|, projects them to the sphere
/// and merges greedily (points visited by decreasing norm, ties broken
/// lexicographically). A point joins the first cluster whose running mean
/// direction lies within merge_angle; clusters whose means end up within
/// merge_angle of each other are fused. Output is ordered by count.
DirectionSet estimate_cluster_directions(std::span<const Vec> points,
                                         const DirectionEstimatorParams& params = {});

/// max over u in X of |u . e|, 0 for empty X. e must be a unit vector.
double sigma(const Vec& e, const DirectionSet& x);

struct SphereSearchOptions {
  std::size_t random_starts = 48;
  std::size_t iterations = 500;
  std::uint64_t seed = 0;
};

struct SphereMinimizer {
  Vec direction;
  double value = 0.0;
};

/// inf over unit e of sigma(e, X) together with a minimizing direction.
SphereMinimizer mu1_minimizer(const DirectionSet& x, const SphereSearchOptions& options = {});
double mu1(const DirectionSet& x, const SphereSearchOptions& options = {});

/// mu1 of the estimated direction set, in [0, 1]; 0 when no direction survives.
double mu_of_sample(std::span<const Vec> points, const DirectionEstimatorParams& params = {},
                    const SphereSearchOptions& options = {});

/// Minimal width of the set over all projection lines.
double thickness(std::span<const Vec> points, const SphereSearchOptions& options = {});

struct TauGridParams {
  double t_min_fraction = 0.3;  // probe scales as fractions of max|x|
  double t_max_fraction = 0.6;
  std::size_t t_steps = 8;
  std::size_t angle_steps = 1440;   // n = 2
  std::size_t sphere_nodes = 2000;  // n >= 3 (Fibonacci for n = 3, random beyond)
  std::uint64_t seed = 0;
};

struct TauPhiEstimate {
  double tau = 0.0;
  double phi = 0.0;  // asin(tau)
  Vec direction;     // maximizing e
};

/// sup over e of min over probe scales |t| of d(te, A)/|t|, both signs of t.
/// Requires max|x| >= 10 * min nonzero |x|.
TauPhiEstimate tau_phi_estimate(std::span<const Vec> points, const TauGridParams& grid = {});

struct MuTauReport {
  double mu = 0.0;
  double tau = 0.0;
  double mu_from_tau = 0.0;  // sqrt(1 - tau^2)
  double difference = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Compares mu_of_sample with sqrt(1 - tau^2); both estimate the same invariant.
MuTauReport check_mu_tau_consistency(std::span<const Vec> points,
                                      const DirectionEstimatorParams& params = {},
                                      const TauGridParams& grid = {}, double tolerance = 0.08);

}  // namespace iap
