#pragma once

// Explicit test sets and maps: cones, the region A_r around a hyperplane,
// the square-root shear g and the map that is g on A_r and collapses a
// small ball to the origin. Each inequality these maps are known to satisfy
// has a randomized verifier returning an InequalityReport.

#include <cstdint>
#include <span>
#include <vector>

#include "iap/fitter.hpp"
#include "iap/geomcore.hpp"
#include "iap/nearmetric.hpp"

namespace iap {

/// An unbounded set with the c-IAP has mu >= 1 / (kIapMuFactor * c).
inline constexpr double kIapMuFactor = 17.0;
/// The obstruction argument uses the shear scale M = kShearScaleFactor * c^2 ...
inline constexpr double kShearScaleFactor = 25.0;
/// ... which gives the region slope r = 1 / (kRegionSlopeFactor * c).
inline constexpr double kRegionSlopeFactor = 40.0;

/// Shear scale M >= 1, region slope r = 1/(8 sqrt M), collapse radius lambda in (0, 1].
struct AuxMapParams {
  double M = 1.0;
  double r = 0.125;
  double lambda = 1.0;

  static AuxMapParams make(double M, double lambda = 1.0);
  /// r / sqrt(1 + r^2): the same region written as |z . e_n| <= q |z|.
  double q() const;
};

struct RadiusRange {
  double lo = 1.0;
  double hi = 100.0;
};

struct ConeSpec {
  Vec axis;
  double alpha = 0.0;
  /// false: closed cone x.e >= |x| cos(alpha). true: open double cone |x.e| > |x| cos(alpha).
  bool double_cone = false;
};

bool in_cone(const ConeSpec& cone, const Vec& x, double tol = 0.0);

/// Uniform directions inside the cone (rejection, at most 1e6 attempts per
/// point), radii log-uniform in the range. alpha = 0 gives points on the ray.
std::vector<Vec> gen_cone(const ConeSpec& cone, std::size_t count, RadiusRange radii,
                          std::uint64_t seed);

/// Uniform directions in R^n, radii log-uniform.
std::vector<Vec> gen_whole_space(std::size_t n, std::size_t count, RadiusRange radii,
                                 std::uint64_t seed);

/// z = (x, t) with t the last coordinate: |t| <= r |x|.
bool in_region(double r, const Vec& z, double tol = 0.0);
/// |z . e_n| <= q |z|.
bool in_region_angular(double q, const Vec& z, double tol = 0.0);
/// In A_r or in the closed ball of radius lambda.
bool in_extended_region(const AuxMapParams& p, const Vec& z);

/// Points (x, t) of R^n, n >= 2, with |x| log-uniform in the range, x
/// uniform in direction and t uniform in [-r|x|, r|x|]. Every point passes
/// both membership tests exactly.
std::vector<Vec> gen_region(double r, std::size_t n, std::size_t count, RadiusRange radii,
                            std::uint64_t seed);

/// g(x, t) = (x, t + sqrt(min(|x|, M))).
Vec aux_map_g(const AuxMapParams& p, const Vec& z);
/// g on A_r, 0 on the rest of the closed lambda-ball. Throws outside both.
Vec bad_map_f(const AuxMapParams& p, const Vec& z);

// ---------------------------------------------------------------- verifiers

struct PairDefect {
  double d = 0.0;  // |z' - z|
  double D = 0.0;  // |g z' - g z|
  double defect = 0.0;
  bool in_hypothesis = false;
};

/// Evaluates g on a pair and reports whether the pair satisfies the local
/// bound's hypotheses: |x| <= |x'| <= M, |t| <= r|x'|, |t'| <= 3r|x'| (after
/// ordering by |x|).
PairDefect evaluate_local_pair(const AuxMapParams& p, const Vec& z, const Vec& z2);

/// ||g z' - g z| - |z' - z|| <= 1 on pairs satisfying the local hypotheses.
InequalityReport verify_g_local_bound(const AuxMapParams& p, std::size_t n, std::size_t trials,
                                      std::uint64_t seed);

/// First point of the segment [x, x'] on the sphere |y| = M (smaller
/// segment parameter). Throws when the segment misses the sphere.
Vec segment_sphere_crossing(const Vec& x, const Vec& x2, double M);

/// |x'| |x - x''| <= 2M |x - x'| for |x| < M < |x'| and x'' the crossing.
InequalityReport verify_segment_crossing(double M, std::size_t n, std::size_t trials,
                                         std::uint64_t seed);

enum class PairRegime { Inner, Outer, Mixed, All };

/// g restricted to A_r moves distances by at most 1. Inner: both |x| <= M;
/// Outer: both |x| >= M; Mixed: one on each side.
InequalityReport verify_g_near_isometry(const AuxMapParams& p, std::size_t n, std::size_t trials,
                                        std::uint64_t seed, PairRegime regime = PairRegime::All);

enum class ExtendedCase { BothRegion, BothBall, OneEach, All };

/// The collapsed map on A_r u closed ball(lambda) moves distances by at most 1 + lambda.
InequalityReport verify_bad_map(const AuxMapParams& p, std::size_t n, std::size_t trials,
                                std::uint64_t seed, ExtendedCase which = ExtendedCase::All);

struct ConeSubsetReport {
  std::size_t checked = 0;
  std::size_t subset_count = 0;     // points with |P'x| >= q|x|
  double subset_max_norm = 0.0;
  double sample_max_norm = 0.0;
  bool bounded = false;             // subset_max_norm <= cutoff * sample_max_norm
  bool directions_within = false;   // every estimated cluster direction has |P'u| < q
  std::size_t disagreements = 0;    // |P'x| >= q|x| vs |P'x| >= r|Px|, r = q/sqrt(1-q^2)
};

/// subspace: basis of L (P projects onto L, P' onto its complement).
ConeSubsetReport verify_cone_subset_bounded(std::span<const Vec> subspace, double q,
                                            std::span<const Vec> sample, double cutoff);

// ---------------------------------------------------------------- noisy isometries

/// Haar-distributed orthogonal matrix; det +1 when rotation_only.
Matrix random_orthogonal(std::size_t n, std::uint64_t seed, bool rotation_only = false);

/// Deterministic perturbation of norm <= delta, a function of the bits of x and the seed.
Vec hashed_noise(const Vec& x, double delta, std::uint64_t seed);

/// Pairs (x, T x + hashed_noise(x)).
std::vector<Correspondence> noisy_isometry_pairs(std::span<const Vec> points,
                                                 const IsometryTransform& t, double delta,
                                                 std::uint64_t noise_seed);

/// The origin plus count whole-space points under a random orthogonal map
/// with hashed noise, shifted so that the origin pair is (0 -> 0) (index 0).
CorrespondenceSample random_near_isometry_sample(std::size_t n, std::size_t count, double delta,
                                                 RadiusRange radii, std::uint64_t seed);

/// Oracle x -> T x + hashed_noise(x) with declared eps = 2 delta.
OracleMap noisy_isometry_oracle(const IsometryTransform& t, double delta, std::uint64_t noise_seed);

// ---------------------------------------------------------------- obstruction experiment

struct ObstructionSampleSizes {
  std::size_t region = 400;  // points of A_r
  std::size_t ball = 100;    // points of the lambda-ball outside A_r
  double max_radius_factor = 4.0;  // |x| of region points up to this times M
};

/// Origin, region points and collapsed ball points paired with bad_map_f.
CorrespondenceSample obstruction_sample(const AuxMapParams& p, std::size_t n,
                                        const ObstructionSampleSizes& sizes, std::uint64_t seed);

struct ObstructionReport {
  double M = 0.0;
  double eps = 0.0;
  double eps_limit = 0.0;          // 1 + lambda
  double residual = 0.0;
  double residual_floor = 0.0;     // sqrt(M) / 2
  double ratio = 0.0;              // residual / eps
  FitCertificate estimated;        // certificate with mu from the data
  FitCertificate unit;             // certificate tested against c' = 1
  double control_residual = 0.0;   // identity map on the same source points
  bool eps_ok = false;
  bool residual_ok = false;
};

/// Fits the collapsed map on a sampled A_r and reports residual against eps.
ObstructionReport iap_failure_experiment(double M, double lambda, std::size_t n,
                                         const ObstructionSampleSizes& sizes, std::uint64_t seed);

}  // namespace iap
