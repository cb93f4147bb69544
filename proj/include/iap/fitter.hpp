#pragma once

// Fitting an isometry x -> Qx + w to a sampled near-isometry, with a
// certificate comparing the achieved sup residual to sqrt(2) c' eps.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "iap/directions.hpp"
#include "iap/geomcore.hpp"
#include "iap/nearmetric.hpp"

namespace iap {

/// Relative slack on the bound when deciding whether a certificate passes.
inline constexpr double kCertificateTol = 0.05;

/// Pairs (x - a, fx - fa) where (a, fa) is pairs[index]; that pair becomes (0, 0).
CorrespondenceSample normalize_basepoint(const CorrespondenceSample& sample, std::size_t index);

/// The index minimizing max_j ||fx_i - fx_j| - |x_i - x_j||.
std::size_t min_contribution_index(const CorrespondenceSample& sample);

struct DirectionImage {
  Vec source;  // normalized sum of the selected x_j
  Vec image;   // normalized sum of the selected fx_j
  double dispersion = 0.0;  // max pairwise distance of fx_j / |x_j|
  std::size_t used = 0;
};

/// Limit image of the direction u, estimated from the k largest-norm pairs
/// whose source lies within merge_angle of u. Throws InvalidInput when no
/// pair qualifies.
DirectionImage direction_image(const CorrespondenceSample& sample, const Vec& u,
                               std::size_t k = 10, double merge_angle = 0.02);

struct LinearFitOptions {
  std::size_t k = 10;
  double merge_angle = 0.02;
  /// When false a non-spanning direction set raises RankDeficient. When
  /// true Q is fitted on the span and completed closest to the identity.
  bool allow_partial_rank = false;
};

struct LinearFit {
  Matrix q;
  std::size_t rank = 0;
  std::vector<DirectionImage> images;
};

/// Sample must contain a (0 -> 0) pair.
LinearFit fit_linear_isometry(const CorrespondenceSample& sample, const DirectionSet& directions,
                              const LinearFitOptions& options = {});

enum class TranslationMode { EnclosingBall, Mean };
enum class MuSource { Estimated, Supplied, FromCPrime };

const char* to_string(TranslationMode mode);
const char* to_string(MuSource source);

struct FitParams {
  DirectionEstimatorParams directions;
  SphereSearchOptions search;
  std::size_t k = 10;
  /// Pair used as the origin; defaults to the declared base, else index 0.
  std::optional<std::size_t> base_index;
  bool choose_base = false;  // use min_contribution_index instead
  std::optional<double> mu;
  std::optional<double> c_prime;  // takes precedence over mu
  TranslationMode translation = TranslationMode::EnclosingBall;
  double certificate_tol = kCertificateTol;
};

struct FitCertificate {
  double eps = 0.0;
  double mu_est = 0.0;
  double c_prime = 0.0;  // 1 / mu_est, infinite when mu_est = 0
  double bound = 0.0;    // sqrt(2) c' eps (2 c' eps for the mean translation)
  double residual = 0.0;  // max_i |T x_i - f x_i|
  bool passed = false;
  MuSource mu_source = MuSource::Estimated;
  TranslationMode translation = TranslationMode::EnclosingBall;
  std::size_t dim = 0;
  std::size_t rank = 0;  // rank of the estimated direction set
  std::size_t base_index = 0;
  double certificate_tol = kCertificateTol;

  bool full_rank() const { return rank == dim; }
};

struct FitResult {
  IsometryTransform transform;
  FitCertificate certificate;
};

/// Requires at least two pairs and equal source and target dimensions.
FitResult fit_isometry(const CorrespondenceSample& sample, const FitParams& params = {});

/// max_i |T x_i - f x_i|.
double max_residual(const IsometryTransform& t, const CorrespondenceSample& sample);

// ---------------------------------------------------------------- oracle mode

struct OracleMap {
  std::function<Vec(const Vec&)> f;
  double eps = 0.0;
  std::size_t dim = 0;
};

/// Same map shifted so that f(0) = 0.
OracleMap normalized(OracleMap oracle);

struct CauchyRow {
  std::size_t axis = 0;
  double s = 0.0;
  double t = 0.0;        // t > s
  double defect = 0.0;   // |f(s e)/s - f(t e)/t|
  double rate = 0.0;     // sqrt(12 eps / s + 6 eps^2 / s^2)
  bool within = false;
};

struct OracleFitParams {
  std::vector<double> s_grid{1e2, 1e3, 1e4};
  std::size_t probes = 200;
  double probe_radius = 100.0;
  double probe_tol = 0.01;
  std::uint64_t seed = 0;
};

struct OracleFitReport {
  std::vector<CauchyRow> cauchy;
  bool cauchy_ok = true;
  double probe_residual = 0.0;  // max |Tx - f x| over the probes
  double probe_bound = 0.0;     // 2 eps + probe_tol
  bool probe_ok = false;
};

struct OracleFit {
  IsometryTransform transform;
  OracleFitReport report;
};

/// T = (Q, 0) with Q the orthogonal matrix closest to the columns
/// f(s e_i)/s at the largest scale. The oracle is normalized first.
OracleFit fit_global_oracle(const OracleMap& oracle, const OracleFitParams& params = {});

// ---------------------------------------------------------------- consistency checks

enum class UniquenessStatus { Consistent, Inconsistent, Inconclusive };
const char* to_string(UniquenessStatus status);

struct UniquenessReport {
  UniquenessStatus status = UniquenessStatus::Inconclusive;
  double linear_difference = 0.0;  // ||Q1 - Q2||_max
  double bound = 0.0;
  double max_residual = 0.0;       // K
};

/// Two isometries that both fit the sample within K have linear parts that
/// differ by at most 4 K sqrt(k) / (r_min s_min), where the k far
/// representatives (one per cluster direction, relative to the base pair)
/// have norms >= r_min and their unit directions have least singular value
/// s_min. Inconclusive when those directions do not span.
UniquenessReport check_uniqueness(const CorrespondenceSample& sample, const IsometryTransform& t1,
                                  const IsometryTransform& t2,
                                  const DirectionEstimatorParams& params = {});

enum class DichotomyStatus { NearZero, NearOne, Between, NotApplicable };
const char* to_string(DichotomyStatus status);

struct TauDichotomyReport {
  double tau = 0.0;
  double distance = 0.0;  // distance of tau to {0, 1}
  DichotomyStatus status = DichotomyStatus::NotApplicable;
};

/// tau of the image of a map defined on all of R^n lies in {0, 1}. Samples
/// from other domains are measured but reported as NotApplicable.
TauDichotomyReport tau_dichotomy_check(std::span<const Vec> image, bool whole_space_domain,
                                       const TauGridParams& grid = {}, double tol = 0.1);

}  // namespace iap
