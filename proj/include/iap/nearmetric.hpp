#pragma once

// Distance distortion of a sampled map and the pointwise inequalities that
// every eps-nearisometry with f(0) = 0 must satisfy.

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "iap/geomcore.hpp"

namespace iap {

struct Correspondence {
  Vec x;
  Vec y;
};

/// Finite stand-in for a map f: A -> R^m. Source points are pairwise
/// distinct (tol 1e-12) and dimensions are consistent across pairs.
class CorrespondenceSample {
 public:
  CorrespondenceSample(std::vector<Correspondence> pairs,
                       std::optional<std::size_t> base_index = std::nullopt);

  std::size_t size() const { return pairs_.size(); }
  std::size_t src_dim() const { return n_src_; }
  std::size_t dst_dim() const { return n_dst_; }
  const std::vector<Correspondence>& pairs() const { return pairs_; }
  const Correspondence& operator[](std::size_t i) const { return pairs_[i]; }

  /// Index of a pair (0 -> 0): the declared base if set, else the first
  /// pair with both points at the origin (within 1e-12).
  std::optional<std::size_t> base_index() const;

  std::vector<Vec> sources() const;
  std::vector<Vec> targets() const;

 private:
  std::vector<Correspondence> pairs_;
  std::size_t n_src_ = 0;
  std::size_t n_dst_ = 0;
  std::optional<std::size_t> base_;
};

/// Exact sampled defect: max over pairs of ||fx - fy| - |x - y||.
/// This lower-bounds the defect of the underlying continuous map.
double epsilon_of(const CorrespondenceSample& sample);

struct EpsilonOptions {
  /// Above this many points, random pairs are drawn instead of all pairs.
  std::size_t exact_limit = 5000;
  std::size_t sampled_pairs = 10'000'000;
  std::uint64_t seed = 0;
};

struct EpsilonEstimate {
  double value = 0.0;
  std::size_t pairs_checked = 0;
  bool subsampled = false;
};

EpsilonEstimate estimate_epsilon(const CorrespondenceSample& sample, EpsilonOptions options = {});

struct Violation {
  std::size_t i = 0;
  std::size_t j = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // lhs - rhs, positive for a violation
};

struct InequalityReport {
  std::size_t checked = 0;
  /// Inputs outside the inequality's hypotheses; never counted as violations.
  std::size_t skipped = 0;
  std::size_t violation_count = 0;
  /// First violations found (at most kMaxStored); violation_count has the total.
  std::vector<Violation> violations;
  double max_violation = 0.0;
  static constexpr std::size_t kMaxStored = 1000;
  /// Largest lhs - rhs seen over all checked inputs (negative when slack remains).
  double worst_slack = -std::numeric_limits<double>::infinity();

  bool ok() const { return violation_count == 0; }
  /// Counts one check; a violation when lhs > rhs + allowance.
  void record(std::size_t i, std::size_t j, double lhs, double rhs, double allowance);
  void merge(const InequalityReport& other);
};

/// |fx.fy - x.y| <= 2 eps (|x| + |y| + eps) for all pairs (including x = y).
/// Requires a (0 -> 0) pair; throws InvalidInput otherwise.
InequalityReport check_inner_product_bound(const CorrespondenceSample& sample, double eps);

/// |pfx - pfy|^2 <= 4|px - py|^2 + 24eps/|x| + 24eps/|y| + 12eps^2/(|x||y|),
/// checked for pairs with |x|, |y| >= 2 eps and fx, fy nonzero.
InequalityReport check_projection_bound(const CorrespondenceSample& sample, double eps);

}  // namespace iap
