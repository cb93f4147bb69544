#include "iap/nearmetric.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace iap {

namespace {

constexpr double kDistinctTol = 1e-12;

bool is_origin(const Vec& v) { return v.norm() <= kDistinctTol; }

struct Flat {
  Eigen::MatrixXd x;  // n_src x m
  Eigen::MatrixXd y;  // n_dst x m
};

Flat flatten(const CorrespondenceSample& sample) {
  const auto m = static_cast<Eigen::Index>(sample.size());
  Flat flat{Eigen::MatrixXd(static_cast<Eigen::Index>(sample.src_dim()), m),
            Eigen::MatrixXd(static_cast<Eigen::Index>(sample.dst_dim()), m)};
  for (Eigen::Index i = 0; i < m; ++i) {
    flat.x.col(i) = sample[static_cast<std::size_t>(i)].x.eigen();
    flat.y.col(i) = sample[static_cast<std::size_t>(i)].y.eigen();
  }
  return flat;
}

double pair_defect(const Flat& f, Eigen::Index i, Eigen::Index j) {
  return std::abs((f.y.col(i) - f.y.col(j)).norm() - (f.x.col(i) - f.x.col(j)).norm());
}

std::size_t require_base(const CorrespondenceSample& sample) {
  const auto base = sample.base_index();
  if (!base) throw InvalidInput("sample has no base pair (0 -> 0)");
  return *base;
}

}  // namespace

CorrespondenceSample::CorrespondenceSample(std::vector<Correspondence> pairs,
                                           std::optional<std::size_t> base_index)
    : pairs_(std::move(pairs)), base_(base_index) {
  if (pairs_.empty()) throw InvalidInput("correspondence sample is empty");
  n_src_ = pairs_.front().x.dim();
  n_dst_ = pairs_.front().y.dim();
  if (n_src_ == 0 || n_dst_ == 0) throw InvalidInput("correspondence sample has zero dimension");
  for (const auto& p : pairs_) {
    if (p.x.dim() != n_src_ || p.y.dim() != n_dst_) {
      throw DimensionMismatch("correspondence sample: inconsistent dimensions");
    }
  }
  if (base_) {
    if (*base_ >= pairs_.size()) throw InvalidInput("base index out of range");
    if (!is_origin(pairs_[*base_].x) || !is_origin(pairs_[*base_].y)) {
      throw InvalidInput("declared base pair is not (0 -> 0)");
    }
  }
  const auto xs = sources();
  if (unique_point_indices(xs, kDistinctTol).size() != xs.size()) {
    throw InvalidInput("correspondence sample: source points are not distinct");
  }
}

std::optional<std::size_t> CorrespondenceSample::base_index() const {
  if (base_) return base_;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (is_origin(pairs_[i].x) && is_origin(pairs_[i].y)) return i;
  }
  return std::nullopt;
}

std::vector<Vec> CorrespondenceSample::sources() const {
  std::vector<Vec> out;
  out.reserve(pairs_.size());
  for (const auto& p : pairs_) out.push_back(p.x);
  return out;
}

std::vector<Vec> CorrespondenceSample::targets() const {
  std::vector<Vec> out;
  out.reserve(pairs_.size());
  for (const auto& p : pairs_) out.push_back(p.y);
  return out;
}

// ---------------------------------------------------------------- epsilon

double epsilon_of(const CorrespondenceSample& sample) {
  if (sample.size() < 2) throw InvalidInput("epsilon_of needs at least two pairs");
  const Flat f = flatten(sample);
  const auto m = static_cast<Eigen::Index>(sample.size());
  double eps = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) eps = std::max(eps, pair_defect(f, i, j));
  }
  return eps;
}

EpsilonEstimate estimate_epsilon(const CorrespondenceSample& sample, EpsilonOptions options) {
  if (sample.size() < 2) throw InvalidInput("estimate_epsilon needs at least two pairs");
  const std::size_t m = sample.size();
  if (m <= options.exact_limit) {
    return {epsilon_of(sample), m * (m - 1) / 2, false};
  }
  const Flat f = flatten(sample);
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, static_cast<Eigen::Index>(m) - 1);
  EpsilonEstimate est{0.0, 0, true};
  while (est.pairs_checked < options.sampled_pairs) {
    const Eigen::Index i = pick(rng);
    const Eigen::Index j = pick(rng);
    if (i == j) continue;
    est.value = std::max(est.value, pair_defect(f, i, j));
    ++est.pairs_checked;
  }
  return est;
}

// ---------------------------------------------------------------- reports

void InequalityReport::record(std::size_t i, std::size_t j, double lhs, double rhs,
                              double allowance) {
  ++checked;
  const double slack = lhs - rhs;
  worst_slack = std::max(worst_slack, slack);
  if (slack > allowance) {
    ++violation_count;
    max_violation = std::max(max_violation, slack);
    if (violations.size() < kMaxStored) violations.push_back({i, j, lhs, rhs, slack});
  }
}

void InequalityReport::merge(const InequalityReport& other) {
  checked += other.checked;
  skipped += other.skipped;
  violation_count += other.violation_count;
  max_violation = std::max(max_violation, other.max_violation);
  worst_slack = std::max(worst_slack, other.worst_slack);
  for (const auto& v : other.violations) {
    if (violations.size() >= kMaxStored) break;
    violations.push_back(v);
  }
}

InequalityReport check_inner_product_bound(const CorrespondenceSample& sample, double eps) {
  const std::size_t base = require_base(sample);
  if (!(eps >= 0.0)) throw InvalidInput("eps must be nonnegative");
  if (sample.src_dim() != sample.dst_dim()) {
    throw DimensionMismatch("inner product bound needs equal source and target dimensions");
  }
  const Flat f = flatten(sample);
  const auto m = static_cast<Eigen::Index>(sample.size());
  const Eigen::VectorXd nx = f.x.colwise().norm().transpose();
  const Eigen::VectorXd ny = f.y.colwise().norm().transpose();
  const double tol = tolerance();

  InequalityReport report;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (static_cast<std::size_t>(i) == base) continue;
    for (Eigen::Index j = i; j < m; ++j) {
      if (static_cast<std::size_t>(j) == base) continue;
      const double lhs = std::abs(f.y.col(i).dot(f.y.col(j)) - f.x.col(i).dot(f.x.col(j)));
      const double rhs = 2.0 * eps * (nx[i] + nx[j] + eps);
      const double scale = 1.0 + nx[i] * nx[j] + ny[i] * ny[j];
      report.record(static_cast<std::size_t>(i), static_cast<std::size_t>(j), lhs, rhs,
                    tol * scale);
    }
  }
  return report;
}

InequalityReport check_projection_bound(const CorrespondenceSample& sample, double eps) {
  const std::size_t base = require_base(sample);
  if (!(eps >= 0.0)) throw InvalidInput("eps must be nonnegative");
  const Flat f = flatten(sample);
  const auto m = static_cast<Eigen::Index>(sample.size());
  const Eigen::VectorXd nx = f.x.colwise().norm().transpose();
  const Eigen::VectorXd ny = f.y.colwise().norm().transpose();
  const double tol = tolerance();

  std::vector<char> eligible(static_cast<std::size_t>(m), 0);
  for (Eigen::Index i = 0; i < m; ++i) {
    eligible[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i) != base &&
                                            nx[i] > 0.0 && nx[i] >= 2.0 * eps && ny[i] > 0.0;
  }

  InequalityReport report;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (static_cast<std::size_t>(i) == base) continue;
    for (Eigen::Index j = i + 1; j < m; ++j) {
      if (static_cast<std::size_t>(j) == base) continue;
      if (!eligible[static_cast<std::size_t>(i)] || !eligible[static_cast<std::size_t>(j)]) {
        ++report.skipped;
        continue;
      }
      const double lhs = (f.y.col(i) / ny[i] - f.y.col(j) / ny[j]).squaredNorm();
      const double rhs = 4.0 * (f.x.col(i) / nx[i] - f.x.col(j) / nx[j]).squaredNorm() +
                         24.0 * eps / nx[i] + 24.0 * eps / nx[j] +
                         12.0 * eps * eps / (nx[i] * nx[j]);
      report.record(static_cast<std::size_t>(i), static_cast<std::size_t>(j), lhs, rhs,
                    tol * (1.0 + rhs));
    }
  }
  return report;
}

}  // namespace iap
