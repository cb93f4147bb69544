#pragma once

// Minimization of e -> max_k |w_k . e| over the unit sphere.
//
// The objective is the gauge of the polytope K = {v : |w_k . v| <= 1}, so
// its minimum over the sphere is 1 / max{|v| : v in K}, attained in the
// direction of a vertex of K. Multi-start projected subgradient descent
// locates the basin; polishing then solves for the vertex spanned by the
// n most active constraints and keeps it when it lowers the objective.
// Every reported value is an actual objective evaluation.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace iap::detail {

class MaxAbsLinear {
 public:
  virtual ~MaxAbsLinear() = default;
  virtual Eigen::Index dim() const = 0;
  virtual double value(const Eigen::VectorXd& e) const = 0;
  /// Constraint vectors ordered by decreasing |w . e|, at most k of them.
  virtual std::vector<Eigen::VectorXd> top_constraints(const Eigen::VectorXd& e,
                                                       std::size_t k) const = 0;
};

/// Rows of a matrix as the constraint family.
class RowFamily final : public MaxAbsLinear {
 public:
  explicit RowFamily(Eigen::MatrixXd rows) : rows_(std::move(rows)) {}
  Eigen::Index dim() const override { return rows_.cols(); }
  double value(const Eigen::VectorXd& e) const override;
  std::vector<Eigen::VectorXd> top_constraints(const Eigen::VectorXd& e,
                                               std::size_t k) const override;

 private:
  Eigen::MatrixXd rows_;
};

/// All pairwise differences of a point set, evaluated implicitly:
/// value(e) is the width max_i p_i.e - min_j p_j.e.
class WidthFamily final : public MaxAbsLinear {
 public:
  explicit WidthFamily(Eigen::MatrixXd points) : points_(std::move(points)) {}
  Eigen::Index dim() const override { return points_.cols(); }
  double value(const Eigen::VectorXd& e) const override;
  std::vector<Eigen::VectorXd> top_constraints(const Eigen::VectorXd& e,
                                               std::size_t k) const override;

 private:
  Eigen::MatrixXd points_;
};

struct MinMaxOptions {
  std::size_t random_starts = 48;
  std::size_t iterations = 500;
  std::uint64_t seed = 0;
};

struct SphereMinimum {
  Eigen::VectorXd argmin;
  double value = 0.0;
};

/// seeds are tried in addition to the random starts; zero seeds are ignored.
SphereMinimum minimize_on_sphere(const MaxAbsLinear& f, const std::vector<Eigen::VectorXd>& seeds,
                                 const MinMaxOptions& options);

/// Right singular vectors of m, smallest singular value first.
std::vector<Eigen::VectorXd> singular_seeds(const Eigen::MatrixXd& m);

}  // namespace iap::detail
