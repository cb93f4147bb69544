#pragma once

// Dense geometry kernel shared by every other module: finite vectors,
// isometries x -> Qx + w, orthogonal projection, weighted orthogonal
// Procrustes, smallest enclosing balls and the Jung constant of R^n.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace iap {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Raised when a basis or a direction family fails to span what it must.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Global float tolerance (default 1e-9). The CLI overrides it from IAP_TOL.
double tolerance();
void set_tolerance(double tol);

/// A point of R^n. Construction from external data rejects NaN and Inf.
class Vec {
 public:
  Vec() = default;
  Vec(std::initializer_list<double> coords);
  explicit Vec(const std::vector<double>& coords);
  explicit Vec(Eigen::VectorXd coords);

  static Vec zeros(std::size_t n);
  static Vec unit(std::size_t n, std::size_t axis);

  std::size_t dim() const { return static_cast<std::size_t>(v_.size()); }
  double operator[](std::size_t i) const { return v_[static_cast<Eigen::Index>(i)]; }
  const Eigen::VectorXd& eigen() const { return v_; }
  std::vector<double> to_vector() const;

  double norm() const { return v_.norm(); }
  double squared_norm() const { return v_.squaredNorm(); }
  double dot(const Vec& other) const;
  double distance(const Vec& other) const;

  friend Vec operator+(const Vec& a, const Vec& b);
  friend Vec operator-(const Vec& a, const Vec& b);
  friend Vec operator-(const Vec& a);
  friend Vec operator*(double s, const Vec& a);
  friend Vec operator*(const Vec& a, double s) { return s * a; }
  friend Vec operator/(const Vec& a, double s);
  friend bool operator==(const Vec& a, const Vec& b) { return a.v_ == b.v_; }

 private:
  struct Unchecked {};
  Vec(Eigen::VectorXd coords, Unchecked) : v_(std::move(coords)) {}

  Eigen::VectorXd v_;
};

/// Max-entry distance between two vectors of equal dimension.
double max_abs_diff(const Vec& a, const Vec& b);

struct Ball {
  Vec center;
  double radius = 0.0;

  bool contains(const Vec& p, double rel_tol = 0.0) const {
    return center.distance(p) <= radius * (1.0 + rel_tol);
  }
};

/// x -> Qx + w with Q orthogonal (reflections allowed).
class IsometryTransform {
 public:
  /// Validates ||Q^T Q - I||_max <= tolerance() and the dimension of w.
  IsometryTransform(Matrix q, Vec w);

  static IsometryTransform identity(std::size_t n);

  std::size_t dim() const { return w_.dim(); }
  const Matrix& linear() const { return q_; }
  const Vec& translation() const { return w_; }
  double determinant() const { return q_.determinant(); }

  /// Same linear part, translation replaced.
  IsometryTransform with_translation(Vec w) const { return {q_, std::move(w)}; }

 private:
  Matrix q_;
  Vec w_;
};

Vec apply(const IsometryTransform& t, const Vec& x);
Vec apply_linear(const Matrix& q, const Vec& x);

/// ||Q^T Q - I||_max.
double orthogonality_defect(const Matrix& q);

/// Nearest point of span(basis) to x. Throws RankDeficient when the basis
/// is numerically dependent (relative singular value below 1e-10).
Vec orthogonal_projection(std::span<const Vec> basis, const Vec& x);

struct ProcrustesOptions {
  bool allow_reflection = true;
};

/// Orthogonal Q minimizing sum_i w_i |Q s_i - t_i|^2 (no centering).
/// When the weighted cross-covariance is rank deficient the unresolved
/// part of Q is chosen as the orthogonal map between the complementary
/// subspaces that is closest to the identity.
Matrix procrustes_fit(std::span<const Vec> sources, std::span<const Vec> targets,
                      std::span<const double> weights, ProcrustesOptions options = {});

/// Minimal enclosing ball (move-to-front Welzl over support sets of at
/// most n+1 points). Points closer than 1e-12 are deduplicated first.
Ball smallest_enclosing_ball(std::span<const Vec> points);

/// Indices of the points that have no earlier point within tol, in order.
std::vector<std::size_t> unique_point_indices(std::span<const Vec> points, double tol);

/// Largest pairwise distance, O(m^2).
double diameter(std::span<const Vec> points);

/// sqrt(2n/(n+1)): worst circumradius over half-diameter in R^n.
double jung_constant(std::size_t n);

}  // namespace iap
