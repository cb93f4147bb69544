#include "iap/geomcore.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <list>
#include <numeric>
#include <random>
#include <sstream>

namespace iap {

namespace {

std::atomic<double> g_tolerance{1e-9};

void require_finite(const Eigen::VectorXd& v) {
  if (!v.allFinite()) {
    throw InvalidInput("vector has non-finite coordinates");
  }
}

void require_same_dim(const Vec& a, const Vec& b, const char* what) {
  if (a.dim() != b.dim()) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a.dim() << " vs " << b.dim() << ")";
    throw DimensionMismatch(msg.str());
  }
}

}  // namespace

double tolerance() { return g_tolerance.load(std::memory_order_relaxed); }

void set_tolerance(double tol) {
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw InvalidInput("tolerance must be a positive finite number");
  }
  g_tolerance.store(tol, std::memory_order_relaxed);
}

// ---------------------------------------------------------------- Vec

Vec::Vec(std::initializer_list<double> coords)
    : v_(static_cast<Eigen::Index>(coords.size())) {
  Eigen::Index i = 0;
  for (double c : coords) v_[i++] = c;
  require_finite(v_);
}

Vec::Vec(const std::vector<double>& coords)
    : v_(Eigen::Map<const Eigen::VectorXd>(coords.data(),
                                           static_cast<Eigen::Index>(coords.size()))) {
  require_finite(v_);
}

Vec::Vec(Eigen::VectorXd coords) : v_(std::move(coords)) { require_finite(v_); }

Vec Vec::zeros(std::size_t n) {
  return Vec(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)), Unchecked{});
}

Vec Vec::unit(std::size_t n, std::size_t axis) {
  if (axis >= n) throw InvalidInput("unit vector axis out of range");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  v[static_cast<Eigen::Index>(axis)] = 1.0;
  return Vec(std::move(v), Unchecked{});
}

std::vector<double> Vec::to_vector() const { return {v_.data(), v_.data() + v_.size()}; }

double Vec::dot(const Vec& other) const {
  require_same_dim(*this, other, "dot");
  return v_.dot(other.v_);
}

double Vec::distance(const Vec& other) const {
  require_same_dim(*this, other, "distance");
  return (v_ - other.v_).norm();
}

Vec operator+(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "operator+");
  return Vec(a.v_ + b.v_, Vec::Unchecked{});
}

Vec operator-(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "operator-");
  return Vec(a.v_ - b.v_, Vec::Unchecked{});
}

Vec operator-(const Vec& a) { return Vec(-a.v_, Vec::Unchecked{}); }

Vec operator*(double s, const Vec& a) { return Vec(s * a.v_, Vec::Unchecked{}); }

Vec operator/(const Vec& a, double s) { return Vec(a.v_ / s, Vec::Unchecked{}); }

double max_abs_diff(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "max_abs_diff");
  if (a.dim() == 0) return 0.0;
  return (a.eigen() - b.eigen()).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------- isometries

double orthogonality_defect(const Matrix& q) {
  if (q.rows() != q.cols()) return std::numeric_limits<double>::infinity();
  const Matrix gram = q.transpose() * q;
  return (gram - Matrix::Identity(q.rows(), q.cols())).cwiseAbs().maxCoeff();
}

IsometryTransform::IsometryTransform(Matrix q, Vec w) : q_(std::move(q)), w_(std::move(w)) {
  if (q_.rows() != q_.cols() || static_cast<std::size_t>(q_.rows()) != w_.dim()) {
    throw DimensionMismatch("isometry: Q must be n x n with n = dim(w)");
  }
  if (!q_.allFinite()) throw InvalidInput("isometry: Q has non-finite entries");
  if (q_.rows() > 0 && orthogonality_defect(q_) > tolerance()) {
    throw InvalidInput("isometry: Q is not orthogonal within tolerance");
  }
}

IsometryTransform IsometryTransform::identity(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return {Matrix::Identity(k, k), Vec::zeros(n)};
}

Vec apply_linear(const Matrix& q, const Vec& x) {
  if (static_cast<std::size_t>(q.cols()) != x.dim()) {
    throw DimensionMismatch("apply: dimension of x does not match the transform");
  }
  return Vec(Eigen::VectorXd(q * x.eigen()));
}

Vec apply(const IsometryTransform& t, const Vec& x) {
  if (t.dim() != x.dim()) {
    throw DimensionMismatch("apply: dimension of x does not match the transform");
  }
  return Vec(Eigen::VectorXd(t.linear() * x.eigen() + t.translation().eigen()));
}

// ---------------------------------------------------------------- projection

Vec orthogonal_projection(std::span<const Vec> basis, const Vec& x) {
  const std::size_t n = x.dim();
  if (basis.empty()) return Vec::zeros(n);
  Eigen::MatrixXd b(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (basis[j].dim() != n) throw DimensionMismatch("projection: basis vector dimension");
    b.col(static_cast<Eigen::Index>(j)) = basis[j].eigen();
  }
  if (basis.size() > n) throw RankDeficient("projection: more basis vectors than dimensions");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv[0] == 0.0 || sv[sv.size() - 1] <= 1e-10 * sv[0]) {
    throw RankDeficient("projection: basis is rank deficient");
  }
  const Eigen::VectorXd coeffs = svd.solve(x.eigen());
  return Vec(Eigen::VectorXd(b * coeffs));
}

// ---------------------------------------------------------------- Procrustes

Matrix procrustes_fit(std::span<const Vec> sources, std::span<const Vec> targets,
                      std::span<const double> weights, ProcrustesOptions options) {
  if (sources.empty()) throw InvalidInput("procrustes: empty input");
  if (sources.size() != targets.size() || sources.size() != weights.size()) {
    throw DimensionMismatch("procrustes: sources, targets and weights differ in length");
  }
  const std::size_t n = sources.front().dim();
  if (n == 0) throw InvalidInput("procrustes: zero-dimensional input");
  const auto k = static_cast<Eigen::Index>(n);

  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i].dim() != n || targets[i].dim() != n) {
      throw DimensionMismatch("procrustes: inconsistent point dimensions");
    }
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw InvalidInput("procrustes: weights must be finite and nonnegative");
    }
    cross.noalias() += weights[i] * targets[i].eigen() * sources[i].eigen().transpose();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv[0];
  Eigen::Index rank = 0;
  while (rank < k && smax > 0.0 && sv[rank] > 1e-12 * smax) ++rank;

  // Matched orthonormal pairs (a_i, b_i) with Q = sum a_i b_i^T, ordered by
  // decreasing singular value; complement pairs come last.
  Eigen::MatrixXd left = svd.matrixU();
  Eigen::MatrixXd right = svd.matrixV();
  if (rank < k) {
    const Eigen::Index c = k - rank;
    const Eigen::MatrixXd uc = left.rightCols(c);
    const Eigen::MatrixXd vc = right.rightCols(c);
    Eigen::JacobiSVD<Eigen::MatrixXd> inner(uc.transpose() * vc,
                                            Eigen::ComputeFullU | Eigen::ComputeFullV);
    left.rightCols(c) = uc * inner.matrixU();
    right.rightCols(c) = vc * inner.matrixV();
  }

  Eigen::MatrixXd q = left * right.transpose();
  if (!options.allow_reflection && q.determinant() < 0.0) {
    q -= 2.0 * left.col(k - 1) * right.col(k - 1).transpose();
  }
  return Matrix(q);
}

// ---------------------------------------------------------------- enclosing ball

namespace {

}  // namespace

std::vector<std::size_t> unique_point_indices(std::span<const Vec> points, double tol) {
  const std::size_t m = points.size();
  if (m == 0) return {};
  const std::size_t n = points.front().dim();
  Eigen::VectorXd key_dir(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    key_dir[static_cast<Eigen::Index>(i)] = 1.0 + 0.6180339887498949 * static_cast<double>(i) +
                                            0.0243 * static_cast<double>(i * i);
  }
  key_dir.normalize();
  std::vector<double> key(m);
  for (std::size_t i = 0; i < m; ++i) key[i] = key_dir.dot(points[i].eigen());
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });

  std::vector<char> dropped(m, 0);
  for (std::size_t a = 0; a < m; ++a) {
    const std::size_t i = order[a];
    if (dropped[i]) continue;
    for (std::size_t b = a + 1; b < m && key[order[b]] - key[i] <= tol; ++b) {
      const std::size_t j = order[b];
      if (!dropped[j] && (points[i].eigen() - points[j].eigen()).norm() <= tol) {
        dropped[std::max(i, j)] = 1;
        if (j < i) break;
      }
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < m; ++i) {
    if (!dropped[i]) keep.push_back(i);
  }
  return keep;
}

namespace {

// Support-set ball: the smallest ball having all support points on its
// boundary, i.e. the circumsphere inside their affine hull.
class SupportBall {
 public:
  explicit SupportBall(std::size_t n) : n_(n) {}

  std::size_t size() const { return support_.size(); }
  const Eigen::VectorXd& center() const { return center_; }
  double squared_radius() const { return r2_; }

  double excess(const Eigen::VectorXd& p) const {
    if (r2_ < 0.0) return 1.0;
    return (p - center_).squaredNorm() - r2_ * (1.0 + 1e-13);
  }

  bool push(const Eigen::VectorXd& p) {
    if (support_.empty()) {
      support_.push_back(p);
      center_ = p;
      r2_ = 0.0;
      return true;
    }
    const Eigen::VectorXd v = p - support_.front();
    Eigen::VectorXd residual = v;
    for (const auto& b : ortho_) residual -= b.dot(residual) * b;
    if (residual.squaredNorm() <= 1e-24 * std::max(v.squaredNorm(), 1e-300)) return false;
    const auto k = static_cast<Eigen::Index>(support_.size());
    Eigen::MatrixXd diffs(static_cast<Eigen::Index>(n_), k);
    for (Eigen::Index i = 1; i < k; ++i) diffs.col(i - 1) = support_[static_cast<std::size_t>(i)] - support_.front();
    diffs.col(k - 1) = v;
    const Eigen::MatrixXd gram = 2.0 * diffs.transpose() * diffs;
    const Eigen::VectorXd rhs = diffs.colwise().squaredNorm().transpose();
    const Eigen::VectorXd lambda = gram.ldlt().solve(rhs);
    if (!lambda.allFinite()) return false;
    support_.push_back(p);
    ortho_.push_back(residual.normalized());
    const Eigen::VectorXd offset = diffs * lambda;
    center_ = support_.front() + offset;
    r2_ = offset.squaredNorm();
    return true;
  }

  // Drops the last support point; the current ball is kept (Welzl semantics).
  void pop() {
    support_.pop_back();
    if (!ortho_.empty() && ortho_.size() >= support_.size()) ortho_.pop_back();
  }

 private:
  std::size_t n_;
  std::vector<Eigen::VectorXd> support_;
  std::vector<Eigen::VectorXd> ortho_;
  Eigen::VectorXd center_;
  double r2_ = -1.0;
};

class MoveToFrontSolver {
 public:
  explicit MoveToFrontSolver(std::vector<Eigen::VectorXd> pts)
      : pts_(std::move(pts)), ball_(static_cast<std::size_t>(pts_.front().size())) {
    for (std::size_t i = 0; i < pts_.size(); ++i) order_.push_back(i);
  }

  void run() { mtf(order_.end()); }
  const SupportBall& ball() const { return ball_; }

 private:
  using It = std::list<std::size_t>::iterator;

  void mtf(It end) {
    if (ball_.size() == static_cast<std::size_t>(pts_.front().size()) + 1) return;
    for (It k = order_.begin(); k != end;) {
      It j = k++;
      if (ball_.excess(pts_[*j]) > 0.0) {
        if (ball_.push(pts_[*j])) {
          mtf(j);
          ball_.pop();
          if (j != order_.begin()) order_.splice(order_.begin(), order_, j);
        }
      }
    }
  }

  std::vector<Eigen::VectorXd> pts_;
  std::list<std::size_t> order_;
  SupportBall ball_;
};

}  // namespace

Ball smallest_enclosing_ball(std::span<const Vec> points) {
  if (points.empty()) throw InvalidInput("smallest_enclosing_ball: empty input");
  const std::size_t n = points.front().dim();
  for (const auto& p : points) {
    if (p.dim() != n) throw DimensionMismatch("smallest_enclosing_ball: mixed dimensions");
  }
  const auto keep = unique_point_indices(points, 1e-12);
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(keep.size());
  for (std::size_t i : keep) pts.push_back(points[i].eigen());
  if (pts.size() == 1) return {points[keep.front()], 0.0};

  std::mt19937_64 rng(0x5eb5eb);
  std::shuffle(pts.begin(), pts.end(), rng);
  MoveToFrontSolver solver(std::move(pts));
  solver.run();

  Ball ball{Vec(solver.ball().center()), 0.0};
  double r2 = 0.0;
  for (const auto& p : points) r2 = std::max(r2, (p.eigen() - ball.center.eigen()).squaredNorm());
  ball.radius = std::sqrt(r2);
  return ball;
}

double diameter(std::span<const Vec> points) {
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      best = std::max(best, (points[i].eigen() - points[j].eigen()).squaredNorm());
    }
  }
  return std::sqrt(best);
}

double jung_constant(std::size_t n) {
  if (n == 0) throw InvalidInput("jung_constant: dimension must be positive");
  const double d = static_cast<double>(n);
  return std::sqrt(2.0 * d / (d + 1.0));
}

}  // namespace iap
