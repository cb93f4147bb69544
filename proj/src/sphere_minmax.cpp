#include "sphere_minmax.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace iap::detail {

namespace {

std::vector<Eigen::Index> top_indices(const Eigen::VectorXd& score, std::size_t k) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(score.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      return score[a] > score[b] || (score[a] == score[b] && a < b);
                    });
  idx.resize(k);
  return idx;
}

Eigen::VectorXd subgradient(const MaxAbsLinear& f, const Eigen::VectorXd& e) {
  const auto top = f.top_constraints(e, 1);
  if (top.empty()) return Eigen::VectorXd::Zero(e.size());
  const double s = top.front().dot(e);
  return s >= 0.0 ? top.front() : Eigen::VectorXd(-top.front());
}

SphereMinimum descend(const MaxAbsLinear& f, Eigen::VectorXd e, const MinMaxOptions& options) {
  e.normalize();
  SphereMinimum best{e, f.value(e)};
  const double first_step = 0.5;
  const double last_step = 1e-7;
  const double decay =
      std::pow(last_step / first_step, 1.0 / static_cast<double>(std::max<std::size_t>(options.iterations, 1)));
  double step = first_step;
  for (std::size_t t = 0; t < options.iterations; ++t, step *= decay) {
    Eigen::VectorXd g = subgradient(f, e);
    g -= g.dot(e) * e;
    const double gn = g.norm();
    if (gn <= 1e-15) break;
    e = (std::cos(step) * e - std::sin(step) * (g / gn)).normalized();
    const double v = f.value(e);
    if (v < best.value) best = {e, v};
  }
  return best;
}

// Visits all k-subsets of {0..n-1} in lexicographic order.
template <typename Fn>
void for_each_subset(std::size_t n, std::size_t k, Fn&& fn) {
  if (k > n || k == 0) return;
  std::vector<std::size_t> s(k);
  std::iota(s.begin(), s.end(), std::size_t{0});
  while (true) {
    fn(s);
    std::size_t i = k;
    while (i > 0 && s[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++s[i - 1];
    for (std::size_t j = i; j < k; ++j) s[j] = s[j - 1] + 1;
  }
}

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r *= static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

bool polish_once(const MaxAbsLinear& f, SphereMinimum& best) {
  const auto n = static_cast<std::size_t>(f.dim());
  std::size_t pool = n + 3;
  while (pool > n && binomial(pool, n) > 4000.0) --pool;
  const auto cons = f.top_constraints(best.argmin, pool);
  if (cons.size() < n) return false;

  bool improved = false;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  const Eigen::VectorXd anchor = best.argmin;
  for_each_subset(cons.size(), n, [&](const std::vector<std::size_t>& s) {
    for (std::size_t r = 0; r < n; ++r) {
      a.row(static_cast<Eigen::Index>(r)) = cons[s[r]].transpose();
      b[static_cast<Eigen::Index>(r)] = cons[s[r]].dot(anchor) >= 0.0 ? 1.0 : -1.0;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) return;
    Eigen::VectorXd v = lu.solve(b);
    const double vn = v.norm();
    if (!std::isfinite(vn) || vn == 0.0) return;
    v /= vn;
    if (v.dot(anchor) < 0.0) v = -v;
    const double val = f.value(v);
    if (val < best.value) {
      best = {v, val};
      improved = true;
    }
  });
  return improved;
}

}  // namespace

double RowFamily::value(const Eigen::VectorXd& e) const {
  if (rows_.rows() == 0) return 0.0;
  return (rows_ * e).cwiseAbs().maxCoeff();
}

std::vector<Eigen::VectorXd> RowFamily::top_constraints(const Eigen::VectorXd& e,
                                                        std::size_t k) const {
  if (rows_.rows() == 0) return {};
  const Eigen::VectorXd score = (rows_ * e).cwiseAbs();
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index i : top_indices(score, k)) out.emplace_back(rows_.row(i).transpose());
  return out;
}

double WidthFamily::value(const Eigen::VectorXd& e) const {
  if (points_.rows() == 0) return 0.0;
  const Eigen::VectorXd proj = points_ * e;
  return proj.maxCoeff() - proj.minCoeff();
}

std::vector<Eigen::VectorXd> WidthFamily::top_constraints(const Eigen::VectorXd& e,
                                                          std::size_t k) const {
  if (points_.rows() < 2) return {};
  const Eigen::VectorXd proj = points_ * e;
  const auto hi = top_indices(proj, k);
  const auto lo = top_indices(-proj, k);
  struct Cand {
    double score;
    Eigen::Index i, j;
  };
  std::vector<Cand> cands;
  for (auto i : hi) {
    for (auto j : lo) {
      if (i != j) cands.push_back({proj[i] - proj[j], i, j});
    }
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Cand& a, const Cand& b) { return a.score > b.score; });
  std::vector<Eigen::VectorXd> out;
  for (const auto& c : cands) {
    if (out.size() == k) break;
    out.emplace_back((points_.row(c.i) - points_.row(c.j)).transpose());
  }
  return out;
}

std::vector<Eigen::VectorXd> singular_seeds(const Eigen::MatrixXd& m) {
  std::vector<Eigen::VectorXd> out;
  if (m.rows() == 0) {
    for (Eigen::Index i = 0; i < m.cols(); ++i) out.push_back(Eigen::VectorXd::Unit(m.cols(), i));
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const Eigen::MatrixXd& v = svd.matrixV();
  for (Eigen::Index i = v.cols() - 1; i >= 0; --i) out.emplace_back(v.col(i));
  return out;
}

SphereMinimum minimize_on_sphere(const MaxAbsLinear& f, const std::vector<Eigen::VectorXd>& seeds,
                                 const MinMaxOptions& options) {
  const Eigen::Index n = f.dim();
  std::vector<Eigen::VectorXd> starts;
  for (const auto& s : seeds) {
    if (s.size() == n && s.norm() > 0.0) starts.push_back(s.normalized());
  }
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < options.random_starts; ++i) {
    Eigen::VectorXd e(n);
    for (Eigen::Index c = 0; c < n; ++c) e[c] = normal(rng);
    if (e.norm() > 0.0) starts.push_back(e.normalized());
  }

  SphereMinimum best{Eigen::VectorXd::Unit(n, 0), std::numeric_limits<double>::infinity()};
  for (const auto& s : starts) {
    SphereMinimum local{s, f.value(s)};
    if (local.value > 0.0) {
      local = descend(f, s, options);
      for (int round = 0; round < 8 && polish_once(f, local); ++round) {
      }
    }
    if (local.value < best.value) best = local;
    if (best.value == 0.0) break;
  }
  return best;
}

}  // namespace iap::detail
