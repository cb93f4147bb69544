#include "iap/generators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

namespace iap {

namespace {

constexpr std::size_t kMaxAttempts = 1'000'000;

Eigen::VectorXd random_unit(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  do {
    for (auto& c : v) c = normal(rng);
  } while (!(v.norm() > 0.0));
  return v.normalized();
}

double uniform(double lo, double hi, std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double log_uniform(double lo, double hi, std::mt19937_64& rng) {
  if (lo == hi) return lo;
  return std::exp(uniform(std::log(lo), std::log(hi), rng));
}

void check_radii(const RadiusRange& radii) {
  if (!(radii.lo > 0.0) || !(radii.hi >= radii.lo) || !std::isfinite(radii.hi)) {
    throw InvalidInput("radius range must satisfy 0 < lo <= hi");
  }
}

double head_norm(const Eigen::VectorXd& z) { return z.head(z.size() - 1).norm(); }

// A point (x, t) with |x| = rho, x in a random direction, and t drawn by
// the caller's rule from [-bound, bound] where bound = slope * |x|.
Eigen::VectorXd region_point(std::size_t n, double rho, double slope, std::mt19937_64& rng) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(n));
  z.head(z.size() - 1) = random_unit(n - 1, rng) * rho;
  const double bound = slope * head_norm(z);
  const double pick = uniform(0.0, 1.0, rng);
  if (pick < 0.15) {
    z[z.size() - 1] = bound;
  } else if (pick < 0.3) {
    z[z.size() - 1] = -bound;
  } else {
    z[z.size() - 1] = uniform(-bound, bound, rng);
  }
  return z;
}

std::uint64_t mix(std::uint64_t h) {
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

}  // namespace

AuxMapParams AuxMapParams::make(double M, double lambda) {
  if (!(M >= 1.0) || !std::isfinite(M)) throw InvalidInput("M ≥ 1 required");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidInput("lambda must lie in (0, 1]");
  return {M, 1.0 / (8.0 * std::sqrt(M)), lambda};
}

double AuxMapParams::q() const { return r / std::sqrt(1.0 + r * r); }

// ---------------------------------------------------------------- cones

bool in_cone(const ConeSpec& cone, const Vec& x, double tol) {
  if (x.dim() != cone.axis.dim()) throw DimensionMismatch("cone membership: dimension");
  const double c = std::cos(cone.alpha) * x.norm();
  const double s = x.dot(cone.axis);
  if (cone.double_cone) return std::abs(s) > c - tol;
  return s >= c - tol;
}

std::vector<Vec> gen_cone(const ConeSpec& cone, std::size_t count, RadiusRange radii,
                          std::uint64_t seed) {
  check_radii(radii);
  const std::size_t n = cone.axis.dim();
  if (n == 0) throw InvalidInput("cone axis is empty");
  if (std::abs(cone.axis.norm() - 1.0) > 1e-9) throw InvalidInput("cone axis must be a unit vector");
  if (!(cone.alpha >= 0.0 && cone.alpha <= std::numbers::pi / 2)) {
    throw InvalidInput("cone angle must lie in [0, pi/2]");
  }
  if (cone.double_cone && cone.alpha == 0.0) throw InvalidInput("open double cone with angle 0 is empty");

  std::mt19937_64 rng(seed);
  std::vector<Vec> out;
  out.reserve(count);
  if (cone.alpha == 0.0) {
    for (std::size_t i = 0; i < count; ++i) out.push_back(log_uniform(radii.lo, radii.hi, rng) * cone.axis);
    return out;
  }
  while (out.size() < count) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const Eigen::VectorXd u = random_unit(n, rng);
      const Vec x(Eigen::VectorXd(u * log_uniform(radii.lo, radii.hi, rng)));
      if (in_cone(cone, x)) {
        out.push_back(x);
        placed = true;
      }
    }
    if (!placed) throw InvalidInput("cone sampling exceeded the attempt cap");
  }
  return out;
}

std::vector<Vec> gen_whole_space(std::size_t n, std::size_t count, RadiusRange radii,
                                 std::uint64_t seed) {
  check_radii(radii);
  if (n == 0) throw InvalidInput("dimension must be positive");
  std::mt19937_64 rng(seed);
  std::vector<Vec> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Eigen::VectorXd u = random_unit(n, rng);
    out.emplace_back(Eigen::VectorXd(u * log_uniform(radii.lo, radii.hi, rng)));
  }
  return out;
}

// ---------------------------------------------------------------- A_r and the maps

bool in_region(double r, const Vec& z, double tol) {
  if (z.dim() < 2) throw InvalidInput("region membership needs dimension >= 2");
  return std::abs(z.eigen()[z.eigen().size() - 1]) <= r * head_norm(z.eigen()) + tol;
}

bool in_region_angular(double q, const Vec& z, double tol) {
  if (z.dim() < 2) throw InvalidInput("region membership needs dimension >= 2");
  return std::abs(z[z.dim() - 1]) <= q * z.norm() + tol;
}

bool in_extended_region(const AuxMapParams& p, const Vec& z) {
  return in_region(p.r, z) || z.norm() <= p.lambda;
}

std::vector<Vec> gen_region(double r, std::size_t n, std::size_t count, RadiusRange radii,
                            std::uint64_t seed) {
  if (n < 2) throw InvalidInput("region sampling needs n >= 2");
  if (!(r >= 0.0)) throw InvalidInput("region slope must be nonnegative");
  check_radii(radii);
  const double q = r / std::sqrt(1.0 + r * r);
  std::mt19937_64 rng(seed);
  std::vector<Vec> out;
  out.reserve(count);
  while (out.size() < count) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const Vec z(region_point(n, log_uniform(radii.lo, radii.hi, rng), r, rng));
      if (in_region(r, z) && in_region_angular(q, z)) {
        out.push_back(z);
        placed = true;
      }
    }
    if (!placed) throw InvalidInput("region sampling exceeded the attempt cap");
  }
  return out;
}

Vec aux_map_g(const AuxMapParams& p, const Vec& z) {
  if (z.dim() < 2) throw InvalidInput("the shear map needs dimension >= 2");
  Eigen::VectorXd out = z.eigen();
  out[out.size() - 1] += std::sqrt(std::min(head_norm(out), p.M));
  return Vec(std::move(out));
}

Vec bad_map_f(const AuxMapParams& p, const Vec& z) {
  if (in_region(p.r, z)) return aux_map_g(p, z);
  if (z.norm() <= p.lambda) return Vec::zeros(z.dim());
  throw InvalidInput("point lies outside A_r and the lambda-ball");
}

// ---------------------------------------------------------------- verifiers

PairDefect evaluate_local_pair(const AuxMapParams& p, const Vec& z, const Vec& z2) {
  if (z.dim() != z2.dim()) throw DimensionMismatch("pair dimensions differ");
  const Vec* a = &z;
  const Vec* b = &z2;
  if (head_norm(a->eigen()) > head_norm(b->eigen())) std::swap(a, b);
  const double xb = head_norm(b->eigen());
  const double ta = std::abs((*a)[a->dim() - 1]);
  const double tb = std::abs((*b)[b->dim() - 1]);
  PairDefect out;
  out.in_hypothesis = xb <= p.M && ta <= p.r * xb && tb <= 3.0 * p.r * xb;
  out.d = z.distance(z2);
  out.D = aux_map_g(p, z).distance(aux_map_g(p, z2));
  out.defect = std::abs(out.D - out.d);
  return out;
}

InequalityReport verify_g_local_bound(const AuxMapParams& p, std::size_t n, std::size_t trials,
                                      std::uint64_t seed) {
  if (n < 2) throw InvalidInput("verification needs n >= 2");
  std::mt19937_64 rng(seed);
  InequalityReport report;
  for (std::size_t i = 0; i < trials; ++i) {
    const double outer = uniform(0.0, 1.0, rng) < 0.5 ? log_uniform(p.M * 1e-4, p.M, rng)
                                                      : uniform(0.0, p.M, rng);
    const double inner = uniform(0.0, 1.0, rng) < 0.3 ? outer * (1.0 - log_uniform(1e-6, 1.0, rng))
                                                      : uniform(0.0, outer, rng);
    Eigen::VectorXd z2(static_cast<Eigen::Index>(n));
    Eigen::VectorXd z(static_cast<Eigen::Index>(n));
    const Eigen::VectorXd dir2 = random_unit(n - 1, rng);
    Eigen::VectorXd dir = dir2;
    if (uniform(0.0, 1.0, rng) < 0.5) {
      dir = random_unit(n - 1, rng);
    } else {
      dir = (dir2 + log_uniform(1e-6, 1.0, rng) * random_unit(n - 1, rng)).normalized();
    }
    z2.head(z2.size() - 1) = dir2 * outer;
    z.head(z.size() - 1) = dir * inner;
    const double xb = head_norm(z2);
    z[z.size() - 1] = uniform(-p.r * xb, p.r * xb, rng);
    z2[z2.size() - 1] = uniform(-3.0 * p.r * xb, 3.0 * p.r * xb, rng);
    const auto e = evaluate_local_pair(p, Vec(z), Vec(z2));
    if (!e.in_hypothesis) {
      ++report.skipped;
      continue;
    }
    report.record(i, i, e.defect, 1.0, 1e-9);
  }
  return report;
}

Vec segment_sphere_crossing(const Vec& x, const Vec& x2, double M) {
  if (x.dim() != x2.dim()) throw DimensionMismatch("segment endpoints differ in dimension");
  const Eigen::VectorXd d = x2.eigen() - x.eigen();
  const double a = d.squaredNorm();
  const double b = 2.0 * x.eigen().dot(d);
  const double c = x.squared_norm() - M * M;
  const double disc = b * b - 4.0 * a * c;
  if (!(a > 0.0) || disc < 0.0) throw InvalidInput("segment does not meet the sphere");
  const double root = std::sqrt(disc);
  const double qq = -0.5 * (b + std::copysign(root, b));
  std::vector<double> roots;
  if (qq != 0.0) {
    roots.push_back(qq / a);
    roots.push_back(c / qq);
  } else {
    roots.push_back(0.0);
  }
  std::sort(roots.begin(), roots.end());
  for (double s : roots) {
    if (s >= -1e-12 && s <= 1.0 + 1e-12) {
      return Vec(Eigen::VectorXd(x.eigen() + std::clamp(s, 0.0, 1.0) * d));
    }
  }
  throw InvalidInput("segment does not meet the sphere");
}

InequalityReport verify_segment_crossing(double M, std::size_t n, std::size_t trials,
                                         std::uint64_t seed) {
  if (!(M > 0.0)) throw InvalidInput("M must be positive");
  if (n == 0) throw InvalidInput("dimension must be positive");
  std::mt19937_64 rng(seed);
  InequalityReport report;
  for (std::size_t i = 0; i < trials; ++i) {
    const double inside = uniform(0.0, 1.0, rng) < 0.3 ? M * (1.0 - log_uniform(1e-9, 1.0, rng))
                                                       : uniform(0.0, M, rng);
    const double outside = M * (1.0 + log_uniform(1e-9, 1e3, rng));
    const Eigen::VectorXd u = random_unit(n, rng);
    Eigen::VectorXd v = random_unit(n, rng);
    if (uniform(0.0, 1.0, rng) < 0.3) v = (u + log_uniform(1e-6, 1.0, rng) * v).normalized();
    const Vec x(Eigen::VectorXd(u * inside));
    const Vec x2(Eigen::VectorXd(v * outside));
    if (!(x.norm() < M && x2.norm() > M)) {
      ++report.skipped;
      continue;
    }
    const Vec mid = segment_sphere_crossing(x, x2, M);
    const double lhs = x2.norm() * x.distance(mid);
    const double rhs = 2.0 * M * x.distance(x2);
    report.record(i, i, lhs, rhs, 1e-9 * (1.0 + rhs));
  }
  return report;
}

namespace {

// A point of A_r with |x| drawn from [lo, hi] (log-uniform).
Eigen::VectorXd region_sample(const AuxMapParams& p, std::size_t n, double lo, double hi,
                              std::mt19937_64& rng) {
  for (;;) {
    Eigen::VectorXd z = region_point(n, log_uniform(lo, hi, rng), p.r, rng);
    if (in_region(p.r, Vec(z))) return z;
  }
}

// A point of A_r near z: small move of the x part, t kept inside the region.
Eigen::VectorXd region_neighbor(const AuxMapParams& p, const Eigen::VectorXd& z, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(z.size());
  for (;;) {
    Eigen::VectorXd w = z;
    const double scale = log_uniform(1e-4, 10.0, rng) * std::max(1.0, std::sqrt(p.M));
    w.head(w.size() - 1) += random_unit(n - 1, rng) * scale * uniform(0.0, 1.0, rng);
    const double bound = p.r * head_norm(w);
    w[w.size() - 1] = std::clamp(w[w.size() - 1] + uniform(-scale, scale, rng) * p.r, -bound, bound);
    if (in_region(p.r, Vec(w))) return w;
  }
}

PairRegime regime_of(const AuxMapParams& p, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double xa = head_norm(a);
  const double xb = head_norm(b);
  if (xa <= p.M && xb <= p.M) return PairRegime::Inner;
  if (xa >= p.M && xb >= p.M) return PairRegime::Outer;
  return PairRegime::Mixed;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> region_pair(const AuxMapParams& p, std::size_t n,
                                                        PairRegime regime, std::mt19937_64& rng) {
  const double tiny = p.M * 1e-4;
  const double far = p.M * 100.0;
  for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Eigen::VectorXd a;
    switch (regime) {
      case PairRegime::Inner: a = region_sample(p, n, tiny, p.M, rng); break;
      case PairRegime::Outer: a = region_sample(p, n, p.M, far, rng); break;
      default: a = region_sample(p, n, tiny, far, rng); break;
    }
    Eigen::VectorXd b;
    if (uniform(0.0, 1.0, rng) < 0.35) {
      b = region_neighbor(p, a, rng);
    } else {
      switch (regime) {
        case PairRegime::Inner: b = region_sample(p, n, tiny, p.M, rng); break;
        case PairRegime::Outer: b = region_sample(p, n, p.M, far, rng); break;
        case PairRegime::Mixed:
          b = head_norm(a) <= p.M ? region_sample(p, n, p.M, far, rng) : region_sample(p, n, tiny, p.M, rng);
          break;
        case PairRegime::All: b = region_sample(p, n, tiny, far, rng); break;
      }
    }
    if (regime == PairRegime::All || regime_of(p, a, b) == regime) return {a, b};
  }
  throw InvalidInput("pair sampling exceeded the attempt cap");
}

Eigen::VectorXd ball_outside_region(const AuxMapParams& p, std::size_t n, std::mt19937_64& rng) {
  for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const double rad = p.lambda * std::pow(uniform(0.0, 1.0, rng), 1.0 / static_cast<double>(n));
    Eigen::VectorXd z = random_unit(n, rng) * rad;
    const Vec v(z);
    if (!in_region(p.r, v) && v.norm() <= p.lambda) return z;
  }
  throw InvalidInput("ball sampling exceeded the attempt cap");
}

}  // namespace

InequalityReport verify_g_near_isometry(const AuxMapParams& p, std::size_t n, std::size_t trials,
                                        std::uint64_t seed, PairRegime regime) {
  if (n < 2) throw InvalidInput("verification needs n >= 2");
  std::mt19937_64 rng(seed);
  InequalityReport report;
  for (std::size_t i = 0; i < trials; ++i) {
    PairRegime pick = regime;
    if (pick == PairRegime::All) pick = static_cast<PairRegime>(i % 3);
    const auto [a, b] = region_pair(p, n, pick, rng);
    const Vec z(a);
    const Vec z2(b);
    const double defect = std::abs(aux_map_g(p, z).distance(aux_map_g(p, z2)) - z.distance(z2));
    report.record(i, i, defect, 1.0, 1e-9);
  }
  return report;
}

InequalityReport verify_bad_map(const AuxMapParams& p, std::size_t n, std::size_t trials,
                                std::uint64_t seed, ExtendedCase which) {
  if (n < 2) throw InvalidInput("verification needs n >= 2");
  std::mt19937_64 rng(seed);
  InequalityReport report;
  for (std::size_t i = 0; i < trials; ++i) {
    ExtendedCase pick = which;
    if (pick == ExtendedCase::All) pick = static_cast<ExtendedCase>(i % 3);
    Eigen::VectorXd a;
    Eigen::VectorXd b;
    switch (pick) {
      case ExtendedCase::BothRegion:
        std::tie(a, b) = region_pair(p, n, PairRegime::All, rng);
        break;
      case ExtendedCase::BothBall:
        a = ball_outside_region(p, n, rng);
        b = ball_outside_region(p, n, rng);
        break;
      default:
        a = ball_outside_region(p, n, rng);
        b = uniform(0.0, 1.0, rng) < 0.5 ? region_sample(p, n, p.lambda * 1e-3, 4.0 * p.lambda, rng)
                                         : region_sample(p, n, p.lambda, p.M * 100.0, rng);
        break;
    }
    const Vec z(a);
    const Vec z2(b);
    const double defect = std::abs(bad_map_f(p, z).distance(bad_map_f(p, z2)) - z.distance(z2));
    report.record(i, i, defect, 1.0 + p.lambda, 1e-9);
  }
  return report;
}

ConeSubsetReport verify_cone_subset_bounded(std::span<const Vec> subspace, double q,
                                            std::span<const Vec> sample, double cutoff) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidInput("q must lie in (0, 1]");
  if (sample.empty()) throw InvalidInput("empty sample");
  const double r = q < 1.0 ? q / std::sqrt(1.0 - q * q) : std::numeric_limits<double>::infinity();
  ConeSubsetReport report;
  for (const auto& x : sample) {
    const Vec px = orthogonal_projection(subspace, x);
    const double a = (x - px).norm();
    const double b = px.norm();
    const double nx = x.norm();
    report.sample_max_norm = std::max(report.sample_max_norm, nx);
    const bool by_norm = a >= q * nx;
    const bool by_ratio = q < 1.0 ? a >= r * b : b == 0.0;
    if (by_norm) {
      ++report.subset_count;
      report.subset_max_norm = std::max(report.subset_max_norm, nx);
    }
    if (by_norm != by_ratio && std::abs(a - q * nx) > 1e-12 * (1.0 + nx)) ++report.disagreements;
    ++report.checked;
  }
  report.bounded = report.subset_max_norm <= cutoff * report.sample_max_norm;

  std::vector<Vec> nonzero;
  for (const auto& x : sample) {
    if (x.norm() > 0.0) nonzero.push_back(x);
  }
  report.directions_within = true;
  if (!nonzero.empty()) {
    const auto dirs = estimate_cluster_directions(nonzero);
    for (const auto& u : dirs.directions()) {
      if (!((u - orthogonal_projection(subspace, u)).norm() < q)) report.directions_within = false;
    }
  }
  return report;
}

// ---------------------------------------------------------------- noisy isometries

Matrix random_orthogonal(std::size_t n, std::uint64_t seed, bool rotation_only) {
  if (n == 0) throw InvalidInput("dimension must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto k = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd g(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(k, k);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  if (rotation_only && q.determinant() < 0.0) q.col(0) = -q.col(0);
  return Matrix(q);
}

Vec hashed_noise(const Vec& x, double delta, std::uint64_t seed) {
  std::uint64_t h = mix(seed);
  for (std::size_t i = 0; i < x.dim(); ++i) {
    const double c = x[i] == 0.0 ? 0.0 : x[i];
    h = mix(h ^ std::bit_cast<std::uint64_t>(c));
  }
  std::mt19937_64 rng(h);
  const std::size_t n = std::max<std::size_t>(x.dim(), 1);
  const double rad = delta * std::pow(uniform(0.0, 1.0, rng), 1.0 / static_cast<double>(n));
  return Vec(Eigen::VectorXd(random_unit(x.dim(), rng) * rad));
}

std::vector<Correspondence> noisy_isometry_pairs(std::span<const Vec> points,
                                                 const IsometryTransform& t, double delta,
                                                 std::uint64_t noise_seed) {
  if (!(delta >= 0.0)) throw InvalidInput("noise level must be nonnegative");
  std::vector<Correspondence> out;
  out.reserve(points.size());
  for (const auto& x : points) out.push_back({x, apply(t, x) + hashed_noise(x, delta, noise_seed)});
  return out;
}

CorrespondenceSample random_near_isometry_sample(std::size_t n, std::size_t count, double delta,
                                                 RadiusRange radii, std::uint64_t seed) {
  auto points = gen_whole_space(n, count, radii, seed);
  points.insert(points.begin(), Vec::zeros(n));
  const IsometryTransform t(random_orthogonal(n, mix(seed)), Vec::zeros(n));
  const CorrespondenceSample raw(noisy_isometry_pairs(points, t, delta, mix(seed + 1)));
  return normalize_basepoint(raw, 0);
}

OracleMap noisy_isometry_oracle(const IsometryTransform& t, double delta, std::uint64_t noise_seed) {
  if (!(delta >= 0.0)) throw InvalidInput("noise level must be nonnegative");
  return {[t, delta, noise_seed](const Vec& x) { return apply(t, x) + hashed_noise(x, delta, noise_seed); },
          2.0 * delta, t.dim()};
}

// ---------------------------------------------------------------- obstruction experiment

CorrespondenceSample obstruction_sample(const AuxMapParams& p, std::size_t n,
                                        const ObstructionSampleSizes& sizes, std::uint64_t seed) {
  if (n < 2) throw InvalidInput("the obstruction sample needs n >= 2");
  std::vector<Correspondence> pairs;
  pairs.push_back({Vec::zeros(n), Vec::zeros(n)});
  for (const auto& z : gen_region(p.r, n, sizes.region, {0.1, sizes.max_radius_factor * p.M}, seed)) {
    pairs.push_back({z, bad_map_f(p, z)});
  }
  std::mt19937_64 rng(mix(seed ^ 0x5bd1e995ULL));
  for (std::size_t i = 0; i < sizes.ball; ++i) {
    const Vec z(ball_outside_region(p, n, rng));
    pairs.push_back({z, bad_map_f(p, z)});
  }
  return CorrespondenceSample(std::move(pairs), 0);
}

ObstructionReport iap_failure_experiment(double M, double lambda, std::size_t n,
                                         const ObstructionSampleSizes& sizes, std::uint64_t seed) {
  const auto p = AuxMapParams::make(M, lambda);
  const auto sample = obstruction_sample(p, n, sizes, seed);

  ObstructionReport report;
  report.M = M;
  report.eps_limit = 1.0 + lambda;
  report.residual_floor = std::sqrt(M) / 2.0;

  FitParams params;
  params.search.seed = seed;
  const auto fit = fit_isometry(sample, params);
  report.estimated = fit.certificate;
  params.c_prime = 1.0;
  report.unit = fit_isometry(sample, params).certificate;

  report.eps = fit.certificate.eps;
  report.residual = fit.certificate.residual;
  report.ratio = report.eps > 0.0 ? report.residual / report.eps : 0.0;
  report.eps_ok = report.eps <= report.eps_limit + 1e-9;
  report.residual_ok = report.residual >= report.residual_floor;

  std::vector<Correspondence> identity;
  for (const auto& pr : sample.pairs()) identity.push_back({pr.x, pr.x});
  report.control_residual = fit_isometry(CorrespondenceSample(std::move(identity), 0)).certificate.residual;
  return report;
}

}  // namespace iap
