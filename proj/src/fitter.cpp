#include "iap/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace iap {

CorrespondenceSample normalize_basepoint(const CorrespondenceSample& sample, std::size_t index) {
  if (index >= sample.size()) throw InvalidInput("base index out of range");
  const Vec a = sample[index].x;
  const Vec fa = sample[index].y;
  std::vector<Correspondence> out;
  out.reserve(sample.size());
  for (const auto& p : sample.pairs()) out.push_back({p.x - a, p.y - fa});
  out[index] = {Vec::zeros(a.dim()), Vec::zeros(fa.dim())};
  return CorrespondenceSample(std::move(out), index);
}

std::size_t min_contribution_index(const CorrespondenceSample& sample) {
  const std::size_t m = sample.size();
  std::vector<double> worst(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = std::abs(sample[i].y.distance(sample[j].y) - sample[i].x.distance(sample[j].x));
      worst[i] = std::max(worst[i], d);
      worst[j] = std::max(worst[j], d);
    }
  }
  return static_cast<std::size_t>(std::min_element(worst.begin(), worst.end()) - worst.begin());
}

DirectionImage direction_image(const CorrespondenceSample& sample, const Vec& u, std::size_t k,
                               double merge_angle) {
  if (k == 0) throw InvalidInput("direction image needs k >= 1");
  if (u.dim() != sample.src_dim()) throw DimensionMismatch("direction image: direction dimension");
  const double un = u.norm();
  if (!(un > 0.0)) throw InvalidInput("direction image: zero direction");
  const double cos_merge = std::cos(merge_angle);

  std::vector<std::size_t> near;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double xn = sample[i].x.norm();
    if (xn > 0.0 && sample[i].x.dot(u) >= cos_merge * xn * un) near.push_back(i);
  }
  if (near.empty()) throw InvalidInput("no sample points near the requested direction");
  std::stable_sort(near.begin(), near.end(), [&](std::size_t a, std::size_t b) {
    return sample[a].x.norm() > sample[b].x.norm();
  });
  if (near.size() > k) near.resize(k);

  Eigen::VectorXd xs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sample.src_dim()));
  Eigen::VectorXd ys = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sample.dst_dim()));
  std::vector<Eigen::VectorXd> scaled;
  for (std::size_t i : near) {
    xs += sample[i].x.eigen();
    ys += sample[i].y.eigen();
    scaled.push_back(sample[i].y.eigen() / sample[i].x.norm());
  }
  if (!(ys.norm() > 0.0)) throw InvalidInput("direction image: images cancel out");

  double dispersion = 0.0;
  for (std::size_t a = 0; a < scaled.size(); ++a) {
    for (std::size_t b = a + 1; b < scaled.size(); ++b) {
      dispersion = std::max(dispersion, (scaled[a] - scaled[b]).norm());
    }
  }
  return {Vec(Eigen::VectorXd(xs.normalized())), Vec(Eigen::VectorXd(ys.normalized())), dispersion,
          near.size()};
}

LinearFit fit_linear_isometry(const CorrespondenceSample& sample, const DirectionSet& directions,
                              const LinearFitOptions& options) {
  if (!sample.base_index()) throw InvalidInput("sample is not normalized: no (0 -> 0) pair");
  if (sample.src_dim() != sample.dst_dim()) {
    throw DimensionMismatch("linear fit needs equal source and target dimensions");
  }
  if (directions.dim() != sample.src_dim()) throw DimensionMismatch("direction set dimension");
  const std::size_t rank = directions.rank();
  if (rank < sample.src_dim() && !options.allow_partial_rank) {
    throw RankDeficient("IAP hypothesis violated: cluster directions do not span (mu estimate zero)");
  }

  LinearFit fit;
  fit.rank = rank;
  std::vector<Vec> sources;
  std::vector<Vec> targets;
  std::vector<double> weights;
  for (std::size_t i = 0; i < directions.size(); ++i) {
    auto img = direction_image(sample, directions.directions()[i], options.k, options.merge_angle);
    sources.push_back(img.source);
    targets.push_back(img.image);
    weights.push_back(static_cast<double>(directions.counts()[i]));
    fit.images.push_back(std::move(img));
  }
  if (sources.empty()) {
    fit.q = Matrix::Identity(static_cast<Eigen::Index>(sample.src_dim()),
                             static_cast<Eigen::Index>(sample.src_dim()));
  } else {
    fit.q = procrustes_fit(sources, targets, weights);
  }
  return fit;
}

const char* to_string(TranslationMode mode) {
  return mode == TranslationMode::EnclosingBall ? "enclosing-ball" : "mean";
}

const char* to_string(MuSource source) {
  switch (source) {
    case MuSource::Estimated: return "estimated";
    case MuSource::Supplied: return "supplied";
    case MuSource::FromCPrime: return "c-prime";
  }
  return "unknown";
}

double max_residual(const IsometryTransform& t, const CorrespondenceSample& sample) {
  double worst = 0.0;
  for (const auto& p : sample.pairs()) worst = std::max(worst, apply(t, p.x).distance(p.y));
  return worst;
}

FitResult fit_isometry(const CorrespondenceSample& sample, const FitParams& params) {
  if (sample.size() < 2) throw InvalidInput("fitting needs at least two pairs");
  if (sample.src_dim() != sample.dst_dim()) {
    throw DimensionMismatch("fitting needs equal source and target dimensions");
  }
  if (params.mu && !(*params.mu > 0.0 && *params.mu <= 1.0)) {
    throw InvalidInput("mu must lie in (0, 1]");
  }
  if (params.c_prime && !(*params.c_prime >= 1.0)) throw InvalidInput("c' must be >= 1");

  FitCertificate cert;
  cert.dim = sample.src_dim();
  cert.translation = params.translation;
  cert.certificate_tol = params.certificate_tol;
  cert.eps = estimate_epsilon(sample).value;

  if (params.base_index) {
    cert.base_index = *params.base_index;
  } else if (params.choose_base) {
    cert.base_index = min_contribution_index(sample);
  } else {
    cert.base_index = sample.base_index().value_or(0);
  }
  const auto based = normalize_basepoint(sample, cert.base_index);
  const auto sources = based.sources();
  const auto dirs = estimate_cluster_directions(sources, params.directions);

  LinearFitOptions lin;
  lin.k = params.k;
  lin.merge_angle = params.directions.merge_angle;
  lin.allow_partial_rank = true;
  const auto linear = fit_linear_isometry(based, dirs, lin);
  cert.rank = linear.rank;

  std::vector<Vec> offsets;
  offsets.reserve(sample.size());
  for (const auto& p : sample.pairs()) offsets.push_back(p.y - apply_linear(linear.q, p.x));
  Vec w;
  if (params.translation == TranslationMode::EnclosingBall) {
    w = smallest_enclosing_ball(offsets).center;
  } else {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cert.dim));
    for (const auto& h : offsets) mean += h.eigen();
    w = Vec(Eigen::VectorXd(mean / static_cast<double>(offsets.size())));
  }
  IsometryTransform t(linear.q, w);
  cert.residual = max_residual(t, sample);

  if (params.c_prime) {
    cert.c_prime = *params.c_prime;
    cert.mu_est = 1.0 / cert.c_prime;
    cert.mu_source = MuSource::FromCPrime;
  } else if (params.mu) {
    cert.mu_est = *params.mu;
    cert.c_prime = 1.0 / cert.mu_est;
    cert.mu_source = MuSource::Supplied;
  } else {
    cert.mu_est = cert.full_rank() ? mu1(dirs, params.search) : 0.0;
    cert.c_prime = cert.mu_est > 0.0 ? 1.0 / cert.mu_est : std::numeric_limits<double>::infinity();
    cert.mu_source = MuSource::Estimated;
  }
  const double factor = params.translation == TranslationMode::EnclosingBall ? std::numbers::sqrt2 : 2.0;
  cert.bound = factor * cert.c_prime * cert.eps;
  if (cert.eps == 0.0 && std::isinf(cert.c_prime)) cert.bound = std::numeric_limits<double>::infinity();
  cert.passed = std::isfinite(cert.bound) &&
                cert.residual <= cert.bound * (1.0 + cert.certificate_tol) + tolerance();
  return {std::move(t), cert};
}

// ---------------------------------------------------------------- oracle mode

OracleMap normalized(OracleMap oracle) {
  if (!oracle.f) throw InvalidInput("oracle has no map");
  if (oracle.dim == 0) throw InvalidInput("oracle dimension must be positive");
  const Vec f0 = oracle.f(Vec::zeros(oracle.dim));
  if (f0.dim() != oracle.dim) throw DimensionMismatch("oracle output dimension");
  auto inner = std::move(oracle.f);
  oracle.f = [inner, f0](const Vec& x) { return inner(x) - f0; };
  return oracle;
}

OracleFit fit_global_oracle(const OracleMap& raw, const OracleFitParams& params) {
  if (params.s_grid.empty()) throw InvalidInput("empty scale grid");
  for (std::size_t i = 0; i < params.s_grid.size(); ++i) {
    if (!(params.s_grid[i] > 0.0) || (i > 0 && !(params.s_grid[i] > params.s_grid[i - 1]))) {
      throw InvalidInput("scale grid must be positive and increasing");
    }
  }
  const OracleMap oracle = normalized(raw);
  const std::size_t n = oracle.dim;
  const double eps = oracle.eps;

  OracleFitReport report;
  std::vector<Vec> basis;
  std::vector<Vec> columns;
  for (std::size_t axis = 0; axis < n; ++axis) {
    const Vec e = Vec::unit(n, axis);
    std::vector<Vec> scaled;
    for (double s : params.s_grid) {
      const Vec y = oracle.f(s * e);
      if (y.dim() != n) throw DimensionMismatch("oracle output dimension");
      scaled.push_back(y / s);
    }
    for (std::size_t a = 0; a < scaled.size(); ++a) {
      for (std::size_t b = a + 1; b < scaled.size(); ++b) {
        CauchyRow row;
        row.axis = axis;
        row.s = params.s_grid[a];
        row.t = params.s_grid[b];
        row.defect = scaled[a].distance(scaled[b]);
        row.rate = std::sqrt(12.0 * eps / row.s + 6.0 * eps * eps / (row.s * row.s));
        row.within = row.defect <= row.rate + tolerance();
        report.cauchy_ok = report.cauchy_ok && row.within;
        report.cauchy.push_back(row);
      }
    }
    basis.push_back(e);
    columns.push_back(scaled.back());
  }
  const std::vector<double> weights(n, 1.0);
  IsometryTransform t(procrustes_fit(basis, columns, weights), Vec::zeros(n));

  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < params.probes; ++i) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(n));
    for (auto& c : g) c = normal(rng);
    if (!(g.norm() > 0.0)) continue;
    const double radius = params.probe_radius * std::pow(unit(rng), 1.0 / static_cast<double>(n));
    const Vec x(Eigen::VectorXd(g.normalized() * radius));
    report.probe_residual = std::max(report.probe_residual, apply(t, x).distance(oracle.f(x)));
  }
  report.probe_bound = 2.0 * eps + params.probe_tol;
  report.probe_ok = report.probe_residual <= report.probe_bound;
  return {std::move(t), std::move(report)};
}

// ---------------------------------------------------------------- consistency checks

const char* to_string(UniquenessStatus status) {
  switch (status) {
    case UniquenessStatus::Consistent: return "consistent";
    case UniquenessStatus::Inconsistent: return "inconsistent";
    case UniquenessStatus::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

UniquenessReport check_uniqueness(const CorrespondenceSample& sample, const IsometryTransform& t1,
                                  const IsometryTransform& t2,
                                  const DirectionEstimatorParams& params) {
  if (t1.dim() != sample.src_dim() || t2.dim() != sample.src_dim() ||
      sample.src_dim() != sample.dst_dim()) {
    throw DimensionMismatch("uniqueness check: dimensions differ");
  }
  UniquenessReport report;
  report.max_residual = std::max(max_residual(t1, sample), max_residual(t2, sample));
  report.linear_difference = (t1.linear() - t2.linear()).cwiseAbs().maxCoeff();

  const std::size_t base = sample.base_index().value_or(0);
  const auto based = normalize_basepoint(sample, base);
  const auto dirs = estimate_cluster_directions(based.sources(), params);
  if (!dirs.spans()) return report;

  const auto n = static_cast<Eigen::Index>(sample.src_dim());
  Eigen::MatrixXd units(n, static_cast<Eigen::Index>(dirs.size()));
  double r_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    const double cos_merge = std::cos(params.merge_angle);
    double far = 0.0;
    Eigen::VectorXd rep;
    for (const auto& p : based.pairs()) {
      const double xn = p.x.norm();
      if (xn > far && p.x.dot(dirs.directions()[j]) >= cos_merge * xn) {
        far = xn;
        rep = p.x.eigen();
      }
    }
    units.col(static_cast<Eigen::Index>(j)) = rep / far;
    r_min = std::min(r_min, far);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(units);
  const double s_min = svd.singularValues()[n - 1];
  if (!(s_min > 1e-8)) return report;
  report.bound = 4.0 * report.max_residual * std::sqrt(static_cast<double>(dirs.size())) / (r_min * s_min);
  report.status = report.linear_difference <= report.bound + tolerance() ? UniquenessStatus::Consistent
                                                                         : UniquenessStatus::Inconsistent;
  return report;
}

const char* to_string(DichotomyStatus status) {
  switch (status) {
    case DichotomyStatus::NearZero: return "near-zero";
    case DichotomyStatus::NearOne: return "near-one";
    case DichotomyStatus::Between: return "between";
    case DichotomyStatus::NotApplicable: return "not-applicable";
  }
  return "unknown";
}

TauDichotomyReport tau_dichotomy_check(std::span<const Vec> image, bool whole_space_domain,
                                       const TauGridParams& grid, double tol) {
  TauDichotomyReport report;
  report.tau = tau_phi_estimate(image, grid).tau;
  report.distance = std::min(report.tau, 1.0 - report.tau);
  if (!whole_space_domain) {
    report.status = DichotomyStatus::NotApplicable;
  } else if (report.tau <= tol) {
    report.status = DichotomyStatus::NearZero;
  } else if (report.tau >= 1.0 - tol) {
    report.status = DichotomyStatus::NearOne;
  } else {
    report.status = DichotomyStatus::Between;
  }
  return report;
}

}  // namespace iap
