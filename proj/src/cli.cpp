#include "iap/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "iap/directions.hpp"
#include "iap/fitter.hpp"
#include "iap/generators.hpp"
#include "iap/nearmetric.hpp"
#include "iap/sample_io.hpp"

namespace iap {

namespace {

using nlohmann::json;

struct CheckOptions {
  std::string input;
  std::optional<double> eps;
  std::uint64_t seed = 0;
  bool json = false;
};

struct FitOptions {
  std::string input;
  std::optional<double> c_prime;
  std::optional<double> mu;
  bool oracle_mode = false;
  bool mean_translation = false;
  bool choose_base = false;
  double rho = 0.6;
  double merge_angle = 0.02;
  std::uint64_t seed = 0;
  std::string output;
};

struct MuOptions {
  std::string input;
  double rho = 0.6;
  double merge_angle = 0.02;
  std::uint64_t seed = 0;
  bool tau = false;
  bool json = false;
};

struct GenOptions {
  std::string kind;
  std::size_t dim = 2;
  std::size_t count = 1000;
  double rmin = 1.0;
  double rmax = 100.0;
  double alpha = std::numbers::pi / 4;
  bool double_cone = false;
  double M = 4.0;
  double lambda = 0.5;
  std::size_t ball_count = 100;
  std::string map = "identity";
  std::string shape = "halfspace";
  double delta = 0.1;
  std::uint64_t seed = 0;
  std::string output;
};

struct VerifyOptions {
  std::string selector;
  double M = 4.0;
  double lambda = 0.5;
  std::size_t dim = 2;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
};

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text(path, text);
  }
}

SampleFile load_nonempty(const std::string& path, std::string* raw = nullptr) {
  const std::string text = read_text(path);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ParseError("empty input file");
  SampleFile file = std::filesystem::path(path).extension() == ".csv" ? parse_csv(text) : parse_sample(text);
  if (file.pairs.empty()) throw ParseError("sample has no pairs");
  if (raw) *raw = text;
  return file;
}

json report_json(const InequalityReport& r) {
  return {{"checked", r.checked},
          {"skipped", r.skipped},
          {"violations", r.violation_count},
          {"worst_slack", std::isfinite(r.worst_slack) ? json(r.worst_slack) : json(nullptr)}};
}

// ---------------------------------------------------------------- check

int cmd_check(const CheckOptions& o, std::ostream& out) {
  const auto sample = to_correspondences(load_nonempty(o.input));
  if (sample.src_dim() != sample.dst_dim()) {
    throw DimensionMismatch("check needs equal source and target dimensions");
  }
  EpsilonOptions eo;
  eo.seed = o.seed;
  const double measured = sample.size() >= 2 ? estimate_epsilon(sample, eo).value : 0.0;
  const double eps = o.eps.value_or(measured);
  const auto based = normalize_basepoint(sample, sample.base_index().value_or(0));
  const auto inner = check_inner_product_bound(based, eps);
  const auto proj = check_projection_bound(based, eps);
  const bool ok = inner.ok() && proj.ok();

  if (o.json) {
    json j = {{"eps_measured", measured},
              {"eps", eps},
              {"pairs", sample.size()},
              {"inner_product", report_json(inner)},
              {"projection", report_json(proj)},
              {"ok", ok}};
    out << j.dump(2) << "\n";
  } else {
    out << "pairs             " << sample.size() << "\n"
        << "eps (measured)    " << num(measured) << "\n"
        << "eps (declared)    " << num(eps) << "\n"
        << "inner-product     checked " << inner.checked << ", violations " << inner.violation_count << "\n"
        << "projection        checked " << proj.checked << ", skipped " << proj.skipped << ", violations "
        << proj.violation_count << "\n";
    if (measured > eps) out << "note: measured eps exceeds the declared value\n";
    out << (ok ? "ok" : "VIOLATIONS") << "\n";
  }
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------- fit

int fit_oracle(const FitOptions& o, const SampleFile& file, const std::string& raw, std::ostream& out,
               std::ostream& err) {
  const auto& meta = file.meta;
  if (meta.value("generator", std::string()) != "noisy") {
    throw InvalidInput("oracle mode needs a sample whose generating map is recorded (see 'gen noisy')");
  }
  const std::size_t n = file.dim;
  const auto q = meta.at("Q").get<std::vector<double>>();
  if (q.size() != n * n) throw ParseError("meta.Q must hold dim*dim numbers");
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n * n; ++i) m(static_cast<Eigen::Index>(i / n), static_cast<Eigen::Index>(i % n)) = q[i];
  const IsometryTransform truth(m, Vec(meta.at("w").get<std::vector<double>>()));
  const auto oracle = noisy_isometry_oracle(truth, meta.at("delta").get<double>(),
                                            meta.at("noise_seed").get<std::uint64_t>());

  OracleFitParams params;
  params.seed = o.seed;
  const auto fit = fit_global_oracle(oracle, params);

  CertificateFile cf;
  cf.mode = "oracle";
  auto& c = cf.certificate;
  c.eps = oracle.eps;
  c.mu_est = 1.0;
  c.c_prime = 1.0;
  c.mu_source = MuSource::Supplied;
  c.bound = 2.0 * oracle.eps;
  c.residual = fit.report.probe_residual;
  c.certificate_tol = params.probe_tol;
  c.passed = fit.report.probe_ok && fit.report.cauchy_ok;
  c.dim = n;
  c.rank = n;
  cf.transform = fit.transform.with_translation(oracle.f(Vec::zeros(n)));
  cf.provenance = {fnv1a_hex(raw), kToolVersion, o.seed, utc_timestamp()};
  emit(write_certificate(cf), o.output, out);
  if (!o.output.empty()) {
    out << "oracle residual " << num(c.residual) << " (bound " << num(c.bound) << " + " << num(params.probe_tol)
        << "), " << (c.passed ? "passed" : "FAILED") << "\n";
  }
  if (!fit.report.cauchy_ok) err << "warning: scale defects exceed the expected rate\n";
  return c.passed ? 0 : 1;
}

int cmd_fit(const FitOptions& o, std::ostream& out, std::ostream& err) {
  std::string raw;
  const SampleFile file = load_nonempty(o.input, &raw);
  if (o.oracle_mode) return fit_oracle(o, file, raw, out, err);

  const auto sample = to_correspondences(file);
  FitParams params;
  params.directions = {o.rho, o.merge_angle};
  params.search.seed = o.seed;
  params.mu = o.mu;
  params.c_prime = o.c_prime;
  params.choose_base = o.choose_base;
  params.translation = o.mean_translation ? TranslationMode::Mean : TranslationMode::EnclosingBall;
  const auto fit = fit_isometry(sample, params);
  const auto& c = fit.certificate;
  if (!c.full_rank() && !o.mu && !o.c_prime) {
    err << "error: mu estimate zero: cluster directions span " << c.rank << " of " << c.dim
        << " dimensions (IAP hypothesis violated)\n";
    return 3;
  }

  CertificateFile cf;
  cf.certificate = c;
  cf.transform = fit.transform;
  cf.provenance = {fnv1a_hex(raw), kToolVersion, o.seed, utc_timestamp()};
  emit(write_certificate(cf), o.output, out);
  if (!o.output.empty()) {
    out << "eps " << num(c.eps) << ", mu " << num(c.mu_est) << " (" << to_string(c.mu_source) << "), bound "
        << num(c.bound) << ", residual " << num(c.residual) << ", " << (c.passed ? "passed" : "FAILED") << "\n";
  }
  return c.passed ? 0 : 1;
}

// ---------------------------------------------------------------- mu

int cmd_mu(const MuOptions& o, std::ostream& out) {
  const SampleFile file = load_nonempty(o.input);
  std::vector<Vec> points;
  for (const auto& p : file.pairs) points.push_back(p.x);
  const DirectionEstimatorParams dp{o.rho, o.merge_angle};
  SphereSearchOptions so;
  so.seed = o.seed;
  const auto dirs = estimate_cluster_directions(points, dp);
  const auto best = mu1_minimizer(dirs, so);
  json j = {{"mu", best.value}, {"directions", dirs.size()}, {"rank", dirs.rank()}, {"dim", file.dim}};
  if (o.tau) {
    TauGridParams grid;
    grid.seed = o.seed;
    const auto t = tau_phi_estimate(points, grid);
    j["tau"] = t.tau;
    j["mu_from_tau"] = std::sqrt(std::max(0.0, 1.0 - t.tau * t.tau));
  }
  if (o.json) {
    out << j.dump(2) << "\n";
  } else {
    out << "mu          " << num(best.value) << "\n"
        << "directions  " << dirs.size() << " (rank " << dirs.rank() << " of " << file.dim << ")\n";
    if (o.tau) {
      out << "tau         " << num(j["tau"].get<double>()) << "\n"
          << "sqrt(1-t^2) " << num(j["mu_from_tau"].get<double>()) << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------- gen

Vec random_offset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<double> c(n);
  for (auto& v : c) v = u(rng);
  return Vec(c);
}

int cmd_gen(GenOptions o, bool dim_given, std::ostream& out) {
  if (o.dim == 0) throw InvalidInput("--dim must be positive");
  const RadiusRange radii{o.rmin, o.rmax};
  json meta = {{"generator", o.kind}, {"seed", o.seed}};
  SampleFile file;
  if (o.kind == "cone") {
    const ConeSpec cone{Vec::unit(o.dim, o.dim - 1), o.alpha, o.double_cone};
    meta.update({{"alpha", o.alpha}, {"double", o.double_cone}, {"rmin", o.rmin}, {"rmax", o.rmax}});
    file = sample_from_points(gen_cone(cone, o.count, radii, o.seed), meta);
  } else if (o.kind == "plane") {
    meta.update({{"rmin", o.rmin}, {"rmax", o.rmax}});
    file = sample_from_points(gen_whole_space(o.dim, o.count, radii, o.seed), meta);
  } else if (o.kind == "ray") {
    if (!dim_given) o.dim = 1;
    meta.update({{"rmin", o.rmin}, {"rmax", o.rmax}});
    file = sample_from_points(gen_cone({Vec::unit(o.dim, 0), 0.0, false}, o.count, radii, o.seed), meta);
  } else if (o.kind == "ar") {
    const auto p = AuxMapParams::make(o.M, o.lambda);
    if (o.map != "identity" && o.map != "g") throw InvalidInput("--map must be identity or g");
    std::vector<Correspondence> pairs{{Vec::zeros(o.dim), Vec::zeros(o.dim)}};
    for (const auto& z : gen_region(p.r, o.dim, o.count, radii, o.seed)) {
      pairs.push_back({z, o.map == "g" ? aux_map_g(p, z) : z});
    }
    meta.update({{"M", p.M}, {"r", p.r}, {"map", o.map}, {"base_index", 0}, {"rmin", o.rmin}, {"rmax", o.rmax}});
    file = sample_from_pairs(std::move(pairs), meta);
  } else if (o.kind == "badmap") {
    const auto p = AuxMapParams::make(o.M, o.lambda);
    ObstructionSampleSizes sizes;
    sizes.region = o.count;
    sizes.ball = o.ball_count;
    const auto sample = obstruction_sample(p, o.dim, sizes, o.seed);
    meta.update({{"M", p.M}, {"r", p.r}, {"lambda", p.lambda}, {"base_index", 0}});
    file = sample_from_pairs(sample.pairs(), meta);
  } else if (o.kind == "noisy") {
    std::vector<Vec> points;
    double mu_true = 1.0;
    const Vec axis = Vec::unit(o.dim, o.dim - 1);
    if (o.shape == "halfspace") {
      points = gen_cone({axis, std::numbers::pi / 2, false}, o.count, radii, o.seed);
    } else if (o.shape == "cone") {
      points = gen_cone({axis, o.alpha, false}, o.count, radii, o.seed);
      mu_true = std::sin(o.alpha);
    } else if (o.shape == "space") {
      points = gen_whole_space(o.dim, o.count, radii, o.seed);
    } else {
      throw InvalidInput("--shape must be halfspace, cone or space");
    }
    const IsometryTransform t(random_orthogonal(o.dim, o.seed), random_offset(o.dim, o.seed + 1));
    const std::uint64_t noise_seed = o.seed + 2;
    std::vector<double> q;
    for (Eigen::Index r = 0; r < t.linear().rows(); ++r) {
      for (Eigen::Index c = 0; c < t.linear().cols(); ++c) q.push_back(t.linear()(r, c));
    }
    meta.update({{"shape", o.shape},
                 {"alpha", o.alpha},
                 {"delta", o.delta},
                 {"noise_seed", noise_seed},
                 {"mu_true", mu_true},
                 {"Q", q},
                 {"w", t.translation().to_vector()}});
    file = sample_from_pairs(noisy_isometry_pairs(points, t, o.delta, noise_seed), meta);
  } else {
    throw InvalidInput("unknown generator " + o.kind);
  }
  file.meta["dim"] = file.dim = file.pairs.empty() ? o.dim : file.pairs.front().x.dim();
  emit(write_sample(file), o.output, out);
  return 0;
}

// ---------------------------------------------------------------- verify

struct VerifyRow {
  std::string name;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::size_t violations = 0;
  std::string detail;
  bool ok = false;
};

VerifyRow row_from(const std::string& name, const InequalityReport& r) {
  VerifyRow row{name, r.checked, r.skipped, r.violation_count, "worst slack " + num(r.worst_slack), r.ok()};
  return row;
}

VerifyRow run_selector(const std::string& which, const VerifyOptions& o) {
  if (which == "local-bound") {
    return row_from(which, verify_g_local_bound(AuxMapParams::make(o.M, o.lambda), o.dim, o.trials, o.seed));
  }
  if (which == "segment") {
    if (!(o.M > 0.0)) throw InvalidInput("M must be positive");
    return row_from(which, verify_segment_crossing(o.M, o.dim, o.trials, o.seed));
  }
  if (which == "shear") {
    return row_from(which, verify_g_near_isometry(AuxMapParams::make(o.M, o.lambda), o.dim, o.trials, o.seed));
  }
  if (which == "collapse") {
    return row_from(which, verify_bad_map(AuxMapParams::make(o.M, o.lambda), o.dim, o.trials, o.seed));
  }
  if (which == "inner-product" || which == "projection") {
    const auto count = static_cast<std::size_t>(std::ceil(std::sqrt(2.0 * static_cast<double>(o.trials))));
    const auto sample = random_near_isometry_sample(o.dim, count, 0.1, {1.0, 1000.0}, o.seed);
    const double eps = epsilon_of(sample);
    return row_from(which, which == "inner-product" ? check_inner_product_bound(sample, eps)
                                                    : check_projection_bound(sample, eps));
  }
  if (which == "cone-subset") {
    const double alpha = std::numbers::pi / 12;
    const double q = 0.5;
    auto points = gen_cone({Vec::unit(o.dim, 0), alpha, false}, 2000, {1.0, 1000.0}, o.seed);
    for (const auto& z : gen_whole_space(o.dim, 200, {0.01, 5.0}, o.seed + 1)) points.push_back(z);
    const std::vector<Vec> line{Vec::unit(o.dim, 0)};
    const auto r = verify_cone_subset_bounded(line, q, points, 0.01);
    VerifyRow row{which, r.checked, 0, r.disagreements, "subset max norm " + num(r.subset_max_norm) +
                                                            " of " + num(r.sample_max_norm), false};
    row.ok = r.bounded && r.directions_within && r.disagreements == 0;
    return row;
  }
  if (which == "mu-tau") {
    const double alpha = std::numbers::pi / 4;
    const auto points = gen_cone({Vec::unit(o.dim, o.dim - 1), alpha, false}, 4000, {1.0, 100.0}, o.seed);
    TauGridParams grid;
    grid.seed = o.seed;
    const auto r = check_mu_tau_consistency(points, {}, grid);
    return {which, 1, 0, r.passed ? 0u : 1u,
            "mu " + num(r.mu) + ", sqrt(1-tau^2) " + num(r.mu_from_tau), r.passed};
  }
  throw InvalidInput("unknown selector " + which);
}

std::string canonical_selector(const std::string& s) {
  static const std::vector<std::pair<std::string, std::string>> aliases{
      {"3.1", "cone-subset"}, {"3.3", "local-bound"}, {"3.4.1", "segment"}, {"3.5", "shear"},
      {"3.7", "collapse"},    {"M", "inner-product"}, {"4.2", "projection"}, {"2.8", "mu-tau"}};
  for (const auto& [alias, name] : aliases) {
    if (s == alias) return name;
  }
  return s;
}

int cmd_verify(const VerifyOptions& o, std::ostream& out) {
  const std::string which = canonical_selector(o.selector);
  std::vector<std::string> names;
  if (which == "all") {
    names = {"local-bound", "segment", "shear", "collapse", "cone-subset", "inner-product", "projection", "mu-tau"};
    AuxMapParams::make(o.M, o.lambda);
  } else {
    names = {which};
  }
  if (o.dim < 2 && which != "segment") throw InvalidInput("--dim must be at least 2");
  std::vector<VerifyRow> rows;
  for (const auto& name : names) rows.push_back(run_selector(name, o));

  bool ok = true;
  out << std::left << std::setw(15) << "check" << std::setw(10) << "checked" << std::setw(10) << "skipped"
      << std::setw(12) << "violations" << "detail\n";
  for (const auto& r : rows) {
    out << std::setw(15) << r.name << std::setw(10) << r.checked << std::setw(10) << r.skipped << std::setw(12)
        << r.violations << r.detail << (r.ok ? "" : "  FAILED") << "\n";
    ok = ok && r.ok;
  }
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Near-isometry analysis: distortion checks, directional invariants, isometry fitting"};
  app.name("iap");
  app.require_subcommand(1);

  CheckOptions check;
  auto* c = app.add_subcommand("check", "measure eps and test the pointwise inequalities");
  c->add_option("input", check.input, "sample file (JSON or .csv)")->required();
  c->add_option("--eps", check.eps, "declared eps (default: measured)");
  c->add_option("--seed", check.seed);
  c->add_flag("--json", check.json, "machine-readable report");

  FitOptions fit;
  auto* f = app.add_subcommand("fit", "fit an isometry and write a certificate");
  f->add_option("input", fit.input, "sample file (JSON or .csv)")->required();
  f->add_option("--c-prime", fit.c_prime, "known constant c' (overrides --mu)");
  f->add_option("--mu", fit.mu, "known mu of the domain");
  f->add_flag("--oracle-mode", fit.oracle_mode, "evaluate the recorded generating map instead of the pairs");
  f->add_flag("--mean-translation", fit.mean_translation, "translation from the mean offset");
  f->add_flag("--choose-base", fit.choose_base, "use the pair with the smallest distortion as origin");
  f->add_option("--rho", fit.rho, "cutoff fraction for cluster directions");
  f->add_option("--merge-angle", fit.merge_angle, "merge angle in radians");
  f->add_option("--seed", fit.seed);
  f->add_option("--output,-o", fit.output, "certificate path (default stdout)");

  MuOptions mu;
  auto* m = app.add_subcommand("mu", "estimate mu of the source points");
  m->add_option("input", mu.input, "sample file (JSON or .csv)")->required();
  m->add_option("--rho", mu.rho, "cutoff fraction for cluster directions");
  m->add_option("--merge-angle", mu.merge_angle, "merge angle in radians");
  m->add_option("--seed", mu.seed);
  m->add_flag("--tau", mu.tau, "also estimate tau and compare");
  m->add_flag("--json", mu.json, "machine-readable report");

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "generate a sample file");
  g->add_option("kind", gen.kind, "cone | plane | ray | ar | badmap | noisy")
      ->required()
      ->check(CLI::IsMember({"cone", "plane", "ray", "ar", "badmap", "noisy"}));
  auto* dim_opt = g->add_option("--dim", gen.dim);
  g->add_option("--count", gen.count);
  g->add_option("--rmin", gen.rmin);
  g->add_option("--rmax", gen.rmax);
  g->add_option("--alpha", gen.alpha, "cone half-angle in radians");
  g->add_flag("--double", gen.double_cone, "open double cone");
  g->add_option("--M", gen.M);
  g->add_option("--lambda", gen.lambda);
  g->add_option("--ball-count", gen.ball_count);
  g->add_option("--map", gen.map, "identity | g (for ar)");
  g->add_option("--shape", gen.shape, "halfspace | cone | space (for noisy)");
  g->add_option("--delta", gen.delta, "noise bound (for noisy)");
  g->add_option("--seed", gen.seed);
  g->add_option("--output,-o", gen.output, "output path (default stdout)");

  VerifyOptions verify;
  auto* v = app.add_subcommand("verify", "run a randomized inequality check");
  v->add_option("selector", verify.selector,
                "local-bound | segment | shear | collapse | cone-subset | inner-product | projection | "
                "mu-tau | all")
      ->required();
  v->add_option("--M", verify.M);
  v->add_option("--lambda", verify.lambda);
  v->add_option("--dim", verify.dim);
  v->add_option("--trials", verify.trials);
  v->add_option("--seed", verify.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (const char* tol = std::getenv("IAP_TOL"); tol && *tol) {
      char* end = nullptr;
      const double value = std::strtod(tol, &end);
      if (end == tol || *end != '\0' || !(value > 0.0)) throw InvalidInput("IAP_TOL must be a positive number");
      set_tolerance(value);
    }
    if (c->parsed()) return cmd_check(check, out);
    if (f->parsed()) return cmd_fit(fit, out, err);
    if (m->parsed()) return cmd_mu(mu, out);
    if (g->parsed()) return cmd_gen(gen, dim_opt->count() > 0, out);
    if (v->parsed()) return cmd_verify(verify, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const RankDeficient& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace iap
