#include "iap/sample_io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

namespace iap {

using nlohmann::json;

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte points one past the offending character.
    const auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("malformed JSON at line " + std::to_string(line) + ", column " +
                         std::to_string(column),
                     line, column);
  }
}

Vec read_point(const json& j, std::size_t dim, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array of numbers");
  if (j.size() != dim) {
    throw ParseError(where + ": expected " + std::to_string(dim) + " coordinates, found " +
                     std::to_string(j.size()));
  }
  std::vector<double> c;
  c.reserve(dim);
  for (const auto& v : j) {
    if (!v.is_number()) throw ParseError(where + ": non-numeric coordinate");
    c.push_back(v.get<double>());
  }
  try {
    return Vec(c);
  } catch (const InvalidInput& e) {
    throw ParseError(where + ": " + e.what());
  }
}

json point_json(const Vec& v) {
  json a = json::array();
  for (std::size_t i = 0; i < v.dim(); ++i) a.push_back(v[i]);
  return a;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("certificate: missing field ") + key);
  const auto& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw ParseError(std::string("certificate: field ") + key + " is not a number");
  return v.get<double>();
}

}  // namespace

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : Error(what), line_(line), column_(column) {}

SampleFile parse_sample(std::string_view text) {
  const json j = parse_json(text);
  if (!j.is_object()) throw ParseError("sample file: top level must be an object");
  if (!j.contains("version") || j.at("version") != kSampleVersion) {
    throw ParseError(std::string("sample file: version must be \"") + kSampleVersion + "\"");
  }
  if (!j.contains("dim") || !j.at("dim").is_number_unsigned()) {
    throw ParseError("sample file: dim must be a nonnegative integer");
  }
  if (!j.contains("pairs") || !j.at("pairs").is_array()) throw ParseError("sample file: pairs must be an array");
  SampleFile out;
  out.dim = j.at("dim").get<std::size_t>();
  if (out.dim == 0) throw ParseError("sample file: dim must be positive");
  const auto& pairs = j.at("pairs");
  out.pairs.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    const std::string where = "pair " + std::to_string(i);
    if (!p.is_array() || p.size() != 2) throw ParseError(where + ": expected [x, y]");
    out.pairs.push_back({read_point(p[0], out.dim, where + " x"), read_point(p[1], out.dim, where + " y")});
  }
  if (j.contains("meta")) {
    if (!j.at("meta").is_object()) throw ParseError("sample file: meta must be an object");
    out.meta = j.at("meta");
  }
  return out;
}

SampleFile parse_csv(std::string_view text) {
  SampleFile out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;

    std::vector<double> values;
    std::size_t col = 0;
    while (col <= line.size()) {
      const std::size_t comma = std::min(line.find(',', col), line.size());
      std::string_view cell = line.substr(col, comma - col);
      while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
      while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError("CSV: bad number at line " + std::to_string(line_no) + ", column " +
                             std::to_string(col + 1),
                         line_no, col + 1);
      }
      values.push_back(v);
      col = comma + 1;
    }
    if (values.size() % 2 != 0) {
      throw ParseError("CSV: odd column count at line " + std::to_string(line_no), line_no, 1);
    }
    const std::size_t n = values.size() / 2;
    if (out.dim == 0) out.dim = n;
    if (n != out.dim) throw ParseError("CSV: inconsistent column count at line " + std::to_string(line_no), line_no, 1);
    out.pairs.push_back({Vec(std::vector<double>(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n))),
                         Vec(std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(n), values.end()))});
  }
  return out;
}

SampleFile read_sample(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  if (path.extension() == ".csv") return parse_csv(text);
  return parse_sample(text);
}

std::string write_sample(const SampleFile& file) {
  json j;
  j["version"] = kSampleVersion;
  j["dim"] = file.dim;
  json pairs = json::array();
  for (const auto& p : file.pairs) pairs.push_back(json::array({point_json(p.x), point_json(p.y)}));
  j["pairs"] = std::move(pairs);
  j["meta"] = file.meta;
  return j.dump() + "\n";
}

SampleFile sample_from_points(std::span<const Vec> points, json meta) {
  std::vector<Correspondence> pairs;
  pairs.reserve(points.size());
  for (const auto& x : points) pairs.push_back({x, x});
  return sample_from_pairs(std::move(pairs), std::move(meta));
}

SampleFile sample_from_pairs(std::vector<Correspondence> pairs, json meta) {
  SampleFile out;
  out.dim = pairs.empty() ? 0 : pairs.front().x.dim();
  out.pairs = std::move(pairs);
  out.meta = std::move(meta);
  return out;
}

CorrespondenceSample to_correspondences(const SampleFile& file) {
  std::optional<std::size_t> base;
  if (file.meta.contains("base_index")) {
    const auto& b = file.meta.at("base_index");
    if (!b.is_number_unsigned()) throw ParseError("meta.base_index must be a nonnegative integer");
    base = b.get<std::size_t>();
  }
  return CorrespondenceSample(file.pairs, base);
}

std::string write_certificate(const CertificateFile& file) {
  const auto& c = file.certificate;
  json j;
  j["version"] = kCertificateVersion;
  j["mode"] = file.mode;
  j["eps"] = c.eps;
  j["mu"] = c.mu_est;
  j["c_prime"] = number_or_null(c.c_prime);
  j["bound"] = number_or_null(c.bound);
  j["residual"] = c.residual;
  j["passed"] = c.passed;
  j["certificate_tol"] = c.certificate_tol;
  j["mu_source"] = to_string(c.mu_source);
  j["translation_mode"] = to_string(c.translation);
  j["dim"] = c.dim;
  j["rank"] = c.rank;
  j["base_index"] = c.base_index;
  json q = json::array();
  const auto& m = file.transform.linear();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) q.push_back(m(r, k));
  }
  j["Q"] = std::move(q);
  j["w"] = point_json(file.transform.translation());
  j["provenance"] = {{"input_hash", file.provenance.input_hash},
                     {"tool_version", file.provenance.tool_version},
                     {"seed", file.provenance.seed},
                     {"timestamp", file.provenance.timestamp}};
  return j.dump(2) + "\n";
}

CertificateFile parse_certificate(std::string_view text) {
  const json j = parse_json(text);
  if (!j.is_object() || !j.contains("version") || j.at("version") != kCertificateVersion) {
    throw ParseError(std::string("certificate: version must be \"") + kCertificateVersion + "\"");
  }
  CertificateFile out;
  auto& c = out.certificate;
  try {
    out.mode = j.value("mode", std::string("sample"));
    c.eps = number_from(j, "eps");
    c.mu_est = number_from(j, "mu");
    c.c_prime = number_from(j, "c_prime");
    c.bound = number_from(j, "bound");
    c.residual = number_from(j, "residual");
    c.passed = j.at("passed").get<bool>();
    c.certificate_tol = j.value("certificate_tol", kCertificateTol);
    const auto source = j.value("mu_source", std::string("estimated"));
    c.mu_source = source == "supplied" ? MuSource::Supplied
                  : source == "c-prime" ? MuSource::FromCPrime
                                        : MuSource::Estimated;
    c.translation = j.value("translation_mode", std::string("enclosing-ball")) == "mean"
                        ? TranslationMode::Mean
                        : TranslationMode::EnclosingBall;
    c.dim = j.at("dim").get<std::size_t>();
    c.rank = j.value("rank", c.dim);
    c.base_index = j.value("base_index", std::size_t{0});
    const auto& q = j.at("Q");
    const auto n = static_cast<Eigen::Index>(c.dim);
    if (!q.is_array() || q.size() != c.dim * c.dim) throw ParseError("certificate: Q must hold dim*dim numbers");
    Matrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index k = 0; k < n; ++k) m(r, k) = q.at(static_cast<std::size_t>(r * n + k)).get<double>();
    }
    out.transform = IsometryTransform(std::move(m), read_point(j.at("w"), c.dim, "certificate w"));
    const auto& p = j.at("provenance");
    out.provenance.input_hash = p.at("input_hash").get<std::string>();
    out.provenance.tool_version = p.at("tool_version").get<std::string>();
    out.provenance.seed = p.at("seed").get<std::uint64_t>();
    out.provenance.timestamp = p.at("timestamp").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("certificate: ") + e.what());
  } catch (const InvalidInput& e) {
    throw ParseError(std::string("certificate: ") + e.what());
  }
  return out;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace iap
