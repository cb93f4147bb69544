#pragma once

// JSON sample and certificate files, CSV import.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "iap/fitter.hpp"
#include "iap/nearmetric.hpp"
#include "json.hpp"

namespace iap {

inline constexpr const char* kSampleVersion = "iap-1";
inline constexpr const char* kCertificateVersion = "iap-cert-1";
inline constexpr const char* kToolVersion = "0.1.0";

/// Malformed input; line and column are 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct SampleFile {
  std::size_t dim = 0;
  std::vector<Correspondence> pairs;
  nlohmann::json meta = nlohmann::json::object();
};

SampleFile parse_sample(std::string_view text);
/// Two n-column blocks per row (x then y); blank lines and '#' comments skipped.
SampleFile parse_csv(std::string_view text);
/// JSON, or CSV when the extension is .csv.
SampleFile read_sample(const std::filesystem::path& path);
/// Canonical single-line JSON with sorted keys and a trailing newline.
std::string write_sample(const SampleFile& file);

/// Points stored as identity pairs.
SampleFile sample_from_points(std::span<const Vec> points, nlohmann::json meta = nlohmann::json::object());
SampleFile sample_from_pairs(std::vector<Correspondence> pairs, nlohmann::json meta = nlohmann::json::object());

/// Validated sample; meta.base_index, when present, declares the base pair.
CorrespondenceSample to_correspondences(const SampleFile& file);

struct Provenance {
  std::string input_hash;
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
  std::string timestamp;
};

struct CertificateFile {
  std::string mode = "sample";  // or "oracle"
  FitCertificate certificate;
  IsometryTransform transform = IsometryTransform::identity(1);
  Provenance provenance;
};

std::string write_certificate(const CertificateFile& file);
CertificateFile parse_certificate(std::string_view text);

/// FNV-1a 64-bit, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);
/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace iap
