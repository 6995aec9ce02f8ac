#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dnsa {

// The generator plants ground truth (duplicates, placeholders, join coverage)
// and records exact counts in a manifest, so pipeline accounting can be
// checked against construction instead of against live traffic.

struct GeneratorSpec {
  uint64_t seed = 42;
  uint32_t subscriber_count = 1000;
  uint32_t days = 7;
  uint32_t base_queries_per_subscriber_day = 100;
  // Relative traffic intensity per hour of day; the default dips at 04-05 and
  // peaks at 20-23.
  std::array<double, 24> hourly_weights{};
  std::map<std::string, double> category_mix;  // probabilities, sum 1
  std::map<std::string, double> region_mix;    // probabilities, sum 1
  double duplicate_rate = 0.01;
  double placeholder_rate = 0.005;
};

GeneratorSpec default_spec();

// Throws ValidationError on out-of-range fields.
void validate_spec(const GeneratorSpec& spec);

// JSON object; absent keys keep their defaults.
GeneratorSpec load_spec_json(const std::filesystem::path& path);

struct GeneratedManifest {
  uint64_t seed = 0;
  std::string start_date;
  uint32_t days = 0;
  uint32_t subscriber_count = 0;
  uint32_t base_queries_per_subscriber_day = 0;

  uint64_t query_records = 0;         // plain records, parse and survive sanitize
  uint64_t planted_duplicates = 0;    // exact copies of query records
  uint64_t planted_placeholders = 0;  // "-" / "." domains, removed by sanitize
  uint64_t total_records = 0;
  uint64_t expected_joined = 0;  // query records all fall inside a CDR interval

  std::array<double, 24> hourly_intensity{};  // normalized hourly_weights

  std::vector<std::pair<std::string, uint64_t>> file_lines;  // rel path -> lines

  std::vector<std::filesystem::path> log_files;
  std::filesystem::path cdr_file;
  std::filesystem::path crm_file;
  std::filesystem::path rules_file;
  std::filesystem::path manifest_file;
};

// Writes logs/<server>-<date>.log per server per day, cdr.csv, crm.csv,
// rules.csv and manifest.txt under out_dir. Same spec, same bytes.
GeneratedManifest generate(const GeneratorSpec& spec, const std::filesystem::path& out_dir);

std::string manifest_text(const GeneratedManifest& manifest);

}  // namespace dnsa
