#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dnsa/enrich.hpp"
#include "dnsa/log_model.hpp"
#include "dnsa/sanitizer.hpp"

namespace dnsa {

struct PipelineConfig {
  std::vector<std::filesystem::path> log_paths;
  std::filesystem::path cdr_path;
  std::filesystem::path crm_path;
  std::filesystem::path rules_path;
  std::filesystem::path output_root;
  uint64_t chunk_records = 1 << 20;
  uint32_t worker_count = 1;
};

// A contiguous run of lines within one file; chunks never span files.
struct WorkChunk {
  uint32_t file_index = 0;
  uint64_t first_line = 0;  // 0-based, counts physical lines
  uint64_t line_count = 0;
  uint64_t byte_offset = 0;
  uint64_t byte_length = 0;
  uint64_t chunk_id = 0;
};

std::vector<WorkChunk> plan_chunks(const std::vector<std::filesystem::path>& inputs,
                                   uint64_t chunk_records);

struct RunReport {
  uint64_t total_lines = 0;  // non-empty
  uint64_t parsed = 0;
  uint64_t rejected = 0;
  RejectStats rejects;
  SanitizeReport sanitize;
  JoinStats join;
  uint64_t enriched = 0;
  uint64_t partitions = 0;
  uint64_t segments_written = 0;
  uint64_t chunks = 0;
  uint32_t worker_count = 0;
  uint64_t wall_ms = 0;
  std::vector<uint64_t> tasks_per_worker;

  std::string text() const;  // key: value lines
};

// parse -> drop null/incomplete -> group by (date, hour, server) -> merge
// chunk outputs in chunk order -> dedup -> enrich -> write one segment per
// partition. Chunk merge order is fixed, so the persisted dataset does not
// depend on worker count or chunk size. Fails fast on the first hard error,
// tagged with chunk id and file position.
RunReport run_pipeline(const PipelineConfig& config);

// run_report.txt plus sanitize_report.csv under dir.
void write_run_report(const RunReport& report, const std::filesystem::path& dir);

}  // namespace dnsa
