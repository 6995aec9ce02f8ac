#include "dnsa/exec_engine.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "dnsa/colstore.hpp"
#include "dnsa/errors.hpp"

namespace dnsa {

namespace {

constexpr std::size_t kScanBufferBytes = 1 << 20;

struct ChunkOutput {
  uint64_t non_empty_lines = 0;
  RejectStats rejects;
  uint64_t null_incomplete = 0;
  std::map<PartitionKey, std::vector<DnsQueryRecord>> by_partition;
};

struct PartitionOutput {
  SanitizeReport sanitize;
  JoinStats join;
  uint64_t segments_written = 0;
};

// Runs fn(task_index) over [0, task_count) on `workers` threads. The first
// exception aborts the pool and is rethrown with fn's own context attached.
template <typename Fn>
void parallel_for(uint64_t task_count, uint32_t workers, std::vector<uint64_t>& tasks_per_worker,
                  Fn&& fn) {
  std::atomic<uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto body = [&](uint32_t worker_index) {
    while (!failed.load(std::memory_order_relaxed)) {
      const uint64_t task = next.fetch_add(1, std::memory_order_relaxed);
      if (task >= task_count) return;
      try {
        fn(task);
        ++tasks_per_worker[worker_index];
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  if (workers <= 1) {
    body(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (uint32_t w = 0; w < workers; ++w) pool.emplace_back(body, w);
  }
  if (error) std::rethrow_exception(error);
}

std::string read_byte_range(const std::filesystem::path& path, uint64_t offset, uint64_t length) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open log file: " + path.string());
  in.seekg(static_cast<std::streamoff>(offset));
  std::string buffer(length, '\0');
  in.read(buffer.data(), static_cast<std::streamsize>(length));
  if (in.gcount() != static_cast<std::streamsize>(length)) {
    throw IoError("log file shrank while reading: " + path.string());
  }
  return buffer;
}

ChunkOutput process_chunk(const WorkChunk& chunk, const std::filesystem::path& path) {
  const std::string buffer = read_byte_range(path, chunk.byte_offset, chunk.byte_length);
  ChunkOutput output;
  // Input is roughly time-ordered, so consecutive records usually land in the
  // same partition; remember the last bucket.
  PartitionKey last_key;
  std::vector<DnsQueryRecord>* last_bucket = nullptr;
  std::string_view rest(buffer);
  uint64_t lines_seen = 0;
  while (!rest.empty() && lines_seen < chunk.line_count) {
    const std::size_t nl = rest.find('\n');
    const std::string_view line = (nl == std::string_view::npos) ? rest : rest.substr(0, nl);
    rest = (nl == std::string_view::npos) ? std::string_view{} : rest.substr(nl + 1);
    ++lines_seen;
    if (line.empty()) continue;
    ++output.non_empty_lines;
    ParseOutcome outcome = parse_line(line);
    if (auto* record = std::get_if<DnsQueryRecord>(&outcome)) {
      if (is_null_incomplete(*record)) {
        ++output.null_incomplete;
        continue;
      }
      const PartitionKey key = partition_key_of(record->timestamp_ms, record->server_id);
      if (!last_bucket || key != last_key) {
        last_bucket = &output.by_partition[key];
        last_key = key;
      }
      last_bucket->push_back(std::move(*record));
    } else {
      ++output.rejects.count(std::get<RejectReason>(outcome));
    }
  }
  return output;
}

}  // namespace

std::vector<WorkChunk> plan_chunks(const std::vector<std::filesystem::path>& inputs,
                                   uint64_t chunk_records) {
  if (chunk_records < 1) throw ValidationError("chunk_records must be >= 1");

  std::vector<WorkChunk> chunks;
  std::vector<char> buffer(kScanBufferBytes);
  for (std::size_t file_index = 0; file_index < inputs.size(); ++file_index) {
    const auto& path = inputs[file_index];
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open log file: " + path.string());

    WorkChunk current;
    current.file_index = static_cast<uint32_t>(file_index);
    current.chunk_id = chunks.size();
    uint64_t file_lines = 0;
    uint64_t position = 0;
    bool line_open = false;  // bytes seen since the last newline

    auto close_chunk = [&](uint64_t end_position) {
      current.byte_length = end_position - current.byte_offset;
      chunks.push_back(current);
      current.byte_offset = end_position;
      current.first_line = file_lines;
      current.line_count = 0;
      current.chunk_id = chunks.size();
    };

    while (in) {
      in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
      const std::size_t got = static_cast<std::size_t>(in.gcount());
      if (in.bad()) throw IoError("read failure on log file: " + path.string());
      const char* cursor = buffer.data();
      const char* end = buffer.data() + got;
      while (cursor < end) {
        const char* nl = static_cast<const char*>(
            std::memchr(cursor, '\n', static_cast<std::size_t>(end - cursor)));
        if (!nl) {
          line_open = true;
          position += static_cast<uint64_t>(end - cursor);
          break;
        }
        position += static_cast<uint64_t>(nl - cursor) + 1;
        cursor = nl + 1;
        line_open = false;
        ++file_lines;
        if (++current.line_count == chunk_records) close_chunk(position);
      }
    }
    if (line_open) {
      ++file_lines;
      ++current.line_count;
    }
    if (current.line_count > 0) close_chunk(position);
  }
  return chunks;
}

RunReport run_pipeline(const PipelineConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  if (config.worker_count < 1) throw ValidationError("worker_count must be >= 1");

  const AssignmentIndex index = AssignmentIndex::build(load_assignments_csv(config.cdr_path));
  const CrmTable crm = CrmTable::build(load_profiles_csv(config.crm_path));
  const RuleSet rules = RuleSet::build(load_rules_csv(config.rules_path));

  std::error_code ec;
  std::filesystem::create_directories(config.output_root, ec);
  if (ec) throw IoError("cannot create output root " + config.output_root.string());

  const std::vector<WorkChunk> chunks = plan_chunks(config.log_paths, config.chunk_records);

  RunReport report;
  report.worker_count = config.worker_count;
  report.chunks = chunks.size();
  report.tasks_per_worker.assign(config.worker_count, 0);

  // Phase 1: parse chunks in parallel.
  std::vector<ChunkOutput> outputs(chunks.size());
  parallel_for(chunks.size(), config.worker_count, report.tasks_per_worker, [&](uint64_t task) {
    const WorkChunk& chunk = chunks[task];
    try {
      outputs[task] = process_chunk(chunk, config.log_paths[chunk.file_index]);
    } catch (const IoError& e) {
      throw IoError("chunk " + std::to_string(chunk.chunk_id) + " (" +
                    config.log_paths[chunk.file_index].string() + ", line " +
                    std::to_string(chunk.first_line) + ", byte " +
                    std::to_string(chunk.byte_offset) + "): " + e.what());
    }
  });

  // Merge barrier: per partition, chunk outputs concatenate in chunk order,
  // so the record order inside a partition is the input file order no matter
  // how work was chunked or scheduled.
  std::map<PartitionKey, std::vector<DnsQueryRecord>> partitions;
  for (auto& output : outputs) {
    report.total_lines += output.non_empty_lines;
    report.rejects.merge(output.rejects);
    report.sanitize.null_incomplete_removed += output.null_incomplete;
    for (auto& [key, records] : output.by_partition) {
      auto& merged = partitions[key];
      if (merged.empty()) {
        merged = std::move(records);
      } else {
        merged.insert(merged.end(), std::make_move_iterator(records.begin()),
                      std::make_move_iterator(records.end()));
      }
    }
    output.by_partition.clear();
  }
  report.rejected = report.rejects.total();
  report.parsed = report.total_lines - report.rejected;

  std::vector<std::pair<const PartitionKey, std::vector<DnsQueryRecord>>*> partition_list;
  partition_list.reserve(partitions.size());
  for (auto& entry : partitions) partition_list.push_back(&entry);

  // Phase 2: dedup, enrich and write each partition independently.
  std::vector<PartitionOutput> partition_outputs(partition_list.size());
  parallel_for(
      partition_list.size(), config.worker_count, report.tasks_per_worker, [&](uint64_t task) {
        auto& [key, records] = *partition_list[task];
        PartitionOutput& out = partition_outputs[task];

        SanitizeResult sanitized = sanitize(std::move(records));
        out.sanitize = sanitized.report;
        EnrichResult enriched = enrich(std::move(sanitized.records), index, crm, rules);
        out.join = enriched.stats;

        const std::filesystem::path rel = partition_path(key, 0);
        const std::filesystem::path full = config.output_root / rel;
        std::error_code dir_ec;
        std::filesystem::create_directories(full.parent_path(), dir_ec);
        if (dir_ec) {
          throw IoError("cannot create partition directory " + full.parent_path().string());
        }
        try {
          write_segment(enriched.records, full);
        } catch (const IoError& e) {
          throw IoError("partition " + rel.string() + ": " + e.what());
        }
        out.segments_written = 1;
      });

  for (const auto& out : partition_outputs) {
    report.sanitize.duplicates_removed += out.sanitize.duplicates_removed;
    report.join.merge(out.join);
    report.segments_written += out.segments_written;
  }
  report.partitions = partition_list.size();
  report.sanitize.input_count = report.parsed;
  report.sanitize.output_count = report.sanitize.input_count -
                                 report.sanitize.null_incomplete_removed -
                                 report.sanitize.duplicates_removed;
  report.enriched = report.sanitize.output_count;

  report.wall_ms = static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                             std::chrono::steady_clock::now() - started)
                                             .count());
  return report;
}

std::string RunReport::text() const {
  std::string out;
  auto kv = [&](const char* key, uint64_t value) {
    out += key;
    out += ": ";
    out += std::to_string(value);
    out += '\n';
  };
  kv("total_lines", total_lines);
  kv("parsed", parsed);
  kv("rejected", rejected);
  for (std::size_t i = 0; i < kRejectReasonCount; ++i) {
    std::string key = "reject_" + std::string(to_string(static_cast<RejectReason>(i)));
    kv(key.c_str(), rejects.by_reason[i]);
  }
  kv("sanitize_input", sanitize.input_count);
  kv("sanitize_null_incomplete", sanitize.null_incomplete_removed);
  kv("sanitize_duplicates", sanitize.duplicates_removed);
  kv("sanitize_output", sanitize.output_count);
  kv("joined", join.joined);
  kv("unmatched_ip", join.unmatched_ip);
  kv("missing_crm", join.missing_crm);
  kv("enriched", enriched);
  kv("partitions", partitions);
  kv("segments_written", segments_written);
  kv("chunks", chunks);
  kv("workers", worker_count);
  kv("wall_ms", wall_ms);
  for (std::size_t w = 0; w < tasks_per_worker.size(); ++w) {
    char key[32];
    std::snprintf(key, sizeof(key), "tasks_worker_%02zu", w);
    kv(key, tasks_per_worker[w]);
  }
  return out;
}

void write_run_report(const RunReport& report, const std::filesystem::path& dir) {
  {
    std::ofstream out(dir / "run_report.txt", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create run report in " + dir.string());
    const std::string text = report.text();
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out.flush()) throw IoError("write failure on run report in " + dir.string());
  }
  {
    std::ofstream out(dir / "sanitize_report.csv", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create sanitize report in " + dir.string());
    const std::string text =
        SanitizeReport::csv_header() + "\n" + report.sanitize.csv_row() + "\n";
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out.flush()) throw IoError("write failure on sanitize report in " + dir.string());
  }
}

}  // namespace dnsa
