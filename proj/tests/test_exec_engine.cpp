#include <doctest.h>

#include <map>

#include "dnsa/aggregates.hpp"
#include "dnsa/colstore.hpp"
#include "dnsa/datagen.hpp"
#include "dnsa/exec_engine.hpp"
#include "test_util.hpp"

using namespace dnsa;
using dnsa::test::TempDir;
using dnsa::test::make_record;
using dnsa::test::read_file;
using dnsa::test::write_file;

namespace {

std::string repeated_lines(std::size_t count, uint64_t first_ts) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    out += format_line(make_record(first_ts + i, ServerId::Dns1, 1, "a.com")) + "\n";
  }
  return out;
}

PipelineConfig config_for(const GeneratedManifest& manifest, const std::filesystem::path& out,
                          uint32_t workers, uint64_t chunk) {
  PipelineConfig config;
  config.log_paths = manifest.log_files;
  config.cdr_path = manifest.cdr_file;
  config.crm_path = manifest.crm_file;
  config.rules_path = manifest.rules_file;
  config.output_root = out;
  config.worker_count = workers;
  config.chunk_records = chunk;
  return config;
}

// Canonical view of the persisted dataset: every partition's records sorted
// by (timestamp, ip, name), serialized through the canonical line format.
std::string canonical_dataset(const std::filesystem::path& root) {
  std::string out;
  for (const auto& date_entry : std::filesystem::directory_iterator(root)) {
    if (!date_entry.is_directory()) continue;
    std::vector<std::filesystem::path> parts;
    for (const auto& entry :
         std::filesystem::recursive_directory_iterator(date_entry.path())) {
      if (entry.is_regular_file() && entry.path().extension() == kSegmentExtension) {
        parts.push_back(entry.path());
      }
    }
    std::sort(parts.begin(), parts.end());
    for (const auto& part : parts) {
      auto records = read_segment(part);
      std::sort(records.begin(), records.end(),
                [](const EnrichedRecord& a, const EnrichedRecord& b) {
                  return std::tie(a.query.timestamp_ms, a.query.client_ip, a.query.query_name) <
                         std::tie(b.query.timestamp_ms, b.query.client_ip, b.query.query_name);
                });
      out += std::filesystem::relative(part.parent_path(), root).string();
      out += '\n';
      for (const auto& record : records) {
        out += format_line(record.query);
        out += '|' + (record.subscriber_id ? std::to_string(*record.subscriber_id) : "-");
        out += '|' + record.city + '|' + record.region_code + '|' + record.category + '\n';
      }
    }
  }
  return out;
}

std::string aggregate_csvs(const std::filesystem::path& root, const std::string& from,
                           const std::string& to) {
  std::string out = to_csv(unique_users_hourly(root, from, to));
  for (const auto& date : dates_in_range(from, to)) {
    out += to_csv(category_traffic(root, date));
    out += to_csv(region_density(root, date));
  }
  return out;
}

}  // namespace

TEST_SUITE("exec_engine") {

TEST_CASE("chunks split files at exact line counts and never span files") {
  TempDir dir;
  write_file(dir.file("one.log"), repeated_lines(100, 1000));

  SUBCASE("100 lines at chunk 40 -> 40/40/20") {
    const auto chunks = plan_chunks({dir.file("one.log")}, 40);
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0].line_count == 40);
    CHECK(chunks[1].line_count == 40);
    CHECK(chunks[2].line_count == 20);
    CHECK(chunks[0].first_line == 0);
    CHECK(chunks[1].first_line == 40);
    CHECK(chunks[2].first_line == 80);
    CHECK(chunks[1].byte_offset == chunks[0].byte_offset + chunks[0].byte_length);
  }

  SUBCASE("two files never share a chunk") {
    write_file(dir.file("two.log"), repeated_lines(10, 2000));
    write_file(dir.file("three.log"), repeated_lines(10, 3000));
    const auto chunks = plan_chunks({dir.file("two.log"), dir.file("three.log")}, 100);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].file_index == 0);
    CHECK(chunks[1].file_index == 1);
    CHECK(chunks[0].line_count == 10);
    CHECK(chunks[1].line_count == 10);
  }

  SUBCASE("chunk size one") {
    write_file(dir.file("five.log"), repeated_lines(5, 4000));
    const auto chunks = plan_chunks({dir.file("five.log")}, 1);
    CHECK(chunks.size() == 5);
  }

  SUBCASE("missing trailing newline still counts the last line") {
    std::string contents = repeated_lines(3, 5000);
    contents.pop_back();
    write_file(dir.file("chopped.log"), contents);
    const auto chunks = plan_chunks({dir.file("chopped.log")}, 2);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].line_count == 2);
    CHECK(chunks[1].line_count == 1);
  }

  SUBCASE("invalid chunk size") {
    CHECK_THROWS_AS(plan_chunks({dir.file("one.log")}, 0), ValidationError);
  }

  SUBCASE("unreadable input") {
    CHECK_THROWS_AS(plan_chunks({dir.file("absent.log")}, 10), IoError);
  }
}

TEST_CASE("outputs are identical across worker counts and chunk sizes") {
  TempDir data;
  GeneratorSpec spec = default_spec();
  spec.subscriber_count = 90;
  spec.days = 2;
  spec.base_queries_per_subscriber_day = 30;
  spec.duplicate_rate = 0.02;
  spec.placeholder_rate = 0.01;
  const GeneratedManifest manifest = generate(spec, data.path());

  // Sequential single-chunk run is the oracle.
  TempDir oracle_out;
  const RunReport oracle =
      run_pipeline(config_for(manifest, oracle_out.path(), 1, 1 << 20));
  const std::string oracle_dataset =
      canonical_dataset(oracle_out.path());
  const std::string oracle_csvs = aggregate_csvs(oracle_out.path(), "2019-05-07", "2019-05-08");
  CHECK(oracle.sanitize.duplicates_removed == manifest.planted_duplicates);
  CHECK(oracle.sanitize.null_incomplete_removed == manifest.planted_placeholders);

  for (const uint32_t workers : {2u, 4u}) {
    for (const uint64_t chunk : {uint64_t{97}, uint64_t{1000}}) {
      TempDir out;
      const RunReport report = run_pipeline(config_for(manifest, out.path(), workers, chunk));
      CHECK(report.total_lines == oracle.total_lines);
      CHECK(report.parsed == oracle.parsed);
      CHECK(report.sanitize.duplicates_removed == oracle.sanitize.duplicates_removed);
      CHECK(report.enriched == oracle.enriched);
      CHECK(report.segments_written == oracle.segments_written);
      CHECK(canonical_dataset(out.path()) == oracle_dataset);
      CHECK(aggregate_csvs(out.path(), "2019-05-07", "2019-05-08") == oracle_csvs);
    }
  }
}

TEST_CASE("a duplicate pair split across chunks is removed exactly once") {
  TempDir dir;
  // 2019-05-07T10:00Z
  const uint64_t hour_start = 1557223200000ULL;
  const DnsQueryRecord dup = make_record(hour_start + 123, ServerId::Dns1, 7, "dup.com");
  std::string contents = format_line(dup) + "\n";
  contents += repeated_lines(50, hour_start + 1000);  // same hour, distinct records
  contents += format_line(dup) + "\n";                // 52nd line, different chunk at chunk=10
  write_file(dir.file("dup.log"), contents);
  write_file(dir.file("cdr.csv"), "subscriber_id,ip,start_ms,end_ms\n");
  write_file(dir.file("crm.csv"), "subscriber_id,city,region_code\n");
  write_file(dir.file("rules.csv"), "suffix,category\n");

  PipelineConfig config;
  config.log_paths = {dir.file("dup.log")};
  config.cdr_path = dir.file("cdr.csv");
  config.crm_path = dir.file("crm.csv");
  config.rules_path = dir.file("rules.csv");
  config.output_root = dir.file("out");
  config.worker_count = 4;
  config.chunk_records = 10;

  const RunReport report = run_pipeline(config);
  CHECK(report.total_lines == 52);
  CHECK(report.sanitize.duplicates_removed == 1);
  CHECK(report.enriched == 51);

  const auto records =
      read_segment(dir.file("out") / "date=2019-05-07/hour=10/server=dns1/part-00000.tnc");
  CHECK(records.size() == 51);
  CHECK(records.front().query == dup);  // first occurrence kept, in input order
}

TEST_CASE("empty input set yields an all-zero report and no segments") {
  TempDir dir;
  write_file(dir.file("cdr.csv"), "subscriber_id,ip,start_ms,end_ms\n");
  write_file(dir.file("crm.csv"), "subscriber_id,city,region_code\n");
  write_file(dir.file("rules.csv"), "suffix,category\n");

  PipelineConfig config;
  config.cdr_path = dir.file("cdr.csv");
  config.crm_path = dir.file("crm.csv");
  config.rules_path = dir.file("rules.csv");
  config.output_root = dir.file("out");
  config.worker_count = 2;

  const RunReport report = run_pipeline(config);
  CHECK(report.total_lines == 0);
  CHECK(report.parsed == 0);
  CHECK(report.enriched == 0);
  CHECK(report.segments_written == 0);
  CHECK(report.partitions == 0);
  bool any_segment = false;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir.file("out"))) {
    if (entry.is_regular_file()) any_segment = true;
  }
  CHECK(!any_segment);
}

TEST_CASE("accounting equalities hold and reject counts flow through") {
  TempDir dir;
  std::string contents = repeated_lines(20, 1557187200000ULL + 500);
  contents += "garbage\n\n\n";  // one reject, two empty lines
  write_file(dir.file("in.log"), contents);
  write_file(dir.file("cdr.csv"), "subscriber_id,ip,start_ms,end_ms\n");
  write_file(dir.file("crm.csv"), "subscriber_id,city,region_code\n");
  write_file(dir.file("rules.csv"), "suffix,category\n");

  PipelineConfig config;
  config.log_paths = {dir.file("in.log")};
  config.cdr_path = dir.file("cdr.csv");
  config.crm_path = dir.file("crm.csv");
  config.rules_path = dir.file("rules.csv");
  config.output_root = dir.file("out");
  config.worker_count = 2;
  config.chunk_records = 7;

  const RunReport report = run_pipeline(config);
  CHECK(report.total_lines == 21);  // empty lines are not counted
  CHECK(report.parsed + report.rejected == report.total_lines);
  CHECK(report.rejected == 1);
  CHECK(report.sanitize.output_count ==
        report.sanitize.input_count - report.sanitize.null_incomplete_removed -
            report.sanitize.duplicates_removed);
  CHECK(report.enriched == report.sanitize.output_count);
  CHECK(report.join.joined + report.join.unmatched_ip + report.join.missing_crm ==
        report.enriched);

  const std::string text = report.text();
  CHECK(text.find("total_lines: 21") != std::string::npos);
  CHECK(text.find("reject_wrong_field_count: 1") != std::string::npos);

  write_run_report(report, dir.file("out"));
  const std::string csv = read_file(dir.file("out") / "sanitize_report.csv");
  CHECK(csv == SanitizeReport::csv_header() + "\n" + report.sanitize.csv_row() + "\n");
}

TEST_CASE("overlapping CDR intervals abort the run") {
  TempDir dir;
  write_file(dir.file("in.log"), repeated_lines(5, 1000));
  write_file(dir.file("cdr.csv"),
             "subscriber_id,ip,start_ms,end_ms\n1,10.0.0.1,100,200\n2,10.0.0.1,150,250\n");
  write_file(dir.file("crm.csv"), "subscriber_id,city,region_code\n");
  write_file(dir.file("rules.csv"), "suffix,category\n");

  PipelineConfig config;
  config.log_paths = {dir.file("in.log")};
  config.cdr_path = dir.file("cdr.csv");
  config.crm_path = dir.file("crm.csv");
  config.rules_path = dir.file("rules.csv");
  config.output_root = dir.file("out");

  CHECK_THROWS_AS(run_pipeline(config), OverlappingIntervalsError);
}

}  // TEST_SUITE
