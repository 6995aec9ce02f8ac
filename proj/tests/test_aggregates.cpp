#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "dnsa/aggregates.hpp"
#include "dnsa/csv.hpp"
#include "dnsa/datagen.hpp"
#include "dnsa/exec_engine.hpp"
#include "test_util.hpp"

using namespace dnsa;
using dnsa::test::TempDir;
using dnsa::test::make_enriched;
using dnsa::test::make_record;
using dnsa::test::read_file;

namespace {

constexpr uint64_t kHourMs = 3'600'000;
constexpr uint64_t kDay = 1557187200000ULL;  // 2019-05-07T00:00:00Z

EnrichedRecord joined(uint64_t ts, ServerId server, uint64_t subscriber, std::string region,
                      std::string category = "Other") {
  return make_enriched(make_record(ts, server, static_cast<uint32_t>(subscriber), "q.com"),
                       subscriber, "city-" + region, std::move(region), std::move(category));
}

EnrichedRecord unjoined(uint64_t ts, ServerId server) {
  return make_enriched(make_record(ts, server, 12345, "q.com"), std::nullopt, "", "",
                       "Uncategorized");
}

std::vector<EnrichedRecord> random_enriched(std::mt19937_64& rng, std::size_t count) {
  std::vector<EnrichedRecord> records;
  records.reserve(count);
  const char* regions[] = {"34", "06", "35"};
  const char* categories[] = {"Technology/Internet", "News/Media", "Social", "Other"};
  for (std::size_t i = 0; i < count; ++i) {
    const uint64_t ts = kDay + rng() % (2 * 24 * kHourMs);  // two days
    const ServerId server = static_cast<ServerId>(1 + rng() % 3);
    if (rng() % 5 == 0) {
      records.push_back(unjoined(ts, server));
    } else {
      records.push_back(
          joined(ts, server, 1 + rng() % 400, regions[rng() % 3], categories[rng() % 4]));
    }
  }
  return records;
}

}  // namespace

TEST_SUITE("aggregates") {

TEST_CASE("hourly unique users is a distinct count over joined records") {
  HourlyUsersAccumulator acc;
  acc.add(joined(kDay + 1, ServerId::Dns1, 1, "34"));
  acc.add(joined(kDay + 2, ServerId::Dns1, 1, "34"));
  acc.add(joined(kDay + 3, ServerId::Dns1, 2, "34"));
  acc.add(unjoined(kDay + 4, ServerId::Dns1));

  const auto rows = acc.rows();
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == HourlyUsersRow{"2019-05-07", 0, ServerId::Dns1, 2});
}

TEST_CASE("the same subscriber counts once per hour it appears in") {
  HourlyUsersAccumulator acc;
  acc.add(joined(kDay + 10 * kHourMs + 1, ServerId::Dns2, 7, "34"));
  acc.add(joined(kDay + 11 * kHourMs + 1, ServerId::Dns2, 7, "34"));
  const auto rows = acc.rows();
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].hour == 10);
  CHECK(rows[0].unique_subscribers == 1);
  CHECK(rows[1].hour == 11);
  CHECK(rows[1].unique_subscribers == 1);
}

TEST_CASE("category traffic counts unique usage, not queries") {
  CategoryTrafficAccumulator acc;
  acc.add(joined(kDay + 1, ServerId::Dns1, 1, "34", "Technology/Internet"));
  acc.add(joined(kDay + 2, ServerId::Dns2, 1, "34", "Technology/Internet"));
  const auto one = acc.rows();
  REQUIRE(one.size() == 1);
  CHECK(one[0] == CategoryTrafficRow{"2019-05-07", 0, "Technology/Internet", 1});

  acc.add(joined(kDay + 3, ServerId::Dns1, 1, "34", "News/Media"));
  const auto two = acc.rows();
  REQUIRE(two.size() == 2);
  CHECK(two[0].unique_subscribers == 1);
  CHECK(two[1].unique_subscribers == 1);
}

TEST_CASE("region density conserves query counts and buckets unjoined as ??") {
  RegionDensityAccumulator acc;
  for (int i = 0; i < 6; ++i) acc.add(joined(kDay + i, ServerId::Dns1, 1 + i % 2, "34"));
  const auto single = acc.rows();
  REQUIRE(single.size() == 1);
  CHECK(single[0] == RegionDensityRow{"2019-05-07", "34", 6, 2});

  for (int i = 0; i < 6; ++i) acc.add(unjoined(kDay + 100 + i, ServerId::Dns1));
  const auto both = acc.rows();
  REQUIRE(both.size() == 2);
  CHECK(both[0].region == "34");
  CHECK(both[1] == RegionDensityRow{"2019-05-07", "??", 6, 0});
}

TEST_CASE("all three aggregations match full-scan set recounts on 1e5 records") {
  std::mt19937_64 rng(20240229);
  const auto records = random_enriched(rng, 100000);

  HourlyUsersAccumulator hourly;
  CategoryTrafficAccumulator category;
  RegionDensityAccumulator region;
  for (const auto& record : records) {
    hourly.add(record);
    category.add(record);
    region.add(record);
  }

  // Independent recounts with ordered sets keyed by formatted strings.
  std::map<std::string, std::set<uint64_t>> hourly_oracle;
  std::map<std::string, std::set<uint64_t>> category_oracle;
  std::map<std::string, std::pair<uint64_t, std::set<uint64_t>>> region_oracle;
  for (const auto& record : records) {
    const PartitionKey key = partition_key_of(record.query.timestamp_ms, record.query.server_id);
    const std::string date = key.date_string();
    const std::string hour = std::to_string(key.hour);
    auto& bucket =
        region_oracle[date + "|" + (record.subscriber_id ? record.region_code : "??")];
    ++bucket.first;
    if (record.subscriber_id) {
      hourly_oracle[date + "|" + hour + "|" + std::string(to_string(key.server))].insert(
          *record.subscriber_id);
      category_oracle[date + "|" + hour + "|" + record.category].insert(*record.subscriber_id);
      bucket.second.insert(*record.subscriber_id);
    }
  }

  const auto hourly_rows = hourly.rows();
  REQUIRE(hourly_rows.size() == hourly_oracle.size());
  for (const auto& row : hourly_rows) {
    const auto key =
        row.date + "|" + std::to_string(row.hour) + "|" + std::string(to_string(row.server));
    CHECK(row.unique_subscribers == hourly_oracle.at(key).size());
  }

  const auto category_rows = category.rows();
  REQUIRE(category_rows.size() == category_oracle.size());
  for (const auto& row : category_rows) {
    const auto key = row.date + "|" + std::to_string(row.hour) + "|" + row.category;
    CHECK(row.unique_subscribers == category_oracle.at(key).size());
  }

  const auto region_rows = region.rows();
  REQUIRE(region_rows.size() == region_oracle.size());
  uint64_t total_queries = 0;
  for (const auto& row : region_rows) {
    const auto& oracle = region_oracle.at(row.date + "|" + row.region);
    CHECK(row.query_count == oracle.first);
    CHECK(row.unique_subscribers == oracle.second.size());
    total_queries += row.query_count;
  }
  CHECK(total_queries == records.size());
}

TEST_CASE("adding records never decreases counts and never touches other keys") {
  std::mt19937_64 rng(555);
  const auto base = random_enriched(rng, 2000);
  const auto extra = random_enriched(rng, 200);

  HourlyUsersAccumulator acc;
  for (const auto& record : base) acc.add(record);
  std::map<std::tuple<std::string, uint32_t, ServerId>, uint64_t> before;
  for (const auto& row : acc.rows()) {
    before[{row.date, row.hour, row.server}] = row.unique_subscribers;
  }

  std::set<std::tuple<std::string, uint32_t, ServerId>> affected;
  for (const auto& record : extra) {
    acc.add(record);
    if (record.subscriber_id) {
      const PartitionKey key =
          partition_key_of(record.query.timestamp_ms, record.query.server_id);
      affected.insert({key.date_string(), key.hour, key.server});
    }
  }

  for (const auto& row : acc.rows()) {
    const auto key = std::make_tuple(row.date, row.hour, row.server);
    const auto it = before.find(key);
    const uint64_t old = (it == before.end()) ? 0 : it->second;
    CHECK(row.unique_subscribers >= old);
    if (!affected.contains(key)) CHECK(row.unique_subscribers == old);
  }
}

TEST_CASE("dataset-level aggregation, missing dates and csv round-trips") {
  TempDir data;
  GeneratorSpec spec = default_spec();
  spec.subscriber_count = 50;
  spec.days = 2;
  spec.base_queries_per_subscriber_day = 20;
  const GeneratedManifest manifest = generate(spec, data.path());

  TempDir out;
  PipelineConfig config;
  config.log_paths = manifest.log_files;
  config.cdr_path = manifest.cdr_file;
  config.crm_path = manifest.crm_file;
  config.rules_path = manifest.rules_file;
  config.output_root = out.path();
  config.worker_count = 2;
  config.chunk_records = 500;
  run_pipeline(config);

  // Range extends one day past the data; the absent day is reported.
  HourlyUsersResult hourly = unique_users_hourly(out.path(), "2019-05-07", "2019-05-09");
  CHECK(hourly.segments_scanned > 0);
  REQUIRE(hourly.missing_dates.size() == 1);
  CHECK(hourly.missing_dates[0] == "2019-05-09");
  CHECK(!hourly.rows.empty());
  for (std::size_t i = 1; i < hourly.rows.size(); ++i) {
    const auto& a = hourly.rows[i - 1];
    const auto& b = hourly.rows[i];
    CHECK(std::tie(a.date, a.hour, a.server) < std::tie(b.date, b.hour, b.server));
  }

  CategoryTrafficResult category = category_traffic(out.path(), "2019-05-07");
  CHECK(!category.rows.empty());
  RegionDensityResult region = region_density(out.path(), "2019-05-08");
  CHECK(!region.rows.empty());
  uint64_t region_total = 0;
  for (const auto& row : region.rows) region_total += row.query_count;
  CHECK(region_total == manifest.query_records / 2);  // per-day share of survivors

  // CSV round-trips: emit, parse back, compare field by field.
  emit_plot_data(hourly, out.path() / "hourly.csv");
  emit_plot_data(category, out.path() / "category.csv");
  emit_plot_data(region, out.path() / "region.csv");

  {
    const std::string text = read_file(out.path() / "hourly.csv");
    std::size_t line_count = 0;
    std::size_t pos = 0;
    std::vector<HourlyUsersRow> parsed;
    while (pos < text.size()) {
      const std::size_t nl = text.find('\n', pos);
      const std::string line = text.substr(pos, nl - pos);
      pos = nl + 1;
      if (line_count++ == 0) {
        CHECK(line == "date,hour,server,unique_subscribers");
        continue;
      }
      const auto fields = split_csv_line(line);
      parsed.push_back(HourlyUsersRow{fields[0], static_cast<uint32_t>(std::stoul(fields[1])),
                                      *parse_server_id(fields[2]), std::stoull(fields[3])});
    }
    CHECK(parsed == hourly.rows);
    CHECK(text.back() == '\n');
  }
}

TEST_CASE("date parsing and range expansion") {
  CHECK(dates_in_range("2019-05-07", "2019-05-09") ==
        std::vector<std::string>{"2019-05-07", "2019-05-08", "2019-05-09"});
  CHECK(dates_in_range("2019-12-31", "2020-01-01") ==
        std::vector<std::string>{"2019-12-31", "2020-01-01"});
  CHECK_THROWS_AS(dates_in_range("2019-05-09", "2019-05-07"), ValidationError);
  CHECK_THROWS_AS(check_date_string("2019-5-7"), ValidationError);
  CHECK_THROWS_AS(check_date_string("2019-13-07"), ValidationError);
  CHECK_THROWS_AS(check_date_string("yesterday"), ValidationError);
  CHECK_THROWS_AS(unique_users_hourly("/nonexistent-root", "2019-05-07", "2019-05-07"), IoError);
}

}  // TEST_SUITE
