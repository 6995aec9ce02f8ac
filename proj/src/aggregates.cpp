#include "dnsa/aggregates.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>

#include "dnsa/errors.hpp"

namespace dnsa {

namespace {

std::chrono::year_month_day parse_date(const std::string& date) {
  auto bad = [&]() { return ValidationError("bad date '" + date + "', expected YYYY-MM-DD"); };
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') throw bad();
  auto digits = [&](std::size_t pos, std::size_t len) {
    int value = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (date[i] < '0' || date[i] > '9') throw bad();
      value = value * 10 + (date[i] - '0');
    }
    return value;
  };
  std::chrono::year_month_day ymd{std::chrono::year{digits(0, 4)},
                                  std::chrono::month{static_cast<unsigned>(digits(5, 2))},
                                  std::chrono::day{static_cast<unsigned>(digits(8, 2))}};
  if (!ymd.ok()) throw bad();
  return ymd;
}

// Collects part files per present date and feeds every record to `add`.
template <typename AddFn>
uint64_t scan_dates(const std::filesystem::path& root, const std::vector<std::string>& dates,
                    std::vector<std::string>& missing_dates, AddFn&& add) {
  if (!std::filesystem::is_directory(root)) {
    throw IoError("dataset root not found: " + root.string());
  }
  uint64_t segments = 0;
  for (const auto& date : dates) {
    const std::filesystem::path date_dir = root / ("date=" + date);
    if (!std::filesystem::is_directory(date_dir)) {
      missing_dates.push_back(date);
      continue;
    }
    std::vector<std::filesystem::path> parts;
    for (const auto& hour_entry : std::filesystem::directory_iterator(date_dir)) {
      if (!hour_entry.is_directory()) continue;
      for (const auto& server_entry : std::filesystem::directory_iterator(hour_entry.path())) {
        if (!server_entry.is_directory()) continue;
        for (const auto& part : std::filesystem::directory_iterator(server_entry.path())) {
          if (part.is_regular_file() && part.path().extension() == kSegmentExtension) {
            parts.push_back(part.path());
          }
        }
      }
    }
    std::sort(parts.begin(), parts.end());
    for (const auto& part : parts) {
      for (const auto& record : read_segment(part)) add(record);
      ++segments;
    }
  }
  return segments;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create output file: " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw IoError("write failure on output file: " + path.string());
}

}  // namespace

void check_date_string(const std::string& date) { parse_date(date); }

std::vector<std::string> dates_in_range(const std::string& from_date,
                                        const std::string& to_date) {
  const auto from = std::chrono::sys_days{parse_date(from_date)};
  const auto to = std::chrono::sys_days{parse_date(to_date)};
  if (from > to) {
    throw ValidationError("empty date range: " + from_date + " > " + to_date);
  }
  std::vector<std::string> dates;
  for (auto day = from; day <= to; day += std::chrono::days{1}) {
    const std::chrono::year_month_day ymd{day};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    dates.emplace_back(buf);
  }
  return dates;
}

void HourlyUsersAccumulator::add(const EnrichedRecord& record) {
  if (!record.subscriber_id) return;
  const PartitionKey key = partition_key_of(record.query.timestamp_ms, record.query.server_id);
  subscribers_[key].insert(*record.subscriber_id);
}

std::vector<HourlyUsersRow> HourlyUsersAccumulator::rows() const {
  std::vector<HourlyUsersRow> rows;
  rows.reserve(subscribers_.size());
  for (const auto& [key, subs] : subscribers_) {
    rows.push_back(HourlyUsersRow{key.date_string(), key.hour, key.server, subs.size()});
  }
  return rows;
}

void CategoryTrafficAccumulator::add(const EnrichedRecord& record) {
  if (!record.subscriber_id) return;
  const PartitionKey key = partition_key_of(record.query.timestamp_ms, record.query.server_id);
  subscribers_[Key{key.date_string(), key.hour, record.category}].insert(*record.subscriber_id);
}

std::vector<CategoryTrafficRow> CategoryTrafficAccumulator::rows() const {
  std::vector<CategoryTrafficRow> rows;
  rows.reserve(subscribers_.size());
  for (const auto& [key, subs] : subscribers_) {
    rows.push_back(CategoryTrafficRow{key.date, key.hour, key.category, subs.size()});
  }
  return rows;
}

void RegionDensityAccumulator::add(const EnrichedRecord& record) {
  const PartitionKey key = partition_key_of(record.query.timestamp_ms, record.query.server_id);
  const std::string region = record.subscriber_id ? record.region_code : std::string("??");
  Bucket& bucket = buckets_[Key{key.date_string(), region}];
  ++bucket.query_count;
  if (record.subscriber_id) bucket.subscribers.insert(*record.subscriber_id);
}

std::vector<RegionDensityRow> RegionDensityAccumulator::rows() const {
  std::vector<RegionDensityRow> rows;
  rows.reserve(buckets_.size());
  for (const auto& [key, bucket] : buckets_) {
    rows.push_back(
        RegionDensityRow{key.date, key.region, bucket.query_count, bucket.subscribers.size()});
  }
  return rows;
}

HourlyUsersResult unique_users_hourly(const std::filesystem::path& dataset_root,
                                      const std::string& from_date, const std::string& to_date) {
  HourlyUsersResult result;
  HourlyUsersAccumulator accumulator;
  result.segments_scanned =
      scan_dates(dataset_root, dates_in_range(from_date, to_date), result.missing_dates,
                 [&](const EnrichedRecord& r) { accumulator.add(r); });
  result.rows = accumulator.rows();
  return result;
}

CategoryTrafficResult category_traffic(const std::filesystem::path& dataset_root,
                                       const std::string& date) {
  CategoryTrafficResult result;
  CategoryTrafficAccumulator accumulator;
  result.segments_scanned = scan_dates(dataset_root, {date}, result.missing_dates,
                                       [&](const EnrichedRecord& r) { accumulator.add(r); });
  result.rows = accumulator.rows();
  return result;
}

RegionDensityResult region_density(const std::filesystem::path& dataset_root,
                                   const std::string& date) {
  RegionDensityResult result;
  RegionDensityAccumulator accumulator;
  result.segments_scanned = scan_dates(dataset_root, {date}, result.missing_dates,
                                       [&](const EnrichedRecord& r) { accumulator.add(r); });
  result.rows = accumulator.rows();
  return result;
}

std::string to_csv(const HourlyUsersResult& result) {
  std::string out = "date,hour,server,unique_subscribers\n";
  for (const auto& row : result.rows) {
    out += row.date + ',' + std::to_string(row.hour) + ',' + std::string(to_string(row.server)) +
           ',' + std::to_string(row.unique_subscribers) + '\n';
  }
  return out;
}

std::string to_csv(const CategoryTrafficResult& result) {
  std::string out = "date,hour,category,unique_subscribers\n";
  for (const auto& row : result.rows) {
    out += row.date + ',' + std::to_string(row.hour) + ',' + row.category + ',' +
           std::to_string(row.unique_subscribers) + '\n';
  }
  return out;
}

std::string to_csv(const RegionDensityResult& result) {
  std::string out = "date,region,query_count,unique_subscribers\n";
  for (const auto& row : result.rows) {
    out += row.date + ',' + row.region + ',' + std::to_string(row.query_count) + ',' +
           std::to_string(row.unique_subscribers) + '\n';
  }
  return out;
}

void emit_plot_data(const HourlyUsersResult& result, const std::filesystem::path& path) {
  write_file(path, to_csv(result));
}

void emit_plot_data(const CategoryTrafficResult& result, const std::filesystem::path& path) {
  write_file(path, to_csv(result));
}

void emit_plot_data(const RegionDensityResult& result, const std::filesystem::path& path) {
  write_file(path, to_csv(result));
}

}  // namespace dnsa
