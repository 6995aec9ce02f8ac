#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "dnsa/colstore.hpp"
#include "dnsa/enrich.hpp"

namespace dnsa {

// Exact distinct counting throughout: a unique active user is a subscriber
// with at least one joined query in the window; unjoined records never enter
// a distinct count.

struct HourlyUsersRow {
  std::string date;
  uint32_t hour = 0;
  ServerId server = ServerId::Dns1;
  uint64_t unique_subscribers = 0;

  bool operator==(const HourlyUsersRow&) const = default;
};

struct CategoryTrafficRow {
  std::string date;
  uint32_t hour = 0;
  std::string category;
  uint64_t unique_subscribers = 0;

  bool operator==(const CategoryTrafficRow&) const = default;
};

struct RegionDensityRow {
  std::string date;
  std::string region;  // "??" when the record never joined
  uint64_t query_count = 0;
  uint64_t unique_subscribers = 0;

  bool operator==(const RegionDensityRow&) const = default;
};

class HourlyUsersAccumulator {
 public:
  void add(const EnrichedRecord& record);
  std::vector<HourlyUsersRow> rows() const;  // sorted by (date, hour, server)

 private:
  std::map<PartitionKey, std::unordered_set<uint64_t>> subscribers_;
};

class CategoryTrafficAccumulator {
 public:
  void add(const EnrichedRecord& record);
  std::vector<CategoryTrafficRow> rows() const;  // sorted by (date, hour, category)

 private:
  struct Key {
    std::string date;
    uint32_t hour;
    std::string category;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::unordered_set<uint64_t>> subscribers_;
};

class RegionDensityAccumulator {
 public:
  void add(const EnrichedRecord& record);
  std::vector<RegionDensityRow> rows() const;  // sorted by (date, region)

 private:
  struct Key {
    std::string date;
    std::string region;
    auto operator<=>(const Key&) const = default;
  };
  struct Bucket {
    uint64_t query_count = 0;
    std::unordered_set<uint64_t> subscribers;
  };
  std::map<Key, Bucket> buckets_;
};

template <typename Row>
struct AggregateResult {
  std::vector<Row> rows;
  std::vector<std::string> missing_dates;  // dates in range with no partition
  uint64_t segments_scanned = 0;
};

using HourlyUsersResult = AggregateResult<HourlyUsersRow>;
using CategoryTrafficResult = AggregateResult<CategoryTrafficRow>;
using RegionDensityResult = AggregateResult<RegionDensityRow>;

// Inclusive ISO date range over a dataset written by run_pipeline. Missing
// dates are reported, present ones are still aggregated.
HourlyUsersResult unique_users_hourly(const std::filesystem::path& dataset_root,
                                      const std::string& from_date, const std::string& to_date);
CategoryTrafficResult category_traffic(const std::filesystem::path& dataset_root,
                                       const std::string& date);
RegionDensityResult region_density(const std::filesystem::path& dataset_root,
                                   const std::string& date);

// Plot-ready CSV, header row, LF endings, rows already in key order.
void emit_plot_data(const HourlyUsersResult& result, const std::filesystem::path& path);
void emit_plot_data(const CategoryTrafficResult& result, const std::filesystem::path& path);
void emit_plot_data(const RegionDensityResult& result, const std::filesystem::path& path);

std::string to_csv(const HourlyUsersResult& result);
std::string to_csv(const CategoryTrafficResult& result);
std::string to_csv(const RegionDensityResult& result);

// "YYYY-MM-DD"; throws ValidationError on anything else.
void check_date_string(const std::string& date);
std::vector<std::string> dates_in_range(const std::string& from_date, const std::string& to_date);

}  // namespace dnsa
