#include "dnsa/sanitizer.hpp"

#include <unordered_set>

namespace dnsa {

namespace {

struct DuplicateKey {
  uint64_t timestamp_ms;
  uint32_t client_ip;
  uint8_t server_id;
  uint8_t query_type;
  std::string_view query_name;

  bool operator==(const DuplicateKey&) const = default;
};

struct DuplicateKeyHash {
  std::size_t operator()(const DuplicateKey& key) const {
    std::size_t h = std::hash<uint64_t>{}(key.timestamp_ms);
    h ^= std::hash<uint64_t>{}((uint64_t{key.client_ip} << 16) | (uint64_t{key.server_id} << 8) |
                               key.query_type) +
         0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<std::string_view>{}(key.query_name) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

DuplicateKey key_of(const DnsQueryRecord& record) {
  return DuplicateKey{record.timestamp_ms, record.client_ip,
                      static_cast<uint8_t>(record.server_id),
                      static_cast<uint8_t>(record.query_type), record.query_name};
}

}  // namespace

void SanitizeReport::merge(const SanitizeReport& other) {
  input_count += other.input_count;
  null_incomplete_removed += other.null_incomplete_removed;
  duplicates_removed += other.duplicates_removed;
  output_count += other.output_count;
}

std::string SanitizeReport::csv_row() const {
  return std::to_string(input_count) + ',' + std::to_string(null_incomplete_removed) + ',' +
         std::to_string(duplicates_removed) + ',' + std::to_string(output_count);
}

bool is_null_incomplete(const DnsQueryRecord& record) {
  return record.timestamp_ms == 0 || record.query_name == "-" || record.query_name == ".";
}

SanitizeResult sanitize(std::vector<DnsQueryRecord> records) {
  SanitizeResult result;
  result.report.input_count = records.size();

  // string_view keys point into the survivors; survivors are never
  // reallocated while the set is alive because we reserve up front.
  std::vector<DnsQueryRecord> survivors;
  survivors.reserve(records.size());
  std::unordered_set<DuplicateKey, DuplicateKeyHash> seen;
  seen.reserve(records.size());

  for (auto& record : records) {
    if (is_null_incomplete(record)) {
      ++result.report.null_incomplete_removed;
      continue;
    }
    survivors.push_back(std::move(record));
    if (!seen.insert(key_of(survivors.back())).second) {
      survivors.pop_back();
      ++result.report.duplicates_removed;
    }
  }

  result.report.output_count = survivors.size();
  result.records = std::move(survivors);
  return result;
}

}  // namespace dnsa
