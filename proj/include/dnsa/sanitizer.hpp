#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dnsa/log_model.hpp"

namespace dnsa {

struct SanitizeReport {
  uint64_t input_count = 0;
  uint64_t null_incomplete_removed = 0;
  uint64_t duplicates_removed = 0;
  uint64_t output_count = 0;

  void merge(const SanitizeReport& other);

  static std::string csv_header() { return "input,null_incomplete,duplicates,output"; }
  std::string csv_row() const;
};

struct SanitizeResult {
  std::vector<DnsQueryRecord> records;
  SanitizeReport report;
};

// Placeholder domain ("-" or ".") or zero timestamp. Structural nulls never
// reach this point; the parser already rejected them.
bool is_null_incomplete(const DnsQueryRecord& record);

// Drops null/incomplete records, then duplicates on the key
// (timestamp_ms, server_id, client_ip, query_name, query_type), keeping the
// first occurrence. Survivor order matches input order.
SanitizeResult sanitize(std::vector<DnsQueryRecord> records);

}  // namespace dnsa
