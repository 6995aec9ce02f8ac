#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dnsa {

// One log line, tab separated, LF terminated:
//   <timestamp_ms>\t<server_id>\t<client_ip>\t<query_name>\t<query_type>\t<response_code>
// server_id is one of dns1/dns2/dns3 (lowercase), client_ip is a dotted quad,
// query_type is an uppercase token, response_code is decimal.

enum class ServerId : uint8_t { Dns1 = 1, Dns2 = 2, Dns3 = 3 };

enum class QueryType : uint8_t { A, AAAA, CNAME, MX, TXT, NS, PTR, OTHER };

inline constexpr std::size_t kQueryTypeCount = 8;
inline constexpr std::size_t kMaxDomainBytes = 253;

struct DnsQueryRecord {
  uint64_t timestamp_ms = 0;
  ServerId server_id = ServerId::Dns1;
  uint32_t client_ip = 0;  // host byte order
  std::string query_name;  // lowercase, non-empty, <= 253 bytes
  QueryType query_type = QueryType::A;
  uint16_t response_code = 0;

  bool operator==(const DnsQueryRecord&) const = default;
};

enum class RejectReason : uint8_t {
  WrongFieldCount,
  BadTimestamp,
  BadServer,
  BadIp,
  EmptyDomain,
  BadType,
  BadRcode,
};

inline constexpr std::size_t kRejectReasonCount = 7;

std::string_view to_string(ServerId server);
std::string_view to_string(QueryType type);
std::string_view to_string(RejectReason reason);

std::optional<ServerId> parse_server_id(std::string_view token);
std::optional<QueryType> parse_query_type(std::string_view token);

std::string format_ipv4(uint32_t ip);
std::optional<uint32_t> parse_ipv4(std::string_view text);

using ParseOutcome = std::variant<DnsQueryRecord, RejectReason>;

// Total over arbitrary byte strings; a malformed line yields the reject
// reason of the first failing field, scanning left to right.
ParseOutcome parse_line(std::string_view line);

// Canonical 6-field form; parse_line(format_line(r)) == r.
std::string format_line(const DnsQueryRecord& record);

struct RejectStats {
  std::array<uint64_t, kRejectReasonCount> by_reason{};

  uint64_t total() const;
  uint64_t& count(RejectReason reason) { return by_reason[static_cast<std::size_t>(reason)]; }
  uint64_t count(RejectReason reason) const { return by_reason[static_cast<std::size_t>(reason)]; }
  void merge(const RejectStats& other);
};

struct ParsedFile {
  std::vector<DnsQueryRecord> records;
  RejectStats rejects;
};

// Empty lines are skipped; records.size() + rejects.total() equals the number
// of non-empty lines. Throws IoError if the file cannot be read.
ParsedFile parse_file(const std::filesystem::path& path);

}  // namespace dnsa
