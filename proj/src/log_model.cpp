#include "dnsa/log_model.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>

#include "dnsa/errors.hpp"

namespace dnsa {

namespace {

constexpr std::string_view kQueryTypeNames[kQueryTypeCount] = {
    "A", "AAAA", "CNAME", "MX", "TXT", "NS", "PTR", "OTHER"};

constexpr std::string_view kRejectReasonNames[kRejectReasonCount] = {
    "wrong_field_count", "bad_timestamp", "bad_server", "bad_ip",
    "empty_domain",      "bad_type",      "bad_rcode"};

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::optional<uint64_t> parse_u64(std::string_view s) {
  if (!all_digits(s) || s.size() > 20) return std::nullopt;
  uint64_t value = 0;
  for (char c : s) {
    uint64_t digit = static_cast<uint64_t>(c - '0');
    if (value > (UINT64_MAX - digit) / 10) return std::nullopt;
    value = value * 10 + digit;
  }
  return value;
}

}  // namespace

std::string_view to_string(ServerId server) {
  switch (server) {
    case ServerId::Dns1: return "dns1";
    case ServerId::Dns2: return "dns2";
    case ServerId::Dns3: return "dns3";
  }
  return "dns?";
}

std::string_view to_string(QueryType type) {
  return kQueryTypeNames[static_cast<std::size_t>(type)];
}

std::string_view to_string(RejectReason reason) {
  return kRejectReasonNames[static_cast<std::size_t>(reason)];
}

std::optional<ServerId> parse_server_id(std::string_view token) {
  if (token == "dns1") return ServerId::Dns1;
  if (token == "dns2") return ServerId::Dns2;
  if (token == "dns3") return ServerId::Dns3;
  return std::nullopt;
}

std::optional<QueryType> parse_query_type(std::string_view token) {
  for (std::size_t i = 0; i < kQueryTypeCount; ++i) {
    if (token == kQueryTypeNames[i]) return static_cast<QueryType>(i);
  }
  return std::nullopt;
}

std::string format_ipv4(uint32_t ip) {
  char buf[16];
  int n = std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", (ip >> 24) & 0xff,
                        (ip >> 16) & 0xff, (ip >> 8) & 0xff, ip & 0xff);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::optional<uint32_t> parse_ipv4(std::string_view text) {
  uint32_t ip = 0;
  std::size_t pos = 0;
  for (int octet = 0; octet < 4; ++octet) {
    std::size_t end = (octet < 3) ? text.find('.', pos) : text.size();
    if (end == std::string_view::npos) return std::nullopt;
    std::string_view part = text.substr(pos, end - pos);
    if (part.empty() || part.size() > 3 || !all_digits(part)) return std::nullopt;
    uint32_t value = 0;
    for (char c : part) value = value * 10 + static_cast<uint32_t>(c - '0');
    if (value > 255) return std::nullopt;
    ip = (ip << 8) | value;
    pos = end + 1;
  }
  return ip;
}

namespace {

// Domains are ASCII, printable, no whitespace; uppercase is folded here so
// every downstream comparison is case-insensitive.
std::optional<std::string> normalize_domain(std::string_view field) {
  if (field.empty() || field.size() > kMaxDomainBytes) return std::nullopt;
  std::string name;
  name.reserve(field.size());
  for (char c : field) {
    unsigned char b = static_cast<unsigned char>(c);
    if (b <= 0x20 || b >= 0x7f) return std::nullopt;
    if (b >= 'A' && b <= 'Z') b = static_cast<unsigned char>(b - 'A' + 'a');
    name.push_back(static_cast<char>(b));
  }
  return name;
}

}  // namespace

ParseOutcome parse_line(std::string_view line) {
  std::string_view fields[6];
  std::size_t count = 0;
  std::size_t pos = 0;
  while (true) {
    std::size_t tab = line.find('\t', pos);
    std::string_view field =
        (tab == std::string_view::npos) ? line.substr(pos) : line.substr(pos, tab - pos);
    if (count == 6) return RejectReason::WrongFieldCount;
    fields[count++] = field;
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  if (count != 6) return RejectReason::WrongFieldCount;

  auto timestamp = parse_u64(fields[0]);
  if (!timestamp || *timestamp == 0) return RejectReason::BadTimestamp;

  auto server = parse_server_id(fields[1]);
  if (!server) return RejectReason::BadServer;

  auto ip = parse_ipv4(fields[2]);
  if (!ip) return RejectReason::BadIp;

  auto name = normalize_domain(fields[3]);
  if (!name) return RejectReason::EmptyDomain;

  auto type = parse_query_type(fields[4]);
  if (!type) return RejectReason::BadType;

  auto rcode = parse_u64(fields[5]);
  if (!rcode || *rcode > UINT16_MAX) return RejectReason::BadRcode;

  DnsQueryRecord record;
  record.timestamp_ms = *timestamp;
  record.server_id = *server;
  record.client_ip = *ip;
  record.query_name = std::move(*name);
  record.query_type = *type;
  record.response_code = static_cast<uint16_t>(*rcode);
  return record;
}

std::string format_line(const DnsQueryRecord& record) {
  std::string line;
  line.reserve(48 + record.query_name.size());
  line += std::to_string(record.timestamp_ms);
  line += '\t';
  line += to_string(record.server_id);
  line += '\t';
  line += format_ipv4(record.client_ip);
  line += '\t';
  line += record.query_name;
  line += '\t';
  line += to_string(record.query_type);
  line += '\t';
  line += std::to_string(record.response_code);
  return line;
}

uint64_t RejectStats::total() const {
  return std::accumulate(by_reason.begin(), by_reason.end(), uint64_t{0});
}

void RejectStats::merge(const RejectStats& other) {
  for (std::size_t i = 0; i < by_reason.size(); ++i) by_reason[i] += other.by_reason[i];
}

ParsedFile parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open log file: " + path.string());

  std::string contents;
  in.seekg(0, std::ios::end);
  contents.resize(static_cast<std::size_t>(in.tellg()));
  in.seekg(0, std::ios::beg);
  in.read(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (in.bad()) throw IoError("read failure on log file: " + path.string());

  ParsedFile result;
  std::string_view rest(contents);
  while (!rest.empty()) {
    std::size_t nl = rest.find('\n');
    std::string_view line = (nl == std::string_view::npos) ? rest : rest.substr(0, nl);
    rest = (nl == std::string_view::npos) ? std::string_view{} : rest.substr(nl + 1);
    if (line.empty()) continue;
    ParseOutcome outcome = parse_line(line);
    if (auto* record = std::get_if<DnsQueryRecord>(&outcome)) {
      result.records.push_back(std::move(*record));
    } else {
      ++result.rejects.count(std::get<RejectReason>(outcome));
    }
  }
  return result;
}

}  // namespace dnsa
