#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dnsa/errors.hpp"
#include "dnsa/log_model.hpp"

namespace dnsa {

// CDR side of the join: an IP belongs to a subscriber over [start_ms, end_ms).
struct SubscriberAssignment {
  uint64_t subscriber_id = 0;
  uint32_t client_ip = 0;
  uint64_t start_ms = 0;
  uint64_t end_ms = 0;

  bool operator==(const SubscriberAssignment&) const = default;
};

// CRM side: demographics keyed by subscriber.
struct SubscriberProfile {
  uint64_t subscriber_id = 0;
  std::string city;
  std::string region_code;
};

struct CategoryRule {
  std::string domain_suffix;  // lowercase, no leading dot
  std::string category;
};

inline constexpr std::string_view kUncategorized = "Uncategorized";

class OverlappingIntervalsError : public ValidationError {
 public:
  OverlappingIntervalsError(uint32_t ip, const SubscriberAssignment& a,
                            const SubscriberAssignment& b);

  uint32_t ip;
  SubscriberAssignment first;
  SubscriberAssignment second;
};

// Immutable once built; lookup(ip, t) binary-searches the per-IP intervals.
class AssignmentIndex {
 public:
  static AssignmentIndex build(std::vector<SubscriberAssignment> assignments);

  std::optional<uint64_t> lookup(uint32_t ip, uint64_t timestamp_ms) const;
  std::size_t size() const { return size_; }

 private:
  struct Interval {
    uint64_t start_ms;
    uint64_t end_ms;
    uint64_t subscriber_id;
  };

  std::unordered_map<uint32_t, std::vector<Interval>> by_ip_;
  std::size_t size_ = 0;
};

class CrmTable {
 public:
  static CrmTable build(std::vector<SubscriberProfile> profiles);

  const SubscriberProfile* find(uint64_t subscriber_id) const;
  std::size_t size() const { return by_id_.size(); }

 private:
  std::unordered_map<uint64_t, SubscriberProfile> by_id_;
};

class RuleSet {
 public:
  static RuleSet build(std::vector<CategoryRule> rules);

  // Longest suffix match on label boundaries; "example.com" matches itself
  // and "a.example.com" but not "badexample.com". No match -> Uncategorized.
  std::string_view categorize(std::string_view lowercase_name) const;
  std::size_t size() const { return by_suffix_.size(); }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::unordered_map<std::string, std::string, StringHash, std::equal_to<>> by_suffix_;
};

struct EnrichedRecord {
  DnsQueryRecord query;
  std::optional<uint64_t> subscriber_id;
  std::string city;         // empty when subscriber absent
  std::string region_code;  // empty when subscriber absent
  std::string category;

  bool operator==(const EnrichedRecord&) const = default;
};

struct JoinStats {
  uint64_t joined = 0;        // subscriber and CRM row found
  uint64_t unmatched_ip = 0;  // no CDR interval covers (ip, t)
  uint64_t missing_crm = 0;   // CDR matched but no CRM row; subscriber dropped

  void merge(const JoinStats& other);
};

struct EnrichResult {
  std::vector<EnrichedRecord> records;
  JoinStats stats;
};

// Left join: output order and length equal the input's. The by-value form
// moves each record into its enriched row.
EnrichResult enrich(std::vector<DnsQueryRecord> records, const AssignmentIndex& index,
                    const CrmTable& crm, const RuleSet& rules);
EnrichResult enrich(std::span<const DnsQueryRecord> records, const AssignmentIndex& index,
                    const CrmTable& crm, const RuleSet& rules);

// CSV loaders; headers are mandatory and validated.
// cdr:   subscriber_id,ip,start_ms,end_ms
// crm:   subscriber_id,city,region_code
// rules: suffix,category
std::vector<SubscriberAssignment> load_assignments_csv(const std::filesystem::path& path);
std::vector<SubscriberProfile> load_profiles_csv(const std::filesystem::path& path);
std::vector<CategoryRule> load_rules_csv(const std::filesystem::path& path);

}  // namespace dnsa
