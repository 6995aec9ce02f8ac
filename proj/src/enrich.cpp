#include "dnsa/enrich.hpp"

#include <algorithm>
#include <charconv>

#include "dnsa/csv.hpp"

namespace dnsa {

namespace {

uint64_t parse_u64_field(const std::string& text, const std::string& context) {
  uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError("bad unsigned integer '" + text + "' in " + context);
  }
  return value;
}

}  // namespace

OverlappingIntervalsError::OverlappingIntervalsError(uint32_t ip, const SubscriberAssignment& a,
                                                     const SubscriberAssignment& b)
    : ValidationError("overlapping CDR intervals for ip " + format_ipv4(ip) + ": [" +
                      std::to_string(a.start_ms) + "," + std::to_string(a.end_ms) +
                      ") subscriber " + std::to_string(a.subscriber_id) + " vs [" +
                      std::to_string(b.start_ms) + "," + std::to_string(b.end_ms) +
                      ") subscriber " + std::to_string(b.subscriber_id)),
      ip(ip),
      first(a),
      second(b) {}

AssignmentIndex AssignmentIndex::build(std::vector<SubscriberAssignment> assignments) {
  AssignmentIndex index;
  index.size_ = assignments.size();
  for (const auto& a : assignments) {
    if (a.start_ms >= a.end_ms) {
      throw ValidationError("empty CDR interval for ip " + format_ipv4(a.client_ip) +
                            ": start " + std::to_string(a.start_ms) + " >= end " +
                            std::to_string(a.end_ms));
    }
    index.by_ip_[a.client_ip].push_back({a.start_ms, a.end_ms, a.subscriber_id});
  }
  for (auto& [ip, intervals] : index.by_ip_) {
    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& a, const Interval& b) { return a.start_ms < b.start_ms; });
    for (std::size_t i = 1; i < intervals.size(); ++i) {
      if (intervals[i - 1].end_ms > intervals[i].start_ms) {
        const auto& a = intervals[i - 1];
        const auto& b = intervals[i];
        throw OverlappingIntervalsError(
            ip, SubscriberAssignment{a.subscriber_id, ip, a.start_ms, a.end_ms},
            SubscriberAssignment{b.subscriber_id, ip, b.start_ms, b.end_ms});
      }
    }
  }
  return index;
}

std::optional<uint64_t> AssignmentIndex::lookup(uint32_t ip, uint64_t timestamp_ms) const {
  auto it = by_ip_.find(ip);
  if (it == by_ip_.end()) return std::nullopt;
  const auto& intervals = it->second;
  // First interval with start > t, then step back one.
  auto upper = std::upper_bound(
      intervals.begin(), intervals.end(), timestamp_ms,
      [](uint64_t t, const Interval& iv) { return t < iv.start_ms; });
  if (upper == intervals.begin()) return std::nullopt;
  const Interval& candidate = *(upper - 1);
  if (timestamp_ms < candidate.end_ms) return candidate.subscriber_id;
  return std::nullopt;
}

CrmTable CrmTable::build(std::vector<SubscriberProfile> profiles) {
  CrmTable table;
  table.by_id_.reserve(profiles.size());
  for (auto& p : profiles) {
    uint64_t id = p.subscriber_id;
    if (!table.by_id_.emplace(id, std::move(p)).second) {
      throw ValidationError("duplicate subscriber_id in CRM table: " + std::to_string(id));
    }
  }
  return table;
}

const SubscriberProfile* CrmTable::find(uint64_t subscriber_id) const {
  auto it = by_id_.find(subscriber_id);
  return it == by_id_.end() ? nullptr : &it->second;
}

RuleSet RuleSet::build(std::vector<CategoryRule> rules) {
  RuleSet set;
  set.by_suffix_.reserve(rules.size());
  for (auto& rule : rules) {
    if (rule.domain_suffix.empty()) {
      throw ValidationError("empty domain suffix in category rules");
    }
    if (rule.domain_suffix.front() == '.') {
      throw ValidationError("category rule suffix must not start with a dot: " +
                            rule.domain_suffix);
    }
    for (char c : rule.domain_suffix) {
      if (c >= 'A' && c <= 'Z') {
        throw ValidationError("category rule suffix must be lowercase: " + rule.domain_suffix);
      }
    }
    std::string suffix = rule.domain_suffix;
    if (!set.by_suffix_.emplace(std::move(suffix), std::move(rule.category)).second) {
      throw ValidationError("duplicate category rule suffix: " + rule.domain_suffix);
    }
  }
  return set;
}

std::string_view RuleSet::categorize(std::string_view lowercase_name) const {
  // Candidate suffixes begin at label boundaries, longest first; the first
  // hit is therefore the longest matching suffix.
  std::size_t pos = 0;
  while (pos < lowercase_name.size()) {
    auto it = by_suffix_.find(lowercase_name.substr(pos));
    if (it != by_suffix_.end()) return it->second;
    std::size_t dot = lowercase_name.find('.', pos);
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  return kUncategorized;
}

void JoinStats::merge(const JoinStats& other) {
  joined += other.joined;
  unmatched_ip += other.unmatched_ip;
  missing_crm += other.missing_crm;
}

EnrichResult enrich(std::vector<DnsQueryRecord> records, const AssignmentIndex& index,
                    const CrmTable& crm, const RuleSet& rules) {
  EnrichResult result;
  result.records.reserve(records.size());
  for (auto& record : records) {
    EnrichedRecord out;
    out.category = rules.categorize(record.query_name);
    if (auto subscriber = index.lookup(record.client_ip, record.timestamp_ms)) {
      if (const SubscriberProfile* profile = crm.find(*subscriber)) {
        out.subscriber_id = *subscriber;
        out.city = profile->city;
        out.region_code = profile->region_code;
        ++result.stats.joined;
      } else {
        // Keep the row, drop all subscriber fields; a dangling id without
        // demographics would break the presence invariant.
        ++result.stats.missing_crm;
      }
    } else {
      ++result.stats.unmatched_ip;
    }
    out.query = std::move(record);
    result.records.push_back(std::move(out));
  }
  return result;
}

EnrichResult enrich(std::span<const DnsQueryRecord> records, const AssignmentIndex& index,
                    const CrmTable& crm, const RuleSet& rules) {
  return enrich(std::vector<DnsQueryRecord>(records.begin(), records.end()), index, crm, rules);
}

std::vector<SubscriberAssignment> load_assignments_csv(const std::filesystem::path& path) {
  CsvFile csv = read_csv(path, "subscriber_id,ip,start_ms,end_ms");
  std::vector<SubscriberAssignment> assignments;
  assignments.reserve(csv.rows.size());
  for (const auto& row : csv.rows) {
    SubscriberAssignment a;
    a.subscriber_id = parse_u64_field(row[0], "cdr subscriber_id");
    auto ip = parse_ipv4(row[1]);
    if (!ip) throw ValidationError("bad ip '" + row[1] + "' in " + path.string());
    a.client_ip = *ip;
    a.start_ms = parse_u64_field(row[2], "cdr start_ms");
    a.end_ms = parse_u64_field(row[3], "cdr end_ms");
    assignments.push_back(a);
  }
  return assignments;
}

std::vector<SubscriberProfile> load_profiles_csv(const std::filesystem::path& path) {
  CsvFile csv = read_csv(path, "subscriber_id,city,region_code");
  std::vector<SubscriberProfile> profiles;
  profiles.reserve(csv.rows.size());
  for (auto& row : csv.rows) {
    SubscriberProfile p;
    p.subscriber_id = parse_u64_field(row[0], "crm subscriber_id");
    p.city = std::move(row[1]);
    p.region_code = std::move(row[2]);
    profiles.push_back(std::move(p));
  }
  return profiles;
}

std::vector<CategoryRule> load_rules_csv(const std::filesystem::path& path) {
  CsvFile csv = read_csv(path, "suffix,category");
  std::vector<CategoryRule> rules;
  rules.reserve(csv.rows.size());
  for (auto& row : csv.rows) {
    rules.push_back(CategoryRule{std::move(row[0]), std::move(row[1])});
  }
  return rules;
}

}  // namespace dnsa
