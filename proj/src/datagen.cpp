#include "dnsa/datagen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <unordered_set>

#include <json.hpp>

#include "dnsa/colstore.hpp"
#include "dnsa/errors.hpp"
#include "dnsa/log_model.hpp"

namespace dnsa {

namespace {

constexpr uint64_t kMsPerHour = 3'600'000;
constexpr uint64_t kMsPerDay = 24 * kMsPerHour;
constexpr uint32_t kDomainsPerCategory = 6;

// Generation origin: 2019-05-07T00:00:00Z.
uint64_t start_epoch_ms() {
  using namespace std::chrono;
  return static_cast<uint64_t>(
      duration_cast<milliseconds>(sys_days{year{2019} / 5 / 7}.time_since_epoch()).count());
}

// Thin deterministic sampling layer; keeps draw sequences stable across
// standard library versions by avoiding std distributions.
class Sampler {
 public:
  explicit Sampler(uint64_t seed) : gen_(seed) {}

  uint64_t below(uint64_t n) { return gen_() % n; }

  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  // cumulative must be non-empty with a positive final value.
  std::size_t weighted(const std::vector<double>& cumulative) {
    double u = unit() * cumulative.back();
    for (std::size_t i = 0; i < cumulative.size(); ++i) {
      if (u < cumulative[i]) return i;
    }
    return cumulative.size() - 1;
  }

 private:
  std::mt19937_64 gen_;
};

std::vector<double> cumulative_of(const std::vector<double>& weights) {
  std::vector<double> cumulative(weights.size());
  double sum = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    sum += weights[i];
    cumulative[i] = sum;
  }
  return cumulative;
}

std::string slugify(const std::string& category) {
  std::string slug;
  slug.reserve(category.size());
  for (char c : category) {
    if (c >= 'A' && c <= 'Z') {
      slug.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      slug.push_back(c);
    } else {
      slug.push_back('-');
    }
  }
  return slug;
}

std::string default_city(const std::string& region_code) {
  if (region_code == "34") return "Istanbul";
  if (region_code == "06") return "Ankara";
  if (region_code == "35") return "Izmir";
  if (region_code == "16") return "Bursa";
  if (region_code == "01") return "Adana";
  return "city-" + region_code;
}

uint32_t pool_ip(uint32_t index) {
  return 0x0A000000u | ((index + 1) & 0x00FFFFFFu);  // 10.0.0.0/8
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create file: " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw IoError("write failure on file: " + path.string());
}

void check_mix(const std::map<std::string, double>& mix, const char* what) {
  if (mix.empty()) throw ValidationError(std::string(what) + " must not be empty");
  double sum = 0;
  for (const auto& [name, p] : mix) {
    if (name.empty()) throw ValidationError(std::string(what) + " has an empty key");
    if (p < 0) throw ValidationError(std::string(what) + " has a negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError(std::string(what) + " probabilities must sum to 1");
  }
}

}  // namespace

GeneratorSpec default_spec() {
  GeneratorSpec spec;
  spec.hourly_weights = {0.68, 0.52, 0.42, 0.34, 0.28, 0.30, 0.40, 0.55,
                         0.70, 0.80, 0.85, 0.88, 0.90, 0.88, 0.86, 0.88,
                         0.92, 1.00, 1.10, 1.20, 1.30, 1.35, 1.25, 0.95};
  spec.category_mix = {
      {"Technology/Internet", 0.40}, {"News/Media", 0.15}, {"Social", 0.15},
      {"Video/Streaming", 0.14},     {"Shopping", 0.10},   {"Other", 0.06},
  };
  spec.region_mix = {
      {"34", 0.50}, {"06", 0.20}, {"35", 0.15}, {"16", 0.10}, {"01", 0.05},
  };
  return spec;
}

void validate_spec(const GeneratorSpec& spec) {
  if (spec.subscriber_count < 1) throw ValidationError("subscriber_count must be >= 1");
  if (spec.days < 1) throw ValidationError("days must be >= 1");
  if (spec.base_queries_per_subscriber_day < 1) {
    throw ValidationError("base_queries_per_subscriber_day must be >= 1");
  }
  double weight_sum = 0;
  for (double w : spec.hourly_weights) {
    if (w < 0 || !std::isfinite(w)) throw ValidationError("hourly_weights must be non-negative");
    weight_sum += w;
  }
  if (weight_sum <= 0) throw ValidationError("hourly_weights must not be all zero");
  check_mix(spec.category_mix, "category_mix");
  check_mix(spec.region_mix, "region_mix");
  if (spec.duplicate_rate < 0 || spec.duplicate_rate >= 1) {
    throw ValidationError("duplicate_rate must be in [0,1)");
  }
  if (spec.placeholder_rate < 0 || spec.placeholder_rate >= 1) {
    throw ValidationError("placeholder_rate must be in [0,1)");
  }
}

GeneratorSpec load_spec_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open generator spec: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("bad generator spec json: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw ValidationError("generator spec must be a json object");

  GeneratorSpec spec = default_spec();
  try {
    if (doc.contains("seed")) spec.seed = doc["seed"].get<uint64_t>();
    if (doc.contains("subscriber_count")) spec.subscriber_count = doc["subscriber_count"].get<uint32_t>();
    if (doc.contains("days")) spec.days = doc["days"].get<uint32_t>();
    if (doc.contains("base_queries_per_subscriber_day")) {
      spec.base_queries_per_subscriber_day = doc["base_queries_per_subscriber_day"].get<uint32_t>();
    }
    if (doc.contains("hourly_weights")) {
      auto weights = doc["hourly_weights"].get<std::vector<double>>();
      if (weights.size() != 24) throw ValidationError("hourly_weights needs 24 values");
      std::copy(weights.begin(), weights.end(), spec.hourly_weights.begin());
    }
    if (doc.contains("category_mix")) {
      spec.category_mix = doc["category_mix"].get<std::map<std::string, double>>();
    }
    if (doc.contains("region_mix")) {
      spec.region_mix = doc["region_mix"].get<std::map<std::string, double>>();
    }
    if (doc.contains("duplicate_rate")) spec.duplicate_rate = doc["duplicate_rate"].get<double>();
    if (doc.contains("placeholder_rate")) {
      spec.placeholder_rate = doc["placeholder_rate"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("bad generator spec field: " + std::string(e.what()));
  }
  validate_spec(spec);
  return spec;
}

GeneratedManifest generate(const GeneratorSpec& spec, const std::filesystem::path& out_dir) {
  validate_spec(spec);

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "logs", ec);
  if (ec) throw IoError("cannot create output directory " + (out_dir / "logs").string());

  const uint32_t n_subs = spec.subscriber_count;
  const uint64_t origin_ms = start_epoch_ms();

  std::vector<std::string> categories;
  std::vector<double> category_weights;
  for (const auto& [name, p] : spec.category_mix) {
    categories.push_back(name);
    category_weights.push_back(p);
  }
  std::vector<std::string> regions;
  std::vector<double> region_weights;
  for (const auto& [code, p] : spec.region_mix) {
    regions.push_back(code);
    region_weights.push_back(p);
  }

  // Domain pool and rules, one pool per category.
  std::vector<std::vector<std::string>> domains(categories.size());
  std::unordered_set<std::string> seen_slugs;
  std::string rules_csv = "suffix,category\n";
  for (std::size_t c = 0; c < categories.size(); ++c) {
    std::string slug = slugify(categories[c]);
    if (!seen_slugs.insert(slug).second) {
      throw ValidationError("category names collide after slugging: " + categories[c]);
    }
    for (uint32_t j = 0; j < kDomainsPerCategory; ++j) {
      std::string domain = slug + "-" + std::to_string(j) + ".com";
      rules_csv += domain + "," + categories[c] + "\n";
      domains[c].push_back(std::move(domain));
    }
  }

  const std::vector<double> hour_cumulative =
      cumulative_of({spec.hourly_weights.begin(), spec.hourly_weights.end()});
  const std::vector<double> category_cumulative = cumulative_of(category_weights);
  const std::vector<double> region_cumulative = cumulative_of(region_weights);
  // Query type and rcode mixes are fixed; mostly A/AAAA, a few NXDOMAINs.
  const std::vector<double> type_cumulative = cumulative_of({70, 20, 4, 2, 1, 1, 1, 1});
  constexpr QueryType kTypeByIndex[] = {QueryType::A,   QueryType::AAAA, QueryType::CNAME,
                                        QueryType::MX,  QueryType::TXT,  QueryType::NS,
                                        QueryType::PTR, QueryType::OTHER};

  Sampler sampler(spec.seed);

  // Region per subscriber, then CRM.
  std::vector<std::size_t> subscriber_region(n_subs);
  for (uint32_t s = 0; s < n_subs; ++s) {
    subscriber_region[s] = sampler.weighted(region_cumulative);
  }
  std::string crm_csv = "subscriber_id,city,region_code\n";
  for (uint32_t s = 0; s < n_subs; ++s) {
    const std::string& code = regions[subscriber_region[s]];
    crm_csv += std::to_string(s + 1) + "," + default_city(code) + "," + code + "\n";
  }

  // CDR: each day splits into two 12h sessions. In session 0 subscriber s
  // holds pool ip s; in session 1 it rotates to pool ip (s+1) mod N, so an ip
  // serves different subscribers over disjoint windows.
  std::string cdr_csv = "subscriber_id,ip,start_ms,end_ms\n";
  for (uint32_t day = 0; day < spec.days; ++day) {
    const uint64_t day_start = origin_ms + day * kMsPerDay;
    for (uint32_t s = 0; s < n_subs; ++s) {
      cdr_csv += std::to_string(s + 1) + "," + format_ipv4(pool_ip(s)) + "," +
                 std::to_string(day_start) + "," + std::to_string(day_start + 12 * kMsPerHour) +
                 "\n";
      cdr_csv += std::to_string(s + 1) + "," + format_ipv4(pool_ip((s + 1) % n_subs)) + "," +
                 std::to_string(day_start + 12 * kMsPerHour) + "," +
                 std::to_string(day_start + kMsPerDay) + "\n";
    }
  }

  GeneratedManifest manifest;
  manifest.seed = spec.seed;
  manifest.days = spec.days;
  manifest.subscriber_count = n_subs;
  manifest.base_queries_per_subscriber_day = spec.base_queries_per_subscriber_day;
  manifest.start_date = partition_key_of(origin_ms, ServerId::Dns1).date_string();
  double weight_sum = 0;
  for (double w : spec.hourly_weights) weight_sum += w;
  for (std::size_t h = 0; h < 24; ++h) {
    manifest.hourly_intensity[h] = spec.hourly_weights[h] / weight_sum;
  }

  // One line buffer per (server, day) file; records are sorted by timestamp
  // before writing, and a planted duplicate follows its original (stable
  // sort, equal keys).
  struct PendingLine {
    uint64_t timestamp_ms;
    std::string line;
  };
  std::vector<std::vector<PendingLine>> files(3 * spec.days);

  std::unordered_set<uint64_t> used_ms;  // per subscriber-day
  for (uint32_t day = 0; day < spec.days; ++day) {
    const uint64_t day_start = origin_ms + day * kMsPerDay;
    for (uint32_t s = 0; s < n_subs; ++s) {
      used_ms.clear();
      const ServerId server = static_cast<ServerId>(1 + (s % 3));
      auto& file = files[day * 3 + (s % 3)];

      auto sample_timestamp = [&]() {
        while (true) {
          const std::size_t hour = sampler.weighted(hour_cumulative);
          const uint64_t ts = day_start + hour * kMsPerHour + sampler.below(kMsPerHour);
          if (used_ms.insert(ts).second) return ts;
        }
      };
      auto ip_at = [&](uint64_t ts) {
        const uint32_t session = ((ts - day_start) / kMsPerHour) < 12 ? 0u : 1u;
        return pool_ip((s + session) % n_subs);
      };

      for (uint32_t q = 0; q < spec.base_queries_per_subscriber_day; ++q) {
        DnsQueryRecord record;
        record.timestamp_ms = sample_timestamp();
        record.server_id = server;
        record.client_ip = ip_at(record.timestamp_ms);
        const std::size_t category = sampler.weighted(category_cumulative);
        const auto& pool = domains[category];
        record.query_name = pool[sampler.below(pool.size())];
        if (sampler.chance(0.3)) record.query_name = "www." + record.query_name;
        record.query_type = kTypeByIndex[sampler.weighted(type_cumulative)];
        record.response_code = sampler.chance(0.95) ? 0 : 3;

        std::string line = format_line(record);
        file.push_back({record.timestamp_ms, line});
        ++manifest.query_records;

        if (spec.duplicate_rate > 0 && sampler.chance(spec.duplicate_rate)) {
          file.push_back({record.timestamp_ms, line});
          ++manifest.planted_duplicates;
        }
        if (spec.placeholder_rate > 0 && sampler.chance(spec.placeholder_rate)) {
          DnsQueryRecord placeholder;
          placeholder.timestamp_ms = sample_timestamp();
          placeholder.server_id = server;
          placeholder.client_ip = ip_at(placeholder.timestamp_ms);
          placeholder.query_name = sampler.chance(0.5) ? "-" : ".";
          placeholder.query_type = QueryType::A;
          placeholder.response_code = 0;
          file.push_back({placeholder.timestamp_ms, format_line(placeholder)});
          ++manifest.planted_placeholders;
        }
      }
    }
  }

  manifest.total_records =
      manifest.query_records + manifest.planted_duplicates + manifest.planted_placeholders;
  manifest.expected_joined = manifest.query_records;

  for (uint32_t day = 0; day < spec.days; ++day) {
    const uint64_t day_start = origin_ms + day * kMsPerDay;
    const std::string date = partition_key_of(day_start, ServerId::Dns1).date_string();
    for (uint32_t server = 0; server < 3; ++server) {
      auto& lines = files[day * 3 + server];
      std::stable_sort(lines.begin(), lines.end(),
                       [](const PendingLine& a, const PendingLine& b) {
                         return a.timestamp_ms < b.timestamp_ms;
                       });
      std::string contents;
      for (const auto& pending : lines) {
        contents += pending.line;
        contents += '\n';
      }
      const std::string rel =
          "logs/" + std::string(to_string(static_cast<ServerId>(server + 1))) + "-" + date +
          ".log";
      const std::filesystem::path path = out_dir / rel;
      write_text_file(path, contents);
      manifest.file_lines.emplace_back(rel, lines.size());
      manifest.log_files.push_back(path);
    }
  }

  manifest.cdr_file = out_dir / "cdr.csv";
  manifest.crm_file = out_dir / "crm.csv";
  manifest.rules_file = out_dir / "rules.csv";
  manifest.manifest_file = out_dir / "manifest.txt";
  write_text_file(manifest.cdr_file, cdr_csv);
  write_text_file(manifest.crm_file, crm_csv);
  write_text_file(manifest.rules_file, rules_csv);
  write_text_file(manifest.manifest_file, manifest_text(manifest));
  return manifest;
}

std::string manifest_text(const GeneratedManifest& manifest) {
  std::string out;
  auto kv = [&](const char* key, const std::string& value) {
    out += key;
    out += ": ";
    out += value;
    out += '\n';
  };
  kv("seed", std::to_string(manifest.seed));
  kv("start_date", manifest.start_date);
  kv("days", std::to_string(manifest.days));
  kv("subscribers", std::to_string(manifest.subscriber_count));
  kv("base_queries_per_subscriber_day", std::to_string(manifest.base_queries_per_subscriber_day));
  kv("query_records", std::to_string(manifest.query_records));
  kv("planted_duplicates", std::to_string(manifest.planted_duplicates));
  kv("planted_placeholders", std::to_string(manifest.planted_placeholders));
  kv("total_records", std::to_string(manifest.total_records));
  kv("expected_joined", std::to_string(manifest.expected_joined));
  for (std::size_t h = 0; h < 24; ++h) {
    char key[32];
    std::snprintf(key, sizeof(key), "hourly_intensity_%02zu", h);
    char value[32];
    std::snprintf(value, sizeof(value), "%.6f", manifest.hourly_intensity[h]);
    kv(key, value);
  }
  kv("file_count", std::to_string(manifest.file_lines.size()));
  for (const auto& [rel, lines] : manifest.file_lines) {
    kv("file", rel + " lines=" + std::to_string(lines));
  }
  return out;
}

}  // namespace dnsa
