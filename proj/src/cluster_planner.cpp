#include "dnsa/cluster_planner.hpp"

#include <algorithm>
#include <charconv>

#include "dnsa/csv.hpp"
#include "dnsa/errors.hpp"

namespace dnsa {

namespace {

constexpr uint32_t kMaxScale = 9;

uint64_t pow10_u64(uint32_t exp) {
  uint64_t value = 1;
  for (uint32_t i = 0; i < exp; ++i) value *= 10;
  return value;
}

uint32_t parse_u32_field(const std::string& text, const std::string& context) {
  uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError("bad unsigned integer '" + text + "' in " + context);
  }
  return value;
}

}  // namespace

Decimal Decimal::parse(std::string_view text) {
  if (text.empty()) throw ValidationError("empty decimal");
  std::size_t dot = text.find('.');
  std::string_view whole = (dot == std::string_view::npos) ? text : text.substr(0, dot);
  std::string_view frac = (dot == std::string_view::npos) ? "" : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw ValidationError("bad decimal: '" + std::string(text) + "'");
  if (frac.size() > kMaxScale) {
    throw ValidationError("decimal has more than " + std::to_string(kMaxScale) +
                          " fractional digits: '" + std::string(text) + "'");
  }
  uint64_t units = 0;
  auto accumulate = [&](std::string_view digits) {
    for (char c : digits) {
      if (c < '0' || c > '9') {
        throw ValidationError("bad decimal: '" + std::string(text) + "'");
      }
      uint64_t digit = static_cast<uint64_t>(c - '0');
      if (units > (UINT64_MAX - digit) / 10) {
        throw ValidationError("decimal out of range: '" + std::string(text) + "'");
      }
      units = units * 10 + digit;
    }
  };
  accumulate(whole);
  accumulate(frac);
  return Decimal(units, static_cast<uint32_t>(frac.size()));
}

std::string Decimal::str() const {
  std::string digits = std::to_string(units_);
  if (scale_ == 0) return digits;
  if (digits.size() <= scale_) {
    digits.insert(0, scale_ + 1 - digits.size(), '0');
  }
  digits.insert(digits.size() - scale_, 1, '.');
  return digits;
}

bool Decimal::operator==(const Decimal& other) const {
  // Compare values, not representations: 0.50 == 0.5.
  unsigned __int128 lhs = static_cast<unsigned __int128>(units_) * pow10_u64(other.scale_);
  unsigned __int128 rhs = static_cast<unsigned __int128>(other.units_) * pow10_u64(scale_);
  return lhs == rhs;
}

bool Decimal::operator<(const Decimal& other) const {
  unsigned __int128 lhs = static_cast<unsigned __int128>(units_) * pow10_u64(other.scale_);
  unsigned __int128 rhs = static_cast<unsigned __int128>(other.units_) * pow10_u64(scale_);
  return lhs < rhs;
}

ExecutorPlan plan_executors(const InstanceType& instance, uint32_t core_nodes) {
  ExecutorPlan plan;
  const uint32_t vcpus = instance.vcpus;
  const uint32_t usable_cores = vcpus > 1 ? vcpus - 1 : 1;

  plan.executor_cores = std::min<uint32_t>(5, usable_cores);
  plan.executors_per_node =
      std::max<uint32_t>(1, (vcpus > 1 ? vcpus - 1 : 0) / plan.executor_cores);

  const uint32_t usable_ram = instance.ram_gib > 1 ? instance.ram_gib - 1 : 0;
  const uint32_t budget = usable_ram / plan.executors_per_node;
  plan.executor_memory_gib = budget * 9 / 10;
  plan.memory_overhead_gib = budget - plan.executor_memory_gib;

  const uint64_t slots = static_cast<uint64_t>(plan.executors_per_node) * core_nodes;
  plan.executor_instances = static_cast<uint32_t>(std::max<uint64_t>(1, slots - 1));
  plan.parallel_tasks = parallel_tasks(plan);
  plan.dynamic_allocation = false;
  return plan;
}

uint64_t parallel_tasks(const ExecutorPlan& plan) {
  return static_cast<uint64_t>(plan.executor_cores) * plan.executor_instances;
}

CostEstimate estimate_cost(uint32_t node_count, const Decimal& hourly_rate_usd,
                           const Decimal& runtime_minutes) {
  if (hourly_rate_usd.units() > 1000000000000ULL || runtime_minutes.units() > 1000000000000ULL) {
    throw ValidationError("cost inputs out of range");
  }
  // total = nodes * rate * minutes / 60, computed as an exact rational and
  // rounded half-up at 4 decimal places.
  unsigned __int128 numerator = static_cast<unsigned __int128>(node_count) *
                                hourly_rate_usd.units() * runtime_minutes.units() * 10000;
  unsigned __int128 denominator =
      static_cast<unsigned __int128>(pow10_u64(hourly_rate_usd.scale())) *
      pow10_u64(runtime_minutes.scale()) * 60;
  unsigned __int128 rounded = (2 * numerator + denominator) / (2 * denominator);

  CostEstimate estimate;
  estimate.node_count = node_count;
  estimate.runtime_minutes = runtime_minutes;
  estimate.total_cost_usd = Decimal(static_cast<uint64_t>(rounded), 4);
  return estimate;
}

std::vector<ComparisonRow> compare_scenarios(const std::vector<InstanceType>& catalog,
                                             const std::vector<Scenario>& scenarios) {
  std::vector<ComparisonRow> rows;
  rows.reserve(scenarios.size());
  for (const auto& scenario : scenarios) {
    const InstanceType& instance = find_instance(catalog, scenario.instance_name);
    ComparisonRow row;
    row.instance_name = instance.name;
    row.core_nodes = scenario.core_nodes;
    row.node_count = scenario.core_nodes + 1;  // one master
    row.runtime_minutes = scenario.measured_runtime_minutes;
    row.plan = plan_executors(instance, scenario.core_nodes);
    row.cost =
        estimate_cost(row.node_count, instance.hourly_rate_usd, scenario.measured_runtime_minutes);
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    return a.cost.total_cost_usd < b.cost.total_cost_usd;
  });
  return rows;
}

std::string comparison_csv_header() {
  return "instance,core_nodes,node_count,runtime_minutes,executor_cores,executor_memory_gib,"
         "memory_overhead_gib,executor_instances,parallel_tasks,total_cost_usd";
}

std::string comparison_csv_row(const ComparisonRow& row) {
  std::string out;
  out += row.instance_name;
  out += ',' + std::to_string(row.core_nodes);
  out += ',' + std::to_string(row.node_count);
  out += ',' + row.runtime_minutes.str();
  out += ',' + std::to_string(row.plan.executor_cores);
  out += ',' + std::to_string(row.plan.executor_memory_gib);
  out += ',' + std::to_string(row.plan.memory_overhead_gib);
  out += ',' + std::to_string(row.plan.executor_instances);
  out += ',' + std::to_string(row.plan.parallel_tasks);
  out += ',' + row.cost.total_cost_usd.str();
  return out;
}

std::vector<InstanceType> default_catalog() {
  return {
      {"m5.xlarge", 2, 8, Decimal::parse("0.048")},
      {"m5.2xlarge", 8, 32, Decimal::parse("0.096")},
      {"r5.4xlarge", 16, 128, Decimal::parse("0.2517")},
  };
}

const InstanceType& find_instance(const std::vector<InstanceType>& catalog,
                                  std::string_view name) {
  for (const auto& instance : catalog) {
    if (instance.name == name) return instance;
  }
  throw ValidationError("unknown instance type: " + std::string(name));
}

std::vector<InstanceType> load_catalog_csv(const std::filesystem::path& path) {
  CsvFile csv = read_csv(path, "name,vcpus,ram_gib,hourly_rate_usd");
  std::vector<InstanceType> catalog;
  catalog.reserve(csv.rows.size());
  for (auto& row : csv.rows) {
    InstanceType instance;
    instance.name = std::move(row[0]);
    instance.vcpus = parse_u32_field(row[1], "catalog vcpus");
    instance.ram_gib = parse_u32_field(row[2], "catalog ram_gib");
    if (instance.vcpus < 1 || instance.ram_gib < 1) {
      throw ValidationError("instance " + instance.name + " needs at least 1 vCPU and 1 GiB");
    }
    instance.hourly_rate_usd = Decimal::parse(row[3]);
    catalog.push_back(std::move(instance));
  }
  return catalog;
}

}  // namespace dnsa
