#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dnsa {

// Non-negative fixed-point decimal: units / 10^scale. Money and rates go
// through this type; floats are kept out of every cost figure.
class Decimal {
 public:
  Decimal() = default;
  Decimal(uint64_t units, uint32_t scale) : units_(units), scale_(scale) {}

  static Decimal parse(std::string_view text);  // throws ValidationError

  uint64_t units() const { return units_; }
  uint32_t scale() const { return scale_; }
  bool is_zero() const { return units_ == 0; }

  std::string str() const;

  bool operator==(const Decimal& other) const;
  bool operator<(const Decimal& other) const;

 private:
  uint64_t units_ = 0;
  uint32_t scale_ = 0;
};

struct InstanceType {
  std::string name;
  uint32_t vcpus = 1;
  uint32_t ram_gib = 1;
  Decimal hourly_rate_usd;
};

struct ExecutorPlan {
  uint32_t executor_cores = 1;
  uint32_t executors_per_node = 1;
  uint32_t executor_instances = 1;
  uint32_t executor_memory_gib = 0;
  uint32_t memory_overhead_gib = 0;
  uint64_t parallel_tasks = 1;
  bool dynamic_allocation = false;  // always false
};

// Executor sizing: reserve 1 core and 1 GiB per node for the node manager,
// cap executors at 5 cores, split each executor's memory budget 90/10 between
// heap and overhead (integer floors), and keep one executor slot for the
// driver.
ExecutorPlan plan_executors(const InstanceType& instance, uint32_t core_nodes);

uint64_t parallel_tasks(const ExecutorPlan& plan);

struct CostEstimate {
  uint32_t node_count = 0;  // master + core
  Decimal runtime_minutes;
  Decimal total_cost_usd;  // scale 4, round half up
};

// node_count * hourly_rate * runtime_minutes / 60, exact decimal arithmetic,
// rounded half-up to 4 places.
CostEstimate estimate_cost(uint32_t node_count, const Decimal& hourly_rate_usd,
                           const Decimal& runtime_minutes);

struct Scenario {
  std::string instance_name;
  uint32_t core_nodes = 1;
  Decimal measured_runtime_minutes;
};

struct ComparisonRow {
  std::string instance_name;
  uint32_t core_nodes = 1;
  uint32_t node_count = 2;
  Decimal runtime_minutes;
  ExecutorPlan plan;
  CostEstimate cost;
};

// One row per scenario, sorted by total cost ascending; equal costs keep the
// input order. Throws ValidationError for an instance name missing from the
// catalog.
std::vector<ComparisonRow> compare_scenarios(const std::vector<InstanceType>& catalog,
                                             const std::vector<Scenario>& scenarios);

std::string comparison_csv_header();
std::string comparison_csv_row(const ComparisonRow& row);

// The built-in catalog: m5.xlarge(2 vCPU, 8 GiB), m5.2xlarge(8, 32),
// r5.4xlarge(16, 128). Rates are defaults, not gospel; load_catalog_csv
// replaces them with whatever the deployment's rate card says.
std::vector<InstanceType> default_catalog();

const InstanceType& find_instance(const std::vector<InstanceType>& catalog,
                                  std::string_view name);

// CSV: name,vcpus,ram_gib,hourly_rate_usd with header.
std::vector<InstanceType> load_catalog_csv(const std::filesystem::path& path);

}  // namespace dnsa
