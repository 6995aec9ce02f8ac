#include <glob.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dnsa/aggregates.hpp"
#include "dnsa/cluster_planner.hpp"
#include "dnsa/colstore.hpp"
#include "dnsa/datagen.hpp"
#include "dnsa/errors.hpp"
#include "dnsa/exec_engine.hpp"

namespace {

using namespace dnsa;

std::vector<std::filesystem::path> expand_globs(const std::vector<std::string>& patterns) {
  std::vector<std::filesystem::path> paths;
  for (const auto& pattern : patterns) {
    glob_t matches{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &matches);
    if (rc == GLOB_NOMATCH) {
      globfree(&matches);
      throw UsageError("no files match --logs pattern: " + pattern);
    }
    if (rc != 0) {
      globfree(&matches);
      throw IoError("glob failed for pattern: " + pattern);
    }
    for (std::size_t i = 0; i < matches.gl_pathc; ++i) {
      paths.emplace_back(matches.gl_pathv[i]);
    }
    globfree(&matches);
  }
  std::sort(paths.begin(), paths.end());
  paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
  return paths;
}

struct GenerateArgs {
  std::string out_dir;
  std::string spec_path;
  uint64_t seed = 0;
  uint32_t subscribers = 0;
  uint32_t days = 0;
  uint32_t queries_per_day = 0;
  double duplicate_rate = -1;
  double placeholder_rate = -1;
};

int cmd_generate(const GenerateArgs& args, const CLI::App& sub) {
  GeneratorSpec spec = args.spec_path.empty() ? default_spec() : load_spec_json(args.spec_path);
  if (sub.count("--seed")) spec.seed = args.seed;
  if (sub.count("--subscribers")) spec.subscriber_count = args.subscribers;
  if (sub.count("--days")) spec.days = args.days;
  if (sub.count("--queries-per-day")) spec.base_queries_per_subscriber_day = args.queries_per_day;
  if (sub.count("--duplicate-rate")) spec.duplicate_rate = args.duplicate_rate;
  if (sub.count("--placeholder-rate")) spec.placeholder_rate = args.placeholder_rate;

  const GeneratedManifest manifest = generate(spec, args.out_dir);
  std::cout << "generated " << manifest.total_records << " records over " << manifest.days
            << " day(s): " << manifest.query_records << " queries, "
            << manifest.planted_duplicates << " duplicates, " << manifest.planted_placeholders
            << " placeholders\n";
  std::cout << "manifest: " << manifest.manifest_file.string() << "\n";
  return 0;
}

struct RunArgs {
  std::vector<std::string> log_patterns;
  std::string cdr, crm, rules, out;
  uint64_t chunk = 1 << 20;
  uint32_t workers = 0;
};

int cmd_run(const RunArgs& args) {
  PipelineConfig config;
  config.log_paths = expand_globs(args.log_patterns);
  config.cdr_path = args.cdr;
  config.crm_path = args.crm;
  config.rules_path = args.rules;
  config.output_root = args.out;
  config.chunk_records = args.chunk;
  config.worker_count =
      args.workers > 0 ? args.workers : std::max(1u, std::thread::hardware_concurrency());

  const RunReport report = run_pipeline(config);
  write_run_report(report, config.output_root);

  std::cout << "lines: " << report.total_lines << " (parsed " << report.parsed << ", rejected "
            << report.rejected << ")\n";
  std::cout << "sanitize: null_incomplete " << report.sanitize.null_incomplete_removed
            << ", duplicates " << report.sanitize.duplicates_removed << ", output "
            << report.sanitize.output_count << "\n";
  std::cout << "join: joined " << report.join.joined << ", unmatched_ip "
            << report.join.unmatched_ip << ", missing_crm " << report.join.missing_crm << "\n";
  std::cout << "partitions: " << report.partitions << " (" << report.segments_written
            << " segments)\n";
  std::cout << "wall_ms: " << report.wall_ms << " with " << report.worker_count << " worker(s)\n";
  std::cout << "report: " << (config.output_root / "run_report.txt").string() << "\n";
  return 0;
}

struct AggregateArgs {
  std::string dataset, report, from, to, out;
};

int cmd_aggregate(const AggregateArgs& args) {
  check_date_string(args.from);
  check_date_string(args.to);

  uint64_t segments = 0;
  std::size_t rows = 0;
  std::vector<std::string> missing;

  if (args.report == "hourly-users") {
    HourlyUsersResult result = unique_users_hourly(args.dataset, args.from, args.to);
    segments = result.segments_scanned;
    rows = result.rows.size();
    missing = result.missing_dates;
    if (segments > 0) emit_plot_data(result, args.out);
  } else if (args.report == "category") {
    CategoryTrafficResult merged;
    for (const auto& date : dates_in_range(args.from, args.to)) {
      CategoryTrafficResult result = category_traffic(args.dataset, date);
      segments += result.segments_scanned;
      merged.missing_dates.insert(merged.missing_dates.end(), result.missing_dates.begin(),
                                  result.missing_dates.end());
      merged.rows.insert(merged.rows.end(), result.rows.begin(), result.rows.end());
    }
    rows = merged.rows.size();
    missing = merged.missing_dates;
    if (segments > 0) emit_plot_data(merged, args.out);
  } else {
    RegionDensityResult merged;
    for (const auto& date : dates_in_range(args.from, args.to)) {
      RegionDensityResult result = region_density(args.dataset, date);
      segments += result.segments_scanned;
      merged.missing_dates.insert(merged.missing_dates.end(), result.missing_dates.begin(),
                                  result.missing_dates.end());
      merged.rows.insert(merged.rows.end(), result.rows.begin(), result.rows.end());
    }
    rows = merged.rows.size();
    missing = merged.missing_dates;
    if (segments > 0) emit_plot_data(merged, args.out);
  }

  for (const auto& date : missing) {
    std::cerr << "warning: no partitions for date " << date << "\n";
  }
  if (segments == 0) {
    throw ValidationError("no partitions found in range " + args.from + ".." + args.to);
  }
  std::cout << "wrote " << rows << " row(s) from " << segments << " segment(s) to " << args.out
            << "\n";
  return 0;
}

struct PlanArgs {
  std::string catalog_path;
  std::string instance;
  uint32_t nodes = 1;
  std::string runtime_min;
};

int cmd_plan(const PlanArgs& args) {
  const std::vector<InstanceType> catalog =
      args.catalog_path.empty() ? default_catalog() : load_catalog_csv(args.catalog_path);
  const InstanceType& instance = find_instance(catalog, args.instance);
  const ExecutorPlan plan = plan_executors(instance, args.nodes);

  std::cout << "instance: " << instance.name << " (" << instance.vcpus << " vCPU, "
            << instance.ram_gib << " GiB, " << instance.hourly_rate_usd.str() << " USD/h)\n";
  std::cout << "core_nodes: " << args.nodes << "\n";
  std::cout << "executor_cores: " << plan.executor_cores << "\n";
  std::cout << "executors_per_node: " << plan.executors_per_node << "\n";
  std::cout << "executor_instances: " << plan.executor_instances << "\n";
  std::cout << "executor_memory_gib: " << plan.executor_memory_gib << "\n";
  std::cout << "memory_overhead_gib: " << plan.memory_overhead_gib << "\n";
  std::cout << "parallel_tasks: " << plan.parallel_tasks << "\n";
  std::cout << "dynamic_allocation: false\n";

  if (!args.runtime_min.empty()) {
    const Decimal runtime = Decimal::parse(args.runtime_min);
    const CostEstimate cost = estimate_cost(args.nodes + 1, instance.hourly_rate_usd, runtime);
    std::cout << "node_count: " << cost.node_count << " (1 master + " << args.nodes << " core)\n";
    std::cout << "runtime_minutes: " << cost.runtime_minutes.str() << "\n";
    std::cout << "total_cost_usd: " << cost.total_cost_usd.str() << "\n";
  }
  return 0;
}

int cmd_inspect(const std::string& segment_path) {
  const SegmentInfo info = inspect_segment(segment_path);
  std::cout << "segment: " << segment_path << "\n";
  std::cout << "records: " << info.record_count << "\n";
  std::cout << "bytes: " << info.file_bytes << "\n";
  std::cout << "columns:\n";
  for (const auto& column : info.columns) {
    std::printf("  %-14s tag=%u offset=%-10llu length=%llu\n", column.name.c_str(),
                static_cast<unsigned>(column.encoding),
                static_cast<unsigned long long>(column.offset),
                static_cast<unsigned long long>(column.length));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DNS query log analytics: generate, run, aggregate, plan, inspect"};
  app.require_subcommand(1);

  GenerateArgs generate_args;
  CLI::App* generate_cmd = app.add_subcommand("generate", "Write a synthetic dataset");
  generate_cmd->add_option("--out", generate_args.out_dir, "Output directory")->required();
  generate_cmd->add_option("--spec", generate_args.spec_path, "Generator spec (json)");
  generate_cmd->add_option("--seed", generate_args.seed, "Generator seed");
  generate_cmd->add_option("--subscribers", generate_args.subscribers, "Subscriber count")
      ->check(CLI::PositiveNumber);
  generate_cmd->add_option("--days", generate_args.days, "Days to generate")
      ->check(CLI::PositiveNumber);
  generate_cmd->add_option("--queries-per-day", generate_args.queries_per_day,
                           "Base queries per subscriber per day")
      ->check(CLI::PositiveNumber);
  generate_cmd->add_option("--duplicate-rate", generate_args.duplicate_rate,
                           "Planted duplicate probability [0,1)");
  generate_cmd->add_option("--placeholder-rate", generate_args.placeholder_rate,
                           "Planted placeholder probability [0,1)");

  RunArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "Run the pipeline over raw logs");
  run_cmd->add_option("--logs", run_args.log_patterns, "Log file glob(s)")->required();
  run_cmd->add_option("--cdr", run_args.cdr, "CDR csv (subscriber_id,ip,start_ms,end_ms)")
      ->required();
  run_cmd->add_option("--crm", run_args.crm, "CRM csv (subscriber_id,city,region_code)")
      ->required();
  run_cmd->add_option("--rules", run_args.rules, "Category rules csv (suffix,category)")
      ->required();
  run_cmd->add_option("--out", run_args.out, "Dataset output root")->required();
  run_cmd->add_option("--workers", run_args.workers, "Worker threads (default: hardware)");
  run_cmd->add_option("--chunk", run_args.chunk, "Lines per work chunk")
      ->check(CLI::PositiveNumber);

  AggregateArgs aggregate_args;
  CLI::App* aggregate_cmd = app.add_subcommand("aggregate", "Compute a report over a dataset");
  aggregate_cmd->add_option("--dataset", aggregate_args.dataset, "Dataset root")->required();
  aggregate_cmd
      ->add_option("--report", aggregate_args.report, "hourly-users | category | region")
      ->required()
      ->check(CLI::IsMember({"hourly-users", "category", "region"}));
  aggregate_cmd->add_option("--from", aggregate_args.from, "First date (YYYY-MM-DD)")->required();
  aggregate_cmd->add_option("--to", aggregate_args.to, "Last date (YYYY-MM-DD)")->required();
  aggregate_cmd->add_option("--out", aggregate_args.out, "Output csv path")->required();

  PlanArgs plan_args;
  CLI::App* plan_cmd = app.add_subcommand("plan", "Size executors and estimate cost");
  plan_cmd->add_option("--catalog", plan_args.catalog_path,
                       "Instance catalog csv (name,vcpus,ram_gib,hourly_rate_usd)");
  plan_cmd->add_option("--instance", plan_args.instance, "Instance type name")->required();
  plan_cmd->add_option("--nodes", plan_args.nodes, "Core node count")
      ->required()
      ->check(CLI::PositiveNumber);
  plan_cmd->add_option("--runtime-min", plan_args.runtime_min,
                       "Measured runtime in minutes; adds a cost estimate");

  std::string segment_path;
  CLI::App* inspect_cmd = app.add_subcommand("inspect", "Print a segment's directory");
  inspect_cmd->add_option("--segment", segment_path, "Segment file path")->required();

  try {
    app.parse(argc, argv);
    if (generate_cmd->parsed()) return cmd_generate(generate_args, *generate_cmd);
    if (run_cmd->parsed()) return cmd_run(run_args);
    if (aggregate_cmd->parsed()) return cmd_aggregate(aggregate_args);
    if (plan_cmd->parsed()) return cmd_plan(plan_args);
    if (inspect_cmd->parsed()) return cmd_inspect(segment_path);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
