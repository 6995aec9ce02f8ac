#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "test_util.hpp"

using dnsa::test::TempDir;
using dnsa::test::read_file;
using dnsa::test::write_file;

namespace {

int run_cli(const std::string& args) {
  const std::string command = std::string(DNSA_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help exits zero for the tool and every subcommand") {
  CHECK(run_cli("--help") == 0);
  for (const char* sub : {"generate", "run", "aggregate", "plan", "inspect"}) {
    CHECK(run_cli(std::string(sub) + " --help") == 0);
  }
}

TEST_CASE("missing required flags are usage errors") {
  CHECK(run_cli("") == 1);
  CHECK(run_cli("generate") == 1);                     // no --out
  CHECK(run_cli("plan --instance m5.xlarge") == 1);    // no --nodes
  CHECK(run_cli("plan --instance m5.xlarge --nodes 0") == 1);
  CHECK(run_cli("frobnicate") == 1);
}

TEST_CASE("generate, run, aggregate, plan and inspect complete end to end") {
  TempDir dir;
  const std::string data = (dir.path() / "data").string();
  const std::string dataset = (dir.path() / "ds").string();

  CHECK(run_cli("generate --out " + data +
                " --seed 11 --subscribers 40 --days 1 --queries-per-day 15") == 0);
  CHECK(std::filesystem::exists(dir.path() / "data/manifest.txt"));

  CHECK(run_cli("run --logs '" + data + "/logs/*.log' --cdr " + data + "/cdr.csv --crm " + data +
                "/crm.csv --rules " + data + "/rules.csv --out " + dataset +
                " --workers 2 --chunk 100") == 0);
  CHECK(std::filesystem::exists(dir.path() / "ds/run_report.txt"));
  CHECK(std::filesystem::exists(dir.path() / "ds/sanitize_report.csv"));

  const std::string csv = (dir.path() / "hourly.csv").string();
  CHECK(run_cli("aggregate --dataset " + dataset +
                " --report hourly-users --from 2019-05-07 --to 2019-05-07 --out " + csv) == 0);
  CHECK(read_file(csv).rfind("date,hour,server,unique_subscribers\n", 0) == 0);

  CHECK(run_cli("aggregate --dataset " + dataset +
                " --report category --from 2019-05-07 --to 2019-05-07 --out " +
                (dir.path() / "cat.csv").string()) == 0);
  CHECK(run_cli("aggregate --dataset " + dataset +
                " --report region --from 2019-05-07 --to 2019-05-07 --out " +
                (dir.path() / "reg.csv").string()) == 0);

  CHECK(run_cli("plan --instance r5.4xlarge --nodes 10 --runtime-min 13") == 0);

  std::string segment;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dataset)) {
    if (entry.path().extension() == ".tnc") {
      segment = entry.path().string();
      break;
    }
  }
  REQUIRE(!segment.empty());
  CHECK(run_cli("inspect --segment " + segment) == 0);
}

TEST_CASE("data and validation failures exit 2") {
  TempDir dir;
  write_file(dir.file("log.log"), "1557187200001\tdns1\t10.0.0.1\ta.com\tA\t0\n");
  write_file(dir.file("cdr.csv"),
             "subscriber_id,ip,start_ms,end_ms\n1,10.0.0.1,100,300\n2,10.0.0.1,200,400\n");
  write_file(dir.file("crm.csv"), "subscriber_id,city,region_code\n");
  write_file(dir.file("rules.csv"), "suffix,category\n");

  CHECK(run_cli("run --logs " + dir.file("log.log").string() + " --cdr " +
                dir.file("cdr.csv").string() + " --crm " + dir.file("crm.csv").string() +
                " --rules " + dir.file("rules.csv").string() + " --out " +
                dir.file("out").string()) == 2);

  CHECK(run_cli("plan --instance nosuch.instance --nodes 3") == 2);

  write_file(dir.file("fake.tnc"), "this is not a segment");
  CHECK(run_cli("inspect --segment " + dir.file("fake.tnc").string()) == 2);

  // A dataset directory with no partitions in range.
  std::filesystem::create_directories(dir.file("empty-ds"));
  CHECK(run_cli("aggregate --dataset " + dir.file("empty-ds").string() +
                " --report hourly-users --from 2019-05-07 --to 2019-05-07 --out " +
                dir.file("x.csv").string()) == 2);
  // Inverted range.
  CHECK(run_cli("aggregate --dataset " + dir.file("empty-ds").string() +
                " --report region --from 2019-05-09 --to 2019-05-07 --out " +
                dir.file("x.csv").string()) == 2);
}

TEST_CASE("usage errors exit 1") {
  TempDir dir;
  CHECK(run_cli("aggregate --dataset x --report bogus --from 2019-05-07 --to 2019-05-07 --out "
                "y.csv") == 1);
  // Glob with no matches.
  write_file(dir.file("cdr.csv"), "subscriber_id,ip,start_ms,end_ms\n");
  write_file(dir.file("crm.csv"), "subscriber_id,city,region_code\n");
  write_file(dir.file("rules.csv"), "suffix,category\n");
  CHECK(run_cli("run --logs '" + dir.file("nope-*.log").string() + "' --cdr " +
                dir.file("cdr.csv").string() + " --crm " + dir.file("crm.csv").string() +
                " --rules " + dir.file("rules.csv").string() + " --out " +
                dir.file("out").string()) == 1);
}

TEST_CASE("io failures exit 3") {
  TempDir dir;
  CHECK(run_cli("inspect --segment " + dir.file("missing.tnc").string()) == 3);
  // Output directory path blocked by a regular file.
  write_file(dir.file("blocker"), "x");
  CHECK(run_cli("generate --out " + dir.file("blocker/sub").string() +
                " --subscribers 5 --days 1 --queries-per-day 5") == 3);
}

}  // TEST_SUITE
