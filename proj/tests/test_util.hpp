#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "dnsa/enrich.hpp"
#include "dnsa/errors.hpp"
#include "dnsa/log_model.hpp"

namespace dnsa::test {

class TempDir {
 public:
  TempDir() {
    static std::atomic<uint64_t> counter{0};
    const uint64_t tag =
        (static_cast<uint64_t>(::getpid()) << 24) ^ counter.fetch_add(1) ^ std::random_device{}();
    path_ = std::filesystem::temp_directory_path() / ("dnsa-test-" + std::to_string(tag));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("test: cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

inline DnsQueryRecord make_record(uint64_t ts, ServerId server, uint32_t ip, std::string name,
                                  QueryType type = QueryType::A, uint16_t rcode = 0) {
  DnsQueryRecord record;
  record.timestamp_ms = ts;
  record.server_id = server;
  record.client_ip = ip;
  record.query_name = std::move(name);
  record.query_type = type;
  record.response_code = rcode;
  return record;
}

inline EnrichedRecord make_enriched(DnsQueryRecord query, std::optional<uint64_t> subscriber,
                                    std::string city, std::string region, std::string category) {
  EnrichedRecord record;
  record.query = std::move(query);
  record.subscriber_id = subscriber;
  record.city = std::move(city);
  record.region_code = std::move(region);
  record.category = std::move(category);
  return record;
}

}  // namespace dnsa::test
