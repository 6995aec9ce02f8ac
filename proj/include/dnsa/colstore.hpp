#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dnsa/enrich.hpp"
#include "dnsa/errors.hpp"
#include "dnsa/log_model.hpp"

namespace dnsa {

// Segment file layout, all integers little-endian:
//   magic "TNDC", version byte 0x01
//   u64 record_count
//   u32 column_count
//   directory, column_count entries:
//     u16 name length, name bytes, u8 encoding tag, u64 offset, u64 length
//   payloads, contiguous, in directory order
//
// Encoding tags: 1 = u64 fixed, 2 = u32 fixed, 3 = dict-string,
// 4 = optional-u64 (u8 presence column, then one u64 per present value).
// Dict-string payload: u32 dictionary size, length-prefixed (u32) byte
// strings in first-appearance order, then record_count u32 indices.
//
// Columns, in order: timestamp_ms(1), server_id(2), client_ip(2),
// query_name(3), query_type(2), response_code(2), subscriber_id(4), city(3),
// region_code(3), category(3). server_id stores 1..3, query_type stores the
// enum ordinal, absent city/region/category values store empty strings.

inline constexpr char kSegmentMagic[4] = {'T', 'N', 'D', 'C'};
inline constexpr uint8_t kSegmentVersion = 0x01;
inline constexpr std::string_view kSegmentExtension = ".tnc";

enum class ColumnEncoding : uint8_t {
  U64Fixed = 1,
  U32Fixed = 2,
  DictString = 3,
  OptionalU64 = 4,
};

class SegmentError : public ValidationError {
 public:
  enum class Kind {
    BadMagic,
    UnsupportedVersion,
    CorruptDirectory,
    CountMismatch,
    MixedPartition,
    EmptySegment,
  };

  SegmentError(Kind kind, const std::string& what) : ValidationError(what), kind(kind) {}

  Kind kind;
};

struct PartitionKey {
  int32_t year = 1970;
  uint32_t month = 1;  // 1..12
  uint32_t day = 1;    // 1..31
  uint32_t hour = 0;   // 0..23
  ServerId server = ServerId::Dns1;

  auto operator<=>(const PartitionKey&) const = default;

  std::string date_string() const;  // YYYY-MM-DD
};

PartitionKey partition_key_of(uint64_t timestamp_ms, ServerId server);

// date=YYYY-MM-DD/hour=HH/server=dnsN/part-XXXXX.tnc
std::string partition_path(const PartitionKey& key, uint32_t part_index);

struct ColumnInfo {
  std::string name;
  ColumnEncoding encoding;
  uint64_t offset = 0;
  uint64_t length = 0;
};

struct SegmentInfo {
  uint64_t record_count = 0;
  uint64_t file_bytes = 0;
  std::vector<ColumnInfo> columns;
};

// All records must share one partition key. Throws SegmentError
// (EmptySegment, MixedPartition) or IoError.
SegmentInfo write_segment(std::span<const EnrichedRecord> records,
                          const std::filesystem::path& path);

// Exact inverse of write_segment. Throws SegmentError (BadMagic,
// UnsupportedVersion, CorruptDirectory, CountMismatch) or IoError.
std::vector<EnrichedRecord> read_segment(const std::filesystem::path& path);

// Header and directory only; same validation as read_segment up to payloads.
SegmentInfo inspect_segment(const std::filesystem::path& path);

}  // namespace dnsa
