#include "dnsa/colstore.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <unordered_map>

namespace dnsa {

namespace {

struct ColumnSpec {
  std::string_view name;
  ColumnEncoding encoding;
};

constexpr ColumnSpec kSchema[] = {
    {"timestamp_ms", ColumnEncoding::U64Fixed},
    {"server_id", ColumnEncoding::U32Fixed},
    {"client_ip", ColumnEncoding::U32Fixed},
    {"query_name", ColumnEncoding::DictString},
    {"query_type", ColumnEncoding::U32Fixed},
    {"response_code", ColumnEncoding::U32Fixed},
    {"subscriber_id", ColumnEncoding::OptionalU64},
    {"city", ColumnEncoding::DictString},
    {"region_code", ColumnEncoding::DictString},
    {"category", ColumnEncoding::DictString},
};

constexpr std::size_t kColumnCount = std::size(kSchema);

constexpr uint64_t header_bytes() {
  uint64_t bytes = 4 + 1 + 8 + 4;  // magic, version, record_count, column_count
  for (const auto& column : kSchema) bytes += 2 + column.name.size() + 1 + 8 + 8;
  return bytes;
}

void append_u16(std::string& out, uint16_t v) {
  const char bytes[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.append(bytes, 2);
}

void append_u32(std::string& out, uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.append(bytes, 4);
}

void append_u64(std::string& out, uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.append(bytes, 8);
}

[[noreturn]] void fail(SegmentError::Kind kind, const std::string& what) {
  throw SegmentError(kind, what);
}

// Bounds-checked cursor over a byte range; oob reads raise `kind`.
class Cursor {
 public:
  Cursor(const char* data, uint64_t size, SegmentError::Kind kind)
      : data_(data), size_(size), kind_(kind) {}

  uint64_t remaining() const { return size_ - pos_; }

  const char* take(uint64_t n) {
    if (n > remaining()) fail(kind_, "segment data truncated");
    const char* p = data_ + pos_;
    pos_ += n;
    return p;
  }

  uint8_t u8() { return static_cast<uint8_t>(*take(1)); }

  uint16_t u16() {
    const char* p = take(2);
    return static_cast<uint16_t>(static_cast<uint8_t>(p[0]) |
                                 (static_cast<uint16_t>(static_cast<uint8_t>(p[1])) << 8));
  }

  uint32_t u32() {
    const char* p = take(4);
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(p[i]);
    return v;
  }

  uint64_t u64() {
    const char* p = take(8);
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(p[i]);
    return v;
  }

 private:
  const char* data_;
  uint64_t size_;
  uint64_t pos_ = 0;
  SegmentError::Kind kind_;
};

class DictionaryBuilder {
 public:
  uint32_t index_of(const std::string& value) {
    auto [it, inserted] = indices_.try_emplace(value, static_cast<uint32_t>(entries_.size()));
    if (inserted) {
      entries_.push_back(value);
      entry_bytes_ += value.size();
    }
    return it->second;
  }

  std::string payload(const std::vector<uint32_t>& indices) const {
    std::string out;
    out.reserve(4 + entries_.size() * 4 + entry_bytes_ + indices.size() * 4);
    append_u32(out, static_cast<uint32_t>(entries_.size()));
    for (const auto& entry : entries_) {
      append_u32(out, static_cast<uint32_t>(entry.size()));
      out += entry;
    }
    for (uint32_t index : indices) append_u32(out, index);
    return out;
  }

 private:
  std::unordered_map<std::string, uint32_t> indices_;
  std::vector<std::string> entries_;
  uint64_t entry_bytes_ = 0;
};

struct ParsedHeader {
  uint64_t record_count = 0;
  std::vector<ColumnInfo> columns;
  uint64_t file_bytes = 0;
};

ParsedHeader parse_header(const std::string& data, const std::filesystem::path& path) {
  if (data.size() < 5 || std::memcmp(data.data(), kSegmentMagic, 4) != 0) {
    fail(SegmentError::Kind::BadMagic, "bad segment magic in " + path.string());
  }
  if (static_cast<uint8_t>(data[4]) != kSegmentVersion) {
    fail(SegmentError::Kind::UnsupportedVersion,
         "unsupported segment version " + std::to_string(static_cast<uint8_t>(data[4])) +
             " in " + path.string());
  }
  if (data.size() < header_bytes()) {
    fail(SegmentError::Kind::CorruptDirectory, "segment header truncated in " + path.string());
  }

  Cursor cursor(data.data() + 5, header_bytes() - 5, SegmentError::Kind::CorruptDirectory);
  ParsedHeader header;
  header.file_bytes = data.size();
  header.record_count = cursor.u64();
  if (header.record_count == 0) {
    fail(SegmentError::Kind::CountMismatch, "zero record count in " + path.string());
  }
  uint32_t column_count = cursor.u32();
  if (column_count != kColumnCount) {
    fail(SegmentError::Kind::CorruptDirectory,
         "unexpected column count " + std::to_string(column_count) + " in " + path.string());
  }

  uint64_t next_offset = header_bytes();
  for (std::size_t i = 0; i < kColumnCount; ++i) {
    const ColumnSpec& spec = kSchema[i];
    uint16_t name_len = cursor.u16();
    if (name_len != spec.name.size()) {
      fail(SegmentError::Kind::CorruptDirectory,
           "column name length mismatch at entry " + std::to_string(i));
    }
    const char* name = cursor.take(name_len);
    if (std::string_view(name, name_len) != spec.name) {
      fail(SegmentError::Kind::CorruptDirectory,
           "column name mismatch at entry " + std::to_string(i));
    }
    uint8_t tag = cursor.u8();
    if (tag != static_cast<uint8_t>(spec.encoding)) {
      fail(SegmentError::Kind::CorruptDirectory,
           "column encoding mismatch for " + std::string(spec.name));
    }
    uint64_t offset = cursor.u64();
    uint64_t length = cursor.u64();
    if (offset != next_offset) {
      fail(SegmentError::Kind::CorruptDirectory,
           "non-contiguous column offset for " + std::string(spec.name));
    }
    if (offset > data.size() || length > data.size() - offset) {
      fail(SegmentError::Kind::CorruptDirectory,
           "column payload out of bounds for " + std::string(spec.name));
    }

    const uint64_t rc = header.record_count;
    switch (spec.encoding) {
      case ColumnEncoding::U64Fixed:
        if (length != 8 * rc) {
          fail(SegmentError::Kind::CountMismatch,
               "fixed column length disagrees with record count for " + std::string(spec.name));
        }
        break;
      case ColumnEncoding::U32Fixed:
        if (length != 4 * rc) {
          fail(SegmentError::Kind::CountMismatch,
               "fixed column length disagrees with record count for " + std::string(spec.name));
        }
        break;
      case ColumnEncoding::DictString:
        if (length < 4 + 4 * rc) {
          fail(SegmentError::Kind::CountMismatch,
               "dict column too short for record count in " + std::string(spec.name));
        }
        break;
      case ColumnEncoding::OptionalU64:
        if (length < rc || (length - rc) % 8 != 0 || (length - rc) / 8 > rc) {
          fail(SegmentError::Kind::CountMismatch,
               "optional column length disagrees with record count for " +
                   std::string(spec.name));
        }
        break;
    }

    header.columns.push_back(
        ColumnInfo{std::string(spec.name), spec.encoding, offset, length});
    next_offset = offset + length;
  }

  if (next_offset != data.size()) {
    fail(SegmentError::Kind::CorruptDirectory,
         "segment size disagrees with directory in " + path.string());
  }
  return header;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open segment: " + path.string());
  std::string data;
  in.seekg(0, std::ios::end);
  data.resize(static_cast<std::size_t>(in.tellg()));
  in.seekg(0, std::ios::beg);
  in.read(data.data(), static_cast<std::streamsize>(data.size()));
  if (in.bad()) throw IoError("read failure on segment: " + path.string());
  return data;
}

std::vector<std::string> parse_dict_column(Cursor& cursor, uint64_t record_count,
                                           std::vector<uint32_t>& indices_out,
                                           std::string_view column) {
  uint32_t dict_size = cursor.u32();
  // Each entry needs at least its 4-byte length prefix; reject absurd sizes
  // before reserving anything.
  if (dict_size > cursor.remaining() / 4) {
    fail(SegmentError::Kind::CountMismatch,
         "dictionary size exceeds column payload in " + std::string(column));
  }
  std::vector<std::string> dictionary;
  dictionary.reserve(dict_size);
  for (uint32_t i = 0; i < dict_size; ++i) {
    uint32_t len = cursor.u32();
    if (len > cursor.remaining()) {
      fail(SegmentError::Kind::CountMismatch,
           "dictionary entry overruns column payload in " + std::string(column));
    }
    dictionary.emplace_back(cursor.take(len), len);
  }
  indices_out.resize(record_count);
  for (uint64_t i = 0; i < record_count; ++i) {
    uint32_t index = cursor.u32();
    if (index >= dict_size) {
      fail(SegmentError::Kind::CountMismatch,
           "dictionary index out of range in " + std::string(column));
    }
    indices_out[i] = index;
  }
  if (cursor.remaining() != 0) {
    fail(SegmentError::Kind::CountMismatch,
         "trailing bytes in dict column " + std::string(column));
  }
  return dictionary;
}

}  // namespace

std::string PartitionKey::date_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year, month, day);
  return buf;
}

PartitionKey partition_key_of(uint64_t timestamp_ms, ServerId server) {
  using namespace std::chrono;
  sys_time<milliseconds> tp{milliseconds{static_cast<int64_t>(timestamp_ms)}};
  sys_days day = floor<days>(tp);
  year_month_day ymd{day};
  PartitionKey key;
  key.year = static_cast<int32_t>(static_cast<int>(ymd.year()));
  key.month = static_cast<uint32_t>(ymd.month());
  key.day = static_cast<uint32_t>(ymd.day());
  key.hour = static_cast<uint32_t>(duration_cast<hours>(tp - day).count());
  key.server = server;
  return key;
}

std::string partition_path(const PartitionKey& key, uint32_t part_index) {
  char buf[80];
  std::snprintf(buf, sizeof(buf), "date=%04d-%02u-%02u/hour=%02u/server=%s/part-%05u.tnc",
                key.year, key.month, key.day, key.hour,
                std::string(to_string(key.server)).c_str(), part_index);
  return buf;
}

SegmentInfo write_segment(std::span<const EnrichedRecord> records,
                          const std::filesystem::path& path) {
  if (records.empty()) {
    fail(SegmentError::Kind::EmptySegment, "refusing to write empty segment " + path.string());
  }
  const PartitionKey key =
      partition_key_of(records.front().query.timestamp_ms, records.front().query.server_id);
  for (const auto& record : records) {
    if (partition_key_of(record.query.timestamp_ms, record.query.server_id) != key) {
      fail(SegmentError::Kind::MixedPartition,
           "records span multiple partitions in " + path.string());
    }
  }

  const uint64_t rc = records.size();
  std::vector<std::string> payloads(kColumnCount);

  {
    std::string& out = payloads[0];
    out.reserve(8 * rc);
    for (const auto& r : records) append_u64(out, r.query.timestamp_ms);
  }
  {
    std::string& out = payloads[1];
    out.reserve(4 * rc);
    for (const auto& r : records) append_u32(out, static_cast<uint32_t>(r.query.server_id));
  }
  {
    std::string& out = payloads[2];
    out.reserve(4 * rc);
    for (const auto& r : records) append_u32(out, r.query.client_ip);
  }
  {
    DictionaryBuilder dict;
    std::vector<uint32_t> indices;
    indices.reserve(rc);
    for (const auto& r : records) indices.push_back(dict.index_of(r.query.query_name));
    payloads[3] = dict.payload(indices);
  }
  {
    std::string& out = payloads[4];
    out.reserve(4 * rc);
    for (const auto& r : records) append_u32(out, static_cast<uint32_t>(r.query.query_type));
  }
  {
    std::string& out = payloads[5];
    out.reserve(4 * rc);
    for (const auto& r : records) append_u32(out, r.query.response_code);
  }
  {
    std::string& out = payloads[6];
    out.reserve(rc + 8 * rc);
    for (const auto& r : records) out.push_back(r.subscriber_id ? '\x01' : '\x00');
    for (const auto& r : records) {
      if (r.subscriber_id) append_u64(out, *r.subscriber_id);
    }
  }
  for (std::size_t c = 7; c < kColumnCount; ++c) {
    DictionaryBuilder dict;
    std::vector<uint32_t> indices;
    indices.reserve(rc);
    for (const auto& r : records) {
      const std::string& value = (c == 7) ? r.city : (c == 8) ? r.region_code : r.category;
      indices.push_back(dict.index_of(value));
    }
    payloads[c] = dict.payload(indices);
  }

  std::string file;
  file.reserve(header_bytes());
  file.append(kSegmentMagic, 4);
  file.push_back(static_cast<char>(kSegmentVersion));
  append_u64(file, rc);
  append_u32(file, static_cast<uint32_t>(kColumnCount));

  SegmentInfo info;
  info.record_count = rc;
  uint64_t offset = header_bytes();
  for (std::size_t c = 0; c < kColumnCount; ++c) {
    append_u16(file, static_cast<uint16_t>(kSchema[c].name.size()));
    file += kSchema[c].name;
    file.push_back(static_cast<char>(kSchema[c].encoding));
    append_u64(file, offset);
    append_u64(file, payloads[c].size());
    info.columns.push_back(
        ColumnInfo{std::string(kSchema[c].name), kSchema[c].encoding, offset, payloads[c].size()});
    offset += payloads[c].size();
  }
  for (const auto& payload : payloads) file += payload;
  info.file_bytes = file.size();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create segment: " + path.string());
  out.write(file.data(), static_cast<std::streamsize>(file.size()));
  out.flush();
  if (!out) throw IoError("write failure on segment: " + path.string());
  return info;
}

std::vector<EnrichedRecord> read_segment(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  const ParsedHeader header = parse_header(data, path);
  const uint64_t rc = header.record_count;

  std::vector<EnrichedRecord> records(rc);

  auto column_cursor = [&](std::size_t c) {
    return Cursor(data.data() + header.columns[c].offset, header.columns[c].length,
                  SegmentError::Kind::CountMismatch);
  };

  {
    Cursor cur = column_cursor(0);
    for (uint64_t i = 0; i < rc; ++i) records[i].query.timestamp_ms = cur.u64();
  }
  {
    Cursor cur = column_cursor(1);
    for (uint64_t i = 0; i < rc; ++i) {
      uint32_t v = cur.u32();
      if (v < 1 || v > 3) {
        fail(SegmentError::Kind::CountMismatch, "server_id value out of range");
      }
      records[i].query.server_id = static_cast<ServerId>(v);
    }
  }
  {
    Cursor cur = column_cursor(2);
    for (uint64_t i = 0; i < rc; ++i) records[i].query.client_ip = cur.u32();
  }
  {
    Cursor cur = column_cursor(3);
    std::vector<uint32_t> indices;
    auto dict = parse_dict_column(cur, rc, indices, "query_name");
    for (uint64_t i = 0; i < rc; ++i) records[i].query.query_name = dict[indices[i]];
  }
  {
    Cursor cur = column_cursor(4);
    for (uint64_t i = 0; i < rc; ++i) {
      uint32_t v = cur.u32();
      if (v >= kQueryTypeCount) {
        fail(SegmentError::Kind::CountMismatch, "query_type value out of range");
      }
      records[i].query.query_type = static_cast<QueryType>(v);
    }
  }
  {
    Cursor cur = column_cursor(5);
    for (uint64_t i = 0; i < rc; ++i) {
      uint32_t v = cur.u32();
      if (v > UINT16_MAX) {
        fail(SegmentError::Kind::CountMismatch, "response_code value out of range");
      }
      records[i].query.response_code = static_cast<uint16_t>(v);
    }
  }
  {
    Cursor cur = column_cursor(6);
    const char* presence = cur.take(rc);
    for (uint64_t i = 0; i < rc; ++i) {
      if (presence[i] != 0 && presence[i] != 1) {
        fail(SegmentError::Kind::CountMismatch, "bad presence byte in subscriber_id");
      }
    }
    for (uint64_t i = 0; i < rc; ++i) {
      if (presence[i]) records[i].subscriber_id = cur.u64();
    }
    if (cur.remaining() != 0) {
      fail(SegmentError::Kind::CountMismatch, "trailing bytes in subscriber_id column");
    }
  }
  for (std::size_t c = 7; c < kColumnCount; ++c) {
    Cursor cur = column_cursor(c);
    std::vector<uint32_t> indices;
    auto dict = parse_dict_column(cur, rc, indices, kSchema[c].name);
    for (uint64_t i = 0; i < rc; ++i) {
      std::string& target =
          (c == 7) ? records[i].city : (c == 8) ? records[i].region_code : records[i].category;
      target = dict[indices[i]];
    }
  }

  return records;
}

SegmentInfo inspect_segment(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  const ParsedHeader header = parse_header(data, path);
  return SegmentInfo{header.record_count, header.file_bytes, header.columns};
}

}  // namespace dnsa
