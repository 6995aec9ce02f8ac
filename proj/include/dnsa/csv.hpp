#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dnsa {

// Minimal CSV: comma separated, LF line endings, no quoting. Every data file
// this project reads or writes carries a header row.

struct CsvFile {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_csv_line(std::string_view line);

// Throws IoError if unreadable, ValidationError if the header differs from
// expected_header or a row has the wrong field count.
CsvFile read_csv(const std::filesystem::path& path, std::string_view expected_header);

}  // namespace dnsa
