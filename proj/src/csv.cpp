#include "dnsa/csv.hpp"

#include <fstream>

#include "dnsa/errors.hpp"

namespace dnsa {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(pos));
      break;
    }
    fields.emplace_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return fields;
}

CsvFile read_csv(const std::filesystem::path& path, std::string_view expected_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open csv file: " + path.string());

  CsvFile file;
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("csv file is empty: " + path.string());
  }
  if (line != expected_header) {
    throw ValidationError("csv header mismatch in " + path.string() + ": expected '" +
                          std::string(expected_header) + "', got '" + line + "'");
  }
  file.header = split_csv_line(line);
  const std::size_t width = file.header.size();

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != width) {
      throw ValidationError("csv field count mismatch in " + path.string() + " line " +
                            std::to_string(line_no));
    }
    file.rows.push_back(std::move(fields));
  }
  if (in.bad()) throw IoError("read failure on csv file: " + path.string());
  return file;
}

}  // namespace dnsa
