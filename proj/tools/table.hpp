#pragma once

#include <string>
#include <vector>

namespace cli {

// Rows of preformatted cells; comments are written as '#'-prefixed lines
// before the header (header_comments) or after the last row (footer_comments).
struct Table {
  std::vector<std::string> header_comments;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> footer_comments;
};

std::string fmt(double x);  // 17 significant digits, scientific
std::string fmt(long x);
std::string fmt(int x);

std::string to_csv(const Table& t);
void write_file(const std::string& path, const std::string& text);
std::string read_file(const std::string& path);

// Parses a CSV produced by to_csv (comment lines skipped).
Table parse_csv(const std::string& text);
// Index of a named column; throws naming the missing column.
size_t column_index(const Table& t, const std::string& name);

}  // namespace cli
