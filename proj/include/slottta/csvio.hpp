#pragma once

#include <string>
#include <vector>

namespace slottta {

// Fixed-format float text so reruns are byte-identical.
std::string fmt_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // throws FormatError naming the column
  double number(size_t row, int col) const;
  std::string to_string() const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv_file(const std::string& path);

// Writes via a temp file and rename so readers never see partial output.
void atomic_write_file(const std::string& path, const std::string& payload);
std::string read_file(const std::string& path);

}  // namespace slottta
