#include "slottta/csvio.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "slottta/errors.hpp"

namespace slottta {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw FormatError("csv: missing column '" + name + "'");
}

double CsvTable::number(size_t row, int col) const {
  const std::string& cell = rows.at(row).at(static_cast<size_t>(col));
  try {
    size_t pos = 0;
    const double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw FormatError("");
    return v;
  } catch (...) {
    throw FormatError("csv: cell '" + cell + "' is not a number");
  }
}

std::string CsvTable::to_string() const {
  std::ostringstream os;
  for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size())
        throw FormatError("csv: row with " + std::to_string(cells.size()) + " cells under a " +
                          std::to_string(t.header.size()) + "-column header");
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw FormatError("csv: empty input");
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  return parse_csv(read_file(path));
}

void atomic_write_file(const std::string& path, const std::string& payload) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write " + tmp.string());
    os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!os) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace slottta
