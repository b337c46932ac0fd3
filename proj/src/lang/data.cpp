#include "hppl/lang/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "hppl/lang/render.hpp"

namespace hppl {

void DataTable::add_column(std::string name, std::vector<double> values) {
  if (has(name)) throw DataError("duplicate data column '" + name + "'");
  names_.push_back(std::move(name));
  columns_.push_back(std::move(values));
}

bool DataTable::has(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t DataTable::column_index(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DataError("no data column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

const std::vector<double>& DataTable::column(std::string_view name) const { return columns_[column_index(name)]; }

std::size_t DataTable::rows() const {
  std::size_t n = 0;
  for (const auto& c : columns_) n = std::max(n, c.size());
  return n;
}

double DataTable::at(std::size_t column, long long row) const {
  const auto& c = columns_.at(column);
  if (row < 1 || static_cast<std::size_t>(row) > c.size()) {
    throw DataError("data column '" + names_[column] + "' has " + std::to_string(c.size()) +
                    " rows; row " + std::to_string(row) + " requested");
  }
  return c[static_cast<std::size_t>(row - 1)];
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

DataTable read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty data file");
  std::vector<std::string> header = split(line);
  std::vector<std::vector<double>> cols(header.size());
  std::vector<bool> ended(header.size(), false);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                      " cells, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        ended[c] = true;
        continue;
      }
      if (ended[c]) throw DataError("line " + std::to_string(lineno) + ": gap in column '" + header[c] + "'");
      double v = 0.0;
      const char* b = cells[c].data();
      const char* e = b + cells[c].size();
      auto [ptr, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || ptr != e) {
        throw DataError("line " + std::to_string(lineno) + ": '" + cells[c] + "' is not a number");
      }
      cols[c].push_back(v);
    }
  }
  DataTable t;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].empty()) throw DataError("empty column name in header");
    t.add_column(header[c], std::move(cols[c]));
  }
  return t;
}

DataTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  return read_csv(in);
}

void write_csv(std::ostream& out, const DataTable& table) {
  const auto& names = table.names();
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << "\n";
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (c) out << ",";
      const auto& col = table.column(c);
      if (r < col.size()) out << format_number(col[r]);
    }
    out << "\n";
  }
}

}  // namespace hppl
