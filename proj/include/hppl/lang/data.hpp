#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hppl {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Column-oriented numeric table; one column per program parameter.
/// Rows are addressed 1-based, matching `yobs[i]` with `i in 1 .. N`.
class DataTable {
 public:
  DataTable() = default;

  void add_column(std::string name, std::vector<double> values);

  bool has(std::string_view name) const;
  std::size_t column_index(std::string_view name) const;
  const std::vector<double>& column(std::string_view name) const;
  const std::vector<double>& column(std::size_t index) const { return columns_.at(index); }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t rows() const;

  /// Throws DataError when the row is outside the column.
  double at(std::size_t column, long long row) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

/// CSV with a header row of parameter names and one data row per loop
/// iteration. Columns may differ in length only through trailing empty cells.
DataTable read_csv(std::istream& in);
DataTable read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const DataTable& table);

}  // namespace hppl
