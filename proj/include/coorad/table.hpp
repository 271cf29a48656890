#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace coorad {

/// Column-oriented numeric table. Column order is insertion order, which is
/// also the CSV column order.
class Table {
 public:
  Table() = default;
  explicit Table(std::size_t rows) : rows_(rows) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  bool has(const std::string& name) const { return index_.count(name) != 0; }

  const std::vector<double>& col(const std::string& name) const;
  std::vector<double>& col(const std::string& name);

  /// Adds or replaces a column. Throws ParameterError on a length mismatch.
  void set(const std::string& name, std::vector<double> values);

  /// New table holding the given rows, in the given order (repeats allowed).
  Table take(std::span<const std::size_t> rows) const;

 private:
  std::size_t rows_ = 0;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Shortest text that round-trips a double exactly; "NA" for NaN.
std::string format_number(double x);

void write_csv(const Table& table, std::ostream& out);
Table read_csv(std::istream& in);
Table read_csv_file(const std::string& path);

/// Splits on a delimiter and trims surrounding whitespace from each field.
std::vector<std::string> split_fields(const std::string& line, char delim = ',');

}  // namespace coorad
