#include "coorad/table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "coorad/error.hpp"

namespace coorad {

const std::vector<double>& Table::col(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ParameterError("table", "missing column '" + name + "'");
  return data_[it->second];
}

std::vector<double>& Table::col(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ParameterError("table", "missing column '" + name + "'");
  return data_[it->second];
}

void Table::set(const std::string& name, std::vector<double> values) {
  if (names_.empty() && rows_ == 0) rows_ = values.size();
  if (values.size() != rows_)
    throw ParameterError("table", fmt::format("column '{}' has {} rows, table has {}", name,
                                              values.size(), rows_));
  auto it = index_.find(name);
  if (it != index_.end()) {
    data_[it->second] = std::move(values);
    return;
  }
  index_.emplace(name, names_.size());
  names_.push_back(name);
  data_.push_back(std::move(values));
}

Table Table::take(std::span<const std::size_t> rows) const {
  Table out(rows.size());
  for (std::size_t c = 0; c < names_.size(); ++c) {
    std::vector<double> v(rows.size());
    const auto& src = data_[c];
    for (std::size_t i = 0; i < rows.size(); ++i) v[i] = src[rows[i]];
    out.set(names_[c], std::move(v));
  }
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "NA";
  if (x == std::floor(x) && std::fabs(x) < 1e15) return fmt::format("{}", static_cast<long long>(x));
  return fmt::format("{}", x);
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(delim, start);
    std::string field = line.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    auto b = field.find_first_not_of(" \t\r");
    auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

void write_csv(const Table& table, std::ostream& out) {
  const auto& names = table.names();
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
  std::vector<const std::vector<double>*> cols;
  for (const auto& n : names) cols.push_back(&table.col(n));
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << format_number((*cols[c])[r]);
    out << '\n';
  }
}

Table read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParameterError("table", "empty CSV input");
  const auto header = split_fields(line);
  std::vector<std::vector<double>> cols(header.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw ParameterError("table", fmt::format("CSV line {} has {} fields, expected {}", lineno,
                                                fields.size(), header.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto& f = fields[c];
      if (f == "NA" || f.empty()) {
        cols[c].push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw ParameterError("table", fmt::format("CSV line {}: '{}' is not a number", lineno, f));
      cols[c].push_back(v);
    }
  }
  Table t(cols.empty() ? 0 : cols.front().size());
  for (std::size_t c = 0; c < header.size(); ++c) t.set(header[c], std::move(cols[c]));
  return t;
}

Table read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("table", "cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace coorad
