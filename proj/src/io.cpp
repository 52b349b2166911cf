#include "mctm/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mctm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      out.push_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(trim(field));
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw InputError("column '" + name + "' not found");
}

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw InputError(source + ": empty file, a header row is required");
  for (const auto& f : split_fields(line)) table.header.push_back(unquote(f));
  const std::size_t cols = table.header.size();
  for (std::size_t i = 0; i < cols; ++i) {
    if (table.header[i].empty()) throw InputError(source + ": empty column name in header (column " + std::to_string(i + 1) + ")");
  }

  std::vector<double> values;
  int rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != cols) {
      throw InputError(source + ": line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string& f = fields[c];
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw InputError(source + ": line " + std::to_string(line_no) + ", column '" + table.header[c] +
                         "': cannot parse '" + f + "' as a number");
      }
      values.push_back(v);
    }
    ++rows;
  }
  table.values = RowMatrix(rows, static_cast<Eigen::Index>(cols));
  std::copy(values.begin(), values.end(), table.values.data());
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_csv(in, path);
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const RowMatrix& values) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols()) throw ConfigError("CSV header and data widths differ");
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << format_double(values(r, c));
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const std::vector<std::string>& header, const RowMatrix& values) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_csv(out, header, values);
}

Dataset select_dataset(const CsvTable& table, const std::vector<std::string>& responses,
                       const std::vector<std::string>& covariates) {
  if (responses.empty()) throw InputError("at least one response column is required");
  const Eigen::Index n = table.values.rows();
  if (n == 0) throw InputError("the data file has no rows");
  RowMatrix y(n, static_cast<Eigen::Index>(responses.size()));
  RowMatrix x(n, static_cast<Eigen::Index>(covariates.size()));
  for (std::size_t j = 0; j < responses.size(); ++j) y.col(static_cast<Eigen::Index>(j)) = table.values.col(table.column(responses[j]));
  for (std::size_t c = 0; c < covariates.size(); ++c) x.col(static_cast<Eigen::Index>(c)) = table.values.col(table.column(covariates[c]));
  try {
    return Dataset(std::move(y), std::move(x), responses, covariates);
  } catch (const ConfigError& e) {
    throw InputError(e.what());
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace mctm
