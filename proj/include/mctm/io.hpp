#ifndef MCTM_IO_HPP
#define MCTM_IO_HPP

#include "mctm/common.hpp"
#include "mctm/dataset.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mctm {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  RowMatrix values;

  /// Column index by name; throws InputError naming the missing column.
  int column(const std::string& name) const;
};

/// Comma-separated numeric table with a header row. Errors name the source,
/// the 1-based line and the column.
CsvTable read_csv(std::istream& in, const std::string& source = "<input>");
CsvTable read_csv_file(const std::string& path);

void write_csv(std::ostream& out, const std::vector<std::string>& header, const RowMatrix& values);
void write_csv_file(const std::string& path, const std::vector<std::string>& header, const RowMatrix& values);

/// Dataset from named response and covariate columns.
Dataset select_dataset(const CsvTable& table, const std::vector<std::string>& responses,
                       const std::vector<std::string>& covariates);

/// Splits "a,b,c" on commas, trimming blanks; empty input gives an empty list.
std::vector<std::string> split_list(const std::string& text);

}  // namespace mctm

#endif
