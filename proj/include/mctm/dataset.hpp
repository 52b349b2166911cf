#ifndef MCTM_DATASET_HPP
#define MCTM_DATASET_HPP

#include "mctm/basis.hpp"
#include "mctm/common.hpp"

#include <string>
#include <vector>

namespace mctm {

/// n x J responses with an n x p covariate matrix (p may be 0).
struct Dataset {
  RowMatrix Y;
  RowMatrix X;
  std::vector<std::string> response_names;
  std::vector<std::string> covariate_names;

  Dataset() = default;
  /// Validates shapes and finiteness; fills default column names.
  Dataset(RowMatrix y, RowMatrix x, std::vector<std::string> response_names = {},
          std::vector<std::string> covariate_names = {});

  int n() const { return static_cast<int>(Y.rows()); }
  int dim() const { return static_cast<int>(Y.cols()); }
  int covariates() const { return static_cast<int>(X.cols()); }

  ConstSpan response_row(int i) const { return row_span(Y, i); }
  ConstSpan covariate_row(int i) const { return row_span(X, i); }

  /// [min, max] of response column j, optionally widened by a fraction of the range.
  Support response_support(int j, double margin = 0.0) const;
  Support covariate_support(int c, double margin = 0.0) const;

  /// Copy with rows sorted lexicographically by (Y, X); fit() works on this
  /// canonical order so estimates do not depend on the input row order.
  Dataset canonical() const;

  /// Rows selected by index.
  Dataset subset(const std::vector<int>& rows) const;
};

}  // namespace mctm

#endif
