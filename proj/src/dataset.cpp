#include "mctm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mctm {

Dataset::Dataset(RowMatrix y, RowMatrix x, std::vector<std::string> rnames, std::vector<std::string> cnames)
    : Y(std::move(y)), X(std::move(x)), response_names(std::move(rnames)), covariate_names(std::move(cnames)) {
  if (Y.rows() < 1 || Y.cols() < 1) throw ConfigError("dataset needs at least one row and one response");
  if (X.rows() != Y.rows()) {
    if (X.size() == 0) {
      X.resize(Y.rows(), 0);
    } else {
      throw ConfigError("response and covariate matrices have different row counts");
    }
  }
  if (response_names.empty()) {
    for (int j = 0; j < Y.cols(); ++j) response_names.push_back("y" + std::to_string(j + 1));
  }
  if (covariate_names.empty()) {
    for (int c = 0; c < X.cols(); ++c) covariate_names.push_back("x" + std::to_string(c + 1));
  }
  if (static_cast<int>(response_names.size()) != Y.cols() || static_cast<int>(covariate_names.size()) != X.cols()) {
    throw ConfigError("column name count does not match the data");
  }
  const auto check_finite = [](const RowMatrix& m, const std::vector<std::string>& names) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (!std::isfinite(m(i, c))) {
          throw ConfigError("non-finite value in row " + std::to_string(i + 1) + ", column '" +
                            names[static_cast<std::size_t>(c)] + "'");
        }
      }
    }
  };
  check_finite(Y, response_names);
  check_finite(X, covariate_names);
}

Support Dataset::response_support(int j, double margin) const {
  const Vector col = Y.col(j);
  return Support::from_range(as_span(col), margin);
}

Support Dataset::covariate_support(int c, double margin) const {
  const Vector col = X.col(c);
  return Support::from_range(as_span(col), margin);
}

Dataset Dataset::canonical() const {
  std::vector<int> order(static_cast<std::size_t>(n()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [this](int a, int b) {
    for (int j = 0; j < Y.cols(); ++j) {
      if (Y(a, j) != Y(b, j)) return Y(a, j) < Y(b, j);
    }
    for (int c = 0; c < X.cols(); ++c) {
      if (X(a, c) != X(b, c)) return X(a, c) < X(b, c);
    }
    return false;
  });
  return subset(order);
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  out.Y.resize(static_cast<Eigen::Index>(rows.size()), Y.cols());
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.Y.row(static_cast<Eigen::Index>(i)) = Y.row(rows[i]);
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  }
  out.response_names = response_names;
  out.covariate_names = covariate_names;
  return out;
}

}  // namespace mctm
