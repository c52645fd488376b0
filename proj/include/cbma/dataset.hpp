#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace cbma {

// N observations of m named variables, dense, no missing entries.
struct Dataset {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;  // N x m

  Dataset() = default;

  Dataset(std::vector<std::string> names, Eigen::MatrixXd vals)
      : columns(std::move(names)), values(std::move(vals)) {
    if (static_cast<Eigen::Index>(columns.size()) != values.cols()) {
      throw std::invalid_argument("column names do not match value columns");
    }
    if (values.rows() < 1) throw std::invalid_argument("dataset needs N >= 1");
    std::unordered_set<std::string> seen;
    for (const std::string& c : columns) {
      if (!seen.insert(c).second) {
        throw std::invalid_argument("duplicate column name: " + c);
      }
    }
    if (!values.allFinite()) {
      throw std::invalid_argument("dataset contains non-finite entries");
    }
  }

  Eigen::Index sample_count() const { return values.rows(); }
  Eigen::Index column_count() const { return values.cols(); }

  int column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return static_cast<int>(i);
    }
    throw std::invalid_argument("unknown column name: " + name);
  }

  void check_column(int j) const {
    if (j < 0 || j >= values.cols()) {
      throw std::invalid_argument("column index " + std::to_string(j) +
                                  " out of range");
    }
  }

  Eigen::VectorXd col(int j) const {
    check_column(j);
    return values.col(j);
  }
};

// Maps each name to its column index; throws on a missing column.
inline std::vector<int> resolve_columns(const Dataset& data,
                                        const std::vector<std::string>& names) {
  std::vector<int> idx;
  idx.reserve(names.size());
  for (const std::string& n : names) idx.push_back(data.column_index(n));
  return idx;
}

}  // namespace cbma
