#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "earlybird/commit.hpp"

namespace earlybird {

/// Where a matrix sits in an experiment. Oversampling refuses test data.
enum class MatrixRole { unspecified, train, test };

/// Row-major numeric table with one boolean label per row. Row ids are
/// commit hashes, which is what the split audits intersect.
struct FeatureMatrix {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<std::string> ids;
  MatrixRole role = MatrixRole::unspecified;
  bool engineered = false;

  std::size_t size() const { return rows.size(); }
  std::size_t width() const { return columns.size(); }
  bool empty() const { return rows.empty(); }

  std::optional<std::size_t> column_index(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;
  std::vector<double> column(std::size_t index) const;
  std::size_t count_label(int label) const;

  FeatureMatrix select_columns(std::span<const std::string> names) const;
  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;
  void append(const FeatureMatrix& other);

  /// Throws DataError on ragged rows, duplicate columns, non-finite values or
  /// label/id count mismatches.
  void validate() const;
};

/// The 14 raw process metrics in canonical order.
const std::vector<std::string>& raw_feature_names();

std::vector<double> feature_vector(const CommitFeatures& f);

FeatureMatrix to_matrix(std::span<const LabeledCommit> commits);

}  // namespace earlybird
