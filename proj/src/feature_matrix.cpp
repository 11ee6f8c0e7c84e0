#include "earlybird/feature_matrix.hpp"

#include <cmath>
#include <unordered_set>

#include "earlybird/error.hpp"

namespace earlybird {

std::optional<std::size_t> FeatureMatrix::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  return std::nullopt;
}

std::size_t FeatureMatrix::require_column(std::string_view name) const {
  if (auto idx = column_index(name)) return *idx;
  throw DataError("missing column: " + std::string(name));
}

std::vector<double> FeatureMatrix::column(std::size_t index) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(index));
  return out;
}

std::size_t FeatureMatrix::count_label(int label) const {
  std::size_t n = 0;
  for (int l : labels) n += (l == label) ? 1 : 0;
  return n;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& n : names) idx.push_back(require_column(n));
  FeatureMatrix out;
  out.columns.assign(names.begin(), names.end());
  out.labels = labels;
  out.ids = ids;
  out.role = role;
  out.engineered = engineered;
  out.rows.reserve(rows.size());
  for (const auto& r : rows) {
    std::vector<double> row;
    row.reserve(idx.size());
    for (std::size_t i : idx) row.push_back(r[i]);
    out.rows.push_back(std::move(row));
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  FeatureMatrix out;
  out.columns = columns;
  out.role = role;
  out.engineered = engineered;
  for (std::size_t i : indices) {
    out.rows.push_back(rows.at(i));
    out.labels.push_back(labels.at(i));
    if (!ids.empty()) out.ids.push_back(ids.at(i));
  }
  return out;
}

void FeatureMatrix::append(const FeatureMatrix& other) {
  if (other.columns != columns) throw DataError("append: column mismatch");
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
  ids.insert(ids.end(), other.ids.begin(), other.ids.end());
}

void FeatureMatrix::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& c : columns)
    if (!seen.insert(c).second) throw DataError("duplicate column: " + c);
  if (labels.size() != rows.size()) throw DataError("label count does not match rows");
  if (!ids.empty() && ids.size() != rows.size()) throw DataError("id count does not match rows");
  for (const auto& r : rows) {
    if (r.size() != columns.size()) throw DataError("ragged row");
    for (double v : r)
      if (!std::isfinite(v)) throw DataError("non-finite value in feature matrix");
  }
}

const std::vector<std::string>& raw_feature_names() {
  static const std::vector<std::string> names{"ns",  "nd",   "nf",  "entropy", "la",
                                              "ld",  "lt",   "fix", "ndev",    "age",
                                              "nuc", "exp",  "rexp", "sexp"};
  return names;
}

std::vector<double> feature_vector(const CommitFeatures& f) {
  return {f.ns,  f.nd,   f.nf,  f.entropy, f.la,  f.ld,  f.lt,
          f.fix ? 1.0 : 0.0,    f.ndev,    f.age, f.nuc, f.exp, f.rexp, f.sexp};
}

FeatureMatrix to_matrix(std::span<const LabeledCommit> commits) {
  FeatureMatrix m;
  m.columns = raw_feature_names();
  m.rows.reserve(commits.size());
  for (const auto& c : commits) {
    m.rows.push_back(feature_vector(c.features));
    m.labels.push_back(c.defective ? 1 : 0);
    m.ids.push_back(c.hash);
  }
  return m;
}

}  // namespace earlybird
