#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "earlybird/feature_matrix.hpp"

namespace earlybird::preprocess {

/// Columns left after engineering, in output order.
const std::vector<std::string>& engineered_feature_names();

/// Relative churn (la/lt, ld/lt, lt/nf, nuc/nf with denominators floored at
/// 1), drop nd and rexp, then ln(x + 1) on everything except fix. Throws if
/// the matrix is already engineered. Works row by row, so any row subset of
/// a raw matrix can be engineered independently.
FeatureMatrix engineer(const FeatureMatrix& raw);

/// Absolute Pearson correlation; 0 when either side has zero variance.
double abs_correlation(std::span<const double> a, std::span<const double> b);

struct SubsetMerit {
  std::vector<std::string> features;
  double merit = 0;
};

struct CfsResult {
  std::vector<std::string> selected;  // in matrix column order
  double merit = 0;
  std::vector<SubsetMerit> evaluated;  // every subset scored, in search order
};

/// merit = k * mean|r_cf| / sqrt(k + k(k-1) * mean|r_ff|)
double cfs_merit(std::span<const double> feature_class_corr,
                 const std::vector<std::vector<double>>& feature_feature_corr,
                 std::span<const std::size_t> subset);

/// Best-first forward search; stops after `max_stale` consecutive expansions
/// that do not improve the best merit. Needs >= 2 rows of each class.
CfsResult cfs_select(const FeatureMatrix& matrix, int max_stale = 5);

/// Oversamples the minority class to the majority count. Synthetic rows lie
/// on segments to one of the k nearest minority neighbours (Euclidean).
/// Refuses matrices tagged as test data.
FeatureMatrix smote_balance(const FeatureMatrix& matrix, int k, std::uint64_t seed);

}  // namespace earlybird::preprocess
