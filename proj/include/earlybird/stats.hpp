#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "earlybird/metrics.hpp"

namespace earlybird::stats {

struct Population {
  std::string treatment;
  std::vector<double> scores;
  std::string metric;
  metrics::Direction direction = metrics::Direction::maximize;
};

struct SkConfig {
  int bootstrap_iterations = 512;
  double alpha = 0.05;
  double small_effect = 0.06;  // non-small iff |a12 - 0.5| >= this
  std::uint64_t seed = 1;
};

/// P(x > y) + 0.5 P(x == y) over all pairs.
double a12(std::span<const double> x, std::span<const double> y);

/// Bootstrap test of the mean difference under the null of equal means
/// (both samples shifted to the pooled mean). True iff resampled differences
/// reach the observed one in fewer than alpha * iterations replicates.
bool bootstrap_diff(std::span<const double> x, std::span<const double> y, int iterations, double alpha,
                    std::uint64_t seed);

/// A split scott_knott accepted, with the gate values that admitted it.
struct AcceptedSplit {
  std::vector<std::string> left;
  std::vector<std::string> right;
  double expected_delta = 0;
  bool bootstrap = false;
  double a12 = 0.5;
};

struct SkResult {
  std::vector<int> ranks;  // aligned with the input populations, 1 = best
  std::vector<AcceptedSplit> splits;
};

/// All populations should share one metric and direction.
SkResult scott_knott(std::span<const Population> populations, const SkConfig& config = {});

double median(std::span<const double> v);
/// 75th minus 25th percentile, linear interpolation.
double iqr(std::span<const double> v);

struct RankCell {
  int rank = 0;
  double median = 0;
  double iqr = 0;
  std::size_t n = 0;
};

struct RankTable {
  std::vector<std::string> metrics;     // report order
  std::vector<std::string> treatments;  // sorted by wins desc, then name
  std::map<std::string, std::map<std::string, RankCell>> cells;  // metric -> treatment -> cell

  bool top(const std::string& metric, const std::string& treatment) const;
};

/// Ranks every metric's populations independently.
RankTable rank_table(std::span<const Population> populations, const SkConfig& config = {});

/// Metrics on which each treatment holds rank 1.
std::map<std::string, int> count_wins(const RankTable& table);

std::string rank_csv(const RankTable& table);
/// Aligned text layout: one row per treatment, "median (iqr)" per metric with
/// a rank column and a wins column. Fractions are shown as percentages.
std::string rank_text(const RankTable& table);

}  // namespace earlybird::stats
