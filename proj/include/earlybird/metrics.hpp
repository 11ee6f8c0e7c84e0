#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace earlybird::metrics {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth);

// Recall and PF return nullopt when the denominator is zero; the caller
// decides whether to skip the release.
std::optional<double> recall(const ConfusionMatrix& cm);
std::optional<double> pf(const ConfusionMatrix& cm);

double d2h(double recall, double pf);
double g_measure(double recall, double pf);
double mcc(const ConfusionMatrix& cm);

double brier(std::span<const double> probs, std::span<const int> truths);

/// False alarms ranked above the first true defect, sorting by descending
/// probability with ties kept in original order. Requires one defect.
std::size_t ifa(std::span<const double> probs, std::span<const int> truths);

/// Mann-Whitney AUC with average ranks for ties. Requires both classes.
double auc(std::span<const double> probs, std::span<const int> truths);

/// The eight measures for one treatment on one release. recall, pf, auc and
/// g_measure are fractions here; reports scale them by 100.
struct EvalResult {
  double recall = 0;
  double pf = 0;
  double auc = 0;
  double d2h = 0;
  double brier = 0;
  double g_measure = 0;
  double ifa = 0;
  double mcc = 0;
  /// Conventions applied for degenerate releases (e.g. "auc:single-class").
  std::vector<std::string> notes;
};

/// Evaluates predictions against truth. Returns nullopt when the release has
/// no defective commits (recall undefined).
std::optional<EvalResult> evaluate(std::span<const double> probs, std::span<const int> labels,
                                   std::span<const int> truths);

enum class Direction { maximize, minimize };

struct MetricInfo {
  std::string_view name;
  std::string_view header;
  Direction direction;
};

/// Report order: Recall+, PF-, AUC+, D2H-, Brier-, G-Score+, IFA-, MCC+.
std::span<const MetricInfo> all_metrics();
const MetricInfo& metric_info(std::string_view name);
double metric_value(const EvalResult& r, std::string_view name);

/// Correlation integral C(r) with the L1 norm.
double correlation_integral(const std::vector<std::vector<double>>& points, double radius);

/// Max slope of ln C(r) against ln r across adjacent radii whose C(r) lies
/// strictly inside (0, 1). Returns 0 when no such pair exists.
double intrinsic_dimension(const std::vector<std::vector<double>>& points,
                           std::span<const double> radii);

/// Geometric radius grid over the 5th..50th percentile of L1 pair distances.
std::vector<double> default_radius_grid(const std::vector<std::vector<double>>& points,
                                        std::size_t steps = 10);

}  // namespace earlybird::metrics
