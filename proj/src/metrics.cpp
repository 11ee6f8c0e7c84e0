#include "earlybird/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "earlybird/error.hpp"

namespace earlybird::metrics {

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw DataError("confusion: length mismatch");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool t = truth[i] != 0;
    if (p && t) ++cm.tp;
    else if (p) ++cm.fp;
    else if (t) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

std::optional<double> recall(const ConfusionMatrix& cm) {
  if (cm.tp + cm.fn == 0) return std::nullopt;
  return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
}

std::optional<double> pf(const ConfusionMatrix& cm) {
  if (cm.fp + cm.tn == 0) return std::nullopt;
  return static_cast<double>(cm.fp) / static_cast<double>(cm.fp + cm.tn);
}

double d2h(double recall, double pf) {
  return std::sqrt((1.0 - recall) * (1.0 - recall) + pf * pf) / std::sqrt(2.0);
}

double g_measure(double recall, double pf) {
  const double denom = recall + (1.0 - pf);
  if (denom == 0.0) return 0.0;
  return 2.0 * recall * (1.0 - pf) / denom;
}

double mcc(const ConfusionMatrix& cm) {
  const double tp = static_cast<double>(cm.tp);
  const double fp = static_cast<double>(cm.fp);
  const double tn = static_cast<double>(cm.tn);
  const double fn = static_cast<double>(cm.fn);
  const double a = tp + fp, b = tp + fn, c = tn + fp, d = tn + fn;
  if (a == 0 || b == 0 || c == 0 || d == 0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(a * b * c * d);
}

double brier(std::span<const double> probs, std::span<const int> truths) {
  if (probs.size() != truths.size()) throw DataError("brier: length mismatch");
  if (probs.empty()) throw DataError("brier: empty input");
  for (double p : probs)
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("brier: probability outside [0, 1]");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double y = truths[i] != 0 ? 1.0 : 0.0;
    sum += (y - probs[i]) * (y - probs[i]);
  }
  return sum / static_cast<double>(probs.size());
}

std::size_t ifa(std::span<const double> probs, std::span<const int> truths) {
  if (probs.size() != truths.size()) throw DataError("ifa: length mismatch");
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  std::size_t false_alarms = 0;
  for (std::size_t idx : order) {
    if (truths[idx] != 0) return false_alarms;
    ++false_alarms;
  }
  throw DataError("ifa: no defective commit");
}

double auc(std::span<const double> probs, std::span<const int> truths) {
  if (probs.size() != truths.size()) throw DataError("auc: length mismatch");
  const std::size_t n = probs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && probs[order[j + 1]] == probs[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  double pos = 0, rank_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (truths[i] != 0) {
      pos += 1;
      rank_sum += rank[i];
    }
  }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0 || neg == 0) throw DataError("auc: both classes required");
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

std::optional<EvalResult> evaluate(std::span<const double> probs, std::span<const int> labels,
                                   std::span<const int> truths) {
  const ConfusionMatrix cm = confusion(labels, truths);
  const auto r = recall(cm);
  if (!r) return std::nullopt;
  EvalResult out;
  out.recall = *r;
  if (const auto p = pf(cm)) {
    out.pf = *p;
  } else {
    out.pf = 0.0;
    out.notes.emplace_back("pf:no-clean-commits");
  }
  if (cm.tn + cm.fp > 0) {
    out.auc = auc(probs, truths);
  } else {
    out.auc = 0.5;
    out.notes.emplace_back("auc:single-class");
  }
  out.d2h = d2h(out.recall, out.pf);
  out.brier = brier(probs, truths);
  out.g_measure = g_measure(out.recall, out.pf);
  out.ifa = static_cast<double>(ifa(probs, truths));
  out.mcc = mcc(cm);
  return out;
}

namespace {
constexpr std::array<MetricInfo, 8> kMetrics{{
    {"recall", "Recall+", Direction::maximize},
    {"pf", "PF-", Direction::minimize},
    {"auc", "AUC+", Direction::maximize},
    {"d2h", "D2H-", Direction::minimize},
    {"brier", "Brier-", Direction::minimize},
    {"g_measure", "G-Score+", Direction::maximize},
    {"ifa", "IFA-", Direction::minimize},
    {"mcc", "MCC+", Direction::maximize},
}};
}  // namespace

std::span<const MetricInfo> all_metrics() { return kMetrics; }

const MetricInfo& metric_info(std::string_view name) {
  for (const auto& m : kMetrics)
    if (m.name == name) return m;
  throw ConfigError("unknown metric: " + std::string(name));
}

double metric_value(const EvalResult& r, std::string_view name) {
  if (name == "recall") return r.recall;
  if (name == "pf") return r.pf;
  if (name == "auc") return r.auc;
  if (name == "d2h") return r.d2h;
  if (name == "brier") return r.brier;
  if (name == "g_measure") return r.g_measure;
  if (name == "ifa") return r.ifa;
  if (name == "mcc") return r.mcc;
  throw ConfigError("unknown metric: " + std::string(name));
}

namespace {
double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t k = 0; k < a.size(); ++k) d += std::abs(a[k] - b[k]);
  return d;
}
}  // namespace

double correlation_integral(const std::vector<std::vector<double>>& points, double radius) {
  const std::size_t n = points.size();
  if (n < 2) return 0.0;
  std::size_t close = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (l1(points[i], points[j]) < radius) ++close;
  return 2.0 * static_cast<double>(close) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double intrinsic_dimension(const std::vector<std::vector<double>>& points,
                           std::span<const double> radii) {
  const std::size_t n = points.size();
  if (n < 10) throw DataError("intrinsic_dimension: need at least 10 rows");
  // Pairwise distances once, then count per radius.
  std::vector<double> dists;
  dists.reserve(n * (n - (n > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dists.push_back(l1(points[i], points[j]));
  std::sort(dists.begin(), dists.end());
  const double pairs = static_cast<double>(dists.size());

  std::vector<double> grid(radii.begin(), radii.end());
  std::sort(grid.begin(), grid.end());
  std::vector<double> c(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto below = std::lower_bound(dists.begin(), dists.end(), grid[g]) - dists.begin();
    c[g] = pairs > 0 ? static_cast<double>(below) / pairs : 0.0;
  }
  double best = 0.0;
  for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
    const bool inside = c[g] > 0 && c[g] < 1 && c[g + 1] > 0 && c[g + 1] < 1;
    if (!inside || grid[g] <= 0 || grid[g + 1] == grid[g]) continue;
    const double slope =
        (std::log(c[g + 1]) - std::log(c[g])) / (std::log(grid[g + 1]) - std::log(grid[g]));
    best = std::max(best, slope);
  }
  return best;
}

std::vector<double> default_radius_grid(const std::vector<std::vector<double>>& points,
                                        std::size_t steps) {
  std::vector<double> dists;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = l1(points[i], points[j]);
      if (d > 0) dists.push_back(d);
    }
  if (dists.empty() || steps < 2) return {1.0};
  std::sort(dists.begin(), dists.end());
  // Span the 5th..50th percentile of positive distances; the extreme tails
  // are dominated by lattice and saturation effects.
  const auto at = [&](double q) {
    return dists[static_cast<std::size_t>(q * static_cast<double>(dists.size() - 1))];
  };
  const double lo = at(0.05), hi = at(0.5);
  if (!(hi > lo)) return {lo, lo * 2.0};
  std::vector<double> grid(steps);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t s = 0; s < steps; ++s)
    grid[s] = std::exp(a + (b - a) * static_cast<double>(s) / static_cast<double>(steps - 1));
  return grid;
}

}  // namespace earlybird::metrics
