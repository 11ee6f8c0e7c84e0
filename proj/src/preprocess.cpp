#include "earlybird/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "earlybird/error.hpp"
#include "earlybird/log.hpp"

namespace earlybird::preprocess {

const std::vector<std::string>& engineered_feature_names() {
  static const std::vector<std::string> names{"ns",   "nf",  "entropy", "la",  "ld",  "lt",
                                              "fix",  "ndev", "age",    "nuc", "exp", "sexp"};
  return names;
}

FeatureMatrix engineer(const FeatureMatrix& raw) {
  if (raw.engineered) throw DataError("engineer: matrix already engineered");
  const std::size_t la = raw.require_column("la"), ld = raw.require_column("ld"),
                    lt = raw.require_column("lt"), nf = raw.require_column("nf"),
                    nuc = raw.require_column("nuc");
  const auto& names = engineered_feature_names();
  std::vector<std::size_t> src;
  for (const auto& n : names) src.push_back(raw.require_column(n));
  const std::size_t fix_out = static_cast<std::size_t>(
      std::find(names.begin(), names.end(), "fix") - names.begin());

  FeatureMatrix out;
  out.columns = names;
  out.labels = raw.labels;
  out.ids = raw.ids;
  out.role = raw.role;
  out.engineered = true;
  out.rows.reserve(raw.size());
  for (const auto& r : raw.rows) {
    std::vector<double> row = r;
    const double lt_den = std::max(r[lt], 1.0);
    const double nf_den = std::max(r[nf], 1.0);
    row[la] = r[la] / lt_den;
    row[ld] = r[ld] / lt_den;
    row[lt] = r[lt] / nf_den;
    row[nuc] = r[nuc] / nf_den;
    std::vector<double> e;
    e.reserve(names.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
      const double v = row[src[i]];
      e.push_back(i == fix_out ? v : std::log(std::max(v, 0.0) + 1.0));
    }
    out.rows.push_back(std::move(e));
  }
  return out;
}

double abs_correlation(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n == 0 || b.size() != n) return 0.0;
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0 || sbb <= 0) return 0.0;
  return std::min(1.0, std::abs(sab / std::sqrt(saa * sbb)));
}

double cfs_merit(std::span<const double> feature_class_corr,
                 const std::vector<std::vector<double>>& feature_feature_corr,
                 std::span<const std::size_t> subset) {
  const double k = static_cast<double>(subset.size());
  if (subset.empty()) return 0.0;
  double rcf = 0;
  for (std::size_t f : subset) rcf += feature_class_corr[f];
  rcf /= k;
  double rff = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < subset.size(); ++i)
    for (std::size_t j = i + 1; j < subset.size(); ++j) {
      rff += feature_feature_corr[subset[i]][subset[j]];
      ++pairs;
    }
  if (pairs > 0) rff /= static_cast<double>(pairs);
  return k * rcf / std::sqrt(k + k * (k - 1) * rff);
}

CfsResult cfs_select(const FeatureMatrix& matrix, int max_stale) {
  if (matrix.count_label(1) < 2 || matrix.count_label(0) < 2)
    throw DataError("cfs_select: need at least two rows of each class");

  // Candidate features: non-constant columns, visited in name order.
  std::vector<std::size_t> candidates;
  for (std::size_t c = 0; c < matrix.width(); ++c) {
    const auto col = matrix.column(c);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    if (*hi > *lo) candidates.push_back(c);
  }
  std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    return matrix.columns[a] < matrix.columns[b];
  });

  const std::size_t w = matrix.width();
  std::vector<double> label(matrix.labels.begin(), matrix.labels.end());
  std::vector<std::vector<double>> cols(w);
  for (std::size_t c : candidates) cols[c] = matrix.column(c);
  std::vector<double> rcf(w, 0.0);
  std::vector<std::vector<double>> rff(w, std::vector<double>(w, 0.0));
  for (std::size_t a : candidates) {
    rcf[a] = abs_correlation(cols[a], label);
    for (std::size_t b : candidates)
      if (a < b) rff[a][b] = rff[b][a] = abs_correlation(cols[a], cols[b]);
  }

  using Subset = std::vector<std::size_t>;  // sorted by column index
  const auto names_of = [&](const Subset& s) {
    std::vector<std::string> n;
    for (std::size_t i : s) n.push_back(matrix.columns[i]);
    std::sort(n.begin(), n.end());
    return n;
  };
  // Open list ordered by merit desc, then lexicographic name list.
  const auto better = [&](const std::pair<double, Subset>& a, const std::pair<double, Subset>& b) {
    if (a.first != b.first) return a.first > b.first;
    return names_of(a.second) < names_of(b.second);
  };

  CfsResult result;
  std::vector<std::pair<double, Subset>> open{{0.0, {}}};
  std::set<Subset> visited{{}};
  Subset best;
  double best_merit = 0.0;
  int stale = 0;
  while (!open.empty() && stale < max_stale) {
    std::sort(open.begin(), open.end(), better);
    const Subset head = open.front().second;
    open.erase(open.begin());

    bool improved = false;
    for (std::size_t f : candidates) {
      if (std::find(head.begin(), head.end(), f) != head.end()) continue;
      Subset child = head;
      child.push_back(f);
      std::sort(child.begin(), child.end());
      if (!visited.insert(child).second) continue;
      const double merit = cfs_merit(rcf, rff, child);
      result.evaluated.push_back({names_of(child), merit});
      open.emplace_back(merit, child);
      // Strict improvement only; children come in name order, so the first
      // of several equal-merit subsets wins.
      if (merit > best_merit) {
        improved = true;
        best_merit = merit;
        best = child;
      }
    }
    stale = improved ? 0 : stale + 1;
  }

  std::sort(best.begin(), best.end());
  for (std::size_t i : best) result.selected.push_back(matrix.columns[i]);
  result.merit = best_merit;
  return result;
}

FeatureMatrix smote_balance(const FeatureMatrix& matrix, int k, std::uint64_t seed) {
  if (matrix.role == MatrixRole::test) throw DataError("smote_balance: refusing test data");
  if (k < 1) throw DataError("smote_balance: k must be >= 1");
  const std::size_t pos = matrix.count_label(1), neg = matrix.count_label(0);
  FeatureMatrix out = matrix;
  if (pos == neg || pos == 0 || neg == 0) return out;

  const int minority_label = pos < neg ? 1 : 0;
  const std::size_t needed = (pos < neg ? neg : pos) - (pos < neg ? pos : neg);
  std::vector<std::size_t> minority;
  for (std::size_t i = 0; i < matrix.size(); ++i)
    if (matrix.labels[i] == minority_label) minority.push_back(i);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, minority.size() - 1);

  const auto add_row = [&](std::vector<double> row) {
    out.rows.push_back(std::move(row));
    out.labels.push_back(minority_label);
    if (!out.ids.empty() || matrix.ids.size() == matrix.size())
      out.ids.push_back("synthetic:" + std::to_string(out.rows.size()));
  };

  if (minority.size() == 1) {
    log::warn("smote_balance: single minority row, duplicating with jitter");
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto& base = matrix.rows[minority.front()];
    for (std::size_t s = 0; s < needed; ++s) {
      std::vector<double> row = base;
      for (double& v : row) v += noise(rng) * 1e-6 * (std::abs(v) + 1.0);
      add_row(std::move(row));
    }
    return out;
  }

  // k nearest minority neighbours of every minority row.
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), minority.size() - 1);
  std::vector<std::vector<std::size_t>> neighbours(minority.size());
  for (std::size_t a = 0; a < minority.size(); ++a) {
    std::vector<std::pair<double, std::size_t>> d;
    const auto& ra = matrix.rows[minority[a]];
    for (std::size_t b = 0; b < minority.size(); ++b) {
      if (a == b) continue;
      const auto& rb = matrix.rows[minority[b]];
      double s = 0;
      for (std::size_t c = 0; c < ra.size(); ++c) s += (ra[c] - rb[c]) * (ra[c] - rb[c]);
      d.emplace_back(s, b);
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk), d.end());
    for (std::size_t i = 0; i < kk; ++i) neighbours[a].push_back(d[i].second);
  }

  std::uniform_int_distribution<std::size_t> pick_nb(0, kk - 1);
  for (std::size_t s = 0; s < needed; ++s) {
    const std::size_t a = pick(rng);
    const std::size_t b = neighbours[a][pick_nb(rng)];
    const auto& ra = matrix.rows[minority[a]];
    const auto& rb = matrix.rows[minority[b]];
    const double gap = unit(rng);
    std::vector<double> row(ra.size());
    for (std::size_t c = 0; c < ra.size(); ++c) row[c] = ra[c] + gap * (rb[c] - ra[c]);
    add_row(std::move(row));
  }
  return out;
}

}  // namespace earlybird::preprocess
