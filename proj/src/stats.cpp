#include "earlybird/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "earlybird/error.hpp"

namespace earlybird::stats {

namespace {

double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct Entry {
  std::size_t input;
  std::vector<double> scores;  // direction-normalized: larger is better
  double median;
  double mean;
  const std::string* name;
};

std::vector<double> pooled(const std::vector<Entry>& e, std::size_t lo, std::size_t hi) {
  std::vector<double> out;
  for (std::size_t i = lo; i < hi; ++i) out.insert(out.end(), e[i].scores.begin(), e[i].scores.end());
  return out;
}

class ScottKnott {
 public:
  ScottKnott(std::vector<Entry> entries, const SkConfig& c) : e_(std::move(entries)), c_(c) {}

  SkResult run() {
    SkResult r;
    r.ranks.assign(e_.size(), 0);
    if (e_.empty()) return r;
    std::vector<std::size_t> cuts;
    divide(0, e_.size(), cuts, r);
    std::sort(cuts.begin(), cuts.end());
    int rank = 1;
    std::size_t next = 0;
    for (std::size_t i = 0; i < e_.size(); ++i) {
      while (next < cuts.size() && cuts[next] == i) {
        ++rank;
        ++next;
      }
      r.ranks[e_[i].input] = rank;
    }
    return r;
  }

 private:
  void divide(std::size_t lo, std::size_t hi, std::vector<std::size_t>& cuts, SkResult& r) {
    if (hi - lo < 2) return;
    const auto all = pooled(e_, lo, hi);
    const double mu = mean(all);
    const double n = static_cast<double>(all.size());
    double best = -1;
    std::size_t cut = 0;
    for (std::size_t c = lo + 1; c < hi; ++c) {
      const auto l = pooled(e_, lo, c), rr = pooled(e_, c, hi);
      const double nl = static_cast<double>(l.size()), nr = static_cast<double>(rr.size());
      const double ml = mean(l), mr = mean(rr);
      const double delta = nl / n * (ml - mu) * (ml - mu) + nr / n * (mr - mu) * (mr - mu);
      if (delta > best) {
        best = delta;
        cut = c;
      }
    }
    const auto left = pooled(e_, lo, cut), right = pooled(e_, cut, hi);
    const bool boot = bootstrap_diff(left, right, c_.bootstrap_iterations, c_.alpha, c_.seed);
    const double effect = a12(left, right);
    if (!boot || std::abs(effect - 0.5) < c_.small_effect) return;

    AcceptedSplit s;
    for (std::size_t i = lo; i < cut; ++i) s.left.push_back(*e_[i].name);
    for (std::size_t i = cut; i < hi; ++i) s.right.push_back(*e_[i].name);
    s.expected_delta = best;
    s.bootstrap = boot;
    s.a12 = effect;
    r.splits.push_back(std::move(s));
    cuts.push_back(cut);
    divide(lo, cut, cuts, r);
    divide(cut, hi, cuts, r);
  }

  std::vector<Entry> e_;
  SkConfig c_;
};

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// Shown as a percentage in text reports.
bool is_fraction_metric(const std::string& m) { return m != "ifa"; }

}  // namespace

double a12(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw DataError("a12: empty sample");
  double more = 0, same = 0;
  for (double a : x)
    for (double b : y) {
      if (a > b) more += 1;
      else if (a == b) same += 1;
    }
  return (more + 0.5 * same) / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

bool bootstrap_diff(std::span<const double> x, std::span<const double> y, int iterations, double alpha,
                    std::uint64_t seed) {
  if (iterations <= 0) throw DataError("bootstrap_diff: iterations must be > 0");
  if (x.empty() || y.empty()) throw DataError("bootstrap_diff: empty sample");
  const double mx = mean(x), my = mean(y);
  const double observed = std::abs(mx - my);
  const double mz = (mx * static_cast<double>(x.size()) + my * static_cast<double>(y.size())) /
                    static_cast<double>(x.size() + y.size());
  std::vector<double> xs(x.begin(), x.end()), ys(y.begin(), y.end());
  for (double& v : xs) v = v - mx + mz;
  for (double& v : ys) v = v - my + mz;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> px(0, xs.size() - 1), py(0, ys.size() - 1);
  int reached = 0;
  for (int it = 0; it < iterations; ++it) {
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) sx += xs[px(rng)];
    for (std::size_t i = 0; i < ys.size(); ++i) sy += ys[py(rng)];
    const double d = std::abs(sx / static_cast<double>(xs.size()) - sy / static_cast<double>(ys.size()));
    if (d >= observed) ++reached;
  }
  return static_cast<double>(reached) < alpha * static_cast<double>(iterations);
}

SkResult scott_knott(std::span<const Population> populations, const SkConfig& config) {
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < populations.size(); ++i) {
    const auto& p = populations[i];
    if (p.scores.empty()) throw DataError("scott_knott: population " + p.treatment + " has no scores");
    Entry e{i, p.scores, 0, 0, &p.treatment};
    if (p.direction == metrics::Direction::minimize)
      for (double& v : e.scores) v = -v;
    e.median = median(e.scores);
    e.mean = mean(e.scores);
    entries.push_back(std::move(e));
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.median != b.median) return a.median > b.median;
    if (a.mean != b.mean) return a.mean > b.mean;
    return *a.name < *b.name;
  });
  return ScottKnott(std::move(entries), config).run();
}

double median(std::span<const double> v) { return percentile(std::vector<double>(v.begin(), v.end()), 0.5); }

double iqr(std::span<const double> v) {
  std::vector<double> c(v.begin(), v.end());
  return percentile(c, 0.75) - percentile(c, 0.25);
}

bool RankTable::top(const std::string& metric, const std::string& treatment) const {
  const auto m = cells.find(metric);
  if (m == cells.end()) return false;
  const auto t = m->second.find(treatment);
  return t != m->second.end() && t->second.rank == 1;
}

RankTable rank_table(std::span<const Population> populations, const SkConfig& config) {
  RankTable table;
  std::map<std::string, std::vector<Population>> by_metric;
  std::vector<std::string> seen;
  for (const auto& p : populations) {
    if (!by_metric.count(p.metric)) seen.push_back(p.metric);
    by_metric[p.metric].push_back(p);
  }
  for (const auto& info : metrics::all_metrics())
    if (by_metric.count(std::string(info.name))) table.metrics.emplace_back(info.name);
  for (const auto& m : seen)
    if (std::find(table.metrics.begin(), table.metrics.end(), m) == table.metrics.end()) table.metrics.push_back(m);

  std::map<std::string, int> names;
  for (const auto& metric : table.metrics) {
    const auto& pops = by_metric[metric];
    const auto sk = scott_knott(pops, config);
    for (std::size_t i = 0; i < pops.size(); ++i) {
      table.cells[metric][pops[i].treatment] = {sk.ranks[i], median(pops[i].scores), iqr(pops[i].scores),
                                                pops[i].scores.size()};
      names[pops[i].treatment] = 0;
    }
  }
  const auto wins = count_wins(table);
  for (const auto& [n, unused] : names) table.treatments.push_back(n);
  std::stable_sort(table.treatments.begin(), table.treatments.end(), [&](const std::string& a, const std::string& b) {
    const int wa = wins.count(a) ? wins.at(a) : 0, wb = wins.count(b) ? wins.at(b) : 0;
    return wa > wb;
  });
  return table;
}

std::map<std::string, int> count_wins(const RankTable& table) {
  std::map<std::string, int> wins;
  for (const auto& [metric, row] : table.cells)
    for (const auto& [treatment, cell] : row) {
      wins.try_emplace(treatment, 0);
      if (cell.rank == 1) ++wins[treatment];
    }
  return wins;
}

std::string rank_csv(const RankTable& table) {
  std::ostringstream out;
  out << "treatment,metric,rank,median,iqr,n,top\n";
  out << std::setprecision(17);
  for (const auto& t : table.treatments)
    for (const auto& m : table.metrics) {
      const auto& row = table.cells.at(m);
      const auto it = row.find(t);
      if (it == row.end()) continue;
      out << t << ',' << m << ',' << it->second.rank << ',' << it->second.median << ',' << it->second.iqr << ','
          << it->second.n << ',' << (it->second.rank == 1 ? 1 : 0) << '\n';
    }
  return out.str();
}

std::string rank_text(const RankTable& table) {
  const auto wins = count_wins(table);
  std::size_t name_width = 9;
  for (const auto& t : table.treatments) name_width = std::max(name_width, t.size());

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"treatment", "wins"};
  for (const auto& m : table.metrics) {
    std::string h = m;
    for (const auto& info : metrics::all_metrics())
      if (info.name == m) h = std::string(info.header);
    header.push_back(h);
    header.push_back("rk");
  }
  rows.push_back(header);
  for (const auto& t : table.treatments) {
    std::vector<std::string> row{t, std::to_string(wins.count(t) ? wins.at(t) : 0)};
    for (const auto& m : table.metrics) {
      const auto& cells = table.cells.at(m);
      const auto it = cells.find(t);
      if (it == cells.end()) {
        row.push_back("-");
        row.push_back("-");
        continue;
      }
      const double scale = is_fraction_metric(m) ? 100.0 : 1.0;
      row.push_back(fixed(it->second.median * scale, 0) + " (" + fixed(it->second.iqr * scale, 0) + ")");
      row.push_back(std::to_string(it->second.rank) + (it->second.rank == 1 ? "*" : ""));
    }
    rows.push_back(row);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  std::ostringstream out;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      out << (i ? "  " : "") << r[i];
      if (i + 1 < r.size()) out << std::string(width[i] - r[i].size(), ' ');
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace earlybird::stats
