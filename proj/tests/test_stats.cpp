#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "earlybird/stats.hpp"
#include "oracles.hpp"

using namespace earlybird;
using namespace earlybird::stats;

namespace {

Population normal_pop(const std::string& name, double mean, double sd, int n, std::uint64_t seed,
                      metrics::Direction dir = metrics::Direction::maximize, const std::string& metric = "recall") {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(mean, sd);
  Population p{name, {}, metric, dir};
  for (int i = 0; i < n; ++i) p.scores.push_back(d(rng));
  return p;
}

std::map<std::string, int> by_name(std::span<const Population> pops, const SkResult& r) {
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < pops.size(); ++i) out[pops[i].treatment] = r.ranks[i];
  return out;
}

// Best cut of the sorted list by expected squared mean shift, found by
// enumerating every cut.
std::size_t best_cut(const std::vector<Population>& sorted) {
  std::vector<double> all;
  for (const auto& p : sorted) all.insert(all.end(), p.scores.begin(), p.scores.end());
  const auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double mu = mean(all);
  double best = -1;
  std::size_t cut = 0;
  for (std::size_t c = 1; c < sorted.size(); ++c) {
    std::vector<double> l, r;
    for (std::size_t i = 0; i < sorted.size(); ++i)
      (i < c ? l : r).insert((i < c ? l : r).end(), sorted[i].scores.begin(), sorted[i].scores.end());
    const double n = static_cast<double>(all.size());
    const double e = l.size() / n * std::pow(mean(l) - mu, 2) + r.size() / n * std::pow(mean(r) - mu, 2);
    if (e > best) {
      best = e;
      cut = c;
    }
  }
  return cut;
}

}  // namespace

TEST_CASE("a12 values") {
  const std::vector<double> x{1, 2, 3};
  CHECK(a12(x, x) == 0.5);
  CHECK(a12(std::vector<double>{5, 6}, std::vector<double>{1, 2}) == 1.0);
  // x={1,2}, y={1,3}: pairs (1,1)=.5 (1,3)=0 (2,1)=1 (2,3)=0 -> 1.5/4.
  CHECK(a12(std::vector<double>{1, 2}, std::vector<double>{1, 3}) == doctest::Approx(0.375));
  CHECK(a12(std::vector<double>{1, 3}, std::vector<double>{1, 2}) == doctest::Approx(0.625));
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> d(0, 9);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a(1 + d(rng)), b(1 + d(rng));
    for (auto& v : a) v = d(rng);
    for (auto& v : b) v = d(rng);
    CHECK(a12(a, b) == doctest::Approx(oracle::a12(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("bootstrap_diff") {
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4, 0.5};
  CHECK_FALSE(bootstrap_diff(x, x, 512, 0.05, 1));
  std::vector<double> lo, hi;
  for (int i = 0; i < 30; ++i) {
    lo.push_back(0.1 + 0.001 * i);
    hi.push_back(0.9 + 0.001 * i);
  }
  CHECK(bootstrap_diff(lo, hi, 512, 0.05, 7));
  CHECK(bootstrap_diff(lo, hi, 512, 0.05, 7) == bootstrap_diff(lo, hi, 512, 0.05, 7));
  CHECK_THROWS(bootstrap_diff(lo, hi, 0, 0.05, 7));
}

TEST_CASE("scott_knott three clusters and identical populations") {
  std::vector<Population> pops{normal_pop("low", 0.2, 0.05, 100, 1), normal_pop("mid", 0.5, 0.05, 100, 2),
                               normal_pop("high", 0.8, 0.05, 100, 3)};
  const auto r = scott_knott(pops);
  const auto ranks = by_name(pops, r);
  CHECK(ranks.at("high") == 1);
  CHECK(ranks.at("mid") == 2);
  CHECK(ranks.at("low") == 3);

  // Every accepted split passed both gates.
  REQUIRE(r.splits.size() == 2);
  for (const auto& s : r.splits) {
    CHECK(s.bootstrap);
    CHECK(std::abs(s.a12 - 0.5) >= 0.06);
  }
  // The first cut matches an exhaustive search over cut points.
  std::vector<Population> sorted{pops[2], pops[1], pops[0]};
  const auto cut = best_cut(sorted);
  CHECK(r.splits[0].left.size() == cut);

  std::vector<Population> same{normal_pop("a", 0.5, 0.05, 100, 9), normal_pop("b", 0.5, 0.05, 100, 9)};
  const auto r2 = scott_knott(same);
  CHECK(r2.ranks == std::vector<int>{1, 1});
  CHECK(r2.splits.empty());

  std::vector<Population> one{normal_pop("solo", 0.5, 0.1, 20, 1)};
  CHECK(scott_knott(one).ranks == std::vector<int>{1});
}

TEST_CASE("scott_knott is invariant to input order") {
  std::vector<Population> pops{normal_pop("a", 0.2, 0.05, 60, 1), normal_pop("b", 0.5, 0.05, 60, 2),
                               normal_pop("c", 0.52, 0.05, 60, 3), normal_pop("d", 0.8, 0.05, 60, 4)};
  const auto base = by_name(pops, scott_knott(pops));
  std::vector<std::size_t> order{0, 1, 2, 3};
  do {
    std::vector<Population> perm;
    for (auto i : order) perm.push_back(pops[i]);
    CHECK(by_name(perm, scott_knott(perm)) == base);
  } while (std::next_permutation(order.begin(), order.end()));
}

TEST_CASE("scott_knott negates minimize metrics") {
  std::vector<Population> pops{normal_pop("small", 0.1, 0.02, 50, 1, metrics::Direction::minimize, "pf"),
                               normal_pop("large", 0.6, 0.02, 50, 2, metrics::Direction::minimize, "pf")};
  const auto ranks = by_name(pops, scott_knott(pops));
  CHECK(ranks.at("small") == 1);
  CHECK(ranks.at("large") == 2);
}

TEST_CASE("small effects are not split") {
  // Heavily overlapping large samples: significant mean shift, tiny effect.
  std::vector<Population> pops{normal_pop("a", 0.50, 0.2, 3000, 1), normal_pop("b", 0.52, 0.2, 3000, 2)};
  const auto r = scott_knott(pops);
  CHECK(r.ranks == std::vector<int>{1, 1});
}

TEST_CASE("median and iqr") {
  CHECK(median(std::vector<double>{3, 1, 2}) == 2);
  CHECK(median(std::vector<double>{4, 1, 2, 3}) == 2.5);
  CHECK(iqr(std::vector<double>{1, 2, 3, 4, 5}) == doctest::Approx(2.0));
}

TEST_CASE("rank table, wins and reports") {
  std::vector<Population> pops;
  for (const auto& m : metrics::all_metrics()) {
    pops.push_back(normal_pop("good", m.direction == metrics::Direction::maximize ? 0.8 : 0.1, 0.02, 40, 1,
                              m.direction, std::string(m.name)));
    pops.push_back(normal_pop("bad", m.direction == metrics::Direction::maximize ? 0.3 : 0.6, 0.02, 40, 2,
                              m.direction, std::string(m.name)));
  }
  const auto table = rank_table(pops);
  REQUIRE(table.metrics.size() == 8);
  CHECK(table.metrics.front() == "recall");
  CHECK(table.metrics.back() == "mcc");
  CHECK(table.treatments == std::vector<std::string>{"good", "bad"});
  const auto wins = count_wins(table);
  CHECK(wins.at("good") == 8);
  CHECK(wins.at("bad") == 0);

  const auto text = rank_text(table);
  const auto header = text.substr(0, text.find('\n'));
  std::size_t pos = 0;
  for (const char* h : {"Recall+", "PF-", "AUC+", "D2H-", "Brier-", "G-Score+", "IFA-", "MCC+"}) {
    const auto at = header.find(h, pos);
    CHECK(at != std::string::npos);
    pos = at;
  }
  CHECK(rank_csv(table).rfind("treatment,metric,rank,median,iqr,n,top\n", 0) == 0);

  // Shared rank 1 credits both treatments.
  std::vector<Population> tied{normal_pop("x", 0.5, 0.05, 50, 3), normal_pop("y", 0.5, 0.05, 50, 3)};
  const auto w = count_wins(rank_table(tied));
  CHECK(w.at("x") == 1);
  CHECK(w.at("y") == 1);

  std::vector<Population> single{normal_pop("only", 0.5, 0.05, 10, 3)};
  CHECK(count_wins(rank_table(single)).at("only") == 1);
}
