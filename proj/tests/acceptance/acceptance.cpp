// Acceptance run: one PASS/FAIL/SKIP line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "earlybird/dataset.hpp"
#include "earlybird/dodge.hpp"
#include "earlybird/experiment.hpp"
#include "earlybird/fixtures.hpp"
#include "earlybird/git_miner.hpp"
#include "earlybird/labeler.hpp"
#include "earlybird/log.hpp"
#include "earlybird/metrics.hpp"
#include "earlybird/preprocess.hpp"
#include "earlybird/sampling.hpp"
#include "earlybird/stats.hpp"
#include "earlybird/transfer.hpp"
#include "oracles.hpp"
#include "project_gen.hpp"
#include "test_util.hpp"

using namespace earlybird;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
  Verdict verdict = Verdict::fail;
  std::string detail;
};

Outcome pass(std::string d) { return {Verdict::pass, std::move(d)}; }
Outcome fail(std::string d) { return {Verdict::fail, std::move(d)}; }
Outcome verdict(bool ok, std::string d) { return {ok ? Verdict::pass : Verdict::fail, std::move(d)}; }

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

double median_of(std::vector<double> v) { return stats::median(v); }

// ---------------------------------------------------------------------------

Outcome metric_oracle() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto c = oracle::random_case(rng);
    const auto got = metrics::evaluate(c.probs, c.labels, c.truth);
    if (!got) return fail("case " + std::to_string(i) + " returned no result");
    const auto want = oracle::evaluate(c.probs, c.labels, c.truth);
    const double diffs[] = {got->recall - want.recall, got->pf - want.pf,       got->auc - want.auc,
                            got->d2h - want.d2h,       got->brier - want.brier, got->g_measure - want.g_measure,
                            got->ifa - want.ifa,       got->mcc - want.mcc};
    for (double d : diffs) worst = std::max(worst, std::abs(d));
  }
  const double t = seconds_since(start);
  return verdict(worst <= 1e-9 && t < 10, "max deviation " + std::to_string(worst) + ", " + fmt(t, 2) + " s");
}

Outcome metric_anchors() {
  const std::vector<double> half(8, 0.5);
  const std::vector<int> truth{1, 0, 1, 0, 1, 1, 0, 0};
  metrics::ConfusionMatrix perfect{4, 0, 4, 0};
  const std::vector<double> same{0.3, 0.3, 0.7};
  const bool ok = metrics::d2h(1, 0) == 0.0 && metrics::g_measure(1, 0) == 1.0 &&
                  metrics::brier(half, truth) == 0.25 && metrics::mcc(perfect) == 1.0 &&
                  stats::a12(same, same) == 0.5;
  return verdict(ok, "d2h=" + fmt(metrics::d2h(1, 0)) + " g=" + fmt(metrics::g_measure(1, 0)) +
                         " brier=" + fmt(metrics::brier(half, truth)) + " mcc=" + fmt(metrics::mcc(perfect)) +
                         " a12=" + fmt(stats::a12(same, same)));
}

Outcome scott_knott() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(7);
  std::vector<stats::Population> pops;
  for (double mean : {0.2, 0.5, 0.8}) {
    std::normal_distribution<double> g(mean, 0.05);
    stats::Population p;
    p.treatment = "m" + fmt(mean, 1);
    p.metric = "recall";
    for (int i = 0; i < 100; ++i) p.scores.push_back(g(rng));
    pops.push_back(p);
  }
  const auto r = stats::scott_knott(pops);
  const std::set<int> distinct(r.ranks.begin(), r.ranks.end());
  bool ok = distinct.size() == 3 && r.ranks[2] == 1 && r.ranks[1] == 2 && r.ranks[0] == 3;

  std::vector<stats::Population> same(3, pops[1]);
  for (int i = 0; i < 3; ++i) same[static_cast<std::size_t>(i)].treatment = "s" + std::to_string(i);
  const auto s = stats::scott_knott(same);
  ok = ok && std::all_of(s.ranks.begin(), s.ranks.end(), [](int k) { return k == 1; });

  std::vector<std::size_t> perm{0, 1, 2};
  do {
    std::vector<stats::Population> shuffled;
    for (auto i : perm) shuffled.push_back(pops[i]);
    const auto q = stats::scott_knott(shuffled);
    for (std::size_t i = 0; i < 3; ++i) ok = ok && q.ranks[i] == r.ranks[perm[i]];
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double t = seconds_since(start);
  return verdict(ok && t < 5, std::to_string(distinct.size()) + " ranks for separated populations, " +
                                  std::to_string(std::set<int>(s.ranks.begin(), s.ranks.end()).size()) +
                                  " for identical, order invariant, " + fmt(t, 2) + " s");
}

Outcome szz_fixture() {
  testutil::TempDir dir("acc-szz");
  const auto fx = fixtures::build_scripted_repo(dir / "repo", fixtures::szz_fixture_spec());
  GitRepository repo(fx.path);
  const auto& cfg = default_mining_config();
  const auto commits = filter_merges(enumerate_commits(repo, cfg));
  labeler::GitBlame blame(repo, cfg.ignore_whitespace);
  const auto labeled = labeler::label_dataset(commits, blame, {cfg.defect_keywords, cfg.ignore_whitespace});
  std::size_t tp = 0, found = 0;
  for (const auto& c : labeled)
    if (c.defective) {
      ++found;
      tp += fx.inducing.count(c.hash);
    }
  const double precision = found ? double(tp) / double(found) : 0.0;
  const double recall = double(tp) / double(fx.inducing.size());
  return verdict(commits.size() == 30 && fx.inducing.size() == 4 && fx.fixes.size() == 3 && precision == 1.0 &&
                     recall == 1.0,
                 std::to_string(commits.size()) + " commits, precision " + fmt(precision, 2) + ", recall " +
                     fmt(recall, 2));
}

Outcome sampling_properties() {
  std::mt19937_64 rng(5150);
  std::size_t cases = 0, splits = 0, violations = 0;
  std::string first;
  const auto violated = [&](const std::string& what) {
    if (violations++ == 0) first = what;
  };
  while (cases < 10000) {
    gen::ProjectShape shape;
    shape.max_commits = 320;
    const auto p = gen::random_project(rng, "p" + std::to_string(cases), shape);
    sampling::SamplingPolicy pol;
    pol.kind = cases % 2 ? sampling::PolicyKind::E : sampling::PolicyKind::E_SIZE;
    const std::uint64_t seed = rng();
    const auto a = sampling::make_splits(p, pol, seed);
    const auto b = sampling::make_splits(p, pol, seed);
    ++cases;
    std::set<std::string> window;
    for (std::size_t i = 0; i < 150; ++i) window.insert(p.commits[i].hash);
    if (a.size() != b.size()) violated("split count differs between runs");
    for (std::size_t s = 0; s < a.size() && s < b.size(); ++s) {
      ++splits;
      const auto& tr = a[s].train;
      if (tr.count_label(0) != tr.count_label(1)) violated("unbalanced");
      if (tr.size() > 50) violated("more than 50 rows");
      const std::set<std::string> test(a[s].test.ids.begin(), a[s].test.ids.end());
      for (const auto& id : tr.ids) {
        if (!window.count(id)) violated("row outside the first 150 commits");
        if (test.count(id)) violated("train and test overlap");
      }
      if (tr.ids != b[s].train.ids || tr.rows != b[s].train.rows) violated("not deterministic");
    }
  }
  return verdict(violations == 0 && splits > 0, std::to_string(cases) + " cases, " + std::to_string(splits) +
                                                    " splits, " + std::to_string(violations) + " violations" +
                                                    (first.empty() ? "" : " (" + first + ")"));
}

Outcome cfs_copy() {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  FeatureMatrix m;
  for (int j = 0; j < 9; ++j) m.columns.push_back("noise" + std::to_string(j));
  m.columns.insert(m.columns.begin() + 3, "copy");
  for (int i = 0; i < 300; ++i) {
    const int y = unit(rng) < 0.35 ? 1 : 0;
    std::vector<double> row;
    for (const auto& c : m.columns) row.push_back(c == "copy" ? y : unit(rng));
    m.rows.push_back(row);
    m.labels.push_back(y);
    m.ids.push_back(std::to_string(i));
  }
  const auto r = preprocess::cfs_select(m);
  const bool picked = !r.selected.empty() && r.selected.front() == "copy";
  std::vector<double> y(m.labels.begin(), m.labels.end());
  double worst = 0;
  for (std::size_t j = 0; j < m.width(); ++j) {
    const double want = std::abs(oracle::pearson(m.column(j), y));
    const std::vector<double> rcf{preprocess::abs_correlation(m.column(j), y)};
    const std::vector<std::vector<double>> rff{{1.0}};
    const std::vector<std::size_t> subset{0};
    worst = std::max(worst, std::abs(preprocess::cfs_merit(rcf, rff, subset) - want));
  }
  return verdict(picked && worst <= 1e-9, std::string(picked ? "copy selected first" : "copy not selected") +
                                              ", merit(k=1) max deviation " + std::to_string(worst));
}

Outcome smote_geometry() {
  std::size_t synthetic = 0, off = 0, unbalanced = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0, 1);
    std::uniform_int_distribution<int> minority_size(2, 30);
    FeatureMatrix m;
    m.columns = {"a", "b", "c"};
    m.role = MatrixRole::train;
    const int pos = minority_size(rng);
    for (int i = 0; i < 80; ++i) {
      const int yl = i < pos ? 1 : 0;
      m.rows.push_back({g(rng) + 2 * yl, g(rng), std::round(g(rng) * 3)});
      m.labels.push_back(yl);
    }
    const auto out = preprocess::smote_balance(m, 5, seed);
    if (out.count_label(0) != out.count_label(1)) ++unbalanced;
    std::vector<std::vector<double>> minority;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m.labels[i] == 1) minority.push_back(m.rows[i]);
    for (std::size_t i = m.size(); i < out.size(); ++i) {
      ++synthetic;
      if (!oracle::on_smote_segment(out.rows[i], minority, 5)) ++off;
    }
  }
  return verdict(unbalanced == 0 && off == 0 && synthetic > 0,
                 "100 seeds, " + std::to_string(synthetic) + " synthetic rows, " + std::to_string(off) +
                     " off-segment, " + std::to_string(unbalanced) + " unbalanced");
}

// Linear boundary in 20 gaussian columns: logistic regression is the only
// family that gets past 0.9 (as 1 - d2h).
FeatureMatrix linear_fixture(std::size_t n, std::uint64_t seed) {
  constexpr int kDims = 20;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  std::mt19937_64 wr(7);
  std::vector<double> w(kDims);
  for (auto& x : w) x = (wr() % 2 ? 1.0 : -1.0) * (0.5 + double(wr() % 100) / 100.0);
  FeatureMatrix m;
  for (int j = 0; j < kDims; ++j) m.columns.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r;
    double s = 0;
    for (int j = 0; j < kDims; ++j) {
      r.push_back(g(rng));
      s += w[static_cast<std::size_t>(j)] * r.back();
    }
    m.rows.push_back(r);
    m.labels.push_back(s > 0.8 ? 1 : 0);
    m.ids.push_back(std::to_string(i));
  }
  m.role = MatrixRole::train;
  return m;
}

double holdout_d2h(const learners::TrainedModel& model, const FeatureMatrix& test) {
  const auto p = learners::predict(model, test);
  return metrics::evaluate(p.probabilities, p.labels, test.labels)->d2h;
}

Outcome dodge_efficacy() {
  const dodge::DodgeConfig cfg;
  const int budget = cfg.n1 + cfg.n2;

  // Fixture check: best of 30 random settings per family.
  std::string above;
  {
    const auto tr = linear_fixture(300, 100);
    auto te = linear_fixture(500, 900);
    te.role = MatrixRole::test;
    std::mt19937_64 rng(5);
    for (auto a : dodge::option_learners()) {
      double best = 0;
      for (int k = 0; k < 30; ++k) {
        const auto spec = dodge::random_learner(a, rng);
        try {
          best = std::max(best, 1 - holdout_d2h(learners::train(spec, tr, 1), te));
        } catch (const Error&) {
        }
      }
      if (best > 0.9) above += (above.empty() ? "" : "+") + std::string(learners::to_string(a));
    }
  }

  bool budget_ok = true;
  double sum_dodge = 0, sum_random = 0;
  int wins = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto train = linear_fixture(300, 100 + rep);
    auto test = linear_fixture(500, 900 + rep);
    test.role = MatrixRole::test;
    const auto d = dodge::dodge(train, cfg, static_cast<std::uint64_t>(rep));
    const auto r = dodge::random_search(train, budget, cfg, 1000 + static_cast<std::uint64_t>(rep));
    budget_ok = budget_ok && d.history.size() == static_cast<std::size_t>(budget) &&
                r.history.size() == static_cast<std::size_t>(budget);
    const double vd = holdout_d2h(d.model, test), vr = holdout_d2h(r.model, test);
    sum_dodge += vd;
    sum_random += vr;
    wins += vd < vr ? 1 : 0;
  }
  const double md = sum_dodge / 20, mr = sum_random / 20;
  return verdict(budget_ok && above == "logistic_regression" && md < mr,
                 std::string(budget_ok ? "budget exact" : "budget violated") + "; families above 0.9: " +
                     (above.empty() ? "none" : above) + "; mean holdout d2h DODGE " + fmt(md) +
                     " vs random search " + fmt(mr) + " (" + std::to_string(wins) + "/20 paired wins)");
}

Outcome intrinsic_dimension() {
  std::vector<std::vector<double>> line, grid;
  for (int i = 0; i < 60; ++i) line.push_back({double(i)});
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j) grid.push_back({double(i), double(j)});
  std::vector<double> lr, gr;
  for (double r = 4.5; r <= 10.5; r += 1) lr.push_back(r);
  for (double r = 1.5; r <= 5.5; r += 1) gr.push_back(r);
  const double d1 = metrics::intrinsic_dimension(line, lr), o1 = oracle::intrinsic_dimension(line, lr);
  const double d2 = metrics::intrinsic_dimension(grid, gr), o2 = oracle::intrinsic_dimension(grid, gr);

  // Engineered commit data of a fixture project, min-max scaled.
  const auto p = fixtures::synthetic_project({});
  auto m = preprocess::engineer(p.read(0, p.size()));
  for (std::size_t j = 0; j < m.width(); ++j) {
    const auto col = m.column(j);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    for (auto& row : m.rows) row[j] = *hi > *lo ? (row[j] - *lo) / (*hi - *lo) : 0.0;
  }
  const double dc = metrics::intrinsic_dimension(m.rows, metrics::default_radius_grid(m.rows));
  const bool ok = std::abs(d1 - 1) <= 0.3 && std::abs(d2 - 2) <= 0.3 && std::abs(d1 - o1) < 1e-9 &&
                  std::abs(d2 - o2) < 1e-9 && dc < 3;
  return verdict(ok, "line " + fmt(d1, 3) + ", grid " + fmt(d2, 3) + " (oracle " + fmt(o1, 3) + ", " + fmt(o2, 3) +
                         "), fixture commits " + fmt(dc, 3));
}

Outcome tca_shape() {
  std::mt19937_64 rng(77);
  std::lognormal_distribution<double> g(0, 1);
  const auto make = [&](std::size_t n, double shift) {
    FeatureMatrix m;
    for (int j = 0; j < 14; ++j) m.columns.push_back("f" + std::to_string(j));
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> r;
      const double common = g(rng);
      for (int j = 0; j < 14; ++j) r.push_back(shift + g(rng) + (j % 3 == 0 ? common : 0));
      m.rows.push_back(r);
      m.labels.push_back(int(i % 4 == 0));
      m.ids.push_back(std::to_string(i));
    }
    return m;
  };
  const auto s = make(300, 0), t = make(120, 4);
  bool ok = true;
  double worst = 0;
  for (int k : {2, 5}) {
    const auto a = transfer::tca_fit(s, t, k, 1), b = transfer::tca_fit(s, t, k, 1);
    const auto ps = transfer::tca_transform(a, s, transfer::Domain::source);
    const auto pt = transfer::tca_transform(a, t, transfer::Domain::target);
    ok = ok && ps.width() == std::size_t(k) && pt.width() == std::size_t(k) && a.basis == b.basis &&
         ps.rows == transfer::tca_transform(b, s, transfer::Domain::source).rows;
    const Eigen::MatrixXd gram = a.basis.transpose() * a.basis - Eigen::MatrixXd::Identity(k, k);
    worst = std::max(worst, gram.cwiseAbs().maxCoeff());
  }
  return verdict(ok && worst <= 1e-6, "2 and 5 components, orthonormality error " + std::to_string(worst) +
                                          (ok ? ", refits bit-identical" : ", shape or determinism broken"));
}

Outcome end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  const auto project = fixtures::synthetic_project({});
  const auto density = density_profile(project.commits, 150);
  sampling::SamplingPolicy pol;
  pol.kind = sampling::PolicyKind::E_SIZE;
  std::vector<double> recalls, pfs;
  for (const auto& split : sampling::make_splits(project, pol, 1)) {
    const auto prepared = sampling::prepare(split, 1);
    const auto model =
        learners::train(learners::default_spec(learners::Algorithm::logistic_regression), prepared.train, 1);
    const auto p = learners::predict(model, prepared.test);
    const auto r = metrics::evaluate(p.probabilities, p.labels, prepared.test.labels);
    if (!r) continue;
    recalls.push_back(r->recall);
    pfs.push_back(r->pf);
  }
  const double t = seconds_since(start);
  const double rec = recalls.empty() ? 0 : median_of(recalls), pf = pfs.empty() ? 1 : median_of(pfs);
  return verdict(project.size() == 400 && density.ratio >= 2 && rec >= 0.6 && pf <= 0.4 && t < 60,
                 "density ratio " + fmt(density.ratio, 2) + ", E_SIZE+LR median recall " + fmt(rec, 3) + ", pf " +
                     fmt(pf, 3) + " over " + std::to_string(recalls.size()) + " releases, " + fmt(t, 2) + " s");
}

Outcome retraining_economics() {
  const auto lr = learners::default_spec(learners::Algorithm::logistic_regression);
  std::size_t reads[2][2] = {};
  const std::size_t lengths[2] = {300, 3000};
  for (int s = 0; s < 2; ++s) {
    const auto family = fixtures::synthetic_family(4, lengths[s], 1, 9);
    for (int k = 0; k < 2; ++k) {
      sampling::SamplingPolicy pol;
      pol.kind = k == 0 ? sampling::PolicyKind::E_SIZE : sampling::PolicyKind::BELLWETHER;
      for (const auto& e : sampling::find_bellwethers(family, pol, lr, 1)) reads[s][k] += e.training_reads;
    }
  }
  const double early_ratio = double(reads[1][0]) / double(reads[0][0]);
  const double all_ratio = double(reads[1][1]) / double(reads[0][1]);
  return verdict(reads[0][0] == reads[1][0] && reads[0][0] == 4 * 150 && all_ratio == 10.0,
                 "training commits read 300 vs 3000: E_SIZE " + std::to_string(reads[0][0]) + " -> " +
                     std::to_string(reads[1][0]) + " (x" + fmt(early_ratio, 2) + "), whole history " +
                     std::to_string(reads[0][1]) + " -> " + std::to_string(reads[1][1]) + " (x" +
                     fmt(all_ratio, 2) + ")");
}

Outcome real_repositories() {
  const char* env = std::getenv("EARLYBIRD_REAL_REPOS");
  if (!env || !*env) return {Verdict::skip, "set EARLYBIRD_REAL_REPOS to a colon-separated list of local clones"};
  std::vector<std::string> paths;
  std::stringstream ss(env);
  for (std::string p; std::getline(ss, p, ':');)
    if (!p.empty()) paths.push_back(p);
  std::ostringstream detail;
  bool ok = true;
  for (const auto& path : paths) {
    try {
      auto mined = experiment::mine_project(path, default_mining_config());
      detail << mined.project.name << ": " << mined.project.size() << " commits, "
             << (mined.sanity.accepted ? "accepted" : "rejected");
      if (!mined.sanity.accepted) {
        detail << "; ";
        continue;
      }
      experiment::ExperimentConfig cfg;
      cfg.projects = {path};
      for (auto k : {sampling::PolicyKind::E, sampling::PolicyKind::E_SIZE, sampling::PolicyKind::ALL,
                     sampling::PolicyKind::MANUAL_DOWN, sampling::PolicyKind::MANUAL_UP}) {
        sampling::SamplingPolicy pol;
        pol.kind = k;
        cfg.policies.push_back(pol);
      }
      experiment::LearnerChoice l;
      l.spec = learners::default_spec(learners::Algorithm::logistic_regression);
      cfg.classifiers = {l};
      const auto store = experiment::run_experiment(cfg, {mined.project}, 2);
      std::size_t bad = 0;
      for (const auto& r : store.rows) {
        const auto& m = r.result;
        const bool in_range = m.recall >= 0 && m.recall <= 1 && m.pf >= 0 && m.pf <= 1 && m.auc >= 0 &&
                              m.auc <= 1 && m.d2h >= 0 && m.d2h <= 1 && m.brier >= 0 && m.brier <= 1 &&
                              m.g_measure >= 0 && m.g_measure <= 1 && m.ifa >= 0 && m.mcc >= -1 && m.mcc <= 1;
        bad += in_range ? 0 : 1;
      }
      detail << ", " << store.rows.size() << " result rows, " << bad << " out of range; ";
      ok = ok && bad == 0;
    } catch (const std::exception& e) {
      detail << path << ": " << e.what() << "; ";
      ok = false;
    }
  }
  return verdict(ok, detail.str());
}

}  // namespace

int main() {
  log::set_level(log::Level::quiet);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"metric oracle equivalence", metric_oracle},
      {"analytic metric anchors", metric_anchors},
      {"Scott-Knott ranks", scott_knott},
      {"SZZ fixture labels", szz_fixture},
      {"sampling invariants", sampling_properties},
      {"CFS picks the label copy", cfs_copy},
      {"SMOTE geometry", smote_geometry},
      {"DODGE budget and efficacy", dodge_efficacy},
      {"intrinsic dimensionality", intrinsic_dimension},
      {"TCA shape and determinism", tca_shape},
      {"end-to-end early window", end_to_end},
      {"retraining economics", retraining_economics},
      {"real repositories", real_repositories},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.verdict == Verdict::pass ? "PASS" : (o.verdict == Verdict::skip ? "SKIP" : "FAIL");
    if (o.verdict == Verdict::fail) ++failures;
    std::printf("%s criterion %zu: %s: %s\n", tag, i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
