#include "earlybird/sampling.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <random>
#include <unordered_set>

#include "earlybird/error.hpp"
#include "earlybird/log.hpp"
#include "earlybird/metrics.hpp"
#include "earlybird/preprocess.hpp"
#include "earlybird/transfer.hpp"

namespace earlybird::sampling {

namespace {

constexpr std::array<std::pair<PolicyKind, std::string_view>, 11> kNames{{
    {PolicyKind::E, "E"},
    {PolicyKind::E_SIZE, "E_SIZE"},
    {PolicyKind::ALL, "ALL"},
    {PolicyKind::BELLWETHER, "BELLWETHER"},
    {PolicyKind::TCA_PLUS, "TCA_PLUS"},
    {PolicyKind::E_SIZE_BELLWETHER, "E_SIZE_BELLWETHER"},
    {PolicyKind::E_TCA, "E_TCA"},
    {PolicyKind::E_SIZE_TCA, "E_SIZE_TCA"},
    {PolicyKind::MANUAL_DOWN, "MANUAL_DOWN"},
    {PolicyKind::MANUAL_UP, "MANUAL_UP"},
    {PolicyKind::M6, "M6"},
}};

constexpr Timestamp kSixMonths = static_cast<Timestamp>(182.5 * 86400);
constexpr int kSmoteNeighbours = 5;

const std::vector<std::string>& size_columns() {
  static const std::vector<std::string> c{"la", "lt"};
  return c;
}

bool uses_size_columns(PolicyKind k) {
  return k == PolicyKind::E_SIZE || k == PolicyKind::E_SIZE_BELLWETHER || k == PolicyKind::E_SIZE_TCA;
}

bool uses_cfs_downstream(PolicyKind k) {
  return k == PolicyKind::ALL || k == PolicyKind::BELLWETHER || k == PolicyKind::M6;
}

int tca_components(PolicyKind k) {
  switch (k) {
    case PolicyKind::TCA_PLUS:
    case PolicyKind::E_TCA: return 5;
    case PolicyKind::E_SIZE_TCA: return 2;
    default: return 0;
  }
}

FeatureMatrix engineered(FeatureMatrix raw, MatrixRole role) {
  FeatureMatrix m = preprocess::engineer(raw);
  m.role = role;
  return m;
}

// Engineered commits with timestamp in (lo, hi].
FeatureMatrix history_between(const Project& p, Timestamp lo, Timestamp hi, bool open_low) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Timestamp t = p.commits[i].timestamp;
    if ((open_low || t > lo) && t <= hi) idx.push_back(i);
  }
  return engineered(p.read(idx), MatrixRole::train);
}

bool enough(const FeatureMatrix& m, std::size_t per_class) {
  return m.count_label(1) >= per_class && m.count_label(0) >= per_class;
}

FeatureMatrix cfs_columns(const FeatureMatrix& m) {
  const auto cfs = preprocess::cfs_select(m);
  if (cfs.selected.empty()) {
    log::warn("cfs selected no feature; keeping all columns");
    return m;
  }
  return m.select_columns(cfs.selected);
}

void audit(const TrainTestSplit& s) {
  const std::unordered_set<std::string> train(s.train.ids.begin(), s.train.ids.end());
  for (const auto& id : s.test.ids)
    if (train.count(id)) throw DataError("split for " + s.release.tag + " shares commit " + id + " with training");
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Policy preprocessing of the training side only.
FeatureMatrix prepare_train(PolicyKind kind, const FeatureMatrix& train, std::uint64_t seed) {
  FeatureMatrix t = train;
  t.role = MatrixRole::train;
  if (uses_cfs_downstream(kind)) {
    t = cfs_columns(t);
    t = preprocess::smote_balance(t, kSmoteNeighbours, seed);
  }
  return t;
}

}  // namespace

std::string_view to_string(PolicyKind k) {
  for (const auto& [kind, name] : kNames)
    if (kind == k) return name;
  throw ConfigError("unknown policy kind");
}

PolicyKind policy_kind_from_string(std::string_view name) {
  for (const auto& [kind, n] : kNames)
    if (n == name) return kind;
  throw ConfigError("unknown policy: " + std::string(name));
}

bool is_early(PolicyKind k) {
  return k == PolicyKind::E || k == PolicyKind::E_SIZE || k == PolicyKind::E_SIZE_BELLWETHER ||
         k == PolicyKind::E_TCA || k == PolicyKind::E_SIZE_TCA;
}

bool is_cross(PolicyKind k) {
  return k == PolicyKind::BELLWETHER || k == PolicyKind::TCA_PLUS || k == PolicyKind::E_SIZE_BELLWETHER ||
         k == PolicyKind::E_TCA || k == PolicyKind::E_SIZE_TCA;
}

bool is_manual(PolicyKind k) { return k == PolicyKind::MANUAL_DOWN || k == PolicyKind::MANUAL_UP; }

bool retrains_per_release(PolicyKind k) {
  return k == PolicyKind::ALL || k == PolicyKind::M6 || tca_components(k) > 0;
}

void SamplingPolicy::validate() const {
  if (window == 0) throw ConfigError("policy window must be > 0");
  if (per_class_cap == 0) throw ConfigError("policy per_class_cap must be > 0");
  if (is_cross(kind) && !source_project) throw ConfigError(std::string(to_string(kind)) + " needs a source_project");
}

std::string SamplingPolicy::name() const {
  std::string n(to_string(kind));
  if (source_project) n += "(" + *source_project + ")";
  return n;
}

std::optional<FeatureMatrix> sample_early(const Project& project, const SamplingPolicy& policy, std::uint64_t seed) {
  if (project.size() < policy.window) return std::nullopt;
  const FeatureMatrix raw = project.read(0, policy.window);
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < raw.size(); ++i) (raw.labels[i] ? pos : neg).push_back(i);
  const std::size_t k = std::min({policy.per_class_cap, pos.size(), neg.size()});
  if (k == 0) return std::nullopt;

  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::vector<std::size_t> pick(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(k));
  pick.insert(pick.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(pick.begin(), pick.end());

  FeatureMatrix m = engineered(raw.select_rows(pick), MatrixRole::train);
  if (uses_size_columns(policy.kind)) return m.select_columns(size_columns());
  if (policy.kind == PolicyKind::E) {
    if (k < 2) return std::nullopt;
    return cfs_columns(m);
  }
  return m;
}

std::optional<FeatureMatrix> sample_all(const Project& project, const Release& release, std::size_t min_per_class) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < project.size(); ++i)
    if (project.commits[i].timestamp < release.timestamp) idx.push_back(i);
  FeatureMatrix m = engineered(project.read(idx), MatrixRole::train);
  if (!enough(m, min_per_class)) return std::nullopt;
  return m;
}

std::vector<std::vector<std::size_t>> release_windows(const Project& project) {
  std::vector<std::vector<std::size_t>> out(project.releases.size());
  for (std::size_t i = 0; i < project.size(); ++i) {
    const Timestamp t = project.commits[i].timestamp;
    const auto it = std::lower_bound(project.releases.begin(), project.releases.end(), t,
                                     [](const Release& r, Timestamp ts) { return r.timestamp < ts; });
    if (it != project.releases.end()) out[static_cast<std::size_t>(it - project.releases.begin())].push_back(i);
  }
  return out;
}

std::vector<TrainTestSplit> make_splits(const Project& project, const SamplingPolicy& policy, std::uint64_t seed,
                                        const Project* source) {
  policy.validate();
  const PolicyKind kind = policy.kind;
  if (is_cross(kind)) {
    if (!source) throw DataError(policy.name() + ": cross policy needs a source project");
    if (source->name == project.name) throw DataError(policy.name() + ": source and target are the same project");
  }

  // Training rows that do not depend on the release.
  std::optional<FeatureMatrix> fixed;
  if (is_early(kind)) {
    SamplingPolicy p = policy;
    fixed = sample_early(is_cross(kind) ? *source : project, p, seed);
    if (!fixed) {
      log::info(policy.name() + " is inapplicable to " + project.name);
      return {};
    }
  } else if (kind == PolicyKind::BELLWETHER) {
    fixed = engineered(source->read(0, source->size()), MatrixRole::train);
  } else if (kind == PolicyKind::TCA_PLUS) {
    const std::size_t n = source->size(), w = policy.window;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (i < w || i + w >= n) idx.push_back(i);
    fixed = engineered(source->read(idx), MatrixRole::train);
  }

  const auto windows = release_windows(project);
  std::vector<TrainTestSplit> splits;
  for (std::size_t r = 0; r < windows.size(); ++r) {
    std::vector<std::size_t> test_idx = windows[r];
    if (is_early(kind) && !is_cross(kind)) {
      // Releases inside the early window are not tested; a release that
      // straddles it keeps only its later commits.
      std::erase_if(test_idx, [&](std::size_t i) { return i < policy.window; });
    }
    if (test_idx.empty()) continue;

    TrainTestSplit s;
    s.release = project.releases[r];
    s.policy = policy;
    if (kind == PolicyKind::ALL || kind == PolicyKind::M6) {
      if (r == 0) continue;
      const Timestamp prev = project.releases[r - 1].timestamp;
      s.train = kind == PolicyKind::ALL ? history_between(project, 0, prev, true)
                                        : history_between(project, prev - kSixMonths, prev, false);
      if (!enough(s.train, 5)) continue;
    } else if (fixed) {
      s.train = *fixed;
    }
    if (is_manual(kind)) {
      // The size baselines rank on raw lines added.
      s.test = project.read(test_idx);
      s.test.role = MatrixRole::test;
    } else {
      s.test = engineered(project.read(test_idx), MatrixRole::test);
    }
    audit(s);
    splits.push_back(std::move(s));
  }
  return splits;
}

PreparedSplit prepare(const TrainTestSplit& split, std::uint64_t seed) {
  const PolicyKind kind = split.policy.kind;
  PreparedSplit out;
  if (is_manual(kind)) {
    out.test = split.test;
    return out;
  }
  out.train = prepare_train(kind, split.train, seed);
  out.test = split.test.select_columns(out.train.columns);
  out.test.role = MatrixRole::test;
  if (const int c = tca_components(kind); c > 0) {
    const auto proj = transfer::tca_fit(out.train, out.test, c, seed);
    out.train = transfer::tca_transform(proj, out.train, transfer::Domain::source);
    out.test = transfer::tca_transform(proj, out.test, transfer::Domain::target);
    if (kind == PolicyKind::TCA_PLUS) out.train = preprocess::smote_balance(out.train, kSmoteNeighbours, seed);
  }
  return out;
}

std::vector<BellwetherEntry> find_bellwethers(std::span<const Project> projects, const SamplingPolicy& policy,
                                              const learners::ClassifierSpec& classifier, std::uint64_t seed) {
  std::vector<BellwetherEntry> out;
  if (projects.size() < 2) return out;
  const bool early = is_early(policy.kind);
  PolicyKind train_kind = early ? PolicyKind::E_SIZE : PolicyKind::BELLWETHER;
  if (policy.kind == PolicyKind::E) train_kind = PolicyKind::E;

  for (std::size_t c = 0; c < projects.size(); ++c) {
    const Project& cand = projects[c];
    BellwetherEntry e;
    e.project = cand.name;
    const std::size_t before = cand.read_count();
    std::optional<FeatureMatrix> train;
    if (early) {
      SamplingPolicy p = policy;
      p.kind = train_kind;
      p.source_project.reset();
      train = sample_early(cand, p, seed);
    } else {
      train = engineered(cand.read(0, cand.size()), MatrixRole::train);
    }
    e.training_reads = cand.read_count() - before;
    if (!train || !enough(*train, 2)) {
      out.push_back(e);
      continue;
    }

    std::optional<learners::TrainedModel> model;
    try {
      model = learners::train(classifier, prepare_train(train_kind, *train, seed), seed);
    } catch (const Error& err) {
      log::warn("bellwether " + cand.name + ": " + err.what());
      out.push_back(e);
      continue;
    }

    std::vector<double> recalls, pfs;
    for (std::size_t t = 0; t < projects.size(); ++t) {
      if (t == c) continue;
      for (const auto& w : release_windows(projects[t])) {
        if (w.empty()) continue;
        FeatureMatrix test = engineered(projects[t].read(w), MatrixRole::test).select_columns(model->feature_names);
        const auto p = learners::predict(*model, test);
        const auto r = metrics::evaluate(p.probabilities, p.labels, test.labels);
        if (!r) continue;
        recalls.push_back(r->recall);
        pfs.push_back(r->pf);
      }
    }
    e.evaluated_releases = recalls.size();
    e.median_recall = median_of(recalls);
    e.median_pf = median_of(pfs);
    e.satisfactory = !recalls.empty() && e.median_recall > 0.7 && e.median_pf < 0.3;
    out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(), [](const BellwetherEntry& a, const BellwetherEntry& b) {
    if (a.median_recall != b.median_recall) return a.median_recall > b.median_recall;
    if (a.median_pf != b.median_pf) return a.median_pf < b.median_pf;
    return a.project < b.project;
  });
  return out;
}

}  // namespace earlybird::sampling
