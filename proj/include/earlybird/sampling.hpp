#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "earlybird/dataset.hpp"
#include "earlybird/learners.hpp"

namespace earlybird::sampling {

enum class PolicyKind {
  E,
  E_SIZE,
  ALL,
  BELLWETHER,
  TCA_PLUS,
  E_SIZE_BELLWETHER,
  E_TCA,
  E_SIZE_TCA,
  MANUAL_DOWN,
  MANUAL_UP,
  M6,  // recent six months before the release; comparison baseline only
};

std::string_view to_string(PolicyKind k);
PolicyKind policy_kind_from_string(std::string_view name);

/// Trains on one fixed early sample (E, E_SIZE and their cross variants).
bool is_early(PolicyKind k);
/// Training rows come from another project.
bool is_cross(PolicyKind k);
bool is_manual(PolicyKind k);
/// Needs a fresh model for every test release (ALL, M6 and the TCA kinds,
/// whose projection depends on the target release).
bool retrains_per_release(PolicyKind k);

struct SamplingPolicy {
  PolicyKind kind = PolicyKind::E_SIZE;
  std::size_t window = 150;
  std::size_t per_class_cap = 25;
  std::optional<std::string> source_project;

  void validate() const;
  std::string name() const;
  bool operator==(const SamplingPolicy&) const = default;
};

struct TrainTestSplit {
  FeatureMatrix train;  // engineered; empty for manual policies
  FeatureMatrix test;   // engineered, all engineered columns
  Release release;
  SamplingPolicy policy;
};

/// Balanced random sample from the first `window` commits: min(cap,
/// available) of each class. E keeps the CFS-selected columns, E_SIZE (and
/// the early cross kinds with size features) keeps {la, lt}; E_TCA keeps
/// all columns. Reads only the window. nullopt when a class is absent.
std::optional<FeatureMatrix> sample_early(const Project& project, const SamplingPolicy& policy,
                                          std::uint64_t seed);

/// Every commit strictly before `release`'s timestamp, engineered, all
/// columns. nullopt with fewer than `min_per_class` rows of either class.
std::optional<FeatureMatrix> sample_all(const Project& project, const Release& release,
                                        std::size_t min_per_class = 5);

/// Indices of the commits inside each release window: (previous release
/// timestamp, this release timestamp].
std::vector<std::vector<std::size_t>> release_windows(const Project& project);

/// One split per eligible release of `project` (the target). Cross kinds
/// draw training rows from `source`, which must be a different project.
/// Throws DataError if any split's train and test ids intersect.
std::vector<TrainTestSplit> make_splits(const Project& project, const SamplingPolicy& policy,
                                        std::uint64_t seed, const Project* source = nullptr);

/// Policy-specific downstream preprocessing: CFS and SMOTE for the late
/// kinds, TCA projection for the TCA kinds, column alignment for all.
struct PreparedSplit {
  FeatureMatrix train;
  FeatureMatrix test;
};
PreparedSplit prepare(const TrainTestSplit& split, std::uint64_t seed);

struct BellwetherEntry {
  std::string project;
  double median_recall = 0;
  double median_pf = 0;
  bool satisfactory = false;
  std::size_t evaluated_releases = 0;
  std::size_t training_reads = 0;  // commits read from the candidate itself
};

/// Trains on every candidate under `policy` (E_SIZE-style or whole-history)
/// and scores on all other projects' releases. Sorted by recall desc, pf asc.
std::vector<BellwetherEntry> find_bellwethers(std::span<const Project> projects, const SamplingPolicy& policy,
                                              const learners::ClassifierSpec& classifier, std::uint64_t seed);

}  // namespace earlybird::sampling
