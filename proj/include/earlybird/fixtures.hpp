#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "earlybird/commit.hpp"
#include "earlybird/dataset.hpp"

// Generators for test and demo data: scripted git repositories with known
// bug-inducing commits, and synthetic labeled projects.
namespace earlybird::fixtures {

struct ScriptedRepoSpec {
  std::size_t commits = 30;
  /// (inducing commit index, fixing commit index); the fix rewrites the line
  /// the inducing commit added.
  std::vector<std::pair<std::size_t, std::size_t>> bugs;
  std::vector<std::pair<std::size_t, std::string>> tags;  // lightweight tag after commit index
  Timestamp start = 1'500'000'000;
  std::int64_t spacing = 15 * 86400;
  bool license = true;
  /// Adds a side branch (one commit), one more mainline commit and a merge.
  bool merge = false;
};

struct ScriptedRepo {
  std::filesystem::path path;
  std::vector<std::string> hashes;  // mainline commits in creation order
  std::set<std::string> inducing;
  std::set<std::string> fixes;
  std::size_t non_merge_commits = 0;
  std::size_t merge_commits = 0;
};

/// Creates a fresh repository in `dir` (which must not exist or be empty).
ScriptedRepo build_scripted_repo(const std::filesystem::path& dir, const ScriptedRepoSpec& spec);

/// 30 commits, 4 planted bug-inducing commits, 3 fixes (one fix repairs two
/// bugs), tags v1..v3.
ScriptedRepoSpec szz_fixture_spec();

struct SyntheticSpec {
  std::string name = "synthetic";
  std::size_t commits = 400;
  std::size_t defects = 80;
  double early_share = 0.7;  // share of defects placed in [0, window)
  std::size_t window = 150;
  std::size_t release_every = 25;
  /// Probability that a commit's features are drawn from the other class,
  /// inside and after the window.
  double early_noise = 0.05;
  double late_noise = 0.05;
  std::uint64_t seed = 1;
  Timestamp start = 1'500'000'000;
  std::int64_t spacing = 86400;
};

/// Labeled project whose defects are predictable from LA and LT. The other
/// process metrics come from a few latent factors, as in mined data.
Project synthetic_project(const SyntheticSpec& spec);

/// `count` projects sharing one labeling rule. Only `dominant` has a clean
/// early window; the others' first `window` commits carry pure label noise.
std::vector<Project> synthetic_family(std::size_t count, std::size_t commits, std::size_t dominant,
                                      std::uint64_t seed);

}  // namespace earlybird::fixtures
