#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "earlybird/commit.hpp"
#include "earlybird/git_miner.hpp"

namespace earlybird::labeler {

/// Maps lines of a file at a given revision to the commits that last
/// introduced them.
class BlameSource {
 public:
  virtual ~BlameSource() = default;
  /// Returns one origin hash per requested line, or an empty string when the
  /// line cannot be resolved.
  virtual std::vector<std::string> origins(const std::string& revision, const std::string& path,
                                           std::span<const int> lines) const = 0;
};

/// `git blame --porcelain` against the repository; `-w` when whitespace is
/// ignored.
class GitBlame final : public BlameSource {
 public:
  GitBlame(const GitRepository& repo, bool ignore_whitespace)
      : repo_(repo), ignore_whitespace_(ignore_whitespace) {}
  std::vector<std::string> origins(const std::string& revision, const std::string& path,
                                   std::span<const int> lines) const override;

 private:
  const GitRepository& repo_;
  bool ignore_whitespace_;
};

struct TraceStats {
  std::size_t lines_traced = 0;
  std::size_t unresolved = 0;   // blame could not attribute the line
  std::size_t discarded = 0;    // origin postdates the fix or is unknown
};

std::set<std::string> identify_fix_commits(std::span<const RawCommit> commits,
                                           std::span<const std::string> keywords);

/// Commits that last introduced the source lines a fix deletes or modifies.
/// `known` maps hashes to timestamps; origins outside it, or newer than the
/// fix, are discarded.
std::set<std::string> trace_bug_inducing(const RawCommit& fix, const BlameSource& blame,
                                         const std::unordered_map<std::string, Timestamp>& known,
                                         bool ignore_whitespace, TraceStats* stats = nullptr);

struct LabelOptions {
  std::vector<std::string> keywords;
  bool ignore_whitespace = true;
};

/// Labels a merge-free commit sequence. Features are computed here as well so
/// the output is the complete dataset row set.
std::vector<LabeledCommit> label_dataset(std::span<const RawCommit> commits, const BlameSource& blame,
                                         const LabelOptions& options, TraceStats* stats = nullptr);

/// Assigns each commit the tag of the release window it falls in: the first
/// release whose timestamp is >= the commit's. Commits after the last
/// release get an empty tag.
void assign_releases(std::vector<LabeledCommit>& commits, std::span<const Release> releases);

}  // namespace earlybird::labeler
