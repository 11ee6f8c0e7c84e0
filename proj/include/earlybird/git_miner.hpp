#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "earlybird/commit.hpp"
#include "earlybird/process.hpp"

namespace earlybird {

/// Knobs shared by mining and labeling. Loaded from a JSON file so the
/// extension allowlist and keyword set live outside the code.
struct MiningConfig {
  std::vector<std::string> source_extensions;
  std::vector<std::string> defect_keywords{"bug", "fix", "wrong", "error", "fail", "problem",
                                           "patch"};
  bool ignore_whitespace = true;

  bool is_source(std::string_view path) const;
};

MiningConfig load_mining_config(const std::filesystem::path& file);

/// The mining.json shipped in the source tree's config/ directory.
const MiningConfig& default_mining_config();

/// Handle on a local repository. All access goes through the git CLI.
class GitRepository {
 public:
  /// Throws GitError if `path` is not inside a git work tree or bare repo.
  explicit GitRepository(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }
  bool has_commits() const;

  /// Runs `git <args>`; throws GitError on non-zero exit.
  std::string git(const std::vector<std::string>& args, const std::string* stdin_data = nullptr) const;
  ProcessResult git_raw(const std::vector<std::string>& args,
                        const std::string* stdin_data = nullptr) const;

 private:
  std::filesystem::path path_;
};

/// Oldest first, in date order constrained by topology. Merge commits are
/// included with no file changes.
std::vector<RawCommit> enumerate_commits(const GitRepository& repo, const MiningConfig& config);

std::vector<RawCommit> filter_merges(std::vector<RawCommit> commits);

/// One entry per tag (annotated or lightweight) pointing at a commit, sorted
/// by the tagged commit's timestamp, then tag name.
std::vector<Release> extract_releases(const GitRepository& repo);

/// True if the HEAD tree has a top-level LICENSE/LICENCE/COPYING file.
bool has_license_file(const GitRepository& repo);

struct SanityReport {
  bool accepted = true;
  std::vector<std::string> violations;
};

/// Rule names reported in SanityReport::violations.
namespace sanity_rule {
inline constexpr std::string_view defective_ratio = "defective_ratio";
inline constexpr std::string_view releases = "releases";
inline constexpr std::string_view activity = "activity";
inline constexpr std::string_view license = "license";
inline constexpr std::string_view class_counts = "class_counts";
}  // namespace sanity_rule

SanityReport sanity_check(std::span<const LabeledCommit> labeled, std::span<const Release> releases,
                          bool has_license);

/// Writes/reads the `tag,hash,timestamp` releases CSV.
void write_releases_csv(const std::filesystem::path& file, std::span<const Release> releases);
std::vector<Release> read_releases_csv(const std::filesystem::path& file);

/// Newline-delimited JSON interchange for raw commits.
std::string to_ndjson(std::span<const RawCommit> commits);
std::vector<RawCommit> from_ndjson(std::string_view text);

}  // namespace earlybird
