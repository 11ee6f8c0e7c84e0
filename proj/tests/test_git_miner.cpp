#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "earlybird/fixtures.hpp"
#include "earlybird/git_miner.hpp"
#include "test_util.hpp"

using namespace earlybird;
using testutil::git;
using testutil::TempDir;

namespace {

void write(const std::filesystem::path& file, const std::string& text) {
  std::filesystem::create_directories(file.parent_path());
  std::ofstream(file, std::ios::binary) << text;
}

LabeledCommit row(Timestamp ts, bool defective) {
  LabeledCommit c;
  c.hash = std::to_string(ts);
  c.timestamp = ts;
  c.defective = defective;
  return c;
}

constexpr Timestamp kYear = 365 * 86400;

}  // namespace

TEST_CASE("source extension allowlist") {
  const auto& cfg = default_mining_config();
  CHECK(cfg.is_source("src/a.c"));
  CHECK(cfg.is_source("x/Y.JAVA"));
  CHECK_FALSE(cfg.is_source("README.md"));
  CHECK_FALSE(cfg.is_source("LICENSE"));
  CHECK_FALSE(cfg.is_source(".c"));
  CHECK(cfg.defect_keywords.size() == 7);
}

TEST_CASE("not a repository") {
  TempDir dir;
  CHECK_THROWS_AS(GitRepository(dir.path()), GitError);
}

TEST_CASE("empty repository yields no commits") {
  TempDir dir;
  git(dir.path(), {"init", "-q"});
  GitRepository repo(dir.path());
  CHECK(enumerate_commits(repo, default_mining_config()).empty());
  CHECK(extract_releases(repo).empty());
}

TEST_CASE("linear history, oldest first, with line detail") {
  TempDir dir;
  const auto& p = dir.path();
  git(p, {"init", "-q"});
  write(p / "src/a.c", "one\ntwo\nthree\n");
  write(p / "README.md", "doc\n");
  git(p, {"add", "-A"});
  git(p, {"commit", "-q", "-m", "first"}, 1'000'000);
  write(p / "src/a.c", "one\nTWO\nthree\nfour\nfive\n");
  git(p, {"add", "-A"});
  git(p, {"commit", "-q", "-m", "second"}, 1'000'100);
  write(p / "src/b.c", "x\n");
  std::filesystem::remove(p / "README.md");
  git(p, {"add", "-A"});
  git(p, {"commit", "-q", "-m", "third"}, 1'000'200);

  GitRepository repo(p);
  const auto commits = enumerate_commits(repo, default_mining_config());
  REQUIRE(commits.size() == 3);
  CHECK(commits[0].message == "first");
  CHECK(commits[2].message == "third");
  CHECK(commits[0].parent_hashes.empty());
  CHECK(commits[1].parent_hashes == std::vector<std::string>{commits[0].hash});
  CHECK(commits[1].timestamp == 1'000'100);

  const auto& ch = commits[1].changes;
  REQUIRE(ch.size() == 1);
  CHECK(ch[0].path == "src/a.c");
  CHECK(ch[0].is_source);
  CHECK(ch[0].lines_added == 3);
  CHECK(ch[0].lines_deleted == 1);
  CHECK(ch[0].added_line_numbers == std::vector<int>{2, 4, 5});
  REQUIRE(ch[0].deleted_lines.size() == 1);
  CHECK(ch[0].deleted_lines[0].line == 2);
  CHECK(ch[0].loc_before == 3);
  CHECK(static_cast<int>(ch[0].added_line_numbers.size()) == ch[0].lines_added);

  bool saw_readme = false;
  for (const auto& c : commits[0].changes)
    if (c.path == "README.md") {
      saw_readme = true;
      CHECK_FALSE(c.is_source);
    }
  CHECK(saw_readme);

  // Deterministic for a fixed repository state.
  CHECK(to_ndjson(enumerate_commits(repo, default_mining_config())) == to_ndjson(commits));
}

TEST_CASE("loc_before equals the parent tree's line count") {
  TempDir dir;
  auto spec = fixtures::szz_fixture_spec();
  spec.commits = 12;
  spec.bugs = {{2, 7}};
  spec.tags = {};
  const auto fx = fixtures::build_scripted_repo(dir / "repo", spec);
  GitRepository repo(fx.path);
  const auto commits = enumerate_commits(repo, default_mining_config());
  REQUIRE(commits.size() == 12);
  std::size_t checked = 0;
  for (const auto& c : commits) {
    if (c.parent_hashes.empty()) continue;
    for (const auto& ch : c.changes) {
      if (!ch.is_source || ch.old_path.empty()) continue;
      const auto text = git(fx.path, {"show", c.parent_hashes.front() + ":" + ch.old_path});
      CHECK(ch.loc_before == static_cast<int>(std::count(text.begin(), text.end(), '\n')));
      ++checked;
    }
  }
  CHECK(checked >= 10);
}

TEST_CASE("octopus merge is listed then filtered") {
  TempDir dir;
  const auto& p = dir.path();
  git(p, {"init", "-q"});
  write(p / "base.c", "base\n");
  git(p, {"add", "-A"});
  git(p, {"commit", "-q", "-m", "base"}, 1000);
  for (const std::string b : {"b1", "b2"}) {
    git(p, {"checkout", "-q", "-b", b, "main"});
    write(p / (b + ".c"), b + "\n");
    git(p, {"add", "-A"});
    git(p, {"commit", "-q", "-m", "work " + b}, b == "b1" ? 2000 : 3000);
  }
  git(p, {"checkout", "-q", "main"});
  git(p, {"merge", "-q", "--no-ff", "-m", "octopus", "b1", "b2"}, 4000);

  GitRepository repo(p);
  const auto all = enumerate_commits(repo, default_mining_config());
  REQUIRE(all.size() == 4);
  const auto merges = std::count_if(all.begin(), all.end(), [](const RawCommit& c) { return c.is_merge(); });
  CHECK(merges == 1);
  CHECK(all.back().parent_hashes.size() == 3);
  const auto kept = filter_merges(all);
  CHECK(kept.size() == 3);
  for (const auto& c : kept) CHECK(c.parent_hashes.size() <= 1);
  CHECK(to_ndjson(filter_merges(kept)) == to_ndjson(kept));
}

TEST_CASE("filter_merges counts") {
  std::vector<RawCommit> in(10);
  for (int i = 0; i < 10; ++i) {
    in[i].hash = "h" + std::to_string(i);
    if (i > 0) in[i].parent_hashes.push_back(in[i - 1].hash);
    if (i == 3 || i == 6 || i == 9) in[i].parent_hashes.push_back("side");
  }
  CHECK(filter_merges(in).size() == 7);
  std::vector<RawCommit> linear(in.begin(), in.begin() + 3);
  CHECK(filter_merges(linear).size() == 3);
}

TEST_CASE("releases from lightweight and annotated tags") {
  TempDir dir;
  const auto& p = dir.path();
  git(p, {"init", "-q"});
  GitRepository repo(p);
  write(p / "a.c", "1\n");
  git(p, {"add", "-A"});
  git(p, {"commit", "-q", "-m", "one"}, 5000);
  CHECK(extract_releases(repo).empty());
  git(p, {"tag", "v1"});
  git(p, {"tag", "same-commit"});
  write(p / "a.c", "2\n");
  git(p, {"commit", "-q", "-am", "two"}, 9000);
  git(p, {"tag", "-a", "v2", "-m", "release two"}, 9500);

  const auto rel = extract_releases(repo);
  REQUIRE(rel.size() == 3);
  CHECK(rel[0].tag == "same-commit");
  CHECK(rel[1].tag == "v1");
  CHECK(rel[0].commit_hash == rel[1].commit_hash);
  CHECK(rel[2].tag == "v2");
  CHECK(rel[2].timestamp == 9000);
  CHECK(rel[2].commit_hash == testutil::trim(git(p, {"rev-parse", "HEAD"})));

  TempDir out;
  write_releases_csv(out / "r.csv", rel);
  CHECK(read_releases_csv(out / "r.csv") == rel);
}

TEST_CASE("license detection") {
  TempDir dir;
  auto spec = fixtures::szz_fixture_spec();
  spec.commits = 3;
  spec.bugs = {};
  spec.tags = {};
  const auto with = fixtures::build_scripted_repo(dir / "with", spec);
  spec.license = false;
  const auto without = fixtures::build_scripted_repo(dir / "without", spec);
  CHECK(has_license_file(GitRepository(with.path)));
  CHECK_FALSE(has_license_file(GitRepository(without.path)));
}

TEST_CASE("sanity rules") {
  std::vector<LabeledCommit> ok;
  for (int i = 0; i < 100; ++i) ok.push_back(row(i * (2 * kYear / 100), i % 10 == 0));
  const std::vector<Release> two{{"v1", "a", 10}, {"v2", "b", 20}};
  const auto good = sanity_check(ok, two, true);
  CHECK(good.accepted);
  CHECK(good.violations.empty());

  const auto one_release = sanity_check(ok, std::vector<Release>{two[0]}, true);
  CHECK_FALSE(one_release.accepted);
  CHECK(one_release.violations == std::vector<std::string>{"releases"});

  std::vector<LabeledCommit> sparse;
  for (int i = 0; i < 1000; ++i) sparse.push_back(row(i * (2 * kYear / 1000), i < 5));
  const auto low = sanity_check(sparse, two, true);
  CHECK_FALSE(low.accepted);
  CHECK(std::count(low.violations.begin(), low.violations.end(), "defective_ratio") == 1);

  std::vector<LabeledCommit> short_lived;
  for (int i = 0; i < 100; ++i) short_lived.push_back(row(i * 1000, i % 10 == 0));
  CHECK(sanity_check(short_lived, two, true).violations == std::vector<std::string>{"activity"});
  CHECK(sanity_check(ok, two, false).violations == std::vector<std::string>{"license"});

  std::vector<LabeledCommit> few;
  for (int i = 0; i < 20; ++i) few.push_back(row(i * (2 * kYear / 20), i < 3));
  CHECK(sanity_check(few, two, true).violations == std::vector<std::string>{"class_counts"});

  const std::set<std::string> allowed{"defective_ratio", "releases", "activity", "license", "class_counts"};
  for (const auto& v : sanity_check({}, {}, false).violations) CHECK(allowed.count(v) == 1);
}

TEST_CASE("ndjson round trip") {
  TempDir dir;
  auto spec = fixtures::szz_fixture_spec();
  spec.commits = 6;
  spec.bugs = {{1, 4}};
  spec.tags = {};
  const auto fx = fixtures::build_scripted_repo(dir / "r", spec);
  const auto commits = enumerate_commits(GitRepository(fx.path), default_mining_config());
  const auto text = to_ndjson(commits);
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);
  CHECK(to_ndjson(from_ndjson(text)) == text);
}
