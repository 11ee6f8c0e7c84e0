#include "earlybird/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "earlybird/error.hpp"
#include "earlybird/process.hpp"

namespace earlybird::fixtures {

namespace {

constexpr std::size_t kFiles = 4;

std::string run_git(const std::filesystem::path& dir, std::vector<std::string> args, Timestamp when = 0) {
  std::vector<std::string> argv{"env"};
  if (when != 0) {
    const std::string date = "@" + std::to_string(when) + " +0000";
    argv.push_back("GIT_AUTHOR_DATE=" + date);
    argv.push_back("GIT_COMMITTER_DATE=" + date);
  }
  for (const char* v : {"git", "-c", "user.name=Fixture Dev", "-c", "user.email=dev@example.com", "-c",
                        "commit.gpgsign=false", "-c", "init.defaultBranch=main", "-c", "core.autocrlf=false"})
    argv.emplace_back(v);
  argv.insert(argv.end(), args.begin(), args.end());
  const auto r = run_process(argv, dir);
  if (r.exit_code != 0) throw GitError("fixture git " + args.front() + " failed: " + r.err);
  return r.out;
}

void write_lines(const std::filesystem::path& file, const std::vector<std::string>& lines) {
  std::ofstream out(file, std::ios::binary);
  for (const auto& l : lines) out << l << '\n';
}

std::string head(const std::filesystem::path& dir) {
  auto h = run_git(dir, {"rev-parse", "HEAD"});
  while (!h.empty() && (h.back() == '\n' || h.back() == '\r')) h.pop_back();
  return h;
}

}  // namespace

ScriptedRepoSpec szz_fixture_spec() {
  ScriptedRepoSpec s;
  s.commits = 30;
  s.bugs = {{3, 15}, {12, 15}, {6, 20}, {9, 25}};
  s.tags = {{10, "v1"}, {20, "v2"}, {29, "v3"}};
  return s;
}

ScriptedRepo build_scripted_repo(const std::filesystem::path& dir, const ScriptedRepoSpec& spec) {
  if (std::filesystem::exists(dir) && !std::filesystem::is_empty(dir))
    throw DataError("fixture directory is not empty: " + dir.string());
  for (const auto& [ind, fix] : spec.bugs)
    if (ind == 0 || ind >= fix || fix >= spec.commits) throw DataError("fixture bug indices out of order");
  std::filesystem::create_directories(dir);
  run_git(dir, {"init", "-q"});

  ScriptedRepo repo;
  repo.path = dir;
  std::vector<std::vector<std::string>> files(kFiles);
  const auto file_path = [&](std::size_t f) { return dir / "src" / ("mod" + std::to_string(f) + ".c"); };
  std::filesystem::create_directories(dir / "src");

  std::map<std::size_t, std::string> tag_at;
  for (const auto& [i, t] : spec.tags) tag_at[i] = t;

  const auto commit = [&](std::size_t i, const std::string& message) {
    for (std::size_t f = 0; f < kFiles; ++f) write_lines(file_path(f), files[f]);
    run_git(dir, {"add", "-A"});
    run_git(dir, {"commit", "-q", "-m", message}, spec.start + static_cast<Timestamp>(i) * spec.spacing);
    return head(dir);
  };

  for (std::size_t i = 0; i < spec.commits; ++i) {
    std::string message = "add item " + std::to_string(i);
    bool fixes = false, induces = false;
    if (i == 0) {
      for (std::size_t f = 0; f < kFiles; ++f)
        for (int l = 0; l < 5; ++l) files[f].push_back("int base_" + std::to_string(f) + "_" + std::to_string(l) + " = 0;");
      if (spec.license) write_lines(dir / "LICENSE", {"MIT License"});
      write_lines(dir / "README.md", {"fixture"});
      message = "initial import";
    }
    for (std::size_t b = 0; b < spec.bugs.size(); ++b) {
      const auto& [ind, fix] = spec.bugs[b];
      auto& lines = files[b % kFiles];
      const std::string bad = "int bug_" + std::to_string(b) + " = " + std::to_string(b) + ";";
      if (ind == i) {
        lines.push_back(bad);
        induces = true;
      }
      if (fix == i) {
        std::replace(lines.begin(), lines.end(), bad, "int ok_" + std::to_string(b) + " = " + std::to_string(b) + ";");
        fixes = true;
      }
    }
    if (fixes) message = "fix issue " + std::to_string(i);
    if (!fixes && !induces && i > 0)
      files[i % kFiles].push_back("int filler_" + std::to_string(i) + " = " + std::to_string(i) + ";");
    const std::string h = commit(i, message);
    repo.hashes.push_back(h);
    if (induces) repo.inducing.insert(h);
    if (fixes) repo.fixes.insert(h);
    if (tag_at.count(i)) run_git(dir, {"tag", tag_at[i]});
  }
  repo.non_merge_commits = spec.commits;

  if (spec.merge) {
    const Timestamp t = spec.start + static_cast<Timestamp>(spec.commits) * spec.spacing;
    run_git(dir, {"checkout", "-q", "-b", "side"});
    files[1].push_back("int side_change = 1;");
    for (std::size_t f = 0; f < kFiles; ++f) write_lines(file_path(f), files[f]);
    run_git(dir, {"commit", "-q", "-am", "add side item"}, t);
    run_git(dir, {"checkout", "-q", "main"});
    files[1].pop_back();
    files[2].push_back("int main_change = 1;");
    for (std::size_t f = 0; f < kFiles; ++f) write_lines(file_path(f), files[f]);
    run_git(dir, {"commit", "-q", "-am", "add main item"}, t + spec.spacing);
    run_git(dir, {"merge", "-q", "--no-ff", "-m", "merge side", "side"}, t + 2 * spec.spacing);
    repo.non_merge_commits += 2;
    repo.merge_commits = 1;
  }
  return repo;
}

Project synthetic_project(const SyntheticSpec& spec) {
  if (spec.window > spec.commits || spec.defects > spec.commits) throw DataError("synthetic: bad sizes");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const std::size_t early = std::min<std::size_t>(
      spec.window, static_cast<std::size_t>(std::llround(spec.early_share * static_cast<double>(spec.defects))));
  const std::size_t late = std::min(spec.defects - early, spec.commits - spec.window);
  std::vector<int> defective(spec.commits, 0);
  std::vector<std::size_t> a(spec.window), b(spec.commits - spec.window);
  std::iota(a.begin(), a.end(), 0);
  std::iota(b.begin(), b.end(), spec.window);
  std::shuffle(a.begin(), a.end(), rng);
  std::shuffle(b.begin(), b.end(), rng);
  for (std::size_t i = 0; i < early; ++i) defective[a[i]] = 1;
  for (std::size_t i = 0; i < late; ++i) defective[b[i]] = 1;

  Project p;
  p.name = spec.name;
  constexpr int kDevelopers = 6;
  std::vector<int> dev_commits(kDevelopers, 0);
  std::poisson_distribution<int> small(0.8), tiny(0.3);
  std::exponential_distribution<double> age_days(1.0 / 30.0);
  for (std::size_t i = 0; i < spec.commits; ++i) {
    LabeledCommit c;
    c.hash = spec.name + ":" + std::to_string(i);
    c.timestamp = spec.start + static_cast<Timestamp>(i) * spec.spacing;
    c.defective = defective[i] != 0;
    const double noise = i < spec.window ? spec.early_noise : spec.late_noise;
    const bool looks_defective = (unit(rng) < noise) ? !c.defective : c.defective;

    auto& f = c.features;
    f.nf = 1 + small(rng);
    f.nd = std::min(f.nf, 1.0 + tiny(rng));
    f.ns = std::min(f.nd, unit(rng) < 0.1 ? 2.0 : 1.0);
    f.entropy = f.nf > 1 ? 0.3 + 0.7 * unit(rng) : 0.0;
    f.la = std::max(1.0, std::round(std::exp(looks_defective ? 4.5 + 0.6 * gauss(rng) : 2.3 + 0.8 * gauss(rng))));
    f.lt = std::max(1.0, std::round(std::exp(looks_defective ? 4.0 + 0.6 * gauss(rng) : 5.5 + 0.6 * gauss(rng))));
    f.ld = std::round(f.la * 0.5 * unit(rng));
    f.fix = unit(rng) < 0.25;
    const double progress = static_cast<double>(i) / static_cast<double>(spec.commits);
    f.ndev = 1 + std::round(progress * 4 * unit(rng));
    f.age = std::round(age_days(rng) * 10) / 10;
    f.nuc = 1 + std::round(progress * 6 * unit(rng));
    const int dev = static_cast<int>(unit(rng) * kDevelopers) % kDevelopers;
    f.exp = dev_commits[static_cast<std::size_t>(dev)]++;
    f.rexp = f.exp / (1.0 + progress);
    f.sexp = std::round(f.exp * 0.8);
    p.commits.push_back(std::move(c));
  }

  for (std::size_t end = spec.release_every; ; end += spec.release_every) {
    const std::size_t last = std::min(end, spec.commits) - 1;
    p.releases.push_back({"v" + std::to_string(p.releases.size() + 1), p.commits[last].hash, p.commits[last].timestamp});
    if (end >= spec.commits) break;
  }
  for (auto& c : p.commits) {
    const auto it = std::lower_bound(p.releases.begin(), p.releases.end(), c.timestamp,
                                     [](const Release& r, Timestamp t) { return r.timestamp < t; });
    c.release = it->tag;
  }
  return p;
}

std::vector<Project> synthetic_family(std::size_t count, std::size_t commits, std::size_t dominant,
                                      std::uint64_t seed) {
  std::vector<Project> out;
  for (std::size_t k = 0; k < count; ++k) {
    SyntheticSpec s;
    s.name = "proj" + std::to_string(k);
    s.commits = commits;
    s.defects = commits / 5;
    s.early_share = std::min(0.5, 0.3 * static_cast<double>(s.window) / static_cast<double>(s.defects));
    s.early_noise = k == dominant ? 0.0 : 0.5;
    s.late_noise = 0.0;
    s.seed = seed * 1000 + k;
    out.push_back(synthetic_project(s));
  }
  return out;
}

}  // namespace earlybird::fixtures
