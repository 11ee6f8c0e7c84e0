#include "earlybird/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace earlybird::features {

namespace {

constexpr double kSecondsPerDay = 86400.0;
constexpr double kDaysPerYear = 365.25;

// Key under which a change's file history is looked up.
const std::string& history_key(const FileChange& c) {
  return c.old_path.empty() ? c.path : c.old_path;
}

std::vector<const FileChange*> source_changes(const RawCommit& commit) {
  std::vector<const FileChange*> out;
  for (const auto& c : commit.changes)
    if (c.is_source) out.push_back(&c);
  return out;
}

std::set<std::string> subsystems(const RawCommit& commit) {
  std::set<std::string> out;
  for (const auto& c : commit.changes)
    if (c.is_source) out.insert(subsystem_of(c.path));
  return out;
}

bool touches(const RawCommit& prior, const std::string& key) {
  return std::any_of(prior.changes.begin(), prior.changes.end(),
                     [&](const FileChange& c) { return c.is_source && c.path == key; });
}

double years_between(Timestamp earlier, Timestamp later) {
  return std::max(0.0, static_cast<double>(later - earlier) / kSecondsPerDay / kDaysPerYear);
}

double days_between(Timestamp earlier, Timestamp later) {
  return std::max(0.0, static_cast<double>(later - earlier) / kSecondsPerDay);
}

}  // namespace

std::string subsystem_of(std::string_view path) {
  const auto slash = path.find('/');
  return slash == std::string_view::npos ? std::string() : std::string(path.substr(0, slash));
}

std::string directory_of(std::string_view path) {
  const auto slash = path.rfind('/');
  return slash == std::string_view::npos ? std::string() : std::string(path.substr(0, slash));
}

Diffusion compute_diffusion(const RawCommit& commit) {
  Diffusion d;
  std::set<std::string> files, dirs, subs;
  std::map<std::string, double> modified;
  double total = 0;
  for (const FileChange* c : source_changes(commit)) {
    files.insert(c->path);
    dirs.insert(directory_of(c->path));
    subs.insert(subsystem_of(c->path));
    const double lines = c->lines_added + c->lines_deleted;
    modified[c->path] += lines;
    total += lines;
  }
  d.nf = static_cast<double>(files.size());
  d.nd = static_cast<double>(dirs.size());
  d.ns = static_cast<double>(subs.size());
  if (files.size() > 1 && total > 0) {
    double h = 0;
    for (const auto& [path, lines] : modified) {
      if (lines <= 0) continue;
      const double p = lines / total;
      h -= p * std::log(p);
    }
    d.entropy = std::clamp(h / std::log(static_cast<double>(files.size())), 0.0, 1.0);
  }
  return d;
}

Size compute_size(const RawCommit& commit) {
  Size s;
  std::map<std::string, double> before;
  for (const FileChange* c : source_changes(commit)) {
    s.la += c->lines_added;
    s.ld += c->lines_deleted;
    before[c->path] += c->loc_before;
  }
  if (!before.empty()) {
    double sum = 0;
    for (const auto& [path, loc] : before) sum += loc;
    s.lt = sum / static_cast<double>(before.size());
  }
  return s;
}

History compute_history(const RawCommit& commit, std::span<const RawCommit> prior) {
  History h;
  std::set<std::string> keys;
  for (const FileChange* c : source_changes(commit)) keys.insert(history_key(*c));
  if (keys.empty()) return h;

  std::set<std::string> authors;
  std::set<std::size_t> touching;
  double age_sum = 0;
  for (const auto& key : keys) {
    bool seen = false;
    Timestamp last = 0;
    for (std::size_t i = 0; i < prior.size(); ++i) {
      if (!touches(prior[i], key)) continue;
      authors.insert(prior[i].author);
      touching.insert(i);
      last = prior[i].timestamp;  // prior is oldest first
      seen = true;
    }
    if (seen) age_sum += days_between(last, commit.timestamp);
  }
  h.ndev = static_cast<double>(authors.size());
  h.nuc = static_cast<double>(touching.size());
  h.age = age_sum / static_cast<double>(keys.size());
  return h;
}

Experience compute_experience(const RawCommit& commit, std::span<const RawCommit> prior) {
  Experience e;
  const auto subs = subsystems(commit);
  for (const auto& p : prior) {
    if (p.author != commit.author) continue;
    e.exp += 1;
    e.rexp += 1.0 / (1.0 + years_between(p.timestamp, commit.timestamp));
    const auto theirs = subsystems(p);
    if (std::any_of(theirs.begin(), theirs.end(), [&](const std::string& s) { return subs.count(s); }))
      e.sexp += 1;
  }
  return e;
}

bool detect_fix(std::string_view message, std::span<const std::string> keywords) {
  static const char* const kSuffixes[] = {"", "s", "es", "ed", "d", "ing", "ure", "ures"};
  std::string text(message);
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  // Split into alphanumeric words; anything else is a boundary.
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) ++j;
    const std::string_view word(text.data() + i, j - i);
    for (const auto& kw : keywords) {
      if (word.size() < kw.size() || word.substr(0, kw.size()) != kw) continue;
      const std::string_view rest = word.substr(kw.size());
      for (const char* suffix : kSuffixes)
        if (rest == suffix) return true;
    }
    i = j;
  }
  return false;
}

std::vector<CommitFeatures> compute_all(std::span<const RawCommit> commits,
                                        std::span<const std::string> keywords) {
  struct FileHistory {
    Timestamp last = 0;
    std::unordered_set<std::string> authors;
    std::vector<std::size_t> commits;
  };
  struct AuthorCommit {
    Timestamp timestamp;
    std::set<std::string> subsystems;
  };
  std::unordered_map<std::string, FileHistory> files;
  std::unordered_map<std::string, std::vector<AuthorCommit>> authors;

  std::vector<CommitFeatures> out;
  out.reserve(commits.size());
  for (std::size_t idx = 0; idx < commits.size(); ++idx) {
    const RawCommit& commit = commits[idx];
    CommitFeatures f;
    const Diffusion d = compute_diffusion(commit);
    const Size s = compute_size(commit);
    f.ns = d.ns;
    f.nd = d.nd;
    f.nf = d.nf;
    f.entropy = d.entropy;
    f.la = s.la;
    f.ld = s.ld;
    f.lt = s.lt;
    f.fix = detect_fix(commit.message, keywords);

    std::set<std::string> keys;
    for (const FileChange* c : source_changes(commit)) keys.insert(history_key(*c));
    std::unordered_set<std::string> devs;
    std::vector<std::size_t> touching;
    double age_sum = 0;
    for (const auto& key : keys) {
      auto it = files.find(key);
      if (it == files.end()) continue;
      devs.insert(it->second.authors.begin(), it->second.authors.end());
      touching.insert(touching.end(), it->second.commits.begin(), it->second.commits.end());
      age_sum += days_between(it->second.last, commit.timestamp);
    }
    std::sort(touching.begin(), touching.end());
    touching.erase(std::unique(touching.begin(), touching.end()), touching.end());
    f.ndev = static_cast<double>(devs.size());
    f.nuc = static_cast<double>(touching.size());
    f.age = keys.empty() ? 0.0 : age_sum / static_cast<double>(keys.size());

    const auto subs = subsystems(commit);
    auto& mine = authors[commit.author];
    for (const auto& p : mine) {
      f.exp += 1;
      f.rexp += 1.0 / (1.0 + years_between(p.timestamp, commit.timestamp));
      if (std::any_of(p.subsystems.begin(), p.subsystems.end(),
                      [&](const std::string& x) { return subs.count(x) > 0; }))
        f.sexp += 1;
    }
    out.push_back(f);

    // Index this commit for its successors.
    mine.push_back({commit.timestamp, subs});
    for (const FileChange* c : source_changes(commit)) {
      auto& fh = files[c->path];
      fh.last = commit.timestamp;
      fh.authors.insert(commit.author);
      fh.commits.push_back(idx);
    }
  }
  return out;
}

}  // namespace earlybird::features
