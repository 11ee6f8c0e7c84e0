#include "earlybird/labeler.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <unordered_map>

#include "earlybird/features.hpp"

namespace earlybird::labeler {

namespace {

bool is_hex_hash(std::string_view s) {
  return s.size() == 40 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

}  // namespace

std::vector<std::string> GitBlame::origins(const std::string& revision, const std::string& path,
                                           std::span<const int> lines) const {
  std::vector<std::string> out(lines.size());
  if (lines.empty()) return out;
  std::vector<int> sorted(lines.begin(), lines.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<std::string> args{"blame", "--porcelain"};
  if (ignore_whitespace_) args.emplace_back("-w");
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[j] + 1) ++j;
    args.push_back("-L");
    args.push_back(std::to_string(sorted[i]) + "," + std::to_string(sorted[j]));
    i = j + 1;
  }
  args.push_back(revision);
  args.push_back("--");
  args.push_back(path);

  const auto r = repo_.git_raw(args);
  if (r.exit_code != 0) return out;  // unresolvable (shallow history, missing path)

  std::map<int, std::string> by_line;
  std::size_t pos = 0;
  while (pos < r.out.size()) {
    auto eol = r.out.find('\n', pos);
    if (eol == std::string::npos) eol = r.out.size();
    std::string_view line(r.out.data() + pos, eol - pos);
    pos = eol + 1;
    if (line.size() < 41 || line[40] != ' ' || !is_hex_hash(line.substr(0, 40))) continue;
    // "<sha> <orig-line> <final-line> [<count>]"
    const auto rest = line.substr(41);
    const auto sp = rest.find(' ');
    if (sp == std::string_view::npos) continue;
    auto final_field = rest.substr(sp + 1);
    final_field = final_field.substr(0, final_field.find(' '));
    int final_line = 0;
    std::from_chars(final_field.data(), final_field.data() + final_field.size(), final_line);
    by_line[final_line] = std::string(line.substr(0, 40));
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto it = by_line.find(lines[i]);
    if (it != by_line.end()) out[i] = it->second;
  }
  return out;
}

std::set<std::string> identify_fix_commits(std::span<const RawCommit> commits,
                                           std::span<const std::string> keywords) {
  std::set<std::string> out;
  for (const auto& c : commits)
    if (features::detect_fix(c.message, keywords)) out.insert(c.hash);
  return out;
}

std::set<std::string> trace_bug_inducing(const RawCommit& fix, const BlameSource& blame,
                                         const std::unordered_map<std::string, Timestamp>& known,
                                         bool ignore_whitespace, TraceStats* stats) {
  std::set<std::string> inducing;
  if (fix.parent_hashes.empty()) return inducing;
  const std::string& parent = fix.parent_hashes.front();
  for (const auto& change : fix.changes) {
    if (!change.is_source || change.old_path.empty()) continue;
    std::vector<int> lines;
    for (const auto& d : change.deleted_lines)
      if (!(ignore_whitespace && d.whitespace_only)) lines.push_back(d.line);
    if (lines.empty()) continue;
    const auto origins = blame.origins(parent, change.old_path, lines);
    for (const auto& origin : origins) {
      if (stats) ++stats->lines_traced;
      if (origin.empty()) {
        if (stats) ++stats->unresolved;
        continue;
      }
      const auto it = known.find(origin);
      if (it == known.end() || it->second > fix.timestamp || origin == fix.hash) {
        if (stats) ++stats->discarded;
        continue;
      }
      inducing.insert(origin);
    }
  }
  return inducing;
}

std::vector<LabeledCommit> label_dataset(std::span<const RawCommit> commits, const BlameSource& blame,
                                         const LabelOptions& options, TraceStats* stats) {
  const auto feats = features::compute_all(commits, options.keywords);
  std::unordered_map<std::string, Timestamp> known;
  for (const auto& c : commits) known.emplace(c.hash, c.timestamp);

  std::unordered_map<std::string, std::vector<std::string>> induced;
  for (const auto& c : commits) {
    if (!features::detect_fix(c.message, options.keywords)) continue;
    for (const auto& origin : trace_bug_inducing(c, blame, known, options.ignore_whitespace, stats))
      induced[origin].push_back(c.hash);
  }

  std::vector<LabeledCommit> out;
  out.reserve(commits.size());
  for (std::size_t i = 0; i < commits.size(); ++i) {
    LabeledCommit l;
    l.hash = commits[i].hash;
    l.timestamp = commits[i].timestamp;
    l.features = feats[i];
    if (auto it = induced.find(l.hash); it != induced.end()) l.induced_by_fixes = it->second;
    l.defective = !l.induced_by_fixes.empty();
    out.push_back(std::move(l));
  }
  return out;
}

void assign_releases(std::vector<LabeledCommit>& commits, std::span<const Release> releases) {
  std::vector<Release> sorted(releases.begin(), releases.end());
  std::sort(sorted.begin(), sorted.end(), [](const Release& a, const Release& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.tag < b.tag;
  });
  for (auto& c : commits) {
    c.release.clear();
    const auto it = std::lower_bound(
        sorted.begin(), sorted.end(), c.timestamp,
        [](const Release& r, Timestamp t) { return r.timestamp < t; });
    if (it != sorted.end()) c.release = it->tag;
  }
}

}  // namespace earlybird::labeler
