#include "earlybird/git_miner.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "earlybird/error.hpp"

#ifndef EARLYBIRD_CONFIG_DIR
#define EARLYBIRD_CONFIG_DIR "config"
#endif

namespace earlybird {

namespace {

constexpr Timestamp kSecondsPerYear = 365 * 86400;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// Undo git's C-style quoting of unusual paths ("a\tb" -> a<TAB>b).
std::string unquote_path(std::string_view s) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') return std::string(s);
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    char c = s[i];
    if (c != '\\' || i + 2 >= s.size()) {
      out.push_back(c);
      continue;
    }
    char e = s[++i];
    switch (e) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case '"': out.push_back('"'); break;
      case '\\': out.push_back('\\'); break;
      default:
        if (e >= '0' && e <= '7' && i + 2 < s.size()) {
          int v = (e - '0') * 64 + (s[i + 1] - '0') * 8 + (s[i + 2] - '0');
          out.push_back(static_cast<char>(v));
          i += 2;
        } else {
          out.push_back(e);
        }
    }
  }
  return out;
}

// "--- a/x" / "+++ b/x" / "/dev/null"
std::string strip_side_prefix(std::string_view s) {
  std::string p = unquote_path(s);
  if (p == "/dev/null") return {};
  if (starts_with(p, "a/") || starts_with(p, "b/")) return p.substr(2);
  return p;
}

int parse_int(std::string_view s) {
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

// "-a,b" or "-a" -> start, count
std::pair<int, int> parse_range(std::string_view s) {
  s.remove_prefix(1);
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) return {parse_int(s), 1};
  return {parse_int(s.substr(0, comma)), parse_int(s.substr(comma + 1))};
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

struct DiffParser {
  const MiningConfig& config;
  std::vector<FileChange> changes;
  FileChange* current = nullptr;
  int old_line = 0;
  int new_line = 0;
  bool in_hunk = false;

  void start_file(std::string_view header) {
    changes.emplace_back();
    current = &changes.back();
    in_hunk = false;
    // "a/P b/P" with identical sides; exact path comes from ---/+++ or rename lines.
    std::string_view rest = header;
    if (rest.size() >= 5 && (rest.size() - 1) % 2 == 0) {
      const std::size_t half = (rest.size() - 1) / 2;
      if (rest.substr(0, 2) == "a/" && rest.substr(half + 1, 2) == "b/") {
        current->old_path = std::string(rest.substr(2, half - 2));
        current->path = std::string(rest.substr(half + 3));
      }
    }
  }

  void line(std::string_view l) {
    if (starts_with(l, "diff --git ")) {
      start_file(l.substr(11));
      return;
    }
    if (!current) return;
    if (in_hunk) {
      if (!l.empty() && l[0] == '-' ) {
        current->deleted_lines.push_back({old_line++, blank(l.substr(1))});
        ++current->lines_deleted;
        return;
      }
      if (!l.empty() && l[0] == '+') {
        current->added_line_numbers.push_back(new_line++);
        ++current->lines_added;
        return;
      }
      if (!l.empty() && l[0] == '\\') return;  // "\ No newline at end of file"
      if (!l.empty() && l[0] == ' ') {
        ++old_line;
        ++new_line;
        return;
      }
    }
    if (starts_with(l, "@@ ")) {
      // @@ -a,b +c,d @@
      std::istringstream in{std::string(l.substr(3))};
      std::string minus, plus;
      in >> minus >> plus;
      old_line = parse_range(minus).first;
      new_line = parse_range(plus).first;
      // A zero-length side reports the line *before* the hunk.
      if (parse_range(minus).second == 0) ++old_line;
      if (parse_range(plus).second == 0) ++new_line;
      in_hunk = true;
      return;
    }
    in_hunk = false;
    if (starts_with(l, "--- ")) {
      current->old_path = strip_side_prefix(l.substr(4));
    } else if (starts_with(l, "+++ ")) {
      std::string p = strip_side_prefix(l.substr(4));
      if (!p.empty()) current->path = p;
    } else if (starts_with(l, "new file mode")) {
      current->old_path.clear();
    } else if (starts_with(l, "rename from ")) {
      current->old_path = unquote_path(l.substr(12));
    } else if (starts_with(l, "rename to ")) {
      current->path = unquote_path(l.substr(10));
    } else if (starts_with(l, "Binary files ")) {
      current->is_binary = true;
    }
  }

  std::vector<FileChange> finish() {
    for (auto& c : changes) {
      if (c.path.empty()) c.path = c.old_path;  // deletions
      c.is_source = !c.is_binary && config.is_source(c.path);
      if (c.is_binary) {
        c.lines_added = c.lines_deleted = 0;
        c.added_line_numbers.clear();
        c.deleted_lines.clear();
      }
    }
    return std::move(changes);
  }
};

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// Line counts of "<rev>:<path>" objects via one `git cat-file --batch` call.
std::vector<int> count_lines(const GitRepository& repo, const std::vector<std::string>& specs) {
  std::vector<int> counts(specs.size(), 0);
  if (specs.empty()) return counts;
  std::string input;
  for (const auto& s : specs) {
    input += s;
    input += '\n';
  }
  const std::string out = repo.git({"cat-file", "--batch"}, &input);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto eol = out.find('\n', pos);
    if (eol == std::string::npos) throw GitError("cat-file: truncated output");
    std::string_view header(out.data() + pos, eol - pos);
    pos = eol + 1;
    if (header.ends_with(" missing") || header.ends_with(" ambiguous")) continue;
    const auto fields = split(header, ' ');
    if (fields.size() < 3) throw GitError("cat-file: bad header");
    std::size_t size = 0;
    std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), size);
    std::string_view body(out.data() + pos, size);
    int lines = static_cast<int>(std::count(body.begin(), body.end(), '\n'));
    if (!body.empty() && body.back() != '\n') ++lines;
    counts[i] = lines;
    pos += size + 1;  // trailing LF after content
  }
  return counts;
}

}  // namespace

bool MiningConfig::is_source(std::string_view path) const {
  const auto slash = path.rfind('/');
  const std::string_view name = slash == std::string_view::npos ? path : path.substr(slash + 1);
  const auto dot = name.rfind('.');
  if (dot == std::string_view::npos || dot == 0) return false;
  const std::string ext = lower(name.substr(dot));
  return std::find(source_extensions.begin(), source_extensions.end(), ext) !=
         source_extensions.end();
}

MiningConfig load_mining_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open mining config: " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("mining config " + file.string() + ": " + e.what());
  }
  MiningConfig c;
  c.source_extensions.clear();
  for (const auto& e : j.at("source_extensions")) c.source_extensions.push_back(lower(e.get<std::string>()));
  if (j.contains("defect_keywords")) {
    c.defect_keywords.clear();
    for (const auto& k : j["defect_keywords"]) c.defect_keywords.push_back(lower(k.get<std::string>()));
  }
  c.ignore_whitespace = j.value("ignore_whitespace", true);
  return c;
}

const MiningConfig& default_mining_config() {
  static const MiningConfig config =
      load_mining_config(std::filesystem::path(EARLYBIRD_CONFIG_DIR) / "mining.json");
  return config;
}

GitRepository::GitRepository(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::is_directory(path_)) throw GitError("not a directory: " + path_.string());
  const auto r = git_raw({"rev-parse", "--git-dir"});
  if (r.exit_code != 0) throw GitError("not a git repository: " + path_.string());
}

ProcessResult GitRepository::git_raw(const std::vector<std::string>& args,
                                     const std::string* stdin_data) const {
  std::vector<std::string> argv{"git",
                                "-c", "core.quotepath=off",
                                "-c", "color.ui=never",
                                "-c", "diff.noprefix=false",
                                "-c", "diff.mnemonicPrefix=false",
                                "-c", "log.showSignature=false"};
  argv.insert(argv.end(), args.begin(), args.end());
  return run_process(argv, path_, stdin_data);
}

std::string GitRepository::git(const std::vector<std::string>& args,
                               const std::string* stdin_data) const {
  auto r = git_raw(args, stdin_data);
  if (r.exit_code != 0) {
    std::string cmd;
    for (const auto& a : args) cmd += " " + a;
    throw GitError("git" + cmd + " failed (" + std::to_string(r.exit_code) + "): " + r.err);
  }
  return std::move(r.out);
}

bool GitRepository::has_commits() const {
  return git_raw({"rev-parse", "--verify", "-q", "HEAD"}).exit_code == 0;
}

std::vector<RawCommit> enumerate_commits(const GitRepository& repo, const MiningConfig& config) {
  if (!repo.has_commits()) return {};
  const std::string out =
      repo.git({"log", "HEAD", "--reverse", "--date-order", "-M", "-p", "-U0", "--no-ext-diff",
                "--no-textconv", "--full-index",
                "--format=%x01%H%x1f%P%x1f%aE%x1f%ct%x1f%B%x02"});

  std::vector<RawCommit> commits;
  std::size_t pos = 0;
  while ((pos = out.find('\x01', pos)) != std::string::npos) {
    const auto header_end = out.find('\x02', pos);
    if (header_end == std::string::npos) throw GitError("log: truncated record");
    auto next = out.find('\x01', header_end);
    if (next == std::string::npos) next = out.size();

    const std::string_view header(out.data() + pos + 1, header_end - pos - 1);
    const auto fields = split(header, '\x1f');
    if (fields.size() < 5) throw GitError("log: malformed header");
    RawCommit c;
    c.hash = std::string(fields[0]);
    for (auto p : split(fields[1], ' '))
      if (!p.empty()) c.parent_hashes.emplace_back(p);
    c.author = lower(fields[2]);
    c.timestamp = std::stoll(std::string(fields[3]));
    // %B may itself contain \x1f in pathological messages; rejoin the tail.
    std::string msg(fields[4]);
    for (std::size_t f = 5; f < fields.size(); ++f) msg += "\x1f" + std::string(fields[f]);
    while (!msg.empty() && (msg.back() == '\n' || msg.back() == ' ')) msg.pop_back();
    c.message = std::move(msg);

    DiffParser parser{config, {}};
    const std::string_view diff(out.data() + header_end + 1, next - header_end - 1);
    for (auto l : split(diff, '\n')) parser.line(l);
    c.changes = parser.finish();
    commits.push_back(std::move(c));
    pos = next;
  }

  // loc_before for source files, read from the first parent's tree.
  std::vector<std::string> specs;
  std::vector<FileChange*> targets;
  for (auto& c : commits) {
    if (c.parent_hashes.empty()) continue;
    for (auto& ch : c.changes) {
      if (!ch.is_source || ch.old_path.empty()) continue;
      specs.push_back(c.parent_hashes.front() + ":" + ch.old_path);
      targets.push_back(&ch);
    }
  }
  const auto counts = count_lines(repo, specs);
  for (std::size_t i = 0; i < targets.size(); ++i) targets[i]->loc_before = counts[i];
  return commits;
}

std::vector<RawCommit> filter_merges(std::vector<RawCommit> commits) {
  std::erase_if(commits, [](const RawCommit& c) { return c.is_merge(); });
  return commits;
}

std::vector<Release> extract_releases(const GitRepository& repo) {
  const std::string out = repo.git(
      {"for-each-ref", "refs/tags",
       "--format=%(refname:strip=2)%1f%(objecttype)%1f%(objectname)%1f%(*objecttype)%1f%(*"
       "objectname)%1f%(committerdate:unix)%1f%(*committerdate:unix)"});
  std::vector<Release> releases;
  for (auto l : split(out, '\n')) {
    if (l.empty()) continue;
    const auto f = split(l, '\x1f');
    if (f.size() < 7) continue;
    Release r;
    r.tag = std::string(f[0]);
    if (f[1] == "commit") {
      r.commit_hash = std::string(f[2]);
      r.timestamp = std::stoll(std::string(f[5]));
    } else if (f[1] == "tag" && f[3] == "commit") {
      r.commit_hash = std::string(f[4]);
      r.timestamp = std::stoll(std::string(f[6]));
    } else {
      continue;
    }
    releases.push_back(std::move(r));
  }
  std::sort(releases.begin(), releases.end(), [](const Release& a, const Release& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.tag < b.tag;
  });
  return releases;
}

bool has_license_file(const GitRepository& repo) {
  if (!repo.has_commits()) return false;
  const std::string out = repo.git({"ls-tree", "--name-only", "HEAD"});
  for (auto l : split(out, '\n')) {
    const std::string name = lower(l);
    if (starts_with(name, "license") || starts_with(name, "licence") ||
        starts_with(name, "copying") || starts_with(name, "unlicense"))
      return true;
  }
  return false;
}

SanityReport sanity_check(std::span<const LabeledCommit> labeled, std::span<const Release> releases,
                          bool has_license) {
  SanityReport report;
  std::size_t defective = 0;
  Timestamp first = 0, last = 0;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    defective += labeled[i].defective ? 1 : 0;
    if (i == 0 || labeled[i].timestamp < first) first = labeled[i].timestamp;
    if (i == 0 || labeled[i].timestamp > last) last = labeled[i].timestamp;
  }
  const std::size_t clean = labeled.size() - defective;
  const auto violate = [&](std::string_view rule) { report.violations.emplace_back(rule); };

  if (labeled.empty() || static_cast<double>(defective) < 0.01 * static_cast<double>(labeled.size()))
    violate(sanity_rule::defective_ratio);
  if (releases.size() < 2) violate(sanity_rule::releases);
  if (labeled.empty() || last - first < kSecondsPerYear) violate(sanity_rule::activity);
  if (!has_license) violate(sanity_rule::license);
  if (defective < 5 || clean < 5) violate(sanity_rule::class_counts);
  report.accepted = report.violations.empty();
  return report;
}

void write_releases_csv(const std::filesystem::path& file, std::span<const Release> releases) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << "tag,hash,timestamp\n";
  for (const auto& r : releases) {
    if (r.tag.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : r.tag) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
      out << q << '"';
    } else {
      out << r.tag;
    }
    out << ',' << r.commit_hash << ',' << r.timestamp << '\n';
  }
}

std::vector<Release> read_releases_csv(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot read " + file.string());
  std::string line;
  std::getline(in, line);
  if (line != "tag,hash,timestamp") throw DataError("unexpected releases header in " + file.string());
  std::vector<Release> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // Tag may be quoted; hash and timestamp never contain commas.
    const auto last = line.rfind(',');
    const auto mid = line.rfind(',', last - 1);
    if (last == std::string::npos || mid == std::string::npos)
      throw DataError("bad releases row: " + line);
    Release r;
    std::string tag = line.substr(0, mid);
    if (tag.size() >= 2 && tag.front() == '"' && tag.back() == '"') {
      std::string t;
      for (std::size_t i = 1; i + 1 < tag.size(); ++i) {
        t += tag[i];
        if (tag[i] == '"') ++i;
      }
      tag = t;
    }
    r.tag = tag;
    r.commit_hash = line.substr(mid + 1, last - mid - 1);
    r.timestamp = std::stoll(line.substr(last + 1));
    out.push_back(std::move(r));
  }
  return out;
}

std::string to_ndjson(std::span<const RawCommit> commits) {
  std::string out;
  for (const auto& c : commits) {
    nlohmann::json j;
    j["hash"] = c.hash;
    j["parents"] = c.parent_hashes;
    j["author"] = c.author;
    j["timestamp"] = c.timestamp;
    j["message"] = c.message;
    auto& changes = j["changes"] = nlohmann::json::array();
    for (const auto& ch : c.changes) {
      nlohmann::json deleted = nlohmann::json::array();
      for (const auto& d : ch.deleted_lines) deleted.push_back({d.line, d.whitespace_only});
      changes.push_back({{"path", ch.path},
                         {"old_path", ch.old_path},
                         {"lines_added", ch.lines_added},
                         {"lines_deleted", ch.lines_deleted},
                         {"added_lines", ch.added_line_numbers},
                         {"deleted_lines", deleted},
                         {"loc_before", ch.loc_before},
                         {"is_source", ch.is_source},
                         {"is_binary", ch.is_binary}});
    }
    out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

std::vector<RawCommit> from_ndjson(std::string_view text) {
  std::vector<RawCommit> out;
  for (auto line : split(text, '\n')) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    RawCommit c;
    c.hash = j.at("hash");
    c.parent_hashes = j.at("parents").get<std::vector<std::string>>();
    c.author = j.at("author");
    c.timestamp = j.at("timestamp");
    c.message = j.at("message");
    for (const auto& ch : j.at("changes")) {
      FileChange f;
      f.path = ch.at("path");
      f.old_path = ch.at("old_path");
      f.lines_added = ch.at("lines_added");
      f.lines_deleted = ch.at("lines_deleted");
      f.added_line_numbers = ch.at("added_lines").get<std::vector<int>>();
      for (const auto& d : ch.at("deleted_lines")) f.deleted_lines.push_back({d.at(0), d.at(1)});
      f.loc_before = ch.at("loc_before");
      f.is_source = ch.at("is_source");
      f.is_binary = ch.at("is_binary");
      c.changes.push_back(std::move(f));
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace earlybird
