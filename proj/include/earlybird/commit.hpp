#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace earlybird {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

struct DeletedLine {
  int line = 0;  // 1-based index in the parent's version of the file
  bool whitespace_only = false;
};

struct FileChange {
  std::string path;
  std::string old_path;  // path in the parent tree; empty for added files
  int lines_added = 0;
  int lines_deleted = 0;
  std::vector<int> added_line_numbers;  // 1-based, in the new version
  std::vector<DeletedLine> deleted_lines;
  int loc_before = 0;
  bool is_source = false;
  bool is_binary = false;
};

struct RawCommit {
  std::string hash;
  std::vector<std::string> parent_hashes;
  std::string author;
  Timestamp timestamp = 0;  // committer date
  std::string message;
  std::vector<FileChange> changes;

  bool is_merge() const { return parent_hashes.size() > 1; }
};

struct Release {
  std::string tag;
  std::string commit_hash;
  Timestamp timestamp = 0;

  bool operator==(const Release&) const = default;
};

struct CommitFeatures {
  double ns = 0;
  double nd = 0;
  double nf = 0;
  double entropy = 0;
  double la = 0;
  double ld = 0;
  double lt = 0;
  bool fix = false;
  double ndev = 0;
  double age = 0;
  double nuc = 0;
  double exp = 0;
  double rexp = 0;
  double sexp = 0;

  bool operator==(const CommitFeatures&) const = default;
};

struct LabeledCommit {
  std::string hash;
  Timestamp timestamp = 0;
  CommitFeatures features;
  bool defective = false;
  std::vector<std::string> induced_by_fixes;
  std::string release;  // tag of the release window the commit falls in
};

}  // namespace earlybird
