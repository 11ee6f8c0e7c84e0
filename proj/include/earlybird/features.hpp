#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "earlybird/commit.hpp"

namespace earlybird::features {

struct Diffusion {
  double ns = 0, nd = 0, nf = 0, entropy = 0;
};
struct Size {
  double la = 0, ld = 0, lt = 0;
};
struct History {
  double ndev = 0, age = 0, nuc = 0;
};
struct Experience {
  double exp = 0, rexp = 0, sexp = 0;
};

/// Subsystem = first path component; files at the root belong to "".
std::string subsystem_of(std::string_view path);
std::string directory_of(std::string_view path);

Diffusion compute_diffusion(const RawCommit& commit);
Size compute_size(const RawCommit& commit);

/// `prior` must hold only commits that precede `commit`, oldest first.
History compute_history(const RawCommit& commit, std::span<const RawCommit> prior);
Experience compute_experience(const RawCommit& commit, std::span<const RawCommit> prior);

/// Case-insensitive whole-word match against the keyword set. A keyword also
/// matches its plain inflections (fix -> fixes, fixed, fixing).
bool detect_fix(std::string_view message, std::span<const std::string> keywords);

/// Features for every commit of a merge-free sequence (oldest first).
/// Equivalent to calling the compute_* functions with each commit's prefix,
/// but indexed so the cost stays near-linear.
std::vector<CommitFeatures> compute_all(std::span<const RawCommit> commits,
                                        std::span<const std::string> keywords);

}  // namespace earlybird::features
