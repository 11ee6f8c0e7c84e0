#pragma once

// Random hand-built projects for the sampling properties.

#include <algorithm>
#include <random>
#include <set>
#include <string>

#include "earlybird/dataset.hpp"

namespace gen {

struct ProjectShape {
  std::size_t min_commits = 150;
  std::size_t max_commits = 400;
  std::size_t min_releases = 2;
  std::size_t max_releases = 8;
};

inline earlybird::Project random_project(std::mt19937_64& rng, const std::string& name, ProjectShape shape = {}) {
  using earlybird::Timestamp;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> size(shape.min_commits, shape.max_commits);
  std::uniform_int_distribution<int> gap(0, 3);
  std::uniform_int_distribution<int> small(0, 40);
  earlybird::Project p;
  p.name = name;
  const std::size_t n = size(rng);
  const double rate = 0.05 + 0.45 * unit(rng);
  Timestamp t = 1'600'000'000;
  for (std::size_t i = 0; i < n; ++i) {
    // Zero gaps give commits that share a timestamp.
    t += gap(rng) * 3600;
    earlybird::LabeledCommit c;
    c.hash = name + "-" + std::to_string(i);
    c.timestamp = t;
    c.defective = unit(rng) < rate;
    auto& f = c.features;
    f.la = small(rng) + (c.defective ? 20 : 0);
    f.ld = small(rng);
    f.lt = 10 + 5 * small(rng);
    f.ns = 1 + small(rng) % 3;
    f.nd = 1 + small(rng) % 4;
    f.nf = 1 + small(rng) % 6;
    f.entropy = unit(rng);
    f.fix = unit(rng) < 0.2;
    f.ndev = 1 + small(rng) % 5;
    f.age = small(rng);
    f.nuc = 1 + small(rng) % 5;
    f.exp = small(rng) * 3;
    f.rexp = unit(rng) * 5;
    f.sexp = small(rng);
    p.commits.push_back(c);
  }
  std::uniform_int_distribution<std::size_t> nrel(shape.min_releases, shape.max_releases);
  std::uniform_int_distribution<std::size_t> at(0, n - 1);
  std::set<std::size_t> points;
  const std::size_t want = nrel(rng);
  while (points.size() < want) points.insert(at(rng));
  std::set<Timestamp> seen;
  for (std::size_t i : points) {
    if (!seen.insert(p.commits[i].timestamp).second) continue;
    p.releases.push_back({"v" + std::to_string(p.releases.size() + 1), p.commits[i].hash, p.commits[i].timestamp});
  }
  return p;
}

}  // namespace gen
