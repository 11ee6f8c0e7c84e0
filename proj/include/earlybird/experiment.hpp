#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "earlybird/dataset.hpp"
#include "earlybird/dodge.hpp"
#include "earlybird/git_miner.hpp"
#include "earlybird/labeler.hpp"
#include "earlybird/learners.hpp"
#include "earlybird/metrics.hpp"
#include "earlybird/sampling.hpp"
#include "earlybird/stats.hpp"

namespace earlybird::experiment {

/// A learner column of the experiment grid: a plain classifier or the DODGE
/// optimizer.
struct LearnerChoice {
  enum class Kind { classifier, dodge };
  Kind kind = Kind::classifier;
  learners::ClassifierSpec spec;
  dodge::DodgeConfig dodge;

  std::string name() const;
};

LearnerChoice learner_from_json(const nlohmann::json& j);

struct ExperimentConfig {
  std::vector<std::string> projects;  // dataset CSVs or repository paths
  std::vector<sampling::SamplingPolicy> policies;
  std::vector<LearnerChoice> classifiers;
  std::vector<std::string> metrics;  // empty = all, report order
  std::uint64_t seed = 1;
  std::size_t optimizer_max_commits = 957;

  void validate() const;
};

/// Throws ConfigError on unknown keys, bad values or empty lists. Relative
/// project paths resolve against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& file);
nlohmann::json config_to_json(const ExperimentConfig& config);
/// Stable hex digest of the canonical config JSON.
std::string config_hash(const ExperimentConfig& config);

struct MinedProject {
  Project project;
  SanityReport sanity;
  labeler::TraceStats trace;
  std::size_t merges_removed = 0;
};

/// mine -> label -> assign releases -> sanity check, for one repository.
MinedProject mine_project(const std::filesystem::path& repo_path, const MiningConfig& config);

struct ResultRow {
  std::string project;
  std::string release;
  std::string policy;
  std::string classifier;
  metrics::EvalResult result;
  std::size_t train_rows = 0;

  std::string treatment() const { return policy + "/" + classifier; }
};

struct FailureRow {
  std::string project;
  std::string policy;
  std::string classifier;
  std::string message;
};

struct ResultStore {
  std::vector<ResultRow> rows;
  std::vector<FailureRow> failures;
  /// Models fitted per (project, policy/classifier) key.
  std::map<std::string, std::size_t> trainings;
  std::string config_hash;
  std::uint64_t seed = 0;

  bool operator==(const ResultStore& o) const;
};

std::string results_csv(const ResultStore& store);
ResultStore parse_results_csv(const std::string& text);

/// Writes results.csv, failures.csv and manifest.json into `dir`.
void save_store(const ResultStore& store, const ExperimentConfig& config, const std::filesystem::path& dir);
ResultStore load_store(const std::filesystem::path& dir);
/// True if `dir` holds a completed run of this exact config and seed.
bool store_matches(const std::filesystem::path& dir, const ExperimentConfig& config);

/// Loads (or mines) every project named in the config.
std::vector<Project> load_projects(const ExperimentConfig& config);

/// Runs the whole grid on `jobs` worker threads. Results are ordered by
/// (project, policy, classifier, release) regardless of scheduling.
ResultStore run_experiment(const ExperimentConfig& config, const std::vector<Project>& projects, int jobs = 1);

/// Per-treatment populations of per-release scores for each metric.
std::vector<stats::Population> populations(const ResultStore& store, const std::vector<std::string>& metrics = {});

}  // namespace earlybird::experiment
