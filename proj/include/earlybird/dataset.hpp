#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "earlybird/commit.hpp"
#include "earlybird/feature_matrix.hpp"

namespace earlybird {

/// Column order of the labeled dataset CSV.
const std::vector<std::string>& dataset_csv_header();

void write_dataset_csv(const std::filesystem::path& file, std::span<const LabeledCommit> commits);
std::string dataset_csv(std::span<const LabeledCommit> commits);
std::vector<LabeledCommit> read_dataset_csv(const std::filesystem::path& file);

/// A mined, labeled project. Row access goes through read(), which counts
/// every commit handed out so tests can audit how much history a policy
/// touched.
struct Project {
  std::string name;
  std::vector<LabeledCommit> commits;  // oldest first, merges removed
  std::vector<Release> releases;       // ascending timestamp

  std::size_t size() const { return commits.size(); }

  /// Raw-feature matrix of commits [begin, end); counts end - begin reads.
  FeatureMatrix read(std::size_t begin, std::size_t end) const;
  FeatureMatrix read(std::span<const std::size_t> indices) const;

  std::size_t read_count() const { return reads_->load(); }
  void reset_read_count() const { reads_->store(0); }

 private:
  std::shared_ptr<std::atomic<std::size_t>> reads_ = std::make_shared<std::atomic<std::size_t>>(0);
};

/// Loads `<name>.csv` plus the sibling `<name>.releases.csv`.
Project load_project(const std::filesystem::path& dataset_csv);
std::filesystem::path releases_path_for(const std::filesystem::path& dataset_csv);

/// Defect-density profile over the commit timeline.
struct DensityReport {
  std::vector<double> decile_percent;  // share of all defective commits per decile, in %
  std::size_t window = 150;
  std::size_t defects_before_window = 0;
  std::size_t defects_after_window = 0;
  double density_before = 0;  // defective fraction of commits [0, window)
  double density_after = 0;   // defective fraction of commits [window, n)
  double ratio = 0;           // density_before / density_after (inf when after is 0)
  std::string sparkline;
};

DensityReport density_profile(std::span<const LabeledCommit> commits, std::size_t window = 150);
std::string density_csv(const DensityReport& report);
std::string density_text(const DensityReport& report);

}  // namespace earlybird
