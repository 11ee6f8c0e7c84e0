#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "earlybird/feature_matrix.hpp"
#include "earlybird/learners.hpp"
#include "earlybird/metrics.hpp"

namespace earlybird::dodge {

struct DodgeConfig {
  int n1 = 12;
  int n2 = 30;
  double epsilon = 0.2;
  std::string goal = "d2h";
  metrics::Direction direction = metrics::Direction::minimize;
  /// Share of the training rows used for fitting; the rest is the tune half.
  double fit_fraction = 0.5;

  void validate() const;
};

/// One leaf of the option tree: a preprocessor and a learner with settings.
struct DodgeOption {
  learners::PreprocessorSpec preprocessor;
  learners::ClassifierSpec learner;

  std::string describe() const;
  bool operator==(const DodgeOption&) const = default;
};

struct Evaluation {
  DodgeOption option;
  double score = 0;
};

struct DodgeResult {
  DodgeOption best;
  double best_score = 0;  // goal on the tune half
  learners::TrainedModel model;  // best option refit on all training rows
  std::vector<Evaluation> history;  // in evaluation order
};

/// Learner families of the option tree.
std::span<const learners::Algorithm> option_learners();
std::span<const learners::Preprocessor> option_preprocessors();

/// Draws settings from the documented ranges.
learners::PreprocessorSpec random_preprocessor(learners::Preprocessor kind, std::mt19937_64& rng);
learners::ClassifierSpec random_learner(learners::Algorithm algorithm, std::mt19937_64& rng);
DodgeOption random_option(std::mt19937_64& rng);

/// -1 if `score` lies within epsilon of any earlier score, +1 otherwise.
int weight_delta(double score, std::span<const double> seen, double epsilon);

/// Stratified split into (fit, tune). Each side keeps at least one row of
/// each class when the input has two.
std::pair<FeatureMatrix, FeatureMatrix> split_fit_tune(const FeatureMatrix& train, double fit_fraction,
                                                       std::uint64_t seed);

/// Goal value of `option` trained on `fit` and scored on `tune`. Options that
/// fail to train score the worst possible value for the direction.
double score_option(const DodgeOption& option, const FeatureMatrix& fit, const FeatureMatrix& tune,
                    const DodgeConfig& config, std::uint64_t seed);

/// Runs exactly n1 + n2 evaluations.
DodgeResult dodge(const FeatureMatrix& train, const DodgeConfig& config, std::uint64_t seed);

/// Baseline: `budget` uniformly random options on the same split, best kept.
DodgeResult random_search(const FeatureMatrix& train, int budget, const DodgeConfig& config,
                          std::uint64_t seed);

}  // namespace earlybird::dodge
