#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "earlybird/feature_matrix.hpp"

namespace earlybird::learners {

using Rows = std::vector<std::vector<double>>;

enum class Algorithm {
  logistic_regression,
  naive_bayes,
  knn,
  decision_tree,
  random_forest,
  linear_svm,
  multinomial_nb,  // DODGE option tree only
  tlel,
};

std::string_view to_string(Algorithm a);
Algorithm algorithm_from_string(std::string_view name);

using HyperValue = std::variant<double, std::string>;
using HyperParams = std::map<std::string, HyperValue>;

struct ClassifierSpec {
  Algorithm algorithm = Algorithm::logistic_regression;
  HyperParams hyperparams;

  double num(const std::string& key, double fallback) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  /// Short display name, e.g. "LR", "RF", "KNN".
  std::string display_name() const;

  bool operator==(const ClassifierSpec&) const = default;
};

/// Library defaults for each algorithm (knn uses 5 neighbours; random forest
/// 100 trees with sqrt feature sampling; CART with gini, unbounded depth).
ClassifierSpec default_spec(Algorithm a);

nlohmann::json spec_to_json(const ClassifierSpec& spec);
ClassifierSpec spec_from_json(const nlohmann::json& j);

/// A fitted binary classifier over dense rows.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual void fit(const Rows& x, std::span<const int> y, std::uint64_t seed) = 0;
  /// P(defective | row), in [0, 1].
  virtual double predict_proba(std::span<const double> row) const = 0;
  virtual nlohmann::json to_json() const = 0;
  virtual void from_json(const nlohmann::json& j) = 0;
};

std::unique_ptr<Classifier> make_classifier(const ClassifierSpec& spec);

/// Column-wise or row-wise data transform fitted on training rows.
class Transformer {
 public:
  virtual ~Transformer() = default;
  virtual void fit(const Rows& x, std::uint64_t seed) = 0;
  virtual std::vector<double> transform(std::span<const double> row) const = 0;
  virtual std::string name() const = 0;
  virtual nlohmann::json to_json() const = 0;
  virtual void from_json(const nlohmann::json& j) = 0;
};

/// Preprocessor kinds of the DODGE option tree.
enum class Preprocessor {
  standard,
  minmax,
  maxabs,
  robust,
  quantile,
  normalizer,
  binarizer,
};

std::string_view to_string(Preprocessor p);
Preprocessor preprocessor_from_string(std::string_view name);

struct PreprocessorSpec {
  Preprocessor kind = Preprocessor::standard;
  HyperParams params;

  double num(const std::string& key, double fallback) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  bool operator==(const PreprocessorSpec&) const = default;
};

std::unique_ptr<Transformer> make_transformer(const PreprocessorSpec& spec);

struct TrainedModel {
  ClassifierSpec spec;
  std::vector<std::string> feature_names;
  std::optional<PreprocessorSpec> preprocessor_spec;
  std::shared_ptr<const Transformer> preprocessor;  // null when none
  std::shared_ptr<const Classifier> classifier;
};

/// Fits `spec` on `train`. Rows are put in a canonical order and then
/// shuffled with `seed`, so the result does not depend on input row order.
/// Throws DataError("degenerate training set") unless both classes appear.
TrainedModel train(const ClassifierSpec& spec, const FeatureMatrix& train, std::uint64_t seed,
                   const std::optional<PreprocessorSpec>& preprocessor = std::nullopt);

struct Prediction {
  std::vector<double> probabilities;
  std::vector<int> labels;  // probability >= 0.5
};

/// Test columns must equal model.feature_names (same names, same order).
Prediction predict(const TrainedModel& model, const FeatureMatrix& test);

/// Defective iff la > median(la); no training data involved.
std::vector<int> manual_down(const FeatureMatrix& test);
/// Defective iff la <= median(la); elementwise complement of manual_down.
std::vector<int> manual_up(const FeatureMatrix& test);
/// Probabilities for the manual baselines: rank of la scaled into [0, 1]
/// (descending for ManualUp), so IFA/AUC/Brier are defined.
Prediction manual_predict(const FeatureMatrix& test, bool up);

struct TlelConfig {
  int inner_forests = 10;
  int trees_per_forest = 10;
  /// Majority rows kept per forest: minority + ratio * (majority - minority).
  /// 1 keeps everything; values near 0 approach a balanced undersample.
  double undersample_ratio = 0.1;
};

/// Bagged random forests over random undersamples; label by majority vote,
/// probability = fraction of forests voting defective.
TrainedModel train_tlel(const FeatureMatrix& train, const TlelConfig& config, std::uint64_t seed);

inline constexpr int kModelFormatVersion = 1;
nlohmann::json save_model(const TrainedModel& model);
TrainedModel load_model(const nlohmann::json& j);

}  // namespace earlybird::learners
