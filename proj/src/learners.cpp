#include "earlybird/learners.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "earlybird/error.hpp"

namespace earlybird::learners {

using nlohmann::json;

namespace {

struct AlgorithmName {
  Algorithm algorithm;
  std::string_view name;
  std::string_view display;
};

constexpr std::array<AlgorithmName, 8> kAlgorithms{{
    {Algorithm::logistic_regression, "logistic_regression", "LR"},
    {Algorithm::naive_bayes, "naive_bayes", "NB"},
    {Algorithm::knn, "knn", "KNN"},
    {Algorithm::decision_tree, "decision_tree", "DT"},
    {Algorithm::random_forest, "random_forest", "RF"},
    {Algorithm::linear_svm, "linear_svm", "SVM"},
    {Algorithm::multinomial_nb, "multinomial_nb", "MNB"},
    {Algorithm::tlel, "tlel", "TLEL"},
}};

constexpr std::array<std::pair<Preprocessor, std::string_view>, 7> kPreprocessors{{
    {Preprocessor::standard, "standard"},
    {Preprocessor::minmax, "minmax"},
    {Preprocessor::maxabs, "maxabs"},
    {Preprocessor::robust, "robust"},
    {Preprocessor::quantile, "quantile"},
    {Preprocessor::normalizer, "normalizer"},
    {Preprocessor::binarizer, "binarizer"},
}};

double lookup_num(const HyperParams& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (const auto* d = std::get_if<double>(&it->second)) return *d;
  throw ConfigError("hyperparameter " + key + " is not numeric");
}

std::string lookup_str(const HyperParams& p, const std::string& key, const std::string& fallback) {
  const auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  throw ConfigError("hyperparameter " + key + " is not a string");
}

json params_to_json(const HyperParams& p) {
  json j = json::object();
  for (const auto& [k, v] : p) std::visit([&](const auto& x) { j[k] = x; }, v);
  return j;
}

HyperParams params_from_json(const json& j) {
  HyperParams p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw ConfigError("hyperparameters must be an object");
  for (const auto& [k, v] : j.items()) {
    if (v.is_number()) p[k] = v.get<double>();
    else if (v.is_string()) p[k] = v.get<std::string>();
    else throw ConfigError("hyperparameter " + k + " must be a number or string");
  }
  return p;
}

Rows transformed_rows(const TrainedModel& model, const FeatureMatrix& m) {
  if (!model.preprocessor) return m.rows;
  Rows out;
  out.reserve(m.size());
  for (const auto& r : m.rows) out.push_back(model.preprocessor->transform(r));
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string_view to_string(Algorithm a) {
  for (const auto& e : kAlgorithms)
    if (e.algorithm == a) return e.name;
  throw ConfigError("unknown algorithm");
}

Algorithm algorithm_from_string(std::string_view name) {
  for (const auto& e : kAlgorithms)
    if (e.name == name || e.display == name) return e.algorithm;
  throw ConfigError("unknown algorithm: " + std::string(name));
}

std::string_view to_string(Preprocessor p) {
  for (const auto& [k, n] : kPreprocessors)
    if (k == p) return n;
  throw ConfigError("unknown preprocessor");
}

Preprocessor preprocessor_from_string(std::string_view name) {
  for (const auto& [k, n] : kPreprocessors)
    if (n == name) return k;
  throw ConfigError("unknown preprocessor: " + std::string(name));
}

double ClassifierSpec::num(const std::string& key, double fallback) const {
  return lookup_num(hyperparams, key, fallback);
}
std::string ClassifierSpec::str(const std::string& key, const std::string& fallback) const {
  return lookup_str(hyperparams, key, fallback);
}
std::string ClassifierSpec::display_name() const {
  for (const auto& e : kAlgorithms)
    if (e.algorithm == algorithm) return std::string(e.display);
  return "?";
}

double PreprocessorSpec::num(const std::string& key, double fallback) const {
  return lookup_num(params, key, fallback);
}
std::string PreprocessorSpec::str(const std::string& key, const std::string& fallback) const {
  return lookup_str(params, key, fallback);
}

ClassifierSpec default_spec(Algorithm a) {
  ClassifierSpec s{a, {}};
  switch (a) {
    case Algorithm::logistic_regression:
      s.hyperparams = {{"penalty", std::string("l2")}, {"C", 1.0}, {"tol", 1e-4}};
      break;
    case Algorithm::knn:
      s.hyperparams = {{"n_neighbors", 5.0}, {"weights", std::string("uniform")}, {"metric", std::string("minkowski")},
                       {"p", 2.0}};
      break;
    case Algorithm::decision_tree:
      s.hyperparams = {{"criterion", std::string("gini")}, {"splitter", std::string("best")},
                       {"min_samples_split", 2.0}};
      break;
    case Algorithm::random_forest:
      s.hyperparams = {{"n_estimators", 100.0}, {"criterion", std::string("gini")}, {"min_samples_split", 2.0}};
      break;
    case Algorithm::linear_svm: s.hyperparams = {{"alpha", 1e-4}, {"epochs", 50.0}}; break;
    case Algorithm::multinomial_nb: s.hyperparams = {{"alpha", 1.0}}; break;
    case Algorithm::tlel: {
      const TlelConfig c;
      s.hyperparams = {{"inner_forests", static_cast<double>(c.inner_forests)},
                       {"trees_per_forest", static_cast<double>(c.trees_per_forest)},
                       {"undersample_ratio", c.undersample_ratio}};
      break;
    }
    case Algorithm::naive_bayes: break;
  }
  return s;
}

json spec_to_json(const ClassifierSpec& spec) {
  return {{"algorithm", to_string(spec.algorithm)}, {"hyperparams", params_to_json(spec.hyperparams)}};
}

ClassifierSpec spec_from_json(const json& j) {
  if (j.is_string()) return default_spec(algorithm_from_string(j.get<std::string>()));
  ClassifierSpec s = default_spec(algorithm_from_string(j.at("algorithm").get<std::string>()));
  if (j.contains("hyperparams"))
    for (auto& [k, v] : params_from_json(j.at("hyperparams"))) s.hyperparams[k] = v;
  return s;
}

TrainedModel train(const ClassifierSpec& spec, const FeatureMatrix& data, std::uint64_t seed,
                   const std::optional<PreprocessorSpec>& preprocessor) {
  if (data.size() < 2 || data.count_label(1) == 0 || data.count_label(0) == 0)
    throw DataError("degenerate training set");

  // Canonical order, then a seeded shuffle: the fit never sees caller order.
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (data.rows[a] != data.rows[b]) return data.rows[a] < data.rows[b];
    return data.labels[a] < data.labels[b];
  });
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  Rows x;
  std::vector<int> y;
  x.reserve(order.size());
  for (std::size_t i : order) {
    x.push_back(data.rows[i]);
    y.push_back(data.labels[i] != 0 ? 1 : 0);
  }

  TrainedModel model;
  model.spec = spec;
  model.feature_names = data.columns;
  model.preprocessor_spec = preprocessor;
  if (preprocessor) {
    auto t = make_transformer(*preprocessor);
    t->fit(x, rng());
    for (auto& r : x) r = t->transform(r);
    model.preprocessor = std::move(t);
  }
  auto c = make_classifier(spec);
  c->fit(x, y, rng());
  model.classifier = std::move(c);
  return model;
}

Prediction predict(const TrainedModel& model, const FeatureMatrix& test) {
  if (test.columns != model.feature_names) throw DataError("predict: test columns do not match the model");
  Prediction p;
  p.probabilities.reserve(test.size());
  for (const auto& r : transformed_rows(model, test)) {
    double v = model.classifier->predict_proba(r);
    v = std::isnan(v) ? 0.5 : std::clamp(v, 0.0, 1.0);
    p.probabilities.push_back(v);
    p.labels.push_back(v >= 0.5 ? 1 : 0);
  }
  return p;
}

std::vector<int> manual_down(const FeatureMatrix& test) {
  if (test.empty()) return {};
  const auto la = test.column(test.require_column("la"));
  const double m = median(la);
  std::vector<int> out;
  for (double v : la) out.push_back(v > m ? 1 : 0);
  return out;
}

std::vector<int> manual_up(const FeatureMatrix& test) {
  auto out = manual_down(test);
  for (int& v : out) v = 1 - v;
  return out;
}

Prediction manual_predict(const FeatureMatrix& test, bool up) {
  Prediction p;
  p.labels = up ? manual_up(test) : manual_down(test);
  if (test.empty()) return p;
  const auto la = test.column(test.require_column("la"));
  const double n = static_cast<double>(la.size());
  for (double v : la) {
    // Average rank of v in ascending order, scaled to [0, 1].
    double less = 0, equal = 0;
    for (double w : la) {
      less += w < v ? 1 : 0;
      equal += w == v ? 1 : 0;
    }
    const double rank = n > 1 ? (less + 0.5 * (equal - 1)) / (n - 1) : 0.5;
    p.probabilities.push_back(up ? 1.0 - rank : rank);
  }
  return p;
}

TrainedModel train_tlel(const FeatureMatrix& data, const TlelConfig& config, std::uint64_t seed) {
  if (config.inner_forests < 1 || config.trees_per_forest < 1)
    throw ConfigError("tlel: forest and tree counts must be >= 1");
  ClassifierSpec spec{Algorithm::tlel,
                      {{"inner_forests", static_cast<double>(config.inner_forests)},
                       {"trees_per_forest", static_cast<double>(config.trees_per_forest)},
                       {"undersample_ratio", config.undersample_ratio}}};
  return train(spec, data, seed);
}

json save_model(const TrainedModel& model) {
  json j{{"format_version", kModelFormatVersion},
         {"spec", spec_to_json(model.spec)},
         {"feature_names", model.feature_names},
         {"classifier", model.classifier->to_json()}};
  if (model.preprocessor) {
    j["preprocessor"] = {{"kind", to_string(model.preprocessor_spec->kind)},
                         {"params", params_to_json(model.preprocessor_spec->params)},
                         {"state", model.preprocessor->to_json()}};
  } else {
    j["preprocessor"] = nullptr;
  }
  return j;
}

TrainedModel load_model(const json& j) {
  if (j.value("format_version", -1) != kModelFormatVersion)
    throw DataError("load_model: unsupported format_version");
  TrainedModel m;
  m.spec = spec_from_json(j.at("spec"));
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  const auto& pj = j.at("preprocessor");
  if (!pj.is_null()) {
    PreprocessorSpec ps{preprocessor_from_string(pj.at("kind").get<std::string>()), params_from_json(pj.at("params"))};
    auto t = make_transformer(ps);
    t->from_json(pj.at("state"));
    m.preprocessor_spec = ps;
    m.preprocessor = std::move(t);
  }
  auto c = make_classifier(m.spec);
  c->from_json(j.at("classifier"));
  m.classifier = std::move(c);
  return m;
}

}  // namespace earlybird::learners
