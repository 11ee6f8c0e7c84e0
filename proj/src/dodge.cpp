#include "earlybird/dodge.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

#include "earlybird/error.hpp"

namespace earlybird::dodge {

using learners::Algorithm;
using learners::ClassifierSpec;
using learners::HyperParams;
using learners::Preprocessor;
using learners::PreprocessorSpec;

namespace {

struct NumParam {
  const char* name;
  double lo;
  double hi;
  bool integer;
};

struct CatParam {
  const char* name;
  std::vector<std::string> values;
};

struct NodeSchema {
  std::vector<NumParam> numeric;
  std::vector<CatParam> categorical;
};

constexpr std::array<Algorithm, 5> kLearners{Algorithm::decision_tree, Algorithm::random_forest,
                                             Algorithm::logistic_regression, Algorithm::multinomial_nb,
                                             Algorithm::knn};
constexpr std::array<Preprocessor, 7> kPreprocessors{Preprocessor::standard, Preprocessor::minmax,
                                                     Preprocessor::maxabs,   Preprocessor::robust,
                                                     Preprocessor::quantile, Preprocessor::normalizer,
                                                     Preprocessor::binarizer};

const NodeSchema& schema(Algorithm a) {
  static const NodeSchema dt{{{"min_samples_split", 0.0, 1.0, false}},
                             {{"criterion", {"gini", "entropy"}}, {"splitter", {"best", "random"}}}};
  static const NodeSchema rf{{{"n_estimators", 50, 150, true}, {"min_samples_split", 0.0, 1.0, false}},
                             {{"criterion", {"gini", "entropy"}}}};
  static const NodeSchema lr{{{"tol", 0.0, 0.1, false}, {"C", 1, 500, true}}, {{"penalty", {"l1", "l2"}}}};
  static const NodeSchema mnb{{{"alpha", 0.0, 0.1, false}}, {}};
  static const NodeSchema knn{{{"n_neighbors", 2, 25, true}, {"p", 1, 15, true}},
                              {{"weights", {"uniform", "distance"}}, {"metric", {"minkowski", "chebyshev"}}}};
  switch (a) {
    case Algorithm::decision_tree: return dt;
    case Algorithm::random_forest: return rf;
    case Algorithm::logistic_regression: return lr;
    case Algorithm::multinomial_nb: return mnb;
    case Algorithm::knn: return knn;
    default: throw ConfigError("algorithm is not part of the option tree");
  }
}

const NodeSchema& schema(Preprocessor p) {
  static const NodeSchema none{};
  static const NodeSchema robust{{{"q_lo", 0, 50, true}, {"q_hi", 51, 100, true}}, {}};
  static const NodeSchema quantile{{{"n_quantiles", 100, 1000, true}, {"subsample", 1000, 100000, true}},
                                   {{"output_distribution", {"normal", "uniform"}}}};
  static const NodeSchema normalizer{{}, {{"norm", {"l1", "l2", "max"}}}};
  static const NodeSchema binarizer{{{"threshold", 0.0, 100.0, false}}, {}};
  switch (p) {
    case Preprocessor::robust: return robust;
    case Preprocessor::quantile: return quantile;
    case Preprocessor::normalizer: return normalizer;
    case Preprocessor::binarizer: return binarizer;
    default: return none;
  }
}

double draw(const NumParam& p, std::mt19937_64& rng) {
  if (p.integer) {
    std::uniform_int_distribution<long long> d(static_cast<long long>(p.lo), static_cast<long long>(p.hi));
    return static_cast<double>(d(rng));
  }
  std::uniform_real_distribution<double> d(p.lo, p.hi);
  return d(rng);
}

HyperParams random_params(const NodeSchema& s, std::mt19937_64& rng) {
  HyperParams h;
  for (const auto& p : s.numeric) h[p.name] = draw(p, rng);
  for (const auto& c : s.categorical) {
    std::uniform_int_distribution<std::size_t> d(0, c.values.size() - 1);
    h[c.name] = c.values[d(rng)];
  }
  return h;
}

std::string node_key(Preprocessor p) { return "pre:" + std::string(learners::to_string(p)); }
std::string node_key(Algorithm a) { return "clf:" + std::string(learners::to_string(a)); }

// Every option-tree node an option passes through.
std::vector<std::string> option_nodes(const DodgeOption& o) {
  std::vector<std::string> keys{node_key(o.preprocessor.kind), node_key(o.learner.algorithm)};
  for (const auto& c : schema(o.preprocessor.kind).categorical)
    keys.push_back(keys[0] + ":" + c.name + "=" + o.preprocessor.str(c.name, ""));
  for (const auto& c : schema(o.learner.algorithm).categorical)
    keys.push_back(keys[1] + ":" + c.name + "=" + o.learner.str(c.name, ""));
  return keys;
}

// Lower is better, whatever the configured direction.
double loss(double score, const DodgeConfig& c) {
  return c.direction == metrics::Direction::minimize ? score : -score;
}

double worst_score(const DodgeConfig& c) {
  return c.direction == metrics::Direction::minimize ? std::numeric_limits<double>::infinity()
                                                     : -std::numeric_limits<double>::infinity();
}

// Best and worst numeric settings seen at one node.
struct NodeExtremes {
  double best_loss = std::numeric_limits<double>::infinity();
  double worst_loss = -std::numeric_limits<double>::infinity();
  HyperParams best;
  HyperParams worst;

  void observe(const HyperParams& p, double l) {
    if (l < best_loss) {
      best_loss = l;
      best = p;
    }
    if (l > worst_loss) {
      worst_loss = l;
      worst = p;
    }
  }
};

class Search {
 public:
  Search(const FeatureMatrix& train, const DodgeConfig& config, std::uint64_t seed)
      : config_(config), rng_(seed) {
    config.validate();
    auto halves = split_fit_tune(train, config.fit_fraction, rng_());
    fit_ = std::move(halves.first);
    tune_ = std::move(halves.second);
    eval_seed_ = rng_();
  }

  std::mt19937_64& rng() { return rng_; }

  double evaluate(const DodgeOption& o) {
    double s = score_option(o, fit_, tune_, config_, eval_seed_);
    history_.push_back({o, s});
    const double l = loss(s, config_);
    extremes_[node_key(o.preprocessor.kind)].observe(o.preprocessor.params, l);
    extremes_[node_key(o.learner.algorithm)].observe(o.learner.hyperparams, l);
    return s;
  }

  void reweight(const DodgeOption& o, double score) {
    std::vector<double> seen;
    for (std::size_t i = 0; i + 1 < history_.size(); ++i) seen.push_back(history_[i].score);
    const int delta = weight_delta(score, seen, config_.epsilon);
    for (const auto& k : option_nodes(o)) weights_[k] += delta;
  }

  DodgeOption exploit() {
    const Preprocessor p = heaviest(std::span<const Preprocessor>(kPreprocessors));
    const Algorithm a = heaviest(std::span<const Algorithm>(kLearners));
    DodgeOption o;
    o.preprocessor = {p, mutate(node_key(p), schema(p))};
    o.learner = learners::default_spec(a);
    for (auto& [k, v] : mutate(node_key(a), schema(a))) o.learner.hyperparams[k] = v;
    return o;
  }

  DodgeResult finish(const FeatureMatrix& train) {
    DodgeResult r;
    r.history = history_;
    std::size_t best = 0;
    for (std::size_t i = 1; i < history_.size(); ++i)
      if (loss(history_[i].score, config_) < loss(history_[best].score, config_)) best = i;
    r.best = history_[best].option;
    r.best_score = history_[best].score;
    r.model = learners::train(r.best.learner, train, eval_seed_, r.best.preprocessor);
    return r;
  }

 private:
  template <typename Kind>
  Kind heaviest(std::span<const Kind> kinds) {
    int top = std::numeric_limits<int>::min();
    std::vector<Kind> ties;
    for (Kind k : kinds) {
      const int w = weights_[node_key(k)];
      if (w > top) {
        top = w;
        ties.clear();
      }
      if (w == top) ties.push_back(k);
    }
    std::uniform_int_distribution<std::size_t> d(0, ties.size() - 1);
    return ties[d(rng_)];
  }

  HyperParams mutate(const std::string& node, const NodeSchema& s) {
    HyperParams h;
    const auto it = extremes_.find(node);
    for (const auto& p : s.numeric) {
      if (it == extremes_.end() || !it->second.best.count(p.name)) {
        h[p.name] = draw(p, rng_);
        continue;
      }
      const double best = std::get<double>(it->second.best.at(p.name));
      const double worst = std::get<double>(it->second.worst.at(p.name));
      const double mid = 0.5 * (best + worst);
      double v = best;
      if (mid != best) {
        std::uniform_real_distribution<double> d(std::min(best, mid), std::max(best, mid));
        v = d(rng_);
      }
      if (p.integer) v = std::round(v);
      h[p.name] = std::clamp(v, p.lo, p.hi);
    }
    for (const auto& c : s.categorical) {
      int top = std::numeric_limits<int>::min();
      std::vector<std::string> ties;
      for (const auto& v : c.values) {
        const int w = weights_[node + ":" + c.name + "=" + v];
        if (w > top) {
          top = w;
          ties.clear();
        }
        if (w == top) ties.push_back(v);
      }
      std::uniform_int_distribution<std::size_t> d(0, ties.size() - 1);
      h[c.name] = ties[d(rng_)];
    }
    return h;
  }

  DodgeConfig config_;
  std::mt19937_64 rng_;
  FeatureMatrix fit_, tune_;
  std::uint64_t eval_seed_ = 0;
  std::vector<Evaluation> history_;
  std::map<std::string, int> weights_;
  std::map<std::string, NodeExtremes> extremes_;
};

}  // namespace

void DodgeConfig::validate() const {
  if (n1 <= 0 || n2 < 0) throw ConfigError("dodge: n1 must be > 0 and n2 >= 0");
  if (!(epsilon > 0 && epsilon < 1)) throw ConfigError("dodge: epsilon must be in (0, 1)");
  if (!(fit_fraction > 0 && fit_fraction < 1)) throw ConfigError("dodge: fit_fraction must be in (0, 1)");
  metrics::metric_info(goal);
}

std::string DodgeOption::describe() const {
  std::string s(learners::to_string(preprocessor.kind));
  for (const auto& [k, v] : preprocessor.params)
    s += " " + k + "=" + std::visit([](const auto& x) {
           if constexpr (std::is_same_v<std::decay_t<decltype(x)>, std::string>) return x;
           else return std::to_string(x);
         }, v);
  s += " | " + learner.display_name();
  for (const auto& [k, v] : learner.hyperparams)
    s += " " + k + "=" + std::visit([](const auto& x) {
           if constexpr (std::is_same_v<std::decay_t<decltype(x)>, std::string>) return x;
           else return std::to_string(x);
         }, v);
  return s;
}

std::span<const Algorithm> option_learners() { return kLearners; }
std::span<const Preprocessor> option_preprocessors() { return kPreprocessors; }

PreprocessorSpec random_preprocessor(Preprocessor kind, std::mt19937_64& rng) {
  return {kind, random_params(schema(kind), rng)};
}

ClassifierSpec random_learner(Algorithm algorithm, std::mt19937_64& rng) {
  ClassifierSpec s = learners::default_spec(algorithm);
  for (auto& [k, v] : random_params(schema(algorithm), rng)) s.hyperparams[k] = v;
  return s;
}

DodgeOption random_option(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pp(0, kPreprocessors.size() - 1);
  std::uniform_int_distribution<std::size_t> pl(0, kLearners.size() - 1);
  DodgeOption o;
  o.preprocessor = random_preprocessor(kPreprocessors[pp(rng)], rng);
  o.learner = random_learner(kLearners[pl(rng)], rng);
  return o;
}

int weight_delta(double score, std::span<const double> seen, double epsilon) {
  for (double s : seen)
    if (std::abs(score - s) <= epsilon) return -1;
  return 1;
}

std::pair<FeatureMatrix, FeatureMatrix> split_fit_tune(const FeatureMatrix& train, double fit_fraction,
                                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fit, tune;
  for (int label : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < train.size(); ++i)
      if ((train.labels[i] != 0) == (label == 1)) idx.push_back(i);
    std::shuffle(idx.begin(), idx.end(), rng);
    auto k = static_cast<std::size_t>(std::llround(fit_fraction * static_cast<double>(idx.size())));
    if (idx.size() >= 2) k = std::clamp<std::size_t>(k, 1, idx.size() - 1);
    fit.insert(fit.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(k, idx.size())));
    tune.insert(tune.end(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(k, idx.size())), idx.end());
  }
  std::sort(fit.begin(), fit.end());
  std::sort(tune.begin(), tune.end());
  auto a = train.select_rows(fit);
  auto b = train.select_rows(tune);
  a.role = MatrixRole::train;
  b.role = MatrixRole::test;
  return {std::move(a), std::move(b)};
}

double score_option(const DodgeOption& option, const FeatureMatrix& fit, const FeatureMatrix& tune,
                    const DodgeConfig& config, std::uint64_t seed) {
  try {
    const auto model = learners::train(option.learner, fit, seed, option.preprocessor);
    const auto p = learners::predict(model, tune);
    const auto r = metrics::evaluate(p.probabilities, p.labels, tune.labels);
    if (!r) return worst_score(config);
    return metrics::metric_value(*r, config.goal);
  } catch (const Error&) {
    return worst_score(config);
  }
}

DodgeResult dodge(const FeatureMatrix& train, const DodgeConfig& config, std::uint64_t seed) {
  Search search(train, config, seed);
  for (int i = 0; i < config.n1; ++i) {
    const DodgeOption o = random_option(search.rng());
    search.reweight(o, search.evaluate(o));
  }
  for (int i = 0; i < config.n2; ++i) {
    const DodgeOption o = search.exploit();
    search.reweight(o, search.evaluate(o));
  }
  return search.finish(train);
}

DodgeResult random_search(const FeatureMatrix& train, int budget, const DodgeConfig& config,
                          std::uint64_t seed) {
  if (budget <= 0) throw ConfigError("random_search: budget must be > 0");
  Search search(train, config, seed);
  for (int i = 0; i < budget; ++i) search.evaluate(random_option(search.rng()));
  return search.finish(train);
}

}  // namespace earlybird::dodge
