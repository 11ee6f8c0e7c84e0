// Classifier implementations behind make_classifier().

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "earlybird/error.hpp"
#include "earlybird/learners.hpp"

namespace earlybird::learners {

namespace {

using nlohmann::json;

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------
// Logistic regression

class LogisticRegression final : public Classifier {
 public:
  explicit LogisticRegression(const ClassifierSpec& spec)
      : l1_(spec.str("penalty", "l2") == "l1"),
        c_(std::max(spec.num("C", 1.0), 1e-6)),
        tol_(std::max(spec.num("tol", 1e-4), 1e-8)),
        max_iter_(static_cast<int>(spec.num("max_iter", 100))) {}

  void fit(const Rows& x, std::span<const int> y, std::uint64_t) override {
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());
    const Eigen::Index d = x.empty() ? 0 : static_cast<Eigen::Index>(x.front().size());
    Eigen::MatrixXd a(n, d + 1);  // last column is the intercept
    Eigen::VectorXd t(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) a(i, j) = x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      a(i, d) = 1.0;
      t(i) = y[static_cast<std::size_t>(i)] != 0 ? 1.0 : 0.0;
    }
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
    if (l1_) fit_l1(a, t, w);
    else fit_l2(a, t, w);
    weights_.assign(w.data(), w.data() + w.size());
  }

  double predict_proba(std::span<const double> row) const override {
    double z = weights_.back();
    for (std::size_t j = 0; j + 1 < weights_.size(); ++j) z += weights_[j] * row[j];
    return sigmoid(z);
  }

  json to_json() const override { return {{"weights", weights_}}; }
  void from_json(const json& j) override { weights_ = j.at("weights").get<std::vector<double>>(); }

 private:
  // Newton / IRLS on sum(logloss) + ||w||^2 / (2C); intercept unpenalized.
  void fit_l2(const Eigen::MatrixXd& a, const Eigen::VectorXd& t, Eigen::VectorXd& w) const {
    const Eigen::Index d = a.cols() - 1;
    Eigen::VectorXd reg = Eigen::VectorXd::Constant(d + 1, 1.0 / c_);
    reg(d) = 1e-10;
    for (int it = 0; it < max_iter_; ++it) {
      const Eigen::VectorXd z = a * w;
      Eigen::VectorXd p(z.size()), s(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        p(i) = sigmoid(z(i));
        s(i) = std::max(p(i) * (1.0 - p(i)), 1e-12);
      }
      const Eigen::VectorXd g = a.transpose() * (p - t) + reg.cwiseProduct(w);
      Eigen::MatrixXd h = a.transpose() * s.asDiagonal() * a;
      h.diagonal() += reg;
      const Eigen::VectorXd step = h.ldlt().solve(g);
      if (!step.allFinite()) break;
      w -= step;
      if (step.cwiseAbs().maxCoeff() < tol_) break;
    }
  }

  // Proximal gradient (ISTA) on sum(logloss) + ||w||_1 / C.
  void fit_l1(const Eigen::MatrixXd& a, const Eigen::VectorXd& t, Eigen::VectorXd& w) const {
    const Eigen::Index d = a.cols() - 1;
    const double lipschitz = 0.25 * std::max(a.squaredNorm(), 1e-12);
    const double step = 1.0 / lipschitz;
    const double shrink = step / c_;
    for (int it = 0; it < max_iter_ * 20; ++it) {
      Eigen::VectorXd p = (a * w).unaryExpr([](double z) { return sigmoid(z); });
      const Eigen::VectorXd g = a.transpose() * (p - t);
      Eigen::VectorXd next = w - step * g;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double v = next(j);
        next(j) = v > shrink ? v - shrink : (v < -shrink ? v + shrink : 0.0);
      }
      const double change = (next - w).cwiseAbs().maxCoeff();
      w = next;
      if (change < tol_ * 1e-2) break;
    }
  }

  bool l1_;
  double c_;
  double tol_;
  int max_iter_;
  std::vector<double> weights_;
};

// ---------------------------------------------------------------------------
// Naive Bayes: Bernoulli for 0/1 columns, Gaussian otherwise.

class NaiveBayes final : public Classifier {
 public:
  explicit NaiveBayes(const ClassifierSpec& spec)
      : var_smoothing_(spec.num("var_smoothing", 1e-9)), alpha_(spec.num("alpha", 1.0)) {}

  void fit(const Rows& x, std::span<const int> y, std::uint64_t) override {
    const std::size_t n = x.size(), d = x.front().size();
    binary_.assign(d, 1);
    for (const auto& r : x)
      for (std::size_t j = 0; j < d; ++j)
        if (r[j] != 0.0 && r[j] != 1.0) binary_[j] = 0;

    double max_var = 0;
    for (std::size_t j = 0; j < d; ++j) {
      double m = 0, v = 0;
      for (const auto& r : x) m += r[j];
      m /= static_cast<double>(n);
      for (const auto& r : x) v += (r[j] - m) * (r[j] - m);
      max_var = std::max(max_var, v / static_cast<double>(n));
    }
    const double epsilon = var_smoothing_ * (max_var > 0 ? max_var : 1.0);

    for (int c = 0; c < 2; ++c) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < n; ++i)
        if ((y[i] != 0) == (c == 1)) idx.push_back(i);
      const double nc = static_cast<double>(idx.size());
      log_prior_[c] = std::log(nc / static_cast<double>(n));
      mean_[c].assign(d, 0.0);
      var_[c].assign(d, 0.0);
      for (std::size_t j = 0; j < d; ++j) {
        double m = 0;
        for (std::size_t i : idx) m += x[i][j];
        if (binary_[j]) {
          // P(x_j = 1 | c) with additive smoothing.
          mean_[c][j] = (m + alpha_) / (nc + 2.0 * alpha_);
          continue;
        }
        m /= nc;
        double v = 0;
        for (std::size_t i : idx) v += (x[i][j] - m) * (x[i][j] - m);
        mean_[c][j] = m;
        var_[c][j] = v / nc + epsilon;
      }
    }
  }

  double predict_proba(std::span<const double> row) const override {
    double ll[2];
    for (int c = 0; c < 2; ++c) {
      double s = log_prior_[c];
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (binary_[j]) {
          const double p = std::clamp(mean_[c][j], 1e-12, 1.0 - 1e-12);
          s += row[j] >= 0.5 ? std::log(p) : std::log(1.0 - p);
        } else {
          const double diff = row[j] - mean_[c][j];
          s += -0.5 * std::log(2.0 * M_PI * var_[c][j]) - diff * diff / (2.0 * var_[c][j]);
        }
      }
      ll[c] = s;
    }
    return sigmoid(ll[1] - ll[0]);
  }

  json to_json() const override {
    return {{"binary", binary_}, {"log_prior", {log_prior_[0], log_prior_[1]}},
            {"mean", {mean_[0], mean_[1]}}, {"var", {var_[0], var_[1]}}};
  }
  void from_json(const json& j) override {
    binary_ = j.at("binary").get<std::vector<int>>();
    for (int c = 0; c < 2; ++c) {
      log_prior_[c] = j.at("log_prior").at(c);
      mean_[c] = j.at("mean").at(c).get<std::vector<double>>();
      var_[c] = j.at("var").at(c).get<std::vector<double>>();
    }
  }

 private:
  double var_smoothing_;
  double alpha_;
  std::vector<int> binary_;
  double log_prior_[2] = {0, 0};
  std::vector<double> mean_[2];
  std::vector<double> var_[2];
};

// ---------------------------------------------------------------------------
// Multinomial NB over non-negative shifted features.

class MultinomialNB final : public Classifier {
 public:
  explicit MultinomialNB(const ClassifierSpec& spec) : alpha_(std::max(spec.num("alpha", 1.0), 1e-10)) {}

  void fit(const Rows& x, std::span<const int> y, std::uint64_t) override {
    const std::size_t n = x.size(), d = x.front().size();
    shift_.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      double lo = x.front()[j];
      for (const auto& r : x) lo = std::min(lo, r[j]);
      shift_[j] = lo < 0 ? -lo : 0.0;
    }
    for (int c = 0; c < 2; ++c) {
      std::vector<double> counts(d, 0.0);
      double nc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if ((y[i] != 0) != (c == 1)) continue;
        nc += 1;
        for (std::size_t j = 0; j < d; ++j) counts[j] += std::max(0.0, x[i][j] + shift_[j]);
      }
      const double total = std::accumulate(counts.begin(), counts.end(), 0.0) + alpha_ * static_cast<double>(d);
      log_theta_[c].resize(d);
      for (std::size_t j = 0; j < d; ++j) log_theta_[c][j] = std::log((counts[j] + alpha_) / total);
      log_prior_[c] = std::log(nc / static_cast<double>(n));
    }
  }

  double predict_proba(std::span<const double> row) const override {
    double ll[2];
    for (int c = 0; c < 2; ++c) {
      double s = log_prior_[c];
      for (std::size_t j = 0; j < row.size(); ++j)
        s += std::max(0.0, row[j] + shift_[j]) * log_theta_[c][j];
      ll[c] = s;
    }
    return sigmoid(ll[1] - ll[0]);
  }

  json to_json() const override {
    return {{"shift", shift_}, {"log_prior", {log_prior_[0], log_prior_[1]}},
            {"log_theta", {log_theta_[0], log_theta_[1]}}};
  }
  void from_json(const json& j) override {
    shift_ = j.at("shift").get<std::vector<double>>();
    for (int c = 0; c < 2; ++c) {
      log_prior_[c] = j.at("log_prior").at(c);
      log_theta_[c] = j.at("log_theta").at(c).get<std::vector<double>>();
    }
  }

 private:
  double alpha_;
  std::vector<double> shift_;
  double log_prior_[2] = {0, 0};
  std::vector<double> log_theta_[2];
};

// ---------------------------------------------------------------------------
// k nearest neighbours

class Knn final : public Classifier {
 public:
  explicit Knn(const ClassifierSpec& spec)
      : k_(std::max(1, static_cast<int>(spec.num("n_neighbors", 5)))),
        distance_weighted_(spec.str("weights", "uniform") == "distance"),
        chebyshev_(spec.str("metric", "minkowski") == "chebyshev"),
        p_(std::max(1.0, spec.num("p", 2))) {}

  void fit(const Rows& x, std::span<const int> y, std::uint64_t) override {
    x_ = x;
    y_.assign(y.begin(), y.end());
  }

  double predict_proba(std::span<const double> row) const override {
    std::vector<std::pair<double, std::size_t>> d(x_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) d[i] = {distance(row, x_[i]), i};
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), d.size());
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    if (distance_weighted_) {
      // Exact matches take all the weight.
      std::size_t exact = 0, exact_pos = 0;
      for (std::size_t i = 0; i < k; ++i)
        if (d[i].first == 0.0) {
          ++exact;
          exact_pos += y_[d[i].second] ? 1 : 0;
        }
      if (exact > 0) return static_cast<double>(exact_pos) / static_cast<double>(exact);
      double wsum = 0, wpos = 0;
      for (std::size_t i = 0; i < k; ++i) {
        const double w = 1.0 / d[i].first;
        wsum += w;
        wpos += y_[d[i].second] ? w : 0.0;
      }
      return wpos / wsum;
    }
    std::size_t pos = 0;
    for (std::size_t i = 0; i < k; ++i) pos += y_[d[i].second] ? 1 : 0;
    return static_cast<double>(pos) / static_cast<double>(k);
  }

  json to_json() const override { return {{"x", x_}, {"y", y_}}; }
  void from_json(const json& j) override {
    x_ = j.at("x").get<Rows>();
    y_ = j.at("y").get<std::vector<int>>();
  }

 private:
  double distance(std::span<const double> a, const std::vector<double>& b) const {
    double s = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double diff = std::abs(a[j] - b[j]);
      if (chebyshev_) s = std::max(s, diff);
      else s += std::pow(diff, p_);
    }
    return chebyshev_ ? s : std::pow(s, 1.0 / p_);
  }

  int k_;
  bool distance_weighted_;
  bool chebyshev_;
  double p_;
  Rows x_;
  std::vector<int> y_;
};

// ---------------------------------------------------------------------------
// CART decision tree

struct TreeOptions {
  bool entropy = false;
  bool random_splitter = false;
  double min_samples_split = 2;  // <= 1 means a fraction of the training rows
  bool sqrt_features = false;
};

TreeOptions tree_options(const ClassifierSpec& spec, bool forest) {
  TreeOptions o;
  o.entropy = spec.str("criterion", "gini") == "entropy";
  o.random_splitter = spec.str("splitter", "best") == "random";
  o.min_samples_split = spec.num("min_samples_split", 2);
  o.sqrt_features = spec.str("max_features", forest ? "sqrt" : "all") == "sqrt";
  return o;
}

class DecisionTree final : public Classifier {
 public:
  explicit DecisionTree(TreeOptions options) : options_(options) {}

  void fit(const Rows& x, std::span<const int> y, std::uint64_t seed) override {
    std::vector<std::size_t> all(x.size());
    std::iota(all.begin(), all.end(), 0);
    fit_indices(x, y, all, seed);
  }

  // Fits on a (possibly repeated) set of row indices: bootstrap samples.
  void fit_indices(const Rows& x, std::span<const int> y, std::vector<std::size_t> rows,
                   std::uint64_t seed) {
    nodes_.clear();
    std::mt19937_64 rng(seed);
    const std::size_t n = rows.size();
    std::size_t min_split = 2;
    if (options_.min_samples_split <= 1.0)
      min_split = std::max<std::size_t>(
          2, static_cast<std::size_t>(std::ceil(options_.min_samples_split * static_cast<double>(n))));
    else
      min_split = static_cast<std::size_t>(options_.min_samples_split);
    const std::size_t d = x.empty() ? 0 : x.front().size();
    const std::size_t max_features =
        options_.sqrt_features ? std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))))
                               : d;

    struct Pending {
      std::vector<std::size_t> rows;
      int node;
    };
    std::vector<Pending> stack;
    nodes_.push_back({});
    stack.push_back({std::move(rows), 0});
    std::vector<std::size_t> features(d);
    while (!stack.empty()) {
      Pending job = std::move(stack.back());
      stack.pop_back();
      const std::size_t m = job.rows.size();
      std::size_t pos = 0;
      for (std::size_t r : job.rows) pos += y[r] ? 1 : 0;
      nodes_[static_cast<std::size_t>(job.node)].prob = m ? static_cast<double>(pos) / static_cast<double>(m) : 0.0;
      if (m < min_split || pos == 0 || pos == m) continue;

      std::iota(features.begin(), features.end(), 0);
      std::shuffle(features.begin(), features.end(), rng);
      Split best;
      for (std::size_t f = 0; f < d; ++f) {
        // Keep looking past max_features only while no valid split exists.
        if (f >= max_features && best.feature >= 0) break;
        const Split s = options_.random_splitter ? random_split(x, y, job.rows, features[f], rng)
                                                 : best_split(x, y, job.rows, features[f]);
        if (s.feature >= 0 && s.impurity < best.impurity) best = s;
      }
      if (best.feature < 0) continue;

      std::vector<std::size_t> left, right;
      for (std::size_t r : job.rows)
        (x[r][static_cast<std::size_t>(best.feature)] <= best.threshold ? left : right).push_back(r);
      if (left.empty() || right.empty()) continue;
      const int l = static_cast<int>(nodes_.size());
      nodes_.push_back({});
      const int rnode = static_cast<int>(nodes_.size());
      nodes_.push_back({});
      auto& node = nodes_[static_cast<std::size_t>(job.node)];
      node.feature = best.feature;
      node.threshold = best.threshold;
      node.left = l;
      node.right = rnode;
      stack.push_back({std::move(right), rnode});
      stack.push_back({std::move(left), l});
    }
  }

  double predict_proba(std::span<const double> row) const override {
    std::size_t i = 0;
    while (nodes_[i].feature >= 0)
      i = static_cast<std::size_t>(row[static_cast<std::size_t>(nodes_[i].feature)] <= nodes_[i].threshold
                                       ? nodes_[i].left
                                       : nodes_[i].right);
    return nodes_[i].prob;
  }

  json to_json() const override {
    json nodes = json::array();
    for (const auto& n : nodes_) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.prob});
    return {{"nodes", nodes}};
  }
  void from_json(const json& j) override {
    nodes_.clear();
    for (const auto& n : j.at("nodes"))
      nodes_.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                        n.at(4).get<double>()});
  }

 private:
  struct Node {
    int feature = -1;
    double threshold = 0;
    int left = -1;
    int right = -1;
    double prob = 0;
  };
  struct Split {
    int feature = -1;
    double threshold = 0;
    double impurity = std::numeric_limits<double>::infinity();
  };

  double impurity(double pos, double total) const {
    if (total <= 0) return 0;
    const double p = pos / total;
    if (options_.entropy) {
      double h = 0;
      if (p > 0) h -= p * std::log2(p);
      if (p < 1) h -= (1 - p) * std::log2(1 - p);
      return h;
    }
    return 2.0 * p * (1.0 - p);
  }

  Split best_split(const Rows& x, std::span<const int> y, const std::vector<std::size_t>& rows,
                   std::size_t f) const {
    std::vector<std::pair<double, int>> v;
    v.reserve(rows.size());
    double total_pos = 0;
    for (std::size_t r : rows) {
      v.emplace_back(x[r][f], y[r] ? 1 : 0);
      total_pos += y[r] ? 1 : 0;
    }
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    Split best;
    double left_pos = 0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      left_pos += v[i].second;
      if (v[i].first == v[i + 1].first) continue;
      const double nl = static_cast<double>(i + 1), nr = n - nl;
      const double imp = (nl * impurity(left_pos, nl) + nr * impurity(total_pos - left_pos, nr)) / n;
      if (imp < best.impurity) {
        best.feature = static_cast<int>(f);
        best.threshold = 0.5 * (v[i].first + v[i + 1].first);
        best.impurity = imp;
      }
    }
    return best;
  }

  Split random_split(const Rows& x, std::span<const int> y, const std::vector<std::size_t>& rows,
                     std::size_t f, std::mt19937_64& rng) const {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t r : rows) {
      lo = std::min(lo, x[r][f]);
      hi = std::max(hi, x[r][f]);
    }
    Split s;
    if (!(hi > lo)) return s;
    std::uniform_real_distribution<double> u(lo, hi);
    double t = u(rng);
    if (t >= hi) t = lo;
    double nl = 0, pl = 0, nr = 0, pr = 0;
    for (std::size_t r : rows) {
      if (x[r][f] <= t) {
        nl += 1;
        pl += y[r] ? 1 : 0;
      } else {
        nr += 1;
        pr += y[r] ? 1 : 0;
      }
    }
    if (nl == 0 || nr == 0) return s;
    s.feature = static_cast<int>(f);
    s.threshold = t;
    s.impurity = (nl * impurity(pl, nl) + nr * impurity(pr, nr)) / (nl + nr);
    return s;
  }

  TreeOptions options_;
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Random forest: bootstrap + sqrt feature sampling; probability is the
// fraction of trees voting defective.

class RandomForest final : public Classifier {
 public:
  RandomForest(TreeOptions options, int trees) : options_(options), trees_(std::max(1, trees)) {}

  void fit(const Rows& x, std::span<const int> y, std::uint64_t seed) override {
    forest_.clear();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    for (int t = 0; t < trees_; ++t) {
      std::vector<std::size_t> sample(x.size());
      for (auto& s : sample) s = pick(rng);
      DecisionTree tree(options_);
      tree.fit_indices(x, y, std::move(sample), rng());
      forest_.push_back(std::move(tree));
    }
  }

  double predict_proba(std::span<const double> row) const override {
    std::size_t votes = 0;
    for (const auto& t : forest_) votes += t.predict_proba(row) >= 0.5 ? 1 : 0;
    return static_cast<double>(votes) / static_cast<double>(forest_.size());
  }

  json to_json() const override {
    json trees = json::array();
    for (const auto& t : forest_) trees.push_back(t.to_json());
    return {{"trees", trees}};
  }
  void from_json(const json& j) override {
    forest_.clear();
    for (const auto& t : j.at("trees")) {
      DecisionTree tree(options_);
      tree.from_json(t);
      forest_.push_back(std::move(tree));
    }
  }

 private:
  TreeOptions options_;
  int trees_;
  std::vector<DecisionTree> forest_;
};

// ---------------------------------------------------------------------------
// Linear SVM: Pegasos hinge-loss SGD on standardized inputs, bias folded into
// the weight vector; probability = logistic squashing of the margin.

class LinearSvm final : public Classifier {
 public:
  explicit LinearSvm(const ClassifierSpec& spec)
      : lambda_(std::max(spec.num("alpha", 1e-4), 1e-8)), epochs_(static_cast<int>(spec.num("epochs", 50))) {}

  void fit(const Rows& x, std::span<const int> y, std::uint64_t seed) override {
    const std::size_t n = x.size(), d = x.front().size();
    mean_.assign(d, 0.0);
    scale_.assign(d, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
      double m = 0, v = 0;
      for (const auto& r : x) m += r[j];
      m /= static_cast<double>(n);
      for (const auto& r : x) v += (r[j] - m) * (r[j] - m);
      v = std::sqrt(v / static_cast<double>(n));
      mean_[j] = m;
      scale_[j] = v > 0 ? v : 1.0;
    }
    std::vector<std::vector<double>> z(n, std::vector<double>(d + 1, 1.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) z[i][j] = (x[i][j] - mean_[j]) / scale_[j];

    w_.assign(d + 1, 0.0);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    double t = 0;
    for (int e = 0; e < epochs_; ++e) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t i : order) {
        t += 1;
        const double eta = 1.0 / (lambda_ * t);
        const double target = y[i] ? 1.0 : -1.0;
        double margin = 0;
        for (std::size_t j = 0; j <= d; ++j) margin += w_[j] * z[i][j];
        for (auto& wj : w_) wj *= (1.0 - eta * lambda_);
        if (target * margin < 1.0)
          for (std::size_t j = 0; j <= d; ++j) w_[j] += eta * target * z[i][j];
      }
    }
  }

  double predict_proba(std::span<const double> row) const override {
    double m = w_.back();
    for (std::size_t j = 0; j < mean_.size(); ++j) m += w_[j] * (row[j] - mean_[j]) / scale_[j];
    return sigmoid(m);
  }

  json to_json() const override { return {{"w", w_}, {"mean", mean_}, {"scale", scale_}}; }
  void from_json(const json& j) override {
    w_ = j.at("w").get<std::vector<double>>();
    mean_ = j.at("mean").get<std::vector<double>>();
    scale_ = j.at("scale").get<std::vector<double>>();
  }

 private:
  double lambda_;
  int epochs_;
  std::vector<double> w_, mean_, scale_;
};

// ---------------------------------------------------------------------------
// TLEL: random forests on random undersamples, majority vote on top.

class Tlel final : public Classifier {
 public:
  explicit Tlel(const ClassifierSpec& spec)
      : forests_(std::max(1, static_cast<int>(spec.num("inner_forests", 10)))),
        trees_(std::max(1, static_cast<int>(spec.num("trees_per_forest", 10)))),
        ratio_(spec.num("undersample_ratio", 0.1)),
        options_(tree_options(ClassifierSpec{Algorithm::random_forest, {}}, true)) {
    if (!(ratio_ > 0 && ratio_ <= 1)) throw DataError("tlel: undersample_ratio must be in (0, 1]");
  }

  void fit(const Rows& x, std::span<const int> y, std::uint64_t seed) override {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < x.size(); ++i) (y[i] ? pos : neg).push_back(i);
    const bool pos_minor = pos.size() <= neg.size();
    const auto& minority = pos_minor ? pos : neg;
    const auto& majority = pos_minor ? neg : pos;
    const std::size_t keep =
        minority.size() +
        static_cast<std::size_t>(std::llround(ratio_ * static_cast<double>(majority.size() - minority.size())));

    members_.clear();
    std::mt19937_64 rng(seed);
    for (int f = 0; f < forests_; ++f) {
      const std::uint64_t forest_seed = seed + static_cast<std::uint64_t>(f);
      std::vector<std::size_t> rows;
      if (keep >= majority.size()) {
        rows.resize(x.size());
        std::iota(rows.begin(), rows.end(), 0);
      } else {
        std::vector<std::size_t> kept = majority;
        std::shuffle(kept.begin(), kept.end(), rng);
        kept.resize(keep);
        rows = minority;
        rows.insert(rows.end(), kept.begin(), kept.end());
        std::sort(rows.begin(), rows.end());
      }
      Rows sx;
      std::vector<int> sy;
      for (std::size_t r : rows) {
        sx.push_back(x[r]);
        sy.push_back(y[r]);
      }
      RandomForest forest(options_, trees_);
      forest.fit(sx, sy, forest_seed);
      members_.push_back(std::move(forest));
    }
  }

  double predict_proba(std::span<const double> row) const override {
    std::size_t votes = 0;
    for (const auto& f : members_) votes += f.predict_proba(row) >= 0.5 ? 1 : 0;
    return static_cast<double>(votes) / static_cast<double>(members_.size());
  }

  json to_json() const override {
    json forests = json::array();
    for (const auto& f : members_) forests.push_back(f.to_json());
    return {{"forests", forests}};
  }
  void from_json(const json& j) override {
    members_.clear();
    for (const auto& f : j.at("forests")) {
      RandomForest forest(options_, trees_);
      forest.from_json(f);
      members_.push_back(std::move(forest));
    }
  }

 private:
  int forests_;
  int trees_;
  double ratio_;
  TreeOptions options_;
  std::vector<RandomForest> members_;
};

}  // namespace

std::unique_ptr<Classifier> make_classifier(const ClassifierSpec& spec) {
  switch (spec.algorithm) {
    case Algorithm::logistic_regression: return std::make_unique<LogisticRegression>(spec);
    case Algorithm::naive_bayes: return std::make_unique<NaiveBayes>(spec);
    case Algorithm::knn: return std::make_unique<Knn>(spec);
    case Algorithm::decision_tree: return std::make_unique<DecisionTree>(tree_options(spec, false));
    case Algorithm::random_forest:
      return std::make_unique<RandomForest>(tree_options(spec, true),
                                            static_cast<int>(spec.num("n_estimators", 100)));
    case Algorithm::linear_svm: return std::make_unique<LinearSvm>(spec);
    case Algorithm::multinomial_nb: return std::make_unique<MultinomialNB>(spec);
    case Algorithm::tlel: return std::make_unique<Tlel>(spec);
  }
  throw ConfigError("unknown algorithm");
}

}  // namespace earlybird::learners
