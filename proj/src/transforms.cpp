// Data transforms used by the DODGE option tree.

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/special_functions/erf.hpp>

#include "earlybird/error.hpp"
#include "earlybird/learners.hpp"

namespace earlybird::learners {

namespace {

using nlohmann::json;

std::vector<double> column(const Rows& x, std::size_t j) {
  std::vector<double> c;
  c.reserve(x.size());
  for (const auto& r : x) c.push_back(r[j]);
  return c;
}

// Linear-interpolated quantile of a sorted vector, q in [0, 1].
double quantile_sorted(const std::vector<double>& s, double q) {
  if (s.empty()) return 0.0;
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

// Affine per-column transform: (x - shift) / scale.
class Affine : public Transformer {
 public:
  std::vector<double> transform(std::span<const double> row) const override {
    std::vector<double> out(row.begin(), row.end());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = (out[j] - shift_[j]) / scale_[j];
    return out;
  }
  json to_json() const override { return {{"shift", shift_}, {"scale", scale_}}; }
  void from_json(const json& j) override {
    shift_ = j.at("shift").get<std::vector<double>>();
    scale_ = j.at("scale").get<std::vector<double>>();
  }

 protected:
  void set(std::size_t j, double shift, double scale) {
    shift_.resize(std::max(shift_.size(), j + 1), 0.0);
    scale_.resize(std::max(scale_.size(), j + 1), 1.0);
    shift_[j] = shift;
    scale_[j] = scale > 0 && std::isfinite(scale) ? scale : 1.0;
  }

 private:
  std::vector<double> shift_, scale_;
};

class StandardScaler final : public Affine {
 public:
  void fit(const Rows& x, std::uint64_t) override {
    for (std::size_t j = 0; j < x.front().size(); ++j) {
      const auto c = column(x, j);
      double m = 0, v = 0;
      for (double e : c) m += e;
      m /= static_cast<double>(c.size());
      for (double e : c) v += (e - m) * (e - m);
      set(j, m, std::sqrt(v / static_cast<double>(c.size())));
    }
  }
  std::string name() const override { return "StandardScaler"; }
};

class MinMaxScaler final : public Affine {
 public:
  void fit(const Rows& x, std::uint64_t) override {
    for (std::size_t j = 0; j < x.front().size(); ++j) {
      const auto c = column(x, j);
      const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
      set(j, *lo, *hi - *lo);
    }
  }
  std::string name() const override { return "MinMaxScaler"; }
};

class MaxAbsScaler final : public Affine {
 public:
  void fit(const Rows& x, std::uint64_t) override {
    for (std::size_t j = 0; j < x.front().size(); ++j) {
      double m = 0;
      for (const auto& r : x) m = std::max(m, std::abs(r[j]));
      set(j, 0.0, m);
    }
  }
  std::string name() const override { return "MaxAbsScaler"; }
};

class RobustScaler final : public Affine {
 public:
  RobustScaler(double lo, double hi) : lo_(lo), hi_(hi) {}
  void fit(const Rows& x, std::uint64_t) override {
    for (std::size_t j = 0; j < x.front().size(); ++j) {
      auto c = column(x, j);
      std::sort(c.begin(), c.end());
      set(j, quantile_sorted(c, 0.5), quantile_sorted(c, hi_ / 100.0) - quantile_sorted(c, lo_ / 100.0));
    }
  }
  std::string name() const override { return "RobustScaler"; }

 private:
  double lo_, hi_;
};

// Maps each column through its empirical CDF, then optionally through the
// inverse normal CDF.
class QuantileTransformer final : public Transformer {
 public:
  QuantileTransformer(int n_quantiles, int subsample, bool normal)
      : n_quantiles_(std::max(2, n_quantiles)), subsample_(std::max(1, subsample)), normal_(normal) {}

  void fit(const Rows& x, std::uint64_t seed) override {
    std::vector<std::size_t> idx(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (idx.size() > static_cast<std::size_t>(subsample_)) {
      std::mt19937_64 rng(seed);
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(static_cast<std::size_t>(subsample_));
    }
    const std::size_t nq = std::min<std::size_t>(static_cast<std::size_t>(n_quantiles_), idx.size());
    quantiles_.assign(x.front().size(), {});
    for (std::size_t j = 0; j < x.front().size(); ++j) {
      std::vector<double> c;
      for (std::size_t i : idx) c.push_back(x[i][j]);
      std::sort(c.begin(), c.end());
      for (std::size_t q = 0; q < nq; ++q)
        quantiles_[j].push_back(quantile_sorted(c, nq == 1 ? 0.0 : static_cast<double>(q) / static_cast<double>(nq - 1)));
    }
  }

  std::vector<double> transform(std::span<const double> row) const override {
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
      const auto& q = quantiles_[j];
      double u;
      if (q.size() < 2 || q.front() == q.back()) {
        u = 0.5;
      } else if (row[j] <= q.front()) {
        u = 0.0;
      } else if (row[j] >= q.back()) {
        u = 1.0;
      } else {
        // Average the forward and backward interpolation over ties.
        const auto lo = std::lower_bound(q.begin(), q.end(), row[j]);
        const auto hi = std::upper_bound(q.begin(), q.end(), row[j]);
        const auto pos = [&](std::vector<double>::const_iterator it) {
          const std::size_t k = static_cast<std::size_t>(it - q.begin());
          if (k == 0) return 0.0;
          const double a = q[k - 1], b = q[k];
          const double frac = b > a ? (row[j] - a) / (b - a) : 0.0;
          return (static_cast<double>(k - 1) + frac) / static_cast<double>(q.size() - 1);
        };
        u = 0.5 * (pos(lo) + pos(hi));
      }
      if (normal_) {
        constexpr double kClip = 1e-7;
        u = std::clamp(u, kClip, 1.0 - kClip);
        out[j] = std::sqrt(2.0) * boost::math::erf_inv(2.0 * u - 1.0);
      } else {
        out[j] = u;
      }
    }
    return out;
  }

  std::string name() const override { return "QuantileTransformer"; }
  json to_json() const override { return {{"quantiles", quantiles_}}; }
  void from_json(const json& j) override { quantiles_ = j.at("quantiles").get<std::vector<std::vector<double>>>(); }

 private:
  int n_quantiles_;
  int subsample_;
  bool normal_;
  std::vector<std::vector<double>> quantiles_;
};

class Normalizer final : public Transformer {
 public:
  explicit Normalizer(std::string norm) : norm_(std::move(norm)) {
    if (norm_ != "l1" && norm_ != "l2" && norm_ != "max") throw ConfigError("normalizer: unknown norm " + norm_);
  }
  void fit(const Rows&, std::uint64_t) override {}
  std::vector<double> transform(std::span<const double> row) const override {
    double s = 0;
    for (double v : row) {
      if (norm_ == "l1") s += std::abs(v);
      else if (norm_ == "l2") s += v * v;
      else s = std::max(s, std::abs(v));
    }
    if (norm_ == "l2") s = std::sqrt(s);
    std::vector<double> out(row.begin(), row.end());
    if (s > 0)
      for (double& v : out) v /= s;
    return out;
  }
  std::string name() const override { return "Normalizer"; }
  json to_json() const override { return json::object(); }
  void from_json(const json&) override {}

 private:
  std::string norm_;
};

class Binarizer final : public Transformer {
 public:
  explicit Binarizer(double threshold) : threshold_(threshold) {}
  void fit(const Rows&, std::uint64_t) override {}
  std::vector<double> transform(std::span<const double> row) const override {
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = row[j] > threshold_ ? 1.0 : 0.0;
    return out;
  }
  std::string name() const override { return "Binarizer"; }
  json to_json() const override { return json::object(); }
  void from_json(const json&) override {}

 private:
  double threshold_;
};

}  // namespace

std::unique_ptr<Transformer> make_transformer(const PreprocessorSpec& spec) {
  switch (spec.kind) {
    case Preprocessor::standard: return std::make_unique<StandardScaler>();
    case Preprocessor::minmax: return std::make_unique<MinMaxScaler>();
    case Preprocessor::maxabs: return std::make_unique<MaxAbsScaler>();
    case Preprocessor::robust:
      return std::make_unique<RobustScaler>(spec.num("q_lo", 25), spec.num("q_hi", 75));
    case Preprocessor::quantile:
      return std::make_unique<QuantileTransformer>(static_cast<int>(spec.num("n_quantiles", 1000)),
                                                   static_cast<int>(spec.num("subsample", 100000)),
                                                   spec.str("output_distribution", "uniform") == "normal");
    case Preprocessor::normalizer: return std::make_unique<Normalizer>(spec.str("norm", "l2"));
    case Preprocessor::binarizer: return std::make_unique<Binarizer>(spec.num("threshold", 0.0));
  }
  throw ConfigError("unknown preprocessor");
}

}  // namespace earlybird::learners
