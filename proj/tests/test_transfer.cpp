#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "earlybird/error.hpp"
#include "earlybird/transfer.hpp"

using namespace earlybird;
using namespace earlybird::transfer;

namespace {

FeatureMatrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed, double shift = 0.0) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> g(0.0, 1.0);
  FeatureMatrix m;
  for (std::size_t j = 0; j < d; ++j) m.columns.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> r;
    const double common = g(rng);
    for (std::size_t j = 0; j < d; ++j) r.push_back(shift + g(rng) + (j % 2 ? common : 0.0) * (1.0 + j));
    m.rows.push_back(r);
    m.labels.push_back(static_cast<int>(i % 3 == 0));
    m.ids.push_back("r" + std::to_string(i));
  }
  return m;
}

// Z-scores with population statistics; constant columns become 0.
Eigen::MatrixXd zscore(const FeatureMatrix& m) {
  const auto n = static_cast<Eigen::Index>(m.size()), d = static_cast<Eigen::Index>(m.width());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = m.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  for (Eigen::Index j = 0; j < d; ++j) {
    const double mean = x.col(j).mean();
    const double sd = std::sqrt((x.col(j).array() - mean).square().mean());
    if (sd > 0) x.col(j) = ((x.col(j).array() - mean) / sd).matrix();
    else x.col(j).setZero();
  }
  return x;
}

// Leading eigenvectors of (X'LX + mu I)^-1 X'HX built from the explicit
// n x n MMD and centering matrices.
Eigen::MatrixXd tca_oracle(const FeatureMatrix& s, const FeatureMatrix& t, int k, double mu) {
  const Eigen::MatrixXd xs = zscore(s), xt = zscore(t);
  const Eigen::Index ns = xs.rows(), nt = xt.rows(), n = ns + nt, d = xs.cols();
  Eigen::MatrixXd x(n, d);
  x << xs, xt;
  Eigen::MatrixXd l(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool si = i < ns, sj = j < ns;
      l(i, j) = si && sj ? 1.0 / double(ns * ns) : (!si && !sj ? 1.0 / double(nt * nt) : -1.0 / double(ns * nt));
    }
  const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / double(n));
  const Eigen::MatrixXd a = (x.transpose() * l * x + mu * Eigen::MatrixXd::Identity(d, d)).inverse() *
                            (x.transpose() * h * x);
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  std::vector<std::pair<double, Eigen::VectorXd>> ev;
  for (Eigen::Index i = 0; i < d; ++i) ev.push_back({es.eigenvalues()(i).real(), es.eigenvectors().col(i).real()});
  std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  Eigen::MatrixXd out(d, k);
  for (int c = 0; c < k; ++c) out.col(c) = ev[static_cast<std::size_t>(c)].second;
  return out;
}

double max_orthonormal_error(const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd g = b.transpose() * b - Eigen::MatrixXd::Identity(b.cols(), b.cols());
  return g.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("jacobi matches known decompositions") {
  Eigen::MatrixXd a(2, 2);
  a << 2, 1, 1, 2;
  const auto e = jacobi_eigen(a);
  CHECK(e.values(0) == doctest::Approx(3.0));
  CHECK(e.values(1) == doctest::Approx(1.0));
  CHECK(e.vectors(0, 0) == doctest::Approx(std::sqrt(0.5)));
  CHECK(e.vectors(1, 0) == doctest::Approx(std::sqrt(0.5)));

  Eigen::MatrixXd diag = Eigen::Vector3d(1, 5, 3).asDiagonal();
  const auto f = jacobi_eigen(diag);
  CHECK(f.values(0) == 5.0);
  CHECK(f.values(2) == 1.0);
  CHECK(f.vectors(1, 0) == 1.0);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd m(6, 6);
    for (Eigen::Index i = 0; i < 6; ++i)
      for (Eigen::Index j = 0; j < 6; ++j) m(i, j) = g(rng);
    const Eigen::MatrixXd s = m + m.transpose();
    const auto r = jacobi_eigen(s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(s);
    for (Eigen::Index i = 0; i < 6; ++i) CHECK(r.values(i) == doctest::Approx(ref.eigenvalues()(5 - i)).epsilon(1e-9));
    CHECK((s * r.vectors - r.vectors * r.values.asDiagonal()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(max_orthonormal_error(r.vectors) < 1e-10);
    for (Eigen::Index c = 0; c < 6; ++c) {
      Eigen::Index arg;
      r.vectors.col(c).cwiseAbs().maxCoeff(&arg);
      CHECK(r.vectors(arg, c) > 0);
    }
  }
}

TEST_CASE("tca shape and orthonormal basis") {
  const auto s = random_matrix(120, 8, 1), t = random_matrix(90, 8, 2, 3.0);
  for (int k : {2, 5}) {
    const auto p = tca_fit(s, t, k, 7);
    CHECK(p.components == k);
    CHECK(p.basis.rows() == 8);
    CHECK(p.basis.cols() == k);
    CHECK(max_orthonormal_error(p.basis) < 1e-6);
    CHECK(std::is_sorted(p.eigenvalues.rbegin(), p.eigenvalues.rend()));
    const auto out = tca_transform(p, t, Domain::target);
    CHECK(out.width() == static_cast<std::size_t>(k));
    CHECK(out.size() == t.size());
    CHECK(out.columns.front() == "tca0");
    CHECK(out.labels == t.labels);
    CHECK(out.ids == t.ids);
  }
}

TEST_CASE("tca basis spans the oracle eigenvectors") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = random_matrix(60, 6, 10 + seed), t = random_matrix(45, 6, 20 + seed, 2.0);
    const int k = 3;
    const auto p = tca_fit(s, t, k, 1);
    const Eigen::MatrixXd v = tca_oracle(s, t, k, 1.0);
    // Each oracle eigenvector lies in the span of the basis.
    for (int c = 0; c < k; ++c) {
      const Eigen::VectorXd u = v.col(c).normalized();
      const Eigen::VectorXd resid = u - p.basis * (p.basis.transpose() * u);
      CHECK(resid.norm() < 1e-6);
    }
  }
}

TEST_CASE("tca refits are bit-identical") {
  const auto s = random_matrix(80, 5, 3), t = random_matrix(70, 5, 4, 1.0);
  const auto a = tca_fit(s, t, 5, 1);
  const auto b = tca_fit(s, t, 5, 99);
  CHECK(a.basis == b.basis);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(tca_transform(a, s, Domain::source).rows == tca_transform(b, s, Domain::source).rows);
}

TEST_CASE("tca symmetry and caching") {
  const auto s = random_matrix(50, 4, 5);
  const auto p = tca_fit(s, s, 2, 1);
  CHECK(tca_transform(p, s, Domain::source).rows == tca_transform(p, s, Domain::target).rows);

  const auto t = random_matrix(40, 4, 6, 5.0);
  const auto q = tca_fit(s, t, 2, 1);
  const auto once = tca_transform(q, s, Domain::source);
  // Projecting the fit-time source by hand gives the same numbers.
  const Eigen::MatrixXd z = zscore(s) * q.basis;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t c = 0; c < 2; ++c)
      CHECK(std::abs(once.rows[i][c] - z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c))) < 1e-9);
  CHECK(tca_transform(q, s, Domain::source).rows == once.rows);
}

TEST_CASE("tca constant columns and rank deficiency") {
  auto s = random_matrix(40, 4, 7), t = random_matrix(30, 4, 8);
  for (auto& r : s.rows) r[2] = 4.0;
  for (auto& r : t.rows) r[2] = 9.0;
  const auto p = tca_fit(s, t, 2, 1);
  CHECK(p.source_stats.scale[2] == 0.0);
  CHECK(p.target_stats.scale[2] == 0.0);
  // The constant column cannot move the projection.
  auto moved = t;
  for (auto& r : moved.rows) r[2] = -1e9;
  CHECK(tca_transform(p, moved, Domain::target).rows == tca_transform(p, t, Domain::target).rows);

  // Only one informative column, two components requested.
  auto flat = random_matrix(30, 3, 9);
  for (auto& r : flat.rows) r[1] = r[2] = 1.0;
  const auto q = tca_fit(flat, flat, 2, 1);
  CHECK(q.shrinkage_applied);
  CHECK(max_orthonormal_error(q.basis) < 1e-6);
}

TEST_CASE("tca outputs are finite on random inputs") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dims(2, 9), rows(5, 60);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = static_cast<std::size_t>(dims(rng));
    auto s = random_matrix(static_cast<std::size_t>(rows(rng)), d, rng(), 0.0);
    auto t = random_matrix(static_cast<std::size_t>(rows(rng)), d, rng(), 10.0);
    if (trial % 7 == 0)
      for (auto& r : s.rows) r[0] = 0.0;
    const int k = std::min<int>(static_cast<int>(d), trial % 2 ? 2 : 5);
    const auto p = tca_fit(s, t, k, 1);
    CHECK(max_orthonormal_error(p.basis) < 1e-6);
    for (const auto& m : {tca_transform(p, s, Domain::source), tca_transform(p, t, Domain::target)})
      for (const auto& r : m.rows)
        for (double v : r) REQUIRE(std::isfinite(v));
  }
}

TEST_CASE("tca preconditions") {
  const auto s = random_matrix(20, 3, 1);
  auto t = random_matrix(20, 3, 2);
  CHECK_THROWS_AS(tca_fit(s, t, 4, 1), DataError);
  CHECK_THROWS_AS(tca_fit(s, t, 0, 1), DataError);
  const auto p = tca_fit(s, t, 2, 1);
  t.columns[1] = "other";
  CHECK_THROWS_AS(tca_fit(s, t, 2, 1), DataError);
  CHECK_THROWS_AS(tca_transform(p, t, Domain::target), DataError);
}
