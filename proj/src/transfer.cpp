#include "earlybird/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "earlybird/error.hpp"
#include "earlybird/log.hpp"

namespace earlybird::transfer {

namespace {

DomainStats stats_of(const FeatureMatrix& m) {
  const std::size_t d = m.width(), n = m.size();
  DomainStats s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0;
    for (const auto& r : m.rows) mean += r[j];
    mean /= static_cast<double>(n);
    double var = 0;
    for (const auto& r : m.rows) var += (r[j] - mean) * (r[j] - mean);
    s.mean[j] = mean;
    s.scale[j] = std::sqrt(var / static_cast<double>(n));
  }
  return s;
}

Eigen::RowVectorXd normalize(std::span<const double> row, const DomainStats& s) {
  Eigen::RowVectorXd z(static_cast<Eigen::Index>(row.size()));
  for (std::size_t j = 0; j < row.size(); ++j)
    z(static_cast<Eigen::Index>(j)) = s.scale[j] > 0 ? (row[j] - s.mean[j]) / s.scale[j] : 0.0;
  return z;
}

// Inverse square root of a symmetric positive definite matrix.
Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& b) {
  const auto e = jacobi_eigen(b);
  Eigen::VectorXd inv(e.values.size());
  for (Eigen::Index i = 0; i < inv.size(); ++i) inv(i) = 1.0 / std::sqrt(std::max(e.values(i), 1e-300));
  return e.vectors * inv.asDiagonal() * e.vectors.transpose();
}

void fix_signs(Eigen::MatrixXd& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index arg = 0;
    for (Eigen::Index r = 1; r < v.rows(); ++r)
      if (std::abs(v(r, c)) > std::abs(v(arg, c))) arg = r;
    if (v(arg, c) < 0) v.col(c) = -v.col(c);
  }
}

}  // namespace

EigenDecomposition jacobi_eigen(const Eigen::MatrixXd& symmetric, double tolerance, int max_sweeps) {
  const Eigen::Index n = symmetric.rows();
  if (symmetric.cols() != n) throw DataError("jacobi_eigen: matrix must be square");
  Eigen::MatrixXd a = 0.5 * (symmetric + symmetric.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(1.0, a.norm());

  EigenDecomposition out;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tolerance * scale) break;
    out.sweeps = sweep + 1;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  fix_signs(out.vectors);
  return out;
}

TcaProjection tca_fit(const FeatureMatrix& source, const FeatureMatrix& target, int components,
                      std::uint64_t /*seed: the fit is deterministic*/, double mu) {
  if (source.columns != target.columns) throw DataError("tca_fit: source and target columns differ");
  const auto d = static_cast<Eigen::Index>(source.width());
  if (components < 1 || components > d) throw DataError("tca_fit: components must be in [1, feature count]");
  if (source.empty() || target.empty() ||
      source.size() + target.size() < static_cast<std::size_t>(components))
    throw DataError("tca_fit: not enough rows");
  if (!(mu > 0)) throw DataError("tca_fit: mu must be positive");

  TcaProjection p;
  p.components = components;
  p.columns = source.columns;
  p.source_stats = stats_of(source);
  p.target_stats = stats_of(target);

  const auto ns = static_cast<Eigen::Index>(source.size()), nt = static_cast<Eigen::Index>(target.size());
  Eigen::MatrixXd x(ns + nt, d);
  for (Eigen::Index i = 0; i < ns; ++i) x.row(i) = normalize(source.rows[static_cast<std::size_t>(i)], p.source_stats);
  for (Eigen::Index i = 0; i < nt; ++i)
    x.row(ns + i) = normalize(target.rows[static_cast<std::size_t>(i)], p.target_stats);

  // X'LX = dd' with d the difference of the domain means; X'HX the scatter.
  const Eigen::RowVectorXd ms = x.topRows(ns).colwise().mean(), mt = x.bottomRows(nt).colwise().mean();
  const Eigen::VectorXd diff = (ms - mt).transpose();
  const Eigen::RowVectorXd m = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - m;
  Eigen::MatrixXd scatter = centered.transpose() * centered;
  const Eigen::MatrixXd b = diff * diff.transpose() + mu * Eigen::MatrixXd::Identity(d, d);

  const Eigen::MatrixXd b_isqrt = inverse_sqrt(b);
  auto e = jacobi_eigen(b_isqrt * scatter * b_isqrt);
  const double top = std::max(std::abs(e.values(0)), 1.0);
  if (e.values(components - 1) <= 1e-12 * top) {
    log::warn("tca_fit: rank-deficient kernel, adding 1e-6 to the diagonal");
    scatter.diagonal().array() += 1e-6;
    p.shrinkage_applied = true;
    e = jacobi_eigen(b_isqrt * scatter * b_isqrt);
  }

  // Map back and orthonormalize (modified Gram-Schmidt keeps the leading span).
  Eigen::MatrixXd w = b_isqrt * e.vectors.leftCols(components);
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    for (Eigen::Index k = 0; k < c; ++k) w.col(c) -= w.col(k).dot(w.col(c)) * w.col(k);
    const double norm = w.col(c).norm();
    if (norm <= 0) throw DataError("tca_fit: degenerate projection");
    w.col(c) /= norm;
  }
  fix_signs(w);
  p.basis = std::move(w);
  for (int c = 0; c < components; ++c) p.eigenvalues.push_back(e.values(c));
  return p;
}

FeatureMatrix tca_transform(const TcaProjection& projection, const FeatureMatrix& data, Domain domain) {
  if (data.columns != projection.columns) throw DataError("tca_transform: column mismatch");
  const DomainStats& s = domain == Domain::source ? projection.source_stats : projection.target_stats;
  FeatureMatrix out;
  for (int c = 0; c < projection.components; ++c) out.columns.push_back("tca" + std::to_string(c));
  out.labels = data.labels;
  out.ids = data.ids;
  out.role = data.role;
  out.engineered = data.engineered;
  out.rows.reserve(data.size());
  for (const auto& r : data.rows) {
    const Eigen::RowVectorXd z = normalize(r, s) * projection.basis;
    out.rows.emplace_back(z.data(), z.data() + z.size());
  }
  return out;
}

}  // namespace earlybird::transfer
