#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "earlybird/feature_matrix.hpp"

namespace earlybird::transfer {

/// Per-feature normalization statistics of one domain.
struct DomainStats {
  std::vector<double> mean;
  std::vector<double> scale;  // 0 marks a constant column, which maps to 0
};

enum class Domain { source, target };

struct TcaProjection {
  int components = 0;
  std::vector<std::string> columns;  // fit-time input columns
  Eigen::MatrixXd basis;             // input-dim x components, orthonormal columns
  std::vector<double> eigenvalues;   // descending, one per component
  DomainStats source_stats;
  DomainStats target_stats;
  bool shrinkage_applied = false;
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Eigenvalues come
/// back in descending order with matching eigenvector columns; each column's
/// sign is fixed so its largest-magnitude entry is positive.
struct EigenDecomposition {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  int sweeps = 0;
};
EigenDecomposition jacobi_eigen(const Eigen::MatrixXd& symmetric, double tolerance = 1e-10, int max_sweeps = 100);

/// Linear-kernel TCA. Both domains are z-scored with their own statistics;
/// the basis spans the leading solutions of (X'LX + mu I)^-1 X'HX, where L
/// is the MMD coefficient matrix and H the centering matrix, orthonormalized.
TcaProjection tca_fit(const FeatureMatrix& source, const FeatureMatrix& target, int components,
                      std::uint64_t seed, double mu = 1.0);

/// Normalizes `data` with the statistics of `domain` and projects it. Output
/// columns are named tca0, tca1, ...; labels, ids and role carry over.
FeatureMatrix tca_transform(const TcaProjection& projection, const FeatureMatrix& data, Domain domain);

}  // namespace earlybird::transfer
