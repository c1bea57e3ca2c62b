#pragma once

#include <Eigen/Dense>

#include <vector>

namespace mcam {

// Sample (Brownian) distance covariance matrix. `channels` holds one channel
// per row, one sample per column. Entry (i,j) is dCov(channel_i, channel_j)
// computed from double-centered pairwise distance matrices.
Eigen::MatrixXd distance_covariance_matrix(const Eigen::MatrixXd& channels);

// Relative diagonal loading that keeps the matrix log defined for
// rank-deficient regions: 1e-6 * trace(m)/dim, floored at 1e-12.
double spd_loading(const Eigen::MatrixXd& m);

// Matrix logarithm of a symmetric positive definite matrix. Throws
// Error(NumericalFailure) if an eigenvalue is not strictly positive.
Eigen::MatrixXd spd_log(const Eigen::MatrixXd& m);

Eigen::MatrixXd spd_exp(const Eigen::MatrixXd& m);

// Upper-triangle vectorization with off-diagonal entries scaled by sqrt(2);
// preserves the Frobenius inner product.
std::vector<double> symmetric_to_tangent_vector(const Eigen::MatrixXd& m);
Eigen::MatrixXd tangent_vector_to_symmetric(const std::vector<double>& v,
                                            int dim);

}  // namespace mcam
