#include "mcam/dcov.hpp"

#include "mcam/errors.hpp"

#include <cmath>

namespace mcam {

Eigen::MatrixXd distance_covariance_matrix(const Eigen::MatrixXd& channels) {
  const int c = static_cast<int>(channels.rows());
  const int n = static_cast<int>(channels.cols());
  if (c == 0 || n == 0) {
    throw Error(ErrorCode::EmptySet, "distance covariance needs samples");
  }

  const std::size_t n2 = static_cast<std::size_t>(n) * n;
  // One double-centered distance matrix per channel, flattened row-major.
  Eigen::MatrixXd stack(c, static_cast<Eigen::Index>(n2));

  Eigen::MatrixXd dist(n, n);
  for (int ch = 0; ch < c; ++ch) {
    const auto x = channels.row(ch);
    for (int k = 0; k < n; ++k) {
      dist(k, k) = 0.0;
      for (int l = k + 1; l < n; ++l) {
        const double d = std::abs(x(k) - x(l));
        dist(k, l) = d;
        dist(l, k) = d;
      }
    }
    const Eigen::VectorXd row_mean = dist.rowwise().mean();
    const double grand_mean = row_mean.mean();
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        stack(ch, static_cast<Eigen::Index>(k) * n + l) =
            dist(k, l) - row_mean(k) - row_mean(l) + grand_mean;
      }
    }
  }

  Eigen::MatrixXd gram = (stack * stack.transpose()) / static_cast<double>(n2);
  Eigen::MatrixXd dcov(c, c);
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) {
      dcov(i, j) = std::sqrt(std::max(0.0, gram(i, j)));
    }
  }
  // The gram construction is symmetric up to rounding; make it exact.
  dcov = ((dcov + dcov.transpose()) / 2.0).eval();
  return dcov;
}

double spd_loading(const Eigen::MatrixXd& m) {
  const double relative = 1e-6 * m.trace() / static_cast<double>(m.rows());
  return std::max(relative, 1e-12);
}

Eigen::MatrixXd spd_log(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure,
                "eigendecomposition did not converge");
  }
  Eigen::VectorXd eigs = solver.eigenvalues();
  if ((eigs.array() <= 0.0).any()) {
    throw Error(ErrorCode::NumericalFailure,
                "matrix log of a non-positive-definite matrix");
  }
  return solver.eigenvectors() * eigs.array().log().matrix().asDiagonal() *
         solver.eigenvectors().transpose();
}

Eigen::MatrixXd spd_exp(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure,
                "eigendecomposition did not converge");
  }
  return solver.eigenvectors() *
         solver.eigenvalues().array().exp().matrix().asDiagonal() *
         solver.eigenvectors().transpose();
}

std::vector<double> symmetric_to_tangent_vector(const Eigen::MatrixXd& m) {
  const int d = static_cast<int>(m.rows());
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(d) * (d + 1) / 2);
  const double sqrt2 = std::sqrt(2.0);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      v.push_back(i == j ? m(i, j) : m(i, j) * sqrt2);
    }
  }
  return v;
}

Eigen::MatrixXd tangent_vector_to_symmetric(const std::vector<double>& v,
                                            int dim) {
  Eigen::MatrixXd m(dim, dim);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::size_t idx = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      const double value = i == j ? v[idx] : v[idx] * inv_sqrt2;
      m(i, j) = value;
      m(j, i) = value;
      ++idx;
    }
  }
  return m;
}

}  // namespace mcam
