#pragma once

#include <Eigen/Dense>

namespace mobagg {

struct LeastSquaresFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  double rss = 0.0;
  Eigen::Index rank = 0;
  bool full_rank = false;
};

// Ordinary least squares by column-pivoted QR. Rank-deficient designs still
// produce a (basic) solution; callers that need uniqueness check full_rank.
LeastSquaresFit least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& target);

// Standard errors of the coefficients of a full-rank fit, using the
// unbiased residual variance rss / (n - k).
Eigen::VectorXd coefficient_std_errors(const Eigen::MatrixXd& design, const LeastSquaresFit& fit);

}  // namespace mobagg
