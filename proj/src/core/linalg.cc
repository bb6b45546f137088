#include "mobagg/core/linalg.h"

#include <cmath>

#include "mobagg/core/error.h"

namespace mobagg {

LeastSquaresFit least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& target) {
  if (design.rows() != target.size()) throw ValidationError("design/target row mismatch");
  LeastSquaresFit fit;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  fit.beta = qr.solve(target);
  fit.rank = qr.rank();
  fit.full_rank = fit.rank == design.cols();
  fit.residuals = target - design * fit.beta;
  fit.rss = fit.residuals.squaredNorm();
  return fit;
}

Eigen::VectorXd coefficient_std_errors(const Eigen::MatrixXd& design, const LeastSquaresFit& fit) {
  const auto n = design.rows();
  const auto k = design.cols();
  if (!fit.full_rank || n <= k) throw ValidationError("standard errors need a full-rank, overdetermined fit");
  const double s2 = fit.rss / static_cast<double>(n - k);
  const Eigen::MatrixXd xtx_inv =
      (design.transpose() * design).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  return (s2 * xtx_inv.diagonal().array()).sqrt();
}

}  // namespace mobagg
