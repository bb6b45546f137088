#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"

namespace mobagg::forecast {

// y_t = c + A_1 y_{t-1} + ... + A_p y_{t-p} + e_t, with k variables.
struct VarModel {
  std::size_t k = 0;
  std::size_t p = 0;
  Eigen::VectorXd c;
  std::vector<Eigen::MatrixXd> A;  // A[i] multiplies y_{t-1-i}
  Eigen::MatrixXd residual_cov;    // Omega, degrees-of-freedom adjusted
  std::size_t n_obs = 0;           // rows used by the regression
};

// Equation-by-equation least squares on a common lagged design. `series`
// holds k aligned sequences. Requires k >= 2 and length >= 10 (k p + 1);
// throws ValidationError("collinear inputs") when the design is singular.
VarModel fit_var(std::span<const std::vector<double>> series, std::size_t p);

// history: k x depth, oldest column first, newest last; depth >= p.
Eigen::VectorXd forecast_var(const VarModel& model, const Eigen::MatrixXd& history);

nlohmann::json to_json(const VarModel& model);

}  // namespace mobagg::forecast
