#include "mobagg/forecast/var.h"

#include <cmath>

#include "mobagg/core/error.h"
#include "mobagg/core/linalg.h"

namespace mobagg::forecast {

VarModel fit_var(std::span<const std::vector<double>> series, std::size_t p) {
  const std::size_t k = series.size();
  if (k < 2) throw ValidationError("VAR needs at least two series; use ARMA for one");
  if (p < 1) throw ValidationError("VAR order must be at least 1");
  const std::size_t n = series[0].size();
  for (const auto& s : series) {
    if (s.size() != n) throw ValidationError("VAR series must be aligned");
    for (double v : s) {
      if (!std::isfinite(v)) throw ValidationError("VAR input must be finite");
    }
  }
  if (n < 10 * (k * p + 1)) throw ValidationError("series too short for requested VAR order");

  const auto rows = static_cast<Eigen::Index>(n - p);
  const auto cols = static_cast<Eigen::Index>(1 + k * p);
  Eigen::MatrixXd x(rows, cols);
  Eigen::MatrixXd y(rows, static_cast<Eigen::Index>(k));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t t = p + static_cast<std::size_t>(r);
    x(r, 0) = 1.0;
    for (std::size_t lag = 1; lag <= p; ++lag) {
      for (std::size_t j = 0; j < k; ++j) {
        x(r, static_cast<Eigen::Index>(1 + (lag - 1) * k + j)) = series[j][t - lag];
      }
    }
    for (std::size_t j = 0; j < k; ++j) y(r, static_cast<Eigen::Index>(j)) = series[j][t];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) throw ValidationError("collinear inputs");
  const Eigen::MatrixXd b = qr.solve(y);  // cols x k
  const Eigen::MatrixXd resid = y - x * b;

  VarModel m;
  m.k = k;
  m.p = p;
  m.n_obs = static_cast<std::size_t>(rows);
  m.c = b.row(0).transpose();
  for (std::size_t lag = 1; lag <= p; ++lag) {
    m.A.push_back(b.block(static_cast<Eigen::Index>(1 + (lag - 1) * k), 0, static_cast<Eigen::Index>(k),
                          static_cast<Eigen::Index>(k))
                      .transpose());
  }
  const double dof = static_cast<double>(rows - cols);
  m.residual_cov = (resid.transpose() * resid) / dof;
  m.residual_cov = 0.5 * (m.residual_cov + m.residual_cov.transpose()).eval();
  return m;
}

Eigen::VectorXd forecast_var(const VarModel& m, const Eigen::MatrixXd& history) {
  if (history.rows() != static_cast<Eigen::Index>(m.k)) throw ValidationError("history has wrong variable count");
  if (history.cols() < static_cast<Eigen::Index>(m.p)) throw ValidationError("history shallower than VAR order");
  Eigen::VectorXd f = m.c;
  const Eigen::Index last = history.cols() - 1;
  for (std::size_t i = 0; i < m.p; ++i) f += m.A[i] * history.col(last - static_cast<Eigen::Index>(i));
  return f;
}

nlohmann::json to_json(const VarModel& m) {
  auto matrix = [](const Eigen::MatrixXd& a) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(a.cols()));
      for (Eigen::Index c = 0; c < a.cols(); ++c) row[static_cast<std::size_t>(c)] = a(r, c);
      rows.push_back(row);
    }
    return rows;
  };
  nlohmann::json a = nlohmann::json::array();
  for (const auto& ai : m.A) a.push_back(matrix(ai));
  return nlohmann::json{{"k", m.k},
                        {"p", m.p},
                        {"c", std::vector<double>(m.c.data(), m.c.data() + m.c.size())},
                        {"A", a},
                        {"residual_cov", matrix(m.residual_cov)},
                        {"n_obs", m.n_obs}};
}

}  // namespace mobagg::forecast
