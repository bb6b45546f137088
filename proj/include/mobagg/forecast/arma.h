#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace mobagg::forecast {

struct ArmaOrder {
  std::size_t p = 0;
  std::size_t q = 0;
  friend bool operator==(const ArmaOrder&, const ArmaOrder&) = default;
};

// Y_t = c + sum_i phi_i Y_{t-i} + eps_t + sum_i theta_i eps_{t-i}
struct ArmaModel {
  std::size_t p = 0;
  std::size_t q = 0;
  double c = 0.0;
  std::vector<double> phi;
  std::vector<double> theta;
  double sigma2 = 0.0;
  // One entry per training observation; entries before `conditioning` are the
  // zero pre-sample innovations.
  std::vector<double> residuals;
  std::size_t conditioning = 0;
  double css = 0.0;             // conditional sum of squares
  double log_likelihood = 0.0;  // Gaussian, evaluated at sigma2
  double aic = 0.0;             // n ln(sigma2) + 2 (p + q + 1)

  ArmaOrder order() const { return {p, q}; }
};

class ArmaFitError : public std::runtime_error {
 public:
  ArmaFitError(const std::string& what, ArmaModel best) : std::runtime_error(what), best_(std::move(best)) {}
  const ArmaModel& best_so_far() const { return best_; }

 private:
  ArmaModel best_;
};

struct ArmaFitOptions {
  // First observation that enters the objective; raised to p when smaller.
  // Fitting several orders with the same value makes their AICs comparable.
  std::size_t condition_on = 0;
  std::size_t max_iterations = 20000;
  std::size_t max_restarts = 3;
  double tolerance = 1e-5;  // simplex size, in coefficient units
};

// Conditional-sum-of-squares fit with zero pre-sample innovations. q = 0 is
// solved exactly by least squares; otherwise a Nelder-Mead simplex search is
// seeded from the AR(p) least-squares solution. Requires n >= 10 (p + q + 1).
ArmaModel fit_arma(std::span<const double> series, std::size_t p, std::size_t q, const ArmaFitOptions& options = {});

// c + sum phi_i history[-i] + sum theta_i residuals[-i]; the future innovation is 0.
double forecast_one(const ArmaModel& model, std::span<const double> history, std::span<const double> recent_residuals);

// Innovations of `series` under the model's coefficients, zero before `start`.
std::vector<double> innovations(const ArmaModel& model, std::span<const double> series, std::size_t start);

// Walks a fitted model forward one observation at a time: predict the next
// value, then feed it the true observation (or a substitute) so the history
// and innovation windows slide.
class ArmaStepper {
 public:
  // `training` must be the series the model was fitted on (its residuals are reused).
  ArmaStepper(const ArmaModel& model, std::span<const double> training);

  double predict() const;
  // Appends the observation and its innovation (observation - predict()).
  void observe(double value);
  // Appends a value with a zero innovation, as if it had been predicted exactly.
  void observe_as_predicted(double value);

 private:
  const ArmaModel* model_;
  std::vector<double> history_;
  std::vector<double> residuals_;
};

struct OrderScore {
  ArmaOrder order;
  double aic = 0.0;
};

// Lowest AIC; ties go to the smaller p + q, then the smaller p.
ArmaOrder best_order(std::span<const OrderScore> scores);

// Grid search over p <= p_max, q <= q_max by AIC, all candidates conditioned
// on the first p_max observations. Candidates whose fit fails are skipped.
ArmaOrder select_order(std::span<const double> series, std::size_t p_max = 5, std::size_t q_max = 5);

nlohmann::json to_json(const ArmaModel& model);

}  // namespace mobagg::forecast
