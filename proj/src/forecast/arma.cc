#include "mobagg/forecast/arma.h"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <tuple>

#include "mobagg/core/error.h"
#include "mobagg/core/linalg.h"

namespace mobagg::forecast {
namespace {

constexpr double kTinyVariance = 1e-300;

// Step-down recursion on x_t = sum a_i x_{t-i}: the recursion is stable
// (all roots of 1 - sum a_i z^i outside the unit circle) iff every partial
// autocorrelation it peels off has magnitude below 1.
bool stable_recursion(std::vector<double> a) {
  for (std::size_t m = a.size(); m > 0; --m) {
    const double r = a[m - 1];
    if (!(std::abs(r) < 1.0)) return false;
    std::vector<double> next(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) next[i] = (a[i] + r * a[m - 2 - i]) / (1.0 - r * r);
    a = std::move(next);
  }
  return true;
}

struct CssProblem {
  std::span<const double> y;
  std::size_t p;
  std::size_t q;
  std::size_t start;
  double c_scale;
  mutable std::vector<double> eps;

  // x = (c / c_scale, phi_1..phi_p, theta_1..theta_q)
  double sum_of_squares(const double* x) const {
    const double c = x[0] * c_scale;
    const double* phi = x + 1;
    const double* theta = x + 1 + p;
    // Outside the stationary and invertible region the CSS surface is
    // meaningless and the one-step forecasts explode.
    if (!stable_recursion({phi, phi + p})) return std::numeric_limits<double>::max();
    std::vector<double> ma(q);
    for (std::size_t i = 0; i < q; ++i) ma[i] = -theta[i];
    if (!stable_recursion(std::move(ma))) return std::numeric_limits<double>::max();
    eps.assign(y.size(), 0.0);
    double ss = 0.0;
    for (std::size_t t = start; t < y.size(); ++t) {
      double f = c;
      for (std::size_t i = 1; i <= p; ++i) f += phi[i - 1] * y[t - i];
      for (std::size_t i = 1; i <= q && i <= t; ++i) f += theta[i - 1] * eps[t - i];
      const double e = y[t] - f;
      eps[t] = e;
      ss += e * e;
    }
    return std::isfinite(ss) ? ss : std::numeric_limits<double>::max();
  }
};

double gsl_objective(const gsl_vector* v, void* params) {
  return static_cast<const CssProblem*>(params)->sum_of_squares(v->data);
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

// AR(p) least squares over rows [start, n): returns (c, phi...).
std::vector<double> ar_least_squares(std::span<const double> y, std::size_t p, std::size_t start) {
  const auto rows = static_cast<Eigen::Index>(y.size() - start);
  Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(p + 1));
  Eigen::VectorXd target(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t t = start + static_cast<std::size_t>(r);
    target(r) = y[t];
    x(r, 0) = 1.0;
    for (std::size_t i = 1; i <= p; ++i) x(r, static_cast<Eigen::Index>(i)) = y[t - i];
  }
  const auto fit = least_squares(x, target);
  return {fit.beta.data(), fit.beta.data() + fit.beta.size()};
}

void finish(ArmaModel& m, std::span<const double> y) {
  m.residuals = innovations(m, y, m.conditioning);
  m.css = 0.0;
  for (std::size_t t = m.conditioning; t < y.size(); ++t) m.css += m.residuals[t] * m.residuals[t];
  const double n_eff = static_cast<double>(y.size() - m.conditioning);
  m.sigma2 = m.css / n_eff;
  const double s2 = std::max(m.sigma2, kTinyVariance);
  m.log_likelihood = -0.5 * n_eff * (std::log(2.0 * std::numbers::pi * s2) + 1.0);
  m.aic = n_eff * std::log(s2) + 2.0 * static_cast<double>(m.p + m.q + 1);
}

double sample_stddev(std::span<const double> y) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(y.size()));
}

}  // namespace

namespace {

// Residuals older than the supplied span count as zero pre-sample innovations.
double evaluate(const ArmaModel& m, std::span<const double> history, std::span<const double> residuals) {
  double f = m.c;
  for (std::size_t i = 1; i <= m.p; ++i) f += m.phi[i - 1] * history[history.size() - i];
  for (std::size_t i = 1; i <= m.q && i <= residuals.size(); ++i) f += m.theta[i - 1] * residuals[residuals.size() - i];
  return f;
}

}  // namespace

std::vector<double> innovations(const ArmaModel& m, std::span<const double> y, std::size_t start) {
  std::vector<double> eps(y.size(), 0.0);
  for (std::size_t t = std::max(start, m.p); t < y.size(); ++t) {
    eps[t] = y[t] - evaluate(m, y.first(t), std::span<const double>(eps).first(t));
  }
  return eps;
}

double forecast_one(const ArmaModel& m, std::span<const double> history, std::span<const double> residuals) {
  if (history.size() < m.p) throw ValidationError("forecast needs at least p past values");
  if (residuals.size() < m.q) throw ValidationError("forecast needs at least q past residuals");
  return evaluate(m, history, residuals);
}

ArmaStepper::ArmaStepper(const ArmaModel& model, std::span<const double> training)
    : model_(&model), history_(training.begin(), training.end()) {
  if (model.residuals.size() == training.size()) {
    residuals_ = model.residuals;
  } else {
    residuals_ = innovations(model, training, model.p);
  }
  if (history_.size() < model.p || history_.size() < model.q) {
    throw ValidationError("stepper needs at least max(p, q) training values");
  }
}

double ArmaStepper::predict() const { return forecast_one(*model_, history_, residuals_); }

void ArmaStepper::observe(double value) {
  const double e = value - predict();
  history_.push_back(value);
  residuals_.push_back(e);
}

void ArmaStepper::observe_as_predicted(double value) {
  history_.push_back(value);
  residuals_.push_back(0.0);
}

ArmaModel fit_arma(std::span<const double> y, std::size_t p, std::size_t q, const ArmaFitOptions& options) {
  for (double v : y) {
    if (!std::isfinite(v)) throw ValidationError("ARMA input must be finite");
  }
  if (y.size() < 10 * (p + q + 1)) throw ValidationError("series too short for requested ARMA order");
  ArmaModel m;
  m.p = p;
  m.q = q;
  m.conditioning = std::max(p, options.condition_on);
  if (m.conditioning >= y.size()) throw ValidationError("conditioning leaves no observations");

  // A constant series is fitted exactly by its level; the simplex would
  // otherwise wander the flat directions until the iteration cap.
  if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); })) {
    m.c = y.front();
    m.phi.assign(p, 0.0);
    m.theta.assign(q, 0.0);
    finish(m, y);
    return m;
  }

  const auto seed = ar_least_squares(y, p, m.conditioning);
  m.c = seed[0];
  m.phi.assign(seed.begin() + 1, seed.end());
  m.theta.assign(q, 0.0);
  if (q == 0) {
    finish(m, y);
    return m;
  }

  const double scale = std::max(sample_stddev(y), 1.0);
  CssProblem problem{y, p, q, m.conditioning, scale, {}};
  const std::size_t dim = 1 + p + q;
  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(dim));
  std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(dim));
  // Shrink a non-stationary AR seed towards zero so the search starts inside the feasible region.
  while (!stable_recursion(m.phi)) {
    for (auto& v : m.phi) v *= 0.9;
  }
  gsl_vector_set(x.get(), 0, m.c / scale);
  for (std::size_t i = 0; i < p; ++i) gsl_vector_set(x.get(), 1 + i, m.phi[i]);
  for (std::size_t i = 0; i < q; ++i) gsl_vector_set(x.get(), 1 + p + i, 0.0);

  gsl_multimin_function fn{&gsl_objective, dim, &problem};
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> nm(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim));

  auto take = [&](const gsl_vector* best) {
    m.c = gsl_vector_get(best, 0) * scale;
    for (std::size_t i = 0; i < p; ++i) m.phi[i] = gsl_vector_get(best, 1 + i);
    for (std::size_t i = 0; i < q; ++i) m.theta[i] = gsl_vector_get(best, 1 + p + i);
  };

  // Restart from the optimum until a fresh simplex no longer improves it;
  // a collapsed simplex is the usual Nelder-Mead failure mode.
  double previous = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (std::size_t round = 0; round <= options.max_restarts; ++round) {
    gsl_vector_set_all(step.get(), 0.1);
    gsl_multimin_fminimizer_set(nm.get(), &fn, x.get(), step.get());
    int status = GSL_CONTINUE;
    for (std::size_t it = 0; it < options.max_iterations && status == GSL_CONTINUE; ++it) {
      if (gsl_multimin_fminimizer_iterate(nm.get()) != GSL_SUCCESS) break;
      status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(nm.get()), options.tolerance);
    }
    gsl_vector_memcpy(x.get(), gsl_multimin_fminimizer_x(nm.get()));
    const double value = gsl_multimin_fminimizer_minimum(nm.get());
    if (status == GSL_SUCCESS && previous - value <= 1e-10 * (1.0 + std::abs(value))) {
      converged = true;
      break;
    }
    previous = std::min(previous, value);
  }
  take(x.get());
  finish(m, y);
  if (!converged) throw ArmaFitError("ARMA simplex search did not converge", m);
  return m;
}

ArmaOrder best_order(std::span<const OrderScore> scores) {
  if (scores.empty()) throw ValidationError("no ARMA order could be fitted");
  const OrderScore* best = &scores[0];
  for (const auto& s : scores) {
    const auto key = [](const OrderScore& o) { return std::make_tuple(o.aic, o.order.p + o.order.q, o.order.p); };
    if (key(s) < key(*best)) best = &s;
  }
  return best->order;
}

ArmaOrder select_order(std::span<const double> series, std::size_t p_max, std::size_t q_max) {
  std::vector<OrderScore> scores;
  ArmaFitOptions options;
  options.condition_on = p_max;
  for (std::size_t p = 0; p <= p_max; ++p) {
    for (std::size_t q = 0; q <= q_max; ++q) {
      try {
        const auto m = fit_arma(series, p, q, options);
        scores.push_back({{p, q}, m.aic});
      } catch (const ArmaFitError&) {
        continue;
      }
    }
  }
  return best_order(scores);
}

nlohmann::json to_json(const ArmaModel& m) {
  return nlohmann::json{{"p", m.p},
                        {"q", m.q},
                        {"c", m.c},
                        {"phi", m.phi},
                        {"theta", m.theta},
                        {"sigma2", m.sigma2},
                        {"css", m.css},
                        {"log_likelihood", m.log_likelihood},
                        {"aic", m.aic},
                        {"n_obs", m.residuals.size()},
                        {"conditioning", m.conditioning}};
}

}  // namespace mobagg::forecast
