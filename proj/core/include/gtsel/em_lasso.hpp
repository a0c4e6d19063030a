#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <vector>

#include "gtsel/model.hpp"

namespace gtsel {

struct EmOptions {
  int max_em_iterations = 500;
  // Stop when ||y_next - y_prev||_2 / sqrt(n) falls below this.
  double y_tolerance = 1e-6;
  // Coordinate descent: max coefficient change per sweep below cd_tolerance,
  // with a shared budget of max_sweeps across all relinearizations.
  double cd_tolerance = 1e-10;
  int max_sweeps = 10000;
  double weight_floor = 1e-10;
};

// Converged penalized EM fit. y_hat is the E-step output the final M-step
// solved against, so (theta_hat, y_hat) satisfy the penalized stationarity
// equations exactly; the stopping rule guarantees a fresh E-step at
// theta_hat moves y_hat by less than y_tolerance * sqrt(n).
struct PenalizedFit {
  Coefficients theta_hat;
  Eigen::VectorXd y_hat;
  Eigen::VectorXd weights;           // floored pi_hat (1 - pi_hat)
  Eigen::VectorXd working_response;  // eta_hat + (y_hat - pi_hat) / weights
  double lambda = 0.0;
  int iterations = 0;
  bool converged = false;
  bool m_step_converged = true;
  // Penalized observed-data log likelihood after each M-step.
  std::vector<double> em_trace;

  std::vector<int> selected_model() const;
  Eigen::VectorXd selected_signs() const;
  SubmodelCoefficients submodel() const;
};

struct KktReport {
  double intercept_residual = 0.0;
  std::map<int, double> active_residuals;  // expected value is -lambda * sign
  std::map<int, double> inactive_bounds;   // |gradient|, expected <= lambda
  double tolerance = 0.0;

  bool ok(double lambda) const;
};

// Conditional expectation of the latent responses given assay outcomes.
// The individual-testing version requires every pool to be a singleton and
// shares the group code path, so the two agree bitwise on singleton data.
Eigen::VectorXd e_step_group(const Coefficients& theta, const Dataset& data);
Eigen::VectorXd e_step_individual(const Coefficients& theta, const Dataset& data);

struct MStepResult {
  Coefficients theta;
  bool converged = false;
  int sweeps = 0;
};

// Weighted penalized logistic regression of y_hat on X: cyclic coordinate
// descent with soft-thresholding over an IRLS quadratic majorization. The
// intercept is never penalized. lambda is on the raw log-likelihood scale.
MStepResult m_step_penalized(const Eigen::VectorXd& y_hat, const Dataset& data,
                             double lambda, const Coefficients& warm_start,
                             const EmOptions& opts = {});

// Smallest penalty for which the slope vector is entirely zero given the
// current conditional expectations.
double lasso_lambda_max(const Eigen::VectorXd& y_hat, const Dataset& data);

// Deterministic initialization: method-of-moments prevalence corrected for
// assay error and the average pool size, slopes at zero.
Coefficients default_init(const Dataset& data);

PenalizedFit em_fit(const Dataset& data, double lambda,
                    const std::optional<Coefficients>& init = std::nullopt,
                    const EmOptions& opts = {});

// Stationarity diagnostics of a fit in weighted least squares form, using
// the fit's stored weights and working response.
KktReport kkt_check(const PenalizedFit& fit, const Dataset& data);

}  // namespace gtsel
