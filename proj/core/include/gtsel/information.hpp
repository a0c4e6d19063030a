#pragma once

#include <Eigen/Core>
#include <vector>

#include "gtsel/em_lasso.hpp"
#include "gtsel/model.hpp"

namespace gtsel {

enum class InfoMethod { louis, sandwich };

// For louis: observed-data information of (alpha, beta_M) — the full matrix
// and the intercept-profiled slope block (the Schur complement, i.e. the
// precision of the slope estimate alone). For sandwich: a covariance
// estimate (the inverse-information analog), whose beta_block is the plain
// trailing block since covariances marginalize by sub-setting.
struct InformationEstimate {
  Eigen::MatrixXd full;
  Eigen::MatrixXd beta_block;
  InfoMethod method = InfoMethod::louis;
  bool degenerate = false;
};

// Conditional second moments E[(Y - pi)(Y - pi)' | Z] in factored form:
// a diagonal, a rank-one cross-pool outer product and small within-pool
// corrections. Never materialized densely except on demand for testing.
struct CrossMoments {
  Eigen::VectorXd pi;
  Eigen::VectorXd y_hat;
  Eigen::VectorXd diagonal;     // (1 - 2 pi_i) y_i + pi_i^2
  std::vector<double> pool_q;   // Se^z (1-Se)^(1-z) / P(Z_j = z)
  std::vector<std::vector<int>> pools;
  std::vector<int> row_pool;

  double entry(int i, int k) const;
  // V' E[(Y - pi)(Y - pi)' | Z] V in O(n q^2 + sum_j |P_j| q + J q^2).
  Eigen::MatrixXd quadratic_form(const Eigen::MatrixXd& v) const;
  Eigen::MatrixXd dense() const;
};

// Complete-data information sum_i pi_i (1 - pi_i) [1, x_Mi] [1, x_Mi]'.
Eigen::MatrixXd complete_data_information(const SubmodelCoefficients& theta,
                                          const Dataset& data);

CrossMoments conditional_cross_moments(const SubmodelCoefficients& theta,
                                       const Eigen::VectorXd& y_hat,
                                       const Dataset& data);

// Louis' missing-information form: complete-data information minus the
// conditional variance of the complete-data score. Exactly the negative
// observed-data Hessian at the evaluation point; degenerate is set instead
// of throwing when the result is not positive definite.
InformationEstimate louis_information(const PenalizedFit& fit,
                                      const SubmodelCoefficients& theta,
                                      const Dataset& data);

// Robust covariance sandwich around the complete-data information with the
// conditional score outer product as filling. Throws degenerate_design_error
// when the complete-data information is singular.
InformationEstimate sandwich_covariance(const PenalizedFit& fit,
                                        const SubmodelCoefficients& theta,
                                        const Dataset& data);

}  // namespace gtsel
