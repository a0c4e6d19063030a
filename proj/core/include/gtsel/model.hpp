#pragma once

#include <Eigen/Core>
#include <vector>

namespace gtsel {

// Success probabilities are clamped to [kProbClamp, 1 - kProbClamp] so that
// logs, conditional expectation ratios and IRLS weights stay finite.
inline constexpr double kProbClamp = 1e-10;

// Full-model logistic coefficients: intercept plus one slope per column of X.
struct Coefficients {
  double alpha = 0.0;
  Eigen::VectorXd beta;
};

// Coefficients restricted to a selected submodel. `model` holds 0-based
// column indices, strictly increasing; `beta` is aligned with it.
struct SubmodelCoefficients {
  std::vector<int> model;
  double alpha = 0.0;
  Eigen::VectorXd beta;
};

// Binary regression data observed through individual or pooled assays.
// Pools partition the row indices 0..n-1; z[j] is the assay outcome of pool
// j; se/sp are assay sensitivity and specificity. Individual testing is the
// special case where every pool is a singleton.
struct Dataset {
  Eigen::MatrixXd X;
  std::vector<std::vector<int>> pools;
  std::vector<int> z;
  double se = 1.0;
  double sp = 1.0;

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }
  int pool_count() const { return static_cast<int>(pools.size()); }
  bool all_singletons() const;

  // Throws std::invalid_argument on any structural violation: empty data,
  // pools not an exact partition, z not in {0,1}, se/sp outside (0, 1].
  void validate() const;

  static Dataset individual(Eigen::MatrixXd X, std::vector<int> z,
                            double se, double sp);
};

// Clamped logistic mean for one covariate row.
double logistic_mean(const Coefficients& theta,
                     const Eigen::Ref<const Eigen::VectorXd>& x);

// Clamped logistic means for every row of X.
Eigen::VectorXd logistic_means(const Coefficients& theta,
                               const Eigen::MatrixXd& X);
Eigen::VectorXd logistic_means(const SubmodelCoefficients& theta,
                               const Eigen::MatrixXd& X);

Coefficients expand(const SubmodelCoefficients& theta, int p);
SubmodelCoefficients restrict_to(const Coefficients& theta,
                                 const std::vector<int>& model);

// P(Z_j = 0) under theta: an error-prone assay on the pooled response,
//   (1 - se) * (1 - prod_{i in pool}(1 - pi_i)) + sp * prod_{i in pool}(1 - pi_i).
// `pi` must hold the clamped per-individual means for the same theta.
double pool_negative_prob(const Eigen::VectorXd& pi, const Dataset& data,
                          int pool_index);

// Observed-data log likelihood: sum over pools of the z-appropriate log
// assay probability.
double observed_loglik(const Coefficients& theta, const Dataset& data);
double observed_loglik(const SubmodelCoefficients& theta, const Dataset& data);

struct CriterionPair {
  double aic = 0.0;
  double bic = 0.0;
};

// Information criteria with model_size + 1 parameters (selected slopes plus
// the always-present intercept).
CriterionPair aic_bic_from_loglik(double loglik, int model_size, int n);
CriterionPair aic_bic(const SubmodelCoefficients& theta, const Dataset& data);

}  // namespace gtsel
