#include "gtsel/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gtsel {

namespace {

double clamp_prob(double p) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

// Stable logistic: never exponentiates a positive argument.
double logistic(double eta) {
  if (eta >= 0.0) {
    return clamp_prob(1.0 / (1.0 + std::exp(-eta)));
  }
  const double e = std::exp(eta);
  return clamp_prob(e / (1.0 + e));
}

}  // namespace

bool Dataset::all_singletons() const {
  return std::all_of(pools.begin(), pools.end(),
                     [](const std::vector<int>& pool) { return pool.size() == 1; });
}

void Dataset::validate() const {
  const int rows = n();
  if (rows == 0 || p() == 0) {
    throw std::invalid_argument("dataset must have at least one row and one covariate");
  }
  if (!X.allFinite()) {
    throw std::invalid_argument("covariate matrix contains non-finite entries");
  }
  if (pools.empty()) {
    throw std::invalid_argument("dataset must contain at least one pool");
  }
  if (z.size() != pools.size()) {
    throw std::invalid_argument("pool outcomes and pool list differ in length");
  }
  std::vector<char> seen(rows, 0);
  for (std::size_t j = 0; j < pools.size(); ++j) {
    if (pools[j].empty()) {
      throw std::invalid_argument("pool " + std::to_string(j) + " is empty");
    }
    for (int i : pools[j]) {
      if (i < 0 || i >= rows) {
        throw std::invalid_argument("pool member index out of range");
      }
      if (seen[i]) {
        throw std::invalid_argument("row " + std::to_string(i) +
                                    " appears in more than one pool");
      }
      seen[i] = 1;
    }
    if (z[j] != 0 && z[j] != 1) {
      throw std::invalid_argument("pool outcomes must be 0 or 1");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw std::invalid_argument("pools do not cover every row");
  }
  if (!(se > 0.0 && se <= 1.0) || !(sp > 0.0 && sp <= 1.0)) {
    throw std::invalid_argument("se and sp must lie in (0, 1]");
  }
}

Dataset Dataset::individual(Eigen::MatrixXd X, std::vector<int> z,
                            double se, double sp) {
  Dataset data;
  data.X = std::move(X);
  data.pools.reserve(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    data.pools.push_back({static_cast<int>(i)});
  }
  data.z = std::move(z);
  data.se = se;
  data.sp = sp;
  data.validate();
  return data;
}

double logistic_mean(const Coefficients& theta,
                     const Eigen::Ref<const Eigen::VectorXd>& x) {
  return logistic(theta.alpha + theta.beta.dot(x));
}

Eigen::VectorXd logistic_means(const Coefficients& theta,
                               const Eigen::MatrixXd& X) {
  Eigen::VectorXd eta = (X * theta.beta).array() + theta.alpha;
  for (int i = 0; i < eta.size(); ++i) {
    eta[i] = logistic(eta[i]);
  }
  return eta;
}

Eigen::VectorXd logistic_means(const SubmodelCoefficients& theta,
                               const Eigen::MatrixXd& X) {
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(X.rows(), theta.alpha);
  for (std::size_t k = 0; k < theta.model.size(); ++k) {
    eta += theta.beta[static_cast<int>(k)] * X.col(theta.model[k]);
  }
  for (int i = 0; i < eta.size(); ++i) {
    eta[i] = logistic(eta[i]);
  }
  return eta;
}

Coefficients expand(const SubmodelCoefficients& theta, int p) {
  Coefficients full;
  full.alpha = theta.alpha;
  full.beta = Eigen::VectorXd::Zero(p);
  for (std::size_t k = 0; k < theta.model.size(); ++k) {
    const int j = theta.model[k];
    if (j < 0 || j >= p) {
      throw std::invalid_argument("submodel index out of range");
    }
    full.beta[j] = theta.beta[static_cast<int>(k)];
  }
  return full;
}

SubmodelCoefficients restrict_to(const Coefficients& theta,
                                 const std::vector<int>& model) {
  SubmodelCoefficients sub;
  sub.model = model;
  sub.alpha = theta.alpha;
  sub.beta = Eigen::VectorXd(model.size());
  for (std::size_t k = 0; k < model.size(); ++k) {
    const int j = model[k];
    if (j < 0 || j >= theta.beta.size()) {
      throw std::invalid_argument("submodel index out of range");
    }
    if (k > 0 && model[k] <= model[k - 1]) {
      throw std::invalid_argument("submodel indices must be strictly increasing");
    }
    sub.beta[static_cast<int>(k)] = theta.beta[j];
  }
  return sub;
}

double pool_negative_prob(const Eigen::VectorXd& pi, const Dataset& data,
                          int pool_index) {
  if (pool_index < 0 || pool_index >= data.pool_count()) {
    throw std::invalid_argument("pool index out of range");
  }
  double all_negative = 1.0;
  for (int i : data.pools[pool_index]) {
    all_negative *= 1.0 - pi[i];
  }
  return (1.0 - data.se) * (1.0 - all_negative) + data.sp * all_negative;
}

namespace {

double observed_loglik_impl(const Eigen::VectorXd& pi, const Dataset& data) {
  double ll = 0.0;
  for (int j = 0; j < data.pool_count(); ++j) {
    const double p0 = pool_negative_prob(pi, data, j);
    ll += data.z[j] == 0 ? std::log(p0) : std::log1p(-p0);
  }
  return ll;
}

}  // namespace

double observed_loglik(const Coefficients& theta, const Dataset& data) {
  return observed_loglik_impl(logistic_means(theta, data.X), data);
}

double observed_loglik(const SubmodelCoefficients& theta, const Dataset& data) {
  return observed_loglik_impl(logistic_means(theta, data.X), data);
}

CriterionPair aic_bic_from_loglik(double loglik, int model_size, int n) {
  if (model_size < 0 || n <= 0) {
    throw std::invalid_argument("model size must be >= 0 and n positive");
  }
  const double k = static_cast<double>(model_size) + 1.0;
  return {-2.0 * loglik + 2.0 * k, -2.0 * loglik + std::log(static_cast<double>(n)) * k};
}

CriterionPair aic_bic(const SubmodelCoefficients& theta, const Dataset& data) {
  return aic_bic_from_loglik(observed_loglik(theta, data),
                             static_cast<int>(theta.model.size()), data.n());
}

}  // namespace gtsel
