#include "gtsel/em_lasso.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gtsel {

namespace {

double clamp_prob(double p) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

double soft_threshold(double u, double lambda) {
  if (u > lambda) return u - lambda;
  if (u < -lambda) return u + lambda;
  return 0.0;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

std::vector<int> PenalizedFit::selected_model() const {
  std::vector<int> model;
  for (int j = 0; j < theta_hat.beta.size(); ++j) {
    if (theta_hat.beta[j] != 0.0) {
      model.push_back(j);
    }
  }
  return model;
}

Eigen::VectorXd PenalizedFit::selected_signs() const {
  const auto model = selected_model();
  Eigen::VectorXd signs(model.size());
  for (std::size_t k = 0; k < model.size(); ++k) {
    signs[static_cast<int>(k)] = theta_hat.beta[model[k]] > 0.0 ? 1.0 : -1.0;
  }
  return signs;
}

SubmodelCoefficients PenalizedFit::submodel() const {
  return restrict_to(theta_hat, selected_model());
}

bool KktReport::ok(double lambda) const {
  if (std::abs(intercept_residual) > tolerance) {
    return false;
  }
  for (const auto& [j, g] : active_residuals) {
    (void)j;
    if (std::abs(std::abs(g) - lambda) > tolerance) {
      return false;
    }
  }
  for (const auto& [j, g] : inactive_bounds) {
    (void)j;
    if (g > lambda + tolerance) {
      return false;
    }
  }
  return true;
}

Eigen::VectorXd e_step_group(const Coefficients& theta, const Dataset& data) {
  const Eigen::VectorXd pi = logistic_means(theta, data.X);
  Eigen::VectorXd y_hat(data.n());
  for (int j = 0; j < data.pool_count(); ++j) {
    const double p0 = pool_negative_prob(pi, data, j);
    // q = Se^z (1-Se)^(1-z) / P(Z_j = z); y_hat_i = q * pi_i within the pool.
    const double q = data.z[j] == 1 ? data.se / (1.0 - p0) : (1.0 - data.se) / p0;
    for (int i : data.pools[j]) {
      // A conditional expectation of a binary variable; the clamp only strips
      // roundoff (e.g. pi * (1/pi) one ulp above one at perfect accuracies).
      y_hat[i] = std::clamp(q * pi[i], 0.0, 1.0);
    }
  }
  return y_hat;
}

Eigen::VectorXd e_step_individual(const Coefficients& theta, const Dataset& data) {
  if (!data.all_singletons()) {
    throw std::invalid_argument("e_step_individual requires singleton pools");
  }
  return e_step_group(theta, data);
}

MStepResult m_step_penalized(const Eigen::VectorXd& y_hat, const Dataset& data,
                             double lambda, const Coefficients& warm_start,
                             const EmOptions& opts) {
  const int n = data.n();
  const int p = data.p();
  if (y_hat.size() != n) {
    throw std::invalid_argument("y_hat length does not match the dataset");
  }
  if (!y_hat.allFinite() || y_hat.minCoeff() < 0.0 || y_hat.maxCoeff() > 1.0) {
    throw std::invalid_argument("y_hat entries must lie in [0, 1]");
  }
  if (lambda < 0.0 || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be non-negative and finite");
  }
  if (warm_start.beta.size() != p) {
    throw std::invalid_argument("warm start dimension does not match the dataset");
  }

  double alpha = warm_start.alpha;
  Eigen::VectorXd beta = warm_start.beta;
  Eigen::VectorXd eta(n), w(n), r(n);
  Eigen::MatrixXd wx(n, p);
  Eigen::VectorXd xtwx(p);

  MStepResult result;
  const int max_outer = 200;
  for (int outer = 0; outer < max_outer; ++outer) {
    eta = (data.X * beta).array() + alpha;
    double sw = 0.0;
    for (int i = 0; i < n; ++i) {
      const double pi = clamp_prob(1.0 / (1.0 + std::exp(-eta[i])));
      const double wi = std::max(pi * (1.0 - pi), opts.weight_floor);
      w[i] = wi;
      sw += wi;
      // r holds the working residual z_i - eta_i = (y_i - pi_i) / w_i.
      r[i] = (y_hat[i] - pi) / wi;
    }
    for (int j = 0; j < p; ++j) {
      wx.col(j) = w.cwiseProduct(data.X.col(j));
      xtwx[j] = wx.col(j).dot(data.X.col(j));
    }

    const double alpha_before = alpha;
    const Eigen::VectorXd beta_before = beta;

    // Cyclic coordinate descent on 1/2 sum w (z - alpha - x'beta)^2 + lambda |beta|_1.
    while (true) {
      double delta = 0.0;
      const double da = w.dot(r) / sw;
      if (da != 0.0) {
        alpha += da;
        r.array() -= da;
        delta = std::abs(da);
      }
      for (int j = 0; j < p; ++j) {
        if (xtwx[j] <= 0.0) {
          continue;
        }
        const double u = wx.col(j).dot(r) + xtwx[j] * beta[j];
        const double bj = soft_threshold(u, lambda) / xtwx[j];
        const double db = bj - beta[j];
        if (db != 0.0) {
          r -= db * data.X.col(j);
          beta[j] = bj;
          delta = std::max(delta, std::abs(db));
        }
      }
      ++result.sweeps;
      if (delta < opts.cd_tolerance || result.sweeps >= opts.max_sweeps) {
        break;
      }
    }

    const double moved = std::max((beta - beta_before).cwiseAbs().maxCoeff(),
                                  std::abs(alpha - alpha_before));
    if (moved < opts.cd_tolerance) {
      result.converged = true;
      break;
    }
    if (result.sweeps >= opts.max_sweeps) {
      break;
    }
  }

  result.theta.alpha = alpha;
  result.theta.beta = std::move(beta);
  return result;
}

double lasso_lambda_max(const Eigen::VectorXd& y_hat, const Dataset& data) {
  const double ybar = y_hat.mean();
  return (data.X.transpose() * (y_hat.array() - ybar).matrix())
      .cwiseAbs()
      .maxCoeff();
}

Coefficients default_init(const Dataset& data) {
  double zbar = 0.0;
  for (int zj : data.z) {
    zbar += zj;
  }
  zbar /= data.pool_count();
  const double denom = data.se + data.sp - 1.0;
  // Assay-error corrected pool prevalence; fall back to the raw rate when
  // the assay carries no information (se + sp = 1).
  double p_adj = std::abs(denom) > 1e-6 ? (zbar + data.sp - 1.0) / denom : zbar;
  p_adj = std::min(0.999, std::max(0.001, p_adj));
  const double mbar =
      static_cast<double>(data.n()) / static_cast<double>(data.pool_count());
  const double p_ind = 1.0 - std::pow(1.0 - p_adj, 1.0 / mbar);

  Coefficients theta;
  theta.alpha = logit(std::min(0.99, std::max(0.01, p_ind)));
  theta.beta = Eigen::VectorXd::Zero(data.p());
  return theta;
}

PenalizedFit em_fit(const Dataset& data, double lambda,
                    const std::optional<Coefficients>& init,
                    const EmOptions& opts) {
  data.validate();
  if (lambda < 0.0 || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be non-negative and finite");
  }
  Coefficients theta = init.value_or(default_init(data));
  if (theta.beta.size() != data.p()) {
    throw std::invalid_argument("init dimension does not match the dataset");
  }

  PenalizedFit fit;
  fit.lambda = lambda;
  const double scale = 1.0 / std::sqrt(static_cast<double>(data.n()));

  Eigen::VectorXd y_in = e_step_group(theta, data);
  for (int k = 1; k <= opts.max_em_iterations; ++k) {
    const MStepResult ms = m_step_penalized(y_in, data, lambda, theta, opts);
    theta = ms.theta;
    fit.m_step_converged = ms.converged;
    fit.iterations = k;
    fit.em_trace.push_back(observed_loglik(theta, data) -
                           lambda * theta.beta.cwiseAbs().sum());

    const Eigen::VectorXd y_out = e_step_group(theta, data);
    if ((y_out - y_in).norm() * scale < opts.y_tolerance) {
      fit.converged = true;
      break;
    }
    if (k == opts.max_em_iterations) {
      break;
    }
    y_in = y_out;
  }

  const Eigen::VectorXd pi = logistic_means(theta, data.X);
  fit.theta_hat = std::move(theta);
  fit.y_hat = std::move(y_in);
  fit.weights = pi.array() * (1.0 - pi.array());
  fit.weights = fit.weights.cwiseMax(opts.weight_floor);
  fit.working_response =
      (data.X * fit.theta_hat.beta).array() + fit.theta_hat.alpha +
      ((fit.y_hat - pi).array() / fit.weights.array());
  return fit;
}

KktReport kkt_check(const PenalizedFit& fit, const Dataset& data) {
  const int n = data.n();
  const int p = data.p();
  if (fit.y_hat.size() != n || fit.theta_hat.beta.size() != p) {
    throw std::invalid_argument("fit does not match the dataset");
  }
  const Eigen::VectorXd eta =
      (data.X * fit.theta_hat.beta).array() + fit.theta_hat.alpha;
  const Eigen::VectorXd weighted_residual =
      fit.weights.array() * (eta - fit.working_response).array();

  KktReport report;
  report.tolerance = 1e-6 * static_cast<double>(n);
  report.intercept_residual = weighted_residual.sum();
  const Eigen::VectorXd grad = data.X.transpose() * weighted_residual;
  for (int j = 0; j < p; ++j) {
    if (fit.theta_hat.beta[j] != 0.0) {
      report.active_residuals[j] = grad[j];
    } else {
      report.inactive_bounds[j] = std::abs(grad[j]);
    }
  }
  return report;
}

}  // namespace gtsel
