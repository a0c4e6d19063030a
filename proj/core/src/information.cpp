#include "gtsel/information.hpp"

#include <Eigen/Cholesky>
#include <stdexcept>

#include "gtsel/errors.hpp"

namespace gtsel {

namespace {

Eigen::MatrixXd selected_design(const Dataset& data, const std::vector<int>& model) {
  Eigen::MatrixXd v(data.n(), model.size() + 1);
  v.col(0).setOnes();
  for (std::size_t k = 0; k < model.size(); ++k) {
    v.col(static_cast<int>(k) + 1) = data.X.col(model[k]);
  }
  return v;
}

bool is_positive_definite(const Eigen::MatrixXd& m) {
  return Eigen::LLT<Eigen::MatrixXd>(m).info() == Eigen::Success;
}

}  // namespace

double CrossMoments::entry(int i, int k) const {
  if (i == k) {
    return diagonal[i];
  }
  const double gi = y_hat[i] - pi[i];
  const double gk = y_hat[k] - pi[k];
  if (row_pool[i] != row_pool[k]) {
    return gi * gk;
  }
  // Within a pool the latent responses are conditionally dependent:
  // E[Y_i Y_k | Z_j] = q_j pi_i pi_k.
  const double eyy = pool_q[row_pool[i]] * pi[i] * pi[k];
  return eyy - pi[k] * y_hat[i] - pi[i] * y_hat[k] + pi[i] * pi[k];
}

Eigen::MatrixXd CrossMoments::quadratic_form(const Eigen::MatrixXd& v) const {
  const int n = static_cast<int>(pi.size());
  if (v.rows() != n) {
    throw std::invalid_argument("design row count does not match the moments");
  }
  const Eigen::VectorXd g = y_hat - pi;

  // Cross-pool entries factor as g g'; the diagonal replaces g_i^2; each
  // pool then needs an off-diagonal correction q_j pi pi' - y y' inside it.
  const Eigen::VectorXd vg = v.transpose() * g;
  Eigen::MatrixXd result = vg * vg.transpose();
  result += v.transpose() *
            (diagonal - g.cwiseProduct(g)).asDiagonal() * v;

  const int q1 = static_cast<int>(v.cols());
  Eigen::VectorXd vp(q1), vy(q1);
  for (std::size_t j = 0; j < pools.size(); ++j) {
    const auto& pool = pools[j];
    if (pool.size() < 2) {
      continue;
    }
    vp.setZero();
    vy.setZero();
    Eigen::MatrixXd vdv = Eigen::MatrixXd::Zero(q1, q1);
    for (int i : pool) {
      vp += pi[i] * v.row(i).transpose();
      vy += y_hat[i] * v.row(i).transpose();
      vdv.noalias() +=
          (pool_q[j] * pi[i] * pi[i] - y_hat[i] * y_hat[i]) *
          (v.row(i).transpose() * v.row(i));
    }
    result.noalias() += pool_q[j] * (vp * vp.transpose());
    result.noalias() -= vy * vy.transpose();
    result -= vdv;
  }
  return result;
}

Eigen::MatrixXd CrossMoments::dense() const {
  const int n = static_cast<int>(pi.size());
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      d(i, k) = entry(i, k);
    }
  }
  return d;
}

Eigen::MatrixXd complete_data_information(const SubmodelCoefficients& theta,
                                          const Dataset& data) {
  const Eigen::VectorXd pi = logistic_means(theta, data.X);
  const Eigen::MatrixXd v = selected_design(data, theta.model);
  return v.transpose() *
         (pi.array() * (1.0 - pi.array())).matrix().asDiagonal() * v;
}

CrossMoments conditional_cross_moments(const SubmodelCoefficients& theta,
                                       const Eigen::VectorXd& y_hat,
                                       const Dataset& data) {
  if (y_hat.size() != data.n()) {
    throw std::invalid_argument("y_hat length does not match the dataset");
  }
  CrossMoments cm;
  cm.pi = logistic_means(theta, data.X);
  cm.y_hat = y_hat;
  cm.diagonal = (1.0 - 2.0 * cm.pi.array()) * y_hat.array() +
                cm.pi.array().square();
  cm.pools = data.pools;
  cm.row_pool.assign(data.n(), -1);
  cm.pool_q.resize(data.pools.size());
  for (int j = 0; j < data.pool_count(); ++j) {
    const double p0 = pool_negative_prob(cm.pi, data, j);
    cm.pool_q[j] = data.z[j] == 1 ? data.se / (1.0 - p0) : (1.0 - data.se) / p0;
    for (int i : data.pools[j]) {
      cm.row_pool[i] = j;
    }
  }
  return cm;
}

InformationEstimate louis_information(const PenalizedFit& fit,
                                      const SubmodelCoefficients& theta,
                                      const Dataset& data) {
  const Eigen::MatrixXd v = selected_design(data, theta.model);
  const CrossMoments cm = conditional_cross_moments(theta, fit.y_hat, data);
  const Eigen::MatrixXd complete =
      v.transpose() *
      (cm.pi.array() * (1.0 - cm.pi.array())).matrix().asDiagonal() * v;

  InformationEstimate est;
  est.method = InfoMethod::louis;
  // Missing information is the conditional *variance* of the complete-data
  // score, so the observed-score outer product is added back; without it the
  // estimate is not the observed-data Hessian whenever the score is nonzero
  // (as at any penalized optimum) and can lose positive definiteness.
  const Eigen::VectorXd score = v.transpose() * (fit.y_hat - cm.pi);
  est.full = complete - cm.quadratic_form(v) + score * score.transpose();
  est.full = 0.5 * (est.full + est.full.transpose().eval());
  const int q = static_cast<int>(theta.model.size());
  // The slope estimate's precision is the intercept-profiled information
  // (Schur complement), not the raw slope block: the raw block ignores the
  // intercept-slope coupling and overstates precision by a factor that does
  // not shrink as n grows.
  est.beta_block = est.full.bottomRightCorner(q, q);
  if (est.full(0, 0) > 0.0) {
    est.beta_block -= est.full.bottomLeftCorner(q, 1) *
                      est.full.topRightCorner(1, q) / est.full(0, 0);
    est.beta_block =
        0.5 * (est.beta_block + est.beta_block.transpose().eval());
  }
  est.degenerate = !is_positive_definite(est.full);
  return est;
}

InformationEstimate sandwich_covariance(const PenalizedFit& fit,
                                        const SubmodelCoefficients& theta,
                                        const Dataset& data) {
  const Eigen::MatrixXd v = selected_design(data, theta.model);
  const Eigen::VectorXd pi = logistic_means(theta, data.X);
  const Eigen::MatrixXd complete =
      v.transpose() *
      (pi.array() * (1.0 - pi.array())).matrix().asDiagonal() * v;
  Eigen::LLT<Eigen::MatrixXd> llt(complete);
  if (llt.info() != Eigen::Success) {
    throw degenerate_design_error("complete-data information is singular");
  }

  const Eigen::VectorXd g = fit.y_hat - pi;
  const Eigen::MatrixXd middle =
      v.transpose() * g.cwiseProduct(g).asDiagonal() * v;

  InformationEstimate est;
  est.method = InfoMethod::sandwich;
  est.full = llt.solve(llt.solve(middle).transpose());
  est.full = 0.5 * (est.full + est.full.transpose().eval());
  const int q = static_cast<int>(theta.model.size());
  est.beta_block = est.full.bottomRightCorner(q, q);
  est.degenerate = false;
  return est;
}

}  // namespace gtsel
