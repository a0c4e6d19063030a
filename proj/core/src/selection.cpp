#include "gtsel/selection.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gtsel/errors.hpp"

namespace gtsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd selected_design(const Dataset& data, const std::vector<int>& model) {
  Eigen::MatrixXd v(data.n(), model.size() + 1);
  v.col(0).setOnes();
  for (std::size_t k = 0; k < model.size(); ++k) {
    v.col(static_cast<int>(k) + 1) = data.X.col(model[k]);
  }
  return v;
}

Eigen::LLT<Eigen::MatrixXd> cholesky_or_throw(const Eigen::MatrixXd& m,
                                              const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw degenerate_design_error(what);
  }
  return llt;
}

}  // namespace

Eigen::MatrixXd weighted_information(const PenalizedFit& fit, const Dataset& data) {
  const Eigen::MatrixXd v = selected_design(data, fit.selected_model());
  return v.transpose() * fit.weights.asDiagonal() * v;
}

Eigen::VectorXd shrinkage_offset(const Eigen::MatrixXd& info, double lambda,
                                 const Eigen::VectorXd& signs) {
  if (info.rows() != info.cols() || info.rows() != signs.size() + 1) {
    throw std::invalid_argument("information and sign dimensions disagree");
  }
  Eigen::VectorXd rhs(info.rows());
  rhs[0] = 0.0;
  rhs.tail(signs.size()) = lambda * signs;
  return cholesky_or_throw(info, "selected design is degenerate").solve(rhs);
}

SubmodelCoefficients post_selection_estimator(const PenalizedFit& fit,
                                              const Dataset& data) {
  const std::vector<int> model = fit.selected_model();
  const Eigen::MatrixXd v = selected_design(data, model);
  const Eigen::MatrixXd info = v.transpose() * fit.weights.asDiagonal() * v;
  const auto llt = cholesky_or_throw(info, "selected design is degenerate");

  const Eigen::VectorXd wls = llt.solve(
      v.transpose() * fit.weights.cwiseProduct(fit.working_response));

  if (!model.empty()) {
    // One-step identity: theta_bar = theta_hat_M + J^{-1} (0, lambda s)'.
    Eigen::VectorXd rhs(info.rows());
    rhs[0] = 0.0;
    rhs.tail(model.size()) = fit.lambda * fit.selected_signs();
    Eigen::VectorXd one_step = llt.solve(rhs);
    one_step[0] += fit.theta_hat.alpha;
    for (std::size_t k = 0; k < model.size(); ++k) {
      one_step[static_cast<int>(k) + 1] += fit.theta_hat.beta[model[k]];
    }
    const double scale = std::max(1.0, wls.cwiseAbs().maxCoeff());
    if ((wls - one_step).cwiseAbs().maxCoeff() > 1e-8 * scale) {
      throw std::runtime_error(
          "post-selection estimator paths disagree beyond 1e-8; "
          "the fit does not satisfy its stationarity equations");
    }
  }

  SubmodelCoefficients theta_bar;
  theta_bar.model = model;
  theta_bar.alpha = wls[0];
  theta_bar.beta = wls.tail(model.size());
  return theta_bar;
}

SelectionEvent selection_constraints(const PenalizedFit& fit, const Dataset& data) {
  const std::vector<int> model = fit.selected_model();
  if (model.empty()) {
    throw std::invalid_argument("selection event is undefined for an empty model");
  }
  const int q = static_cast<int>(model.size());

  SelectionEvent event;
  event.model = model;
  event.signs = fit.selected_signs();
  event.A1 = Eigen::MatrixXd::Zero(q, q);
  for (int k = 0; k < q; ++k) {
    event.A1(k, k) = -event.signs[k];
  }
  const Eigen::VectorXd offset = shrinkage_offset(
      weighted_information(fit, data), fit.lambda, event.signs);
  event.b1 = event.A1 * offset.tail(q);
  return event;
}

TruncationInterval truncation_interval(const PostSelectionEstimate& est,
                                       const Eigen::VectorXd& xi) {
  const int q = static_cast<int>(est.event.model.size());
  if (xi.size() != q || q == 0) {
    throw std::invalid_argument("contrast length must match the selected model");
  }
  if (xi.cwiseAbs().maxCoeff() == 0.0) {
    throw std::invalid_argument("contrast must be non-zero");
  }
  if (est.event.A1.cols() != q || est.event.b1.size() != est.event.A1.rows()) {
    throw std::invalid_argument("selection constraints have inconsistent shape");
  }

  // Observed information is positive definite away from degenerate designs,
  // but a generic inverse keeps the slice usable in the rare flagged cases.
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(est.info_hat);
  if (!lu.isInvertible()) {
    throw degenerate_design_error("information estimate is singular");
  }
  const Eigen::VectorXd info_inv_xi = lu.solve(xi);
  const double sigma2 = xi.dot(info_inv_xi);
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw degenerate_design_error("contrast variance is not positive");
  }

  const Eigen::VectorXd c = info_inv_xi / sigma2;
  const double observed = xi.dot(est.theta_bar.beta);
  const Eigen::VectorXd r = est.theta_bar.beta - c * observed;

  const Eigen::VectorXd ac = est.event.A1 * c;
  const Eigen::VectorXd gap = est.event.b1 - est.event.A1 * r;
  const double tol_zero = 1e-12 * ac.cwiseAbs().maxCoeff();

  TruncationInterval trunc;
  trunc.v_minus = -kInf;
  trunc.v_plus = kInf;
  trunc.contrast = xi;
  trunc.sigma2 = sigma2;
  trunc.observed = observed;
  for (Eigen::Index j = 0; j < ac.size(); ++j) {
    if (ac[j] < -tol_zero) {
      trunc.v_minus = std::max(trunc.v_minus, gap[j] / ac[j]);
    } else if (ac[j] > tol_zero) {
      trunc.v_plus = std::min(trunc.v_plus, gap[j] / ac[j]);
    } else if (gap[j] < 0.0) {
      // A row orthogonal to the slice excludes the whole line.
      trunc.v_zero_ok = false;
    }
  }
  return trunc;
}

}  // namespace gtsel
