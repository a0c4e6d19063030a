#include "gtsel/inference.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gtsel/errors.hpp"
#include "gtsel/truncated_normal.hpp"

namespace gtsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double normal_quantile(double prob) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("confidence level must lie in (0, 1)");
  }
}

double pivot_value(const TruncationInterval& trunc, double mu) {
  TruncatedGaussianSpec spec;
  spec.mu = mu;
  spec.sigma2 = trunc.sigma2;
  spec.a = trunc.v_minus;
  spec.b = trunc.v_plus;
  return truncated_normal_cdf(spec, trunc.observed);
}

// Solves pivot(mu) = target for the decreasing map mu -> pivot(mu). The
// bracket doubles outward from the classical interval and is hard-limited
// at ten naive widths: past that scale the endpoint diverges as the
// observed value nears a truncation boundary, so it is clamped at the
// bracket limit and flagged degenerate (as it is when the truncated mass
// underflows). Flagged endpoints are excluded from width averages
// downstream; coverage still counts them.
double invert_pivot(const TruncationInterval& trunc, double target,
                    double naive_width, bool* degenerate) {
  const int max_bisect = 200;
  const double mu_tolerance = 1e-8;
  const double limit = 10.0 * naive_width;

  double h = 0.5 * naive_width;
  try {
    while (pivot_value(trunc, trunc.observed - h) < target ||
           pivot_value(trunc, trunc.observed + h) > target) {
      if (h >= limit) {
        *degenerate = true;
        return pivot_value(trunc, trunc.observed - h) < target
                   ? trunc.observed - h
                   : trunc.observed + h;
      }
      h = std::min(2.0 * h, limit);
    }
    double lo = trunc.observed - h;
    double hi = trunc.observed + h;
    for (int it = 0; it < max_bisect && hi - lo > mu_tolerance; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (pivot_value(trunc, mid) >= target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  } catch (const tail_degeneracy_error&) {
    *degenerate = true;
    return target > 0.5 ? trunc.observed - h : trunc.observed + h;
  }
}

std::vector<Eigen::VectorXd> basis_contrasts(int q) {
  std::vector<Eigen::VectorXd> xs;
  xs.reserve(q);
  for (int k = 0; k < q; ++k) {
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(q);
    xi[k] = 1.0;
    xs.push_back(std::move(xi));
  }
  return xs;
}

// Wald intervals for every slope of an unpenalized EM refit, indexed by
// position in the refit design.
std::vector<IntervalEstimate> refit_wald(const Dataset& data, double level,
                                         const Coefficients& warm, Method method) {
  PenalizedFit refit = em_fit(data, 0.0, warm);
  if (!refit.converged) {
    throw non_convergence_error("unpenalized refit did not converge");
  }
  std::vector<int> all(data.p());
  std::iota(all.begin(), all.end(), 0);
  const SubmodelCoefficients theta = restrict_to(refit.theta_hat, all);
  const InformationEstimate info = louis_information(refit, theta, data);
  Eigen::LLT<Eigen::MatrixXd> llt(info.beta_block);
  if (info.degenerate || llt.info() != Eigen::Success) {
    throw degenerate_design_error("refit information is not positive definite");
  }
  const Eigen::MatrixXd cov =
      llt.solve(Eigen::MatrixXd::Identity(data.p(), data.p()));

  const double zq = normal_quantile(1.0 - (1.0 - level) / 2.0);
  std::vector<IntervalEstimate> out;
  out.reserve(data.p());
  for (int k = 0; k < data.p(); ++k) {
    IntervalEstimate ci;
    ci.coef = k;
    ci.method = method;
    ci.level = level;
    ci.point = refit.theta_hat.beta[k];
    const double half = zq * std::sqrt(cov(k, k));
    ci.lower = ci.point - half;
    ci.upper = ci.point + half;
    ci.odds_lower = std::exp(ci.lower);
    ci.odds_upper = std::exp(ci.upper);
    ci.pivot_at_point = kNaN;
    ci.pivot_at_zero = kNaN;
    ci.v_minus = -kInf;
    ci.v_plus = kInf;
    out.push_back(std::move(ci));
  }
  return out;
}

Dataset restrict_columns(const Dataset& data, const std::vector<int>& model) {
  Dataset out;
  out.X = Eigen::MatrixXd(data.n(), model.size());
  for (std::size_t k = 0; k < model.size(); ++k) {
    out.X.col(static_cast<int>(k)) = data.X.col(model[k]);
  }
  out.pools = data.pools;
  out.z = data.z;
  out.se = data.se;
  out.sp = data.sp;
  return out;
}

}  // namespace

const char* method_name(Method method) {
  switch (method) {
    case Method::selective:
      return "selective";
    case Method::naive:
      return "naive";
    case Method::split:
      return "split";
  }
  return "unknown";
}

PostSelectionEstimate make_post_selection_estimate(const PenalizedFit& fit,
                                                   const Dataset& data,
                                                   InfoMethod info_method) {
  PostSelectionEstimate est;
  est.theta_bar = post_selection_estimator(fit, data);
  est.event = selection_constraints(fit, data);

  const SubmodelCoefficients submodel = fit.submodel();
  if (info_method == InfoMethod::louis) {
    const InformationEstimate info = louis_information(fit, submodel, data);
    est.info_hat = info.beta_block;
    est.degenerate = info.degenerate;
  } else {
    const InformationEstimate cov = sandwich_covariance(fit, submodel, data);
    Eigen::LLT<Eigen::MatrixXd> llt(cov.beta_block);
    if (llt.info() != Eigen::Success) {
      throw degenerate_design_error("sandwich covariance is not positive definite");
    }
    est.info_hat = llt.solve(
        Eigen::MatrixXd::Identity(cov.beta_block.rows(), cov.beta_block.cols()));
  }
  return est;
}

double selective_pivot(const PostSelectionEstimate& est,
                       const TruncationInterval& trunc, double mu0) {
  (void)est;
  if (!trunc.v_zero_ok) {
    throw inconsistent_event_error(
        "selection event is unsatisfiable along the contrast slice");
  }
  const double slack = 1e-9 * std::sqrt(trunc.sigma2);
  if (trunc.observed < trunc.v_minus - slack ||
      trunc.observed > trunc.v_plus + slack) {
    throw inconsistent_event_error(
        "observed contrast lies outside its truncation interval");
  }
  return pivot_value(trunc, mu0);
}

IntervalEstimate selective_ci(const PostSelectionEstimate& est,
                              const TruncationInterval& trunc, double level) {
  check_level(level);
  const double a = 1.0 - level;
  const double sd = std::sqrt(trunc.sigma2);
  const double naive_width = 2.0 * normal_quantile(1.0 - a / 2.0) * sd;

  IntervalEstimate ci;
  ci.contrast = trunc.contrast;
  ci.method = Method::selective;
  ci.level = level;
  ci.point = trunc.observed;
  ci.v_minus = trunc.v_minus;
  ci.v_plus = trunc.v_plus;
  ci.pivot_at_point = selective_pivot(est, trunc, trunc.observed);
  ci.pivot_at_zero = selective_pivot(est, trunc, 0.0);

  bool degenerate_lower = false;
  bool degenerate_upper = false;
  ci.lower = invert_pivot(trunc, 1.0 - a / 2.0, naive_width, &degenerate_lower);
  ci.upper = invert_pivot(trunc, a / 2.0, naive_width, &degenerate_upper);
  ci.degenerate = degenerate_lower || degenerate_upper;
  ci.odds_lower = std::exp(ci.lower);
  ci.odds_upper = std::exp(ci.upper);
  return ci;
}

std::vector<IntervalEstimate> selective_cis(const PostSelectionEstimate& est,
                                            double level) {
  const int q = static_cast<int>(est.event.model.size());
  std::vector<IntervalEstimate> out;
  out.reserve(q);
  const std::vector<Eigen::VectorXd> contrasts = basis_contrasts(q);
  for (int k = 0; k < q; ++k) {
    const TruncationInterval trunc = truncation_interval(est, contrasts[k]);
    IntervalEstimate ci = selective_ci(est, trunc, level);
    ci.coef = est.event.model[k];
    out.push_back(std::move(ci));
  }
  return out;
}

std::vector<IntervalEstimate> naive_ci(const PenalizedFit& fit,
                                       const Dataset& data, double level) {
  check_level(level);
  const std::vector<int> model = fit.selected_model();
  if (model.empty()) {
    return {};
  }
  const Dataset restricted = restrict_columns(data, model);
  Coefficients warm;
  warm.alpha = fit.theta_hat.alpha;
  warm.beta = Eigen::VectorXd(model.size());
  for (std::size_t k = 0; k < model.size(); ++k) {
    warm.beta[static_cast<int>(k)] = fit.theta_hat.beta[model[k]];
  }
  std::vector<IntervalEstimate> out = refit_wald(restricted, level, warm, Method::naive);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].coef = model[k];
  }
  return out;
}

std::pair<std::vector<int>, std::vector<int>> split_pools(int pool_count,
                                                          std::uint64_t seed) {
  if (pool_count < 2) {
    throw std::invalid_argument("pool splitting needs at least two pools");
  }
  std::vector<int> order(pool_count);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const int train_size = (pool_count + 1) / 2;
  std::vector<int> train(order.begin(), order.begin() + train_size);
  std::vector<int> test(order.begin() + train_size, order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

Dataset subset_pools(const Dataset& data, const std::vector<int>& pool_indices) {
  long total = 0;
  for (int j : pool_indices) {
    if (j < 0 || j >= data.pool_count()) {
      throw std::invalid_argument("pool index out of range");
    }
    total += static_cast<long>(data.pools[j].size());
  }

  // Rows are laid out pool block by pool block in the order requested, so a
  // subset's row r belongs to the pool whose block covers r.
  Dataset out;
  out.X = Eigen::MatrixXd(total, data.p());
  out.pools.reserve(pool_indices.size());
  out.z.reserve(pool_indices.size());
  int row = 0;
  for (int j : pool_indices) {
    std::vector<int> pool;
    pool.reserve(data.pools[j].size());
    for (int i : data.pools[j]) {
      out.X.row(row) = data.X.row(i);
      pool.push_back(row);
      ++row;
    }
    out.pools.push_back(std::move(pool));
    out.z.push_back(data.z[j]);
  }
  out.se = data.se;
  out.sp = data.sp;
  return out;
}

std::vector<IntervalEstimate> split_ci(const PenalizedFit& train_fit,
                                       const Dataset& test_half, double level) {
  check_level(level);
  const std::vector<int> model = train_fit.selected_model();
  if (model.empty()) {
    return {};
  }
  const Dataset restricted = restrict_columns(test_half, model);
  Coefficients warm;
  warm.alpha = train_fit.theta_hat.alpha;
  warm.beta = Eigen::VectorXd(model.size());
  for (std::size_t k = 0; k < model.size(); ++k) {
    warm.beta[static_cast<int>(k)] = train_fit.theta_hat.beta[model[k]];
  }
  std::vector<IntervalEstimate> out =
      refit_wald(restricted, level, warm, Method::split);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].coef = model[k];
  }
  return out;
}

std::vector<IntervalEstimate> split_inference(const Dataset& data, double lambda,
                                              double level, std::uint64_t seed) {
  check_level(level);
  const auto [train_pools, test_pools] = split_pools(data.pool_count(), seed);
  const Dataset train = subset_pools(data, train_pools);
  const PenalizedFit train_fit = em_fit(train, lambda);
  if (!train_fit.converged) {
    throw non_convergence_error("training-half fit did not converge");
  }
  const Dataset test = subset_pools(data, test_pools);
  return split_ci(train_fit, test, level);
}

}  // namespace gtsel
