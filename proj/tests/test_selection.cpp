#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "gtsel/errors.hpp"
#include "gtsel/inference.hpp"
#include "gtsel/selection.hpp"
#include "gtsel/simulation.hpp"

using namespace gtsel;

namespace {

struct FittedCase {
  Dataset data;
  PenalizedFit fit;
};

FittedCase fitted_case(int n, int m, double lambda, std::uint64_t seed) {
  DgpConfig cfg = DgpConfig::defaults(n, m);
  cfg.seed = seed;
  FittedCase out{simulate_dataset(cfg).data, {}};
  out.fit = em_fit(out.data, lambda);
  REQUIRE(out.fit.converged);
  REQUIRE_FALSE(out.fit.selected_model().empty());
  return out;
}

}  // namespace

TEST_CASE("debiased estimate equals the penalized one plus the shrinkage gap") {
  const FittedCase c = fitted_case(600, 2, 2.0, 101);
  const SubmodelCoefficients bar = post_selection_estimator(c.fit, c.data);
  const SubmodelCoefficients hat = c.fit.submodel();
  REQUIRE(bar.model == hat.model);

  const Eigen::MatrixXd info = weighted_information(c.fit, c.data);
  const Eigen::VectorXd offset =
      shrinkage_offset(info, c.fit.lambda, c.fit.selected_signs());
  REQUIRE(bar.alpha - hat.alpha == Catch::Approx(offset[0]).margin(1e-8));
  for (int k = 0; k < bar.beta.size(); ++k) {
    REQUIRE(bar.beta[k] - hat.beta[k] ==
            Catch::Approx(offset[k + 1]).margin(1e-8));
  }
}

TEST_CASE("the observed estimate satisfies its own selection constraints") {
  for (std::uint64_t seed : {41, 42, 43}) {
    const FittedCase c = fitted_case(500, 2, 1.8, seed);
    const SelectionEvent event = selection_constraints(c.fit, c.data);
    const SubmodelCoefficients bar = post_selection_estimator(c.fit, c.data);
    const Eigen::VectorXd slack = event.b1 - event.A1 * bar.beta;
    REQUIRE(slack.minCoeff() >= -1e-10);

    // One active constraint per selected coefficient, oriented by its sign.
    REQUIRE(event.A1.rows() == static_cast<int>(event.model.size()));
    for (int k = 0; k < event.A1.rows(); ++k) {
      REQUIRE(event.A1(k, k) == -event.signs[k]);
    }
  }
}

TEST_CASE("selection constraints demand a non-empty model") {
  DgpConfig cfg = DgpConfig::defaults(200, 1);
  cfg.seed = 51;
  const Dataset data = simulate_dataset(cfg).data;
  const PenalizedFit fit = em_fit(data, 1e6);
  REQUIRE(fit.selected_model().empty());
  REQUIRE_THROWS_AS(selection_constraints(fit, data), std::invalid_argument);
}

TEST_CASE("a singular weighted gram matrix is refused") {
  Eigen::MatrixXd singular = Eigen::MatrixXd::Ones(3, 3);
  Eigen::VectorXd signs = Eigen::VectorXd::Ones(2);
  REQUIRE_THROWS_AS(shrinkage_offset(singular, 1.0, signs),
                    degenerate_design_error);
}

TEST_CASE("truncation interval brackets the observed contrast") {
  const FittedCase c = fitted_case(700, 4, 2.2, 61);
  const PostSelectionEstimate est = make_post_selection_estimate(c.fit, c.data);
  const int q = static_cast<int>(est.event.model.size());
  for (int k = 0; k < q; ++k) {
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(q);
    xi[k] = 1.0;
    const TruncationInterval trunc = truncation_interval(est, xi);
    REQUIRE(trunc.v_zero_ok);
    REQUIRE(trunc.sigma2 > 0.0);
    REQUIRE(trunc.v_minus <= trunc.observed);
    REQUIRE(trunc.observed <= trunc.v_plus);
    REQUIRE(trunc.observed == Catch::Approx(est.theta_bar.beta[k]).margin(1e-12));
  }
}

TEST_CASE("the polyhedron slice matches brute-force membership along contrasts") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> gauss;
  int lines = 0;
  for (std::uint64_t seed : {71, 72, 73, 74, 75}) {
    const FittedCase c = fitted_case(400, 2, 2.5, seed);
    const PostSelectionEstimate est = make_post_selection_estimate(c.fit, c.data);
    const int q = static_cast<int>(est.event.model.size());
    for (int rep = 0; rep < 6; ++rep) {
      Eigen::VectorXd xi(q);
      for (int k = 0; k < q; ++k) xi[k] = gauss(rng);
      if (xi.cwiseAbs().maxCoeff() < 1e-3) continue;
      const TruncationInterval trunc = truncation_interval(est, xi);
      if (!trunc.v_zero_ok) continue;

      // Walk along beta(t) = r + t c, the only direction the slice varies in.
      const Eigen::VectorXd info_inv_xi =
          est.info_hat.fullPivLu().solve(xi);
      const Eigen::VectorXd cdir = info_inv_xi / xi.dot(info_inv_xi);
      const Eigen::VectorXd r =
          est.theta_bar.beta - cdir * trunc.observed;
      std::uniform_real_distribution<double> tdist(trunc.observed - 8.0,
                                                   trunc.observed + 8.0);
      for (int draw = 0; draw < 400; ++draw) {
        const double t = tdist(rng);
        const Eigen::VectorXd beta = r + t * cdir;
        const bool inside =
            ((est.event.b1 - est.event.A1 * beta).array() >= 0.0).all();
        const bool in_slice = trunc.v_minus <= t && t <= trunc.v_plus;
        const double margin = std::min(std::abs(t - trunc.v_minus),
                                       std::abs(t - trunc.v_plus));
        if (margin > 1e-10) {
          CAPTURE(seed, rep, draw, t, trunc.v_minus, trunc.v_plus);
          REQUIRE(inside == in_slice);
        }
      }
      ++lines;
    }
  }
  REQUIRE(lines >= 20);
}

TEST_CASE("contrasts must be non-zero and the information invertible") {
  const FittedCase c = fitted_case(300, 1, 2.0, 91);
  PostSelectionEstimate est = make_post_selection_estimate(c.fit, c.data);
  const int q = static_cast<int>(est.event.model.size());

  REQUIRE_THROWS_AS(truncation_interval(est, Eigen::VectorXd::Zero(q)),
                    std::invalid_argument);

  est.info_hat = Eigen::MatrixXd::Ones(q, q);  // rank one
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(q);
  xi[0] = 1.0;
  if (q >= 2) {
    REQUIRE_THROWS_AS(truncation_interval(est, xi), degenerate_design_error);
  }
}
