#pragma once

#include <Eigen/Core>
#include <vector>

#include "gtsel/em_lasso.hpp"
#include "gtsel/model.hpp"

namespace gtsel {

// Affine description {v : A1 v <= b1} of the event "the lasso selected
// exactly this model with these signs", expressed in the coordinates of the
// debiased submodel slope estimate.
struct SelectionEvent {
  std::vector<int> model;
  Eigen::VectorXd signs;
  Eigen::MatrixXd A1;
  Eigen::VectorXd b1;
};

// Debiased submodel estimate together with the ingredients conditional
// inference needs: the estimated information of the slope block and the
// selection polyhedron. info_hat is the slope block of the observed-data
// information evaluated at the penalized estimate; `degenerate` records the
// rare case where that matrix fails a Cholesky, and inference proceeds
// through a generic inverse either way.
struct PostSelectionEstimate {
  SubmodelCoefficients theta_bar;
  Eigen::MatrixXd info_hat;
  SelectionEvent event;
  bool degenerate = false;
};

// One-dimensional slice of the selection polyhedron along a contrast:
// conditioning on everything but xi' beta_bar leaves xi' beta_bar truncated
// to [v_minus, v_plus]; v_zero_ok records whether the rows orthogonal to
// the slice keep the event satisfiable.
struct TruncationInterval {
  double v_minus = 0.0;
  double v_plus = 0.0;
  bool v_zero_ok = true;
  Eigen::VectorXd contrast;
  double sigma2 = 0.0;    // xi' info_hat^{-1} xi
  double observed = 0.0;  // xi' beta_bar
};

// J(theta_hat_M) = [1, X_M]' W [1, X_M] with the fit's stored weights.
Eigen::MatrixXd weighted_information(const PenalizedFit& fit, const Dataset& data);

// J^{-1} (0, lambda * signs)': the gap between the debiased and the
// penalized submodel estimates. Solved by Cholesky; a non-PD J throws
// degenerate_design_error.
Eigen::VectorXd shrinkage_offset(const Eigen::MatrixXd& info,
                                 double lambda,
                                 const Eigen::VectorXd& signs);

// Weighted least squares of the working response on the selected design.
// Also evaluated through the one-step identity theta_hat + offset; the two
// paths must agree to 1e-8 relative or the fit is internally inconsistent.
SubmodelCoefficients post_selection_estimator(const PenalizedFit& fit,
                                              const Dataset& data);

// Requires a non-empty selected model.
SelectionEvent selection_constraints(const PenalizedFit& fit, const Dataset& data);

// Polyhedral slice along xi (length |M|, non-zero). Rows with |(A1 c)_j|
// <= 1e-12 * ||A1 c||_inf count as orthogonal to the slice.
TruncationInterval truncation_interval(const PostSelectionEstimate& est,
                                       const Eigen::VectorXd& xi);

}  // namespace gtsel
