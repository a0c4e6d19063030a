#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "gtsel/em_lasso.hpp"
#include "gtsel/information.hpp"
#include "gtsel/model.hpp"
#include "gtsel/selection.hpp"

namespace gtsel {

enum class Method { selective, naive, split };

const char* method_name(Method method);

struct IntervalEstimate {
  int coef = -1;  // 0-based covariate column, -1 for a custom contrast
  Eigen::VectorXd contrast;
  Method method = Method::selective;
  double level = 0.95;
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double odds_lower = 0.0;
  double odds_upper = 0.0;
  // Selective-only diagnostics; NaN for other methods.
  double pivot_at_point = 0.0;
  double pivot_at_zero = 0.0;
  double v_minus = 0.0;
  double v_plus = 0.0;
  // Set when a CI endpoint hit its search bracket because the truncated
  // tail mass underflowed.
  bool degenerate = false;

  bool contains(double value) const { return lower <= value && value <= upper; }
  double width() const { return upper - lower; }
};

// Assembles the debiased estimate, the selection polyhedron and the slope
// information. With InfoMethod::sandwich the covariance block is inverted
// back to the information scale.
PostSelectionEstimate make_post_selection_estimate(
    const PenalizedFit& fit, const Dataset& data,
    InfoMethod info_method = InfoMethod::louis);

// Truncated-Gaussian CDF of the observed contrast value under mu0; the
// conditional analog of a Wald z-probability. Uniform on (0,1) at the true
// contrast value, conditional on selection.
double selective_pivot(const PostSelectionEstimate& est,
                       const TruncationInterval& trunc, double mu0);

// Inverts the pivot by bisection: endpoints solve pivot = 1 - a/2 and a/2.
// The bracket doubles outward from the classical interval, capped at ten
// naive widths; a root past the cap is clamped there and flagged degenerate.
IntervalEstimate selective_ci(const PostSelectionEstimate& est,
                              const TruncationInterval& trunc, double level);

// One interval per selected coefficient, basis contrasts in model order.
std::vector<IntervalEstimate> selective_cis(const PostSelectionEstimate& est,
                                            double level);

// Classical intervals that ignore selection: refit the selected columns by
// unpenalized EM and take Wald intervals from the refit's information.
std::vector<IntervalEstimate> naive_ci(const PenalizedFit& fit,
                                       const Dataset& data, double level);

// Seeded shuffle of pool indices; first ceil(J/2) pools train, rest test.
// Both halves are returned sorted.
std::pair<std::vector<int>, std::vector<int>> split_pools(int pool_count,
                                                          std::uint64_t seed);

// Data splitting at the pool level: select on the training half at lambda,
// then naive inference for the selected columns on the held-out half.
std::vector<IntervalEstimate> split_inference(const Dataset& data, double lambda,
                                              double level, std::uint64_t seed);

// Second stage of split_inference with the training fit already in hand;
// lets studies reuse warm-started training fits across a lambda grid.
std::vector<IntervalEstimate> split_ci(const PenalizedFit& train_fit,
                                       const Dataset& test_half, double level);

// Pool-subset view used by split_inference; exposed for testing.
Dataset subset_pools(const Dataset& data, const std::vector<int>& pool_indices);

}  // namespace gtsel
