#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gtsel/em_lasso.hpp"
#include "gtsel/inference.hpp"
#include "gtsel/model.hpp"

namespace gtsel {

// Counter-based stream splitting: child streams are independent of thread
// scheduling, so studies are reproducible at any --threads value.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t child_seed(std::uint64_t master, std::uint64_t index);

struct DgpConfig {
  int n = 1000;
  int pool_size = 1;
  Coefficients theta_true;  // beta length defines p; covariates are iid N(0,1)
  double se = 0.95;
  double sp = 0.97;
  std::uint64_t seed = 1;

  int p() const { return static_cast<int>(theta_true.beta.size()); }
  // n=1000 (or 2000), pool size m, alpha=-5, beta=(2,1,1,0,...,0) with p=10.
  static DgpConfig defaults(int n, int pool_size);
};

struct SimulatedData {
  Dataset data;
  std::vector<int> y_true;         // latent individual statuses, length n
  std::vector<int> pool_positive;  // max of y_true over each pool, length J
};

SimulatedData simulate_dataset(const DgpConfig& config);

// count log-spaced points, endpoints exact.
std::vector<double> lambda_grid(double lo, double hi, int count);
// Default 25-point grid: [1, 7] for n <= 1000, [0.5, 10] for larger n.
std::vector<double> lambda_grid(int n);

// Per-dataset realized Type I error: among selected coefficients whose true
// value is zero, the fraction whose CI excludes zero; zero when none selected.
double type_i_error_rate(const std::vector<IntervalEstimate>& intervals,
                         const Eigen::VectorXd& beta_true);

struct CoefStats {
  long intervals = 0;      // CIs produced for this coefficient
  long covered = 0;        // CI contained the true coefficient
  long excluded_zero = 0;  // CI excluded zero
  long degenerate = 0;     // an endpoint hit its search bracket
  long width_count = 0;    // non-degenerate intervals (width/endpoint sums)
  double width_sum = 0.0;
  double lower_sum = 0.0;
  double upper_sum = 0.0;
  double point_sum = 0.0;  // over all intervals
};

struct MethodStats {
  long attempts = 0;  // replicates that reached this method with a usable fit
  long failures = 0;  // replicates where the method raised an error
  double type1_sum = 0.0;
  long type1_count = 0;  // attempts - failures
  std::vector<CoefStats> coef;

  double mean_type_i() const;
};

struct LambdaCell {
  double lambda = 0.0;
  long fits = 0;          // replicates that attempted the full-data fit
  long fit_failures = 0;  // EM non-convergence on the full data
  MethodStats selective;
  MethodStats naive;
  MethodStats split;
};

// NaN when the denominator is zero.
double coverage_rate(const CoefStats& stats);
double mean_width(const CoefStats& stats);
double mean_lower(const CoefStats& stats);
double mean_upper(const CoefStats& stats);
double mean_point(const CoefStats& stats);
double exclude_zero_rate(const CoefStats& stats);
double selection_rate(const CoefStats& stats, long method_runs);

struct StudyOptions {
  DgpConfig config;  // generative truth; per-replicate seeds override config.seed
  // Analysis-model test accuracies; NaN means "use the generative values".
  double assumed_se = std::numeric_limits<double>::quiet_NaN();
  double assumed_sp = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> grid;  // empty -> lambda_grid(config.n)
  int replicates = 500;
  double level = 0.95;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 -> hardware concurrency
  bool selective = true;
  bool naive = true;
  bool split = true;
  EmOptions em;
};

struct StudyReport {
  DgpConfig config;
  double assumed_se = 0.0;
  double assumed_sp = 0.0;
  std::uint64_t seed = 0;
  int replicates = 0;
  double level = 0.95;
  std::vector<double> grid;        // ascending
  std::vector<LambdaCell> cells;   // aligned with grid
  std::vector<long> aic_choices;   // per-grid-index histogram of AIC minimizers
  std::vector<long> bic_choices;
  double median_aic_lambda = 0.0;  // lower median over replicates
  double median_bic_lambda = 0.0;
  double runtime_seconds = 0.0;    // not serialized into the report itself
};

StudyReport run_study(const StudyOptions& options);

// Same pipeline with the analysis model using the wrong test accuracies.
StudyReport misspecification_study(StudyOptions options, double assumed_se,
                                   double assumed_sp);

}  // namespace gtsel
