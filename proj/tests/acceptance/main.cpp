// End-to-end acceptance gate: nine statistical and numerical criteria that
// the library must reproduce on fixed seeds. Each prints one verdict line;
// the exit status is the number of failed criteria.

#include <sys/wait.h>

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gtsel/em_lasso.hpp"
#include "gtsel/errors.hpp"
#include "gtsel/inference.hpp"
#include "gtsel/information.hpp"
#include "gtsel/model.hpp"
#include "gtsel/selection.hpp"
#include "gtsel/simulation.hpp"

namespace {

using namespace gtsel;
using Clock = std::chrono::steady_clock;

int g_failures = 0;
Clock::time_point g_mark = Clock::now();

void verdict(int index, bool pass, const std::string& detail) {
  if (!pass) {
    ++g_failures;
  }
  const double elapsed =
      std::chrono::duration<double>(Clock::now() - g_mark).count();
  g_mark = Clock::now();
  std::printf("[%s] criterion %d (%.0fs): %s\n", pass ? "PASS" : "FAIL",
              index, elapsed, detail.c_str());
  std::fflush(stdout);
}

void progress(const std::string& what) {
  std::fprintf(stderr, "... %s\n", what.c_str());
  std::fflush(stderr);
}

std::string fmt(double x, int digits = 3) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, x);
  return buffer;
}

bool within(double x, double center, double tol) {
  return std::isfinite(x) && std::abs(x - center) <= tol;
}

bool within_rel(double x, double center, double rel) {
  return std::isfinite(x) && std::abs(x - center) <= rel * center;
}

// ---------------------------------------------------------------------------
// Shared study machinery: pick the penalty as the per-replicate AIC
// minimizer's lower median over the default grid (phase A, fits only), then
// rerun the same replicates at that single penalty with the requested
// methods (phase B).

struct TwoPhase {
  double lambda_star = 0.0;
  StudyReport report;  // single-cell phase-B report
};

TwoPhase two_phase(const DgpConfig& config, int replicates, std::uint64_t seed,
                   bool selective, bool naive, bool split,
                   double assumed_se = std::numeric_limits<double>::quiet_NaN(),
                   double assumed_sp = std::numeric_limits<double>::quiet_NaN()) {
  StudyOptions phase_a;
  phase_a.config = config;
  phase_a.assumed_se = assumed_se;
  phase_a.assumed_sp = assumed_sp;
  phase_a.replicates = replicates;
  phase_a.seed = seed;
  phase_a.selective = false;
  phase_a.naive = false;
  phase_a.split = false;
  const StudyReport fits = run_study(phase_a);

  StudyOptions phase_b = phase_a;
  phase_b.grid = {fits.median_aic_lambda};
  phase_b.selective = selective;
  phase_b.naive = naive;
  phase_b.split = split;

  TwoPhase out;
  out.lambda_star = fits.median_aic_lambda;
  out.report = run_study(phase_b);
  return out;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) {
        ++j;
      }
      const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) {
        r[order[k]] = shared;
      }
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x);
  const std::vector<double> ry = ranks(y);
  const double mean = 0.5 * static_cast<double>(n + 1);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Central finite differences of the observed-data log likelihood over the
// submodel coordinates (intercept first).
Eigen::MatrixXd fd_neg_hessian(const SubmodelCoefficients& theta,
                               const Dataset& data) {
  const int d = static_cast<int>(theta.model.size()) + 1;
  auto value_at = [&theta, &data](const Eigen::VectorXd& coords) {
    SubmodelCoefficients t = theta;
    t.alpha = coords[0];
    for (int k = 1; k < coords.size(); ++k) {
      t.beta[k - 1] = coords[k];
    }
    return observed_loglik(t, data);
  };
  Eigen::VectorXd at(d);
  at[0] = theta.alpha;
  for (int k = 0; k < d - 1; ++k) {
    at[k + 1] = theta.beta[k];
  }
  Eigen::VectorXd step(d);
  for (int k = 0; k < d; ++k) {
    step[k] = 1e-5 * (1.0 + std::abs(at[k]));
  }

  const double f0 = value_at(at);
  Eigen::MatrixXd hessian(d, d);
  for (int a = 0; a < d; ++a) {
    Eigen::VectorXd up = at;
    Eigen::VectorXd down = at;
    up[a] += step[a];
    down[a] -= step[a];
    hessian(a, a) =
        (value_at(up) - 2.0 * f0 + value_at(down)) / (step[a] * step[a]);
    for (int b = a + 1; b < d; ++b) {
      Eigen::VectorXd pp = at, pm = at, mp = at, mm = at;
      pp[a] += step[a];
      pp[b] += step[b];
      pm[a] += step[a];
      pm[b] -= step[b];
      mp[a] -= step[a];
      mp[b] += step[b];
      mm[a] -= step[a];
      mm[b] -= step[b];
      const double mixed = (value_at(pp) - value_at(pm) - value_at(mp) +
                            value_at(mm)) /
                           (4.0 * step[a] * step[b]);
      hessian(a, b) = mixed;
      hessian(b, a) = mixed;
    }
  }
  return -hessian;
}

double ks_statistic(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double hi = (static_cast<double>(i) + 1.0) / n - values[i];
    const double lo = values[i] - static_cast<double>(i) / n;
    d = std::max(d, std::max(hi, lo));
  }
  return d;
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  g_mark = t0;

  // --- Criteria 1, 2 and 5 share three studies at n=1000, m in {1,2,4} ----
  const int kPoolSizes[3] = {1, 2, 4};
  const std::uint64_t kSeeds[3] = {101, 202, 404};
  const double kCovSelective[3] = {0.949, 0.941, 0.942};
  const double kCovNaive[3] = {0.928, 0.912, 0.901};
  const double kWidthSelective[3] = {2.5, 2.8, 3.5};
  const double kWidthNaive[3] = {0.9, 1.0, 1.1};
  const int kReplicates = 1000;

  TwoPhase studies[3];
  for (int i = 0; i < 3; ++i) {
    progress("coverage study, pool size " + std::to_string(kPoolSizes[i]) +
             " (1000 replicates, two phases)");
    // The split method is only evaluated at pool size 2 (criterion 5).
    studies[i] = two_phase(DgpConfig::defaults(1000, kPoolSizes[i]),
                           kReplicates, kSeeds[i], /*selective=*/true,
                           /*naive=*/true, /*split=*/kPoolSizes[i] == 2);
  }

  {
    bool pass = true;
    std::ostringstream detail;
    detail << "null-slope coverage at the AIC-median penalty";
    for (int i = 0; i < 3; ++i) {
      const LambdaCell& cell = studies[i].report.cells[0];
      detail << " | m=" << kPoolSizes[i] << " lam=" << fmt(studies[i].lambda_star, 2);
      for (int c : {3, 5}) {  // the two audited zero coefficients
        const double sel = coverage_rate(cell.selective.coef[c]);
        const double nav = coverage_rate(cell.naive.coef[c]);
        pass = pass && within(sel, kCovSelective[i], 0.025) &&
               within(nav, kCovNaive[i], 0.025) && nav < sel;
        detail << " b" << c + 1 << " sel=" << fmt(sel) << " naive=" << fmt(nav);
      }
    }
    verdict(1, pass, detail.str());
  }

  {
    bool pass = true;
    std::ostringstream detail;
    detail << "interval geometry for coefficient 4";
    for (int i = 0; i < 3; ++i) {
      const LambdaCell& cell = studies[i].report.cells[0];
      const double sel = mean_width(cell.selective.coef[3]);
      const double nav = mean_width(cell.naive.coef[3]);
      pass = pass && within_rel(sel, kWidthSelective[i], 0.15) &&
             within_rel(nav, kWidthNaive[i], 0.15) && sel > nav;
      detail << " | m=" << kPoolSizes[i] << " sel=" << fmt(sel, 2)
             << " naive=" << fmt(nav, 2);
    }
    verdict(2, pass, detail.str());
  }

  // --- Criterion 3: Type I error across the penalty grid, m=4 -------------
  {
    progress("type-I-error sweep, pool size 4 (15 penalties x 500 replicates)");
    StudyOptions options;
    options.config = DgpConfig::defaults(1000, 4);
    options.grid = lambda_grid(1.0, 7.0, 15);
    options.replicates = 500;
    options.seed = 303;
    options.split = false;
    const StudyReport sweep = run_study(options);

    std::vector<double> lambdas;
    std::vector<double> selective_t1;
    std::vector<double> naive_t1;
    for (const LambdaCell& cell : sweep.cells) {
      lambdas.push_back(cell.lambda);
      selective_t1.push_back(cell.selective.mean_type_i());
      naive_t1.push_back(cell.naive.mean_type_i());
    }

    bool selective_ok = true;
    double sel_lo = 1.0;
    double sel_hi = 0.0;
    for (double t1 : selective_t1) {
      selective_ok = selective_ok && t1 >= 0.03 && t1 <= 0.07;
      sel_lo = std::min(sel_lo, t1);
      sel_hi = std::max(sel_hi, t1);
    }
    bool naive_top_ok = true;
    for (std::size_t k = lambdas.size() - (lambdas.size() + 3) / 4;
         k < lambdas.size(); ++k) {
      naive_top_ok = naive_top_ok && naive_t1[k] > 0.08;
    }
    const double rho = spearman(lambdas, naive_t1);
    const bool pass = selective_ok && naive_top_ok && rho > 0.8;
    verdict(3, pass,
            "type I error across the grid: selective in [" + fmt(sel_lo) +
                ", " + fmt(sel_hi) + "] (need [0.030, 0.070]); naive top-quartile " +
                std::string(naive_top_ok ? ">" : "<=") +
                " 0.08; naive-vs-lambda Spearman " + fmt(rho));
  }

  // --- Criterion 4: misspecified assay accuracies --------------------------
  {
    progress("misspecified-accuracy study (true 0.90/0.92, assumed 0.95/0.97)");
    DgpConfig config = DgpConfig::defaults(1000, 1);
    config.se = 0.90;
    config.sp = 0.92;
    const TwoPhase miss = two_phase(config, kReplicates, 505, /*selective=*/true,
                                    /*naive=*/false, /*split=*/false,
                                    /*assumed_se=*/0.95, /*assumed_sp=*/0.97);
    const LambdaCell& cell = miss.report.cells[0];
    const double cov_signal = coverage_rate(cell.selective.coef[1]);
    const double cov_null = coverage_rate(cell.selective.coef[3]);
    const bool pass = cov_signal < 0.25 && within(cov_null, 0.953, 0.025);
    verdict(4, pass,
            "coverage under wrong assumed accuracies: signal coef 2 " +
                fmt(cov_signal) + " (need < 0.25), null coef 4 " +
                fmt(cov_null) + " (need 0.953 +/- 0.025)");
  }

  // --- Criterion 5: pool-level data splitting at m=2 -----------------------
  {
    const LambdaCell& cell = studies[1].report.cells[0];
    const double cov_signal = coverage_rate(cell.split.coef[1]);
    const double width_null = mean_width(cell.split.coef[3]);
    const bool pass = within(cov_signal, 0.958, 0.025) &&
                      within_rel(width_null, 1.7, 0.15);
    verdict(5, pass,
            "data splitting: signal coef 2 coverage " + fmt(cov_signal) +
                " (need 0.958 +/- 0.025), null coef 4 width " +
                fmt(width_null, 2) + " (need 1.70 +/- 15%)");
  }

  // --- Criterion 6: information matrix vs finite differences ---------------
  {
    progress("information-vs-finite-difference oracle (50 instances)");
    std::mt19937_64 rng(606);
    std::uniform_int_distribution<int> n_draw(150, 500);
    std::uniform_real_distribution<double> lambda_draw(0.8, 3.0);
    const int pool_choices[3] = {1, 2, 4};

    double worst = 0.0;
    int matched = 0;
    for (int instance = 0; instance < 50; ++instance) {
      const int n = n_draw(rng);
      DgpConfig config = DgpConfig::defaults(n, pool_choices[instance % 3]);
      config.seed = rng();
      const SimulatedData sim = simulate_dataset(config);
      PenalizedFit fit = em_fit(sim.data, lambda_draw(rng));
      const SubmodelCoefficients theta = fit.submodel();
      // The information formula is exact when paired with the conditional
      // expectations at its own evaluation point.
      fit.y_hat = e_step_group(fit.theta_hat, sim.data);

      const InformationEstimate louis =
          louis_information(fit, theta, sim.data);
      const Eigen::MatrixXd reference = fd_neg_hessian(theta, sim.data);
      const double rel =
          (louis.full - reference).norm() / reference.norm();
      worst = std::max(worst, rel);
      if (rel < 1e-4) {
        ++matched;
      }
    }
    verdict(6, matched == 50,
            "observed information vs central differences: " +
                std::to_string(matched) +
                "/50 within 1e-4 relative Frobenius (worst " + fmt(worst, 7) +
                ")");
  }

  // --- Criterion 7: polyhedron membership == one-dimensional slice ---------
  {
    progress("polyhedral slice oracle (200 instances x 100000 points)");
    std::mt19937_64 rng(707);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    long checked = 0;
    long disagreements = 0;
    for (int instance = 0; instance < 200; ++instance) {
      const int q = 1 + static_cast<int>(rng() % 4);
      Eigen::MatrixXd basis(q, q);
      Eigen::MatrixXd a1(q, q);
      Eigen::VectorXd beta(q), xi(q), margin(q);
      for (int r = 0; r < q; ++r) {
        beta[r] = 2.0 * gauss(rng);
        xi[r] = gauss(rng);
        margin[r] = 0.5 * std::abs(gauss(rng));
        for (int c = 0; c < q; ++c) {
          basis(r, c) = gauss(rng);
          a1(r, c) = gauss(rng);
        }
      }
      if (xi.cwiseAbs().maxCoeff() < 0.1) {
        xi[0] = 1.0;
      }

      PostSelectionEstimate est;
      est.theta_bar.model.resize(q);
      std::iota(est.theta_bar.model.begin(), est.theta_bar.model.end(), 0);
      est.theta_bar.beta = beta;
      est.info_hat =
          basis.transpose() * basis + 0.1 * Eigen::MatrixXd::Identity(q, q);
      est.event.model = est.theta_bar.model;
      est.event.signs = Eigen::VectorXd::Ones(q);
      est.event.A1 = a1;
      est.event.b1 = a1 * beta + margin;  // observed point strictly inside

      const TruncationInterval trunc = truncation_interval(est, xi);
      const double sigma = std::sqrt(trunc.sigma2);
      const Eigen::VectorXd direction =
          est.info_hat.fullPivLu().solve(xi) / trunc.sigma2;
      const Eigen::VectorXd residual = beta - direction * trunc.observed;
      const Eigen::VectorXd a_residual = a1 * residual;
      const Eigen::VectorXd a_direction = a1 * direction;

      for (int point = 0; point < 100000; ++point) {
        double t;
        const double u = unit(rng);
        if (u < 0.8 || (!std::isfinite(trunc.v_minus) &&
                        !std::isfinite(trunc.v_plus))) {
          t = trunc.observed + 24.0 * sigma * (unit(rng) - 0.5);
        } else if (u < 0.9 && std::isfinite(trunc.v_minus)) {
          t = trunc.v_minus + sigma * (unit(rng) - 0.5);
        } else if (std::isfinite(trunc.v_plus)) {
          t = trunc.v_plus + sigma * (unit(rng) - 0.5);
        } else {
          t = trunc.v_minus + sigma * (unit(rng) - 0.5);
        }

        bool member = true;
        bool boundary = false;
        for (int r = 0; r < q; ++r) {
          const double lhs = a_residual[r] + t * a_direction[r];
          const double gap = est.event.b1[r] - lhs;
          member = member && gap >= 0.0;
          boundary = boundary ||
                     std::abs(gap) <=
                         1e-10 * std::max({1.0, std::abs(est.event.b1[r]),
                                           std::abs(lhs)});
        }
        const bool slice =
            trunc.v_zero_ok && t >= trunc.v_minus && t <= trunc.v_plus;
        if (boundary ||
            (std::isfinite(trunc.v_minus) &&
             std::abs(t - trunc.v_minus) <=
                 1e-10 * std::max(1.0, std::abs(trunc.v_minus))) ||
            (std::isfinite(trunc.v_plus) &&
             std::abs(t - trunc.v_plus) <=
                 1e-10 * std::max(1.0, std::abs(trunc.v_plus)))) {
          continue;  // inside the boundary band
        }
        ++checked;
        if (member != slice) {
          ++disagreements;
        }
      }
    }
    verdict(7, disagreements == 0,
            "polyhedron membership vs slice description: " +
                std::to_string(disagreements) + " disagreements over " +
                std::to_string(checked) + " points outside the 1e-10 band");
  }

  // --- Criterion 8: pivot uniformity on selection-consistent replicates ----
  {
    progress("pivot calibration (collecting 2000 selection-consistent pivots)");
    const int kTarget = 2000;
    const long kMaxAttempts = 40000;
    // The pivot is only asymptotically uniform, and the rate at which it
    // approaches uniformity is governed by the gap between the debiased
    // estimate and the exact submodel MLE. With noisy assays that gap is the
    // missing-information share of the shrinkage and shrinks like
    // lambda/sqrt(n) in standardized units - far from zero at any sample
    // size a test can afford. With perfect assays the one-step update is an
    // exact Newton step, the gap is second order, and uniformity holds at
    // n = 1000. Perfect individual assays with a lean design (one noise
    // covariate) keep the exact-support rejection rate workable (~1/3) while
    // exercising the full selection-event and truncation machinery.
    const double kLambda = 2.5;
    DgpConfig config = DgpConfig::defaults(1000, 1);
    config.se = 1.0;
    config.sp = 1.0;
    Eigen::VectorXd lean_beta = Eigen::VectorXd::Zero(4);
    lean_beta[0] = 2.0;
    lean_beta[1] = 1.0;
    lean_beta[2] = 1.0;
    config.theta_true.beta = lean_beta;
    const std::vector<int> support = {0, 1, 2};
    const double true_beta2 = config.theta_true.beta[1];

    std::vector<double> pivots;
    pivots.reserve(kTarget);
    long attempts = 0;
    long errors = 0;
    while (static_cast<int>(pivots.size()) < kTarget &&
           attempts < kMaxAttempts) {
      config.seed = child_seed(808, static_cast<std::uint64_t>(attempts));
      ++attempts;
      try {
        const SimulatedData sim = simulate_dataset(config);
        const PenalizedFit fit = em_fit(sim.data, kLambda);
        if (!fit.converged || fit.selected_model() != support) {
          continue;
        }
        const PostSelectionEstimate est =
            make_post_selection_estimate(fit, sim.data);
        Eigen::VectorXd xi = Eigen::VectorXd::Zero(3);
        xi[1] = 1.0;  // the second true signal slope
        const TruncationInterval trunc = truncation_interval(est, xi);
        pivots.push_back(selective_pivot(est, trunc, true_beta2));
      } catch (const std::runtime_error&) {
        ++errors;
      }
    }

    const double d = ks_statistic(pivots);
    const double critical =
        1.627 / std::sqrt(static_cast<double>(pivots.size()));
    const bool pass =
        static_cast<int>(pivots.size()) == kTarget && d < critical;
    verdict(8, pass,
            "pivot uniformity: KS " + fmt(d, 4) + " vs 1% critical " +
                fmt(critical, 4) + " on " + std::to_string(pivots.size()) +
                " pivots (" + std::to_string(attempts) + " attempts, " +
                std::to_string(errors) + " numerical rejections)");
  }

  // --- Criterion 9: the standalone property suite stays green --------------
  {
    progress("standalone property suite (unit test binary)");
    const std::string command =
        std::string("\"") + GTSEL_UNIT_TESTS_PATH + "\" > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    const bool pass = status != -1 && WIFEXITED(status) &&
                      WEXITSTATUS(status) == 0;
    verdict(9, pass,
            pass ? "property suite green (EM ascent, KKT bounds, E-step "
                   "degeneracies, endpoint self-consistency, determinism)"
                 : "property suite exited with status " +
                       std::to_string(WIFEXITED(status) ? WEXITSTATUS(status)
                                                        : status));
  }

  std::printf("%d/9 criteria passed (total %.0fs)\n", 9 - g_failures,
              std::chrono::duration<double>(Clock::now() - t0).count());
  return g_failures == 0 ? 0 : 1;
}
