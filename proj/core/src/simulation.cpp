#include "gtsel/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>

#include "gtsel/errors.hpp"
#include "gtsel/selection.hpp"

namespace gtsel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Salt separating the pool-splitting stream from replicate data streams.
constexpr std::uint64_t kSplitStream = 0x51ed270b;

double ratio(double numerator, long denominator) {
  return denominator > 0 ? numerator / static_cast<double>(denominator) : kNaN;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) {
  // Element `index` of the splitmix stream seeded at splitmix64(master). The
  // Weyl-increment advance is asymmetric in (master, index), so small-integer
  // masters and indices cannot alias each other's streams the way a
  // commutative combination would.
  return splitmix64(splitmix64(master) + 0x9e3779b97f4a7c15ULL * index);
}

DgpConfig DgpConfig::defaults(int n, int pool_size) {
  DgpConfig config;
  config.n = n;
  config.pool_size = pool_size;
  config.theta_true.alpha = -5.0;
  config.theta_true.beta = Eigen::VectorXd::Zero(10);
  config.theta_true.beta[0] = 2.0;
  config.theta_true.beta[1] = 1.0;
  config.theta_true.beta[2] = 1.0;
  return config;
}

SimulatedData simulate_dataset(const DgpConfig& config) {
  if (config.n < 1 || config.pool_size < 1 || config.p() < 1) {
    throw std::invalid_argument("simulation needs n >= 1, pool_size >= 1, p >= 1");
  }
  if (!(config.se > 0.0 && config.se <= 1.0) ||
      !(config.sp > 0.0 && config.sp <= 1.0)) {
    throw std::invalid_argument("test accuracies must lie in (0, 1]");
  }

  const int n = config.n;
  const int p = config.p();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SimulatedData sim;
  sim.data.X = Eigen::MatrixXd(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      sim.data.X(i, j) = gauss(rng);
    }
  }

  const Eigen::VectorXd pi = logistic_means(config.theta_true, sim.data.X);
  sim.y_true.resize(n);
  for (int i = 0; i < n; ++i) {
    sim.y_true[i] = unif(rng) < pi[i] ? 1 : 0;
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<int>> pools;
  for (int start = 0; start < n; start += config.pool_size) {
    const int stop = std::min(start + config.pool_size, n);
    std::vector<int> pool(order.begin() + start, order.begin() + stop);
    std::sort(pool.begin(), pool.end());
    pools.push_back(std::move(pool));
  }
  // Canonical order (by first member) makes the CSV round trip exact.
  std::sort(pools.begin(), pools.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) {
              return a.front() < b.front();
            });
  sim.data.pools = std::move(pools);

  const int pool_count = static_cast<int>(sim.data.pools.size());
  sim.pool_positive.resize(pool_count);
  sim.data.z.resize(pool_count);
  for (int j = 0; j < pool_count; ++j) {
    int positive = 0;
    for (int i : sim.data.pools[j]) {
      positive = std::max(positive, sim.y_true[i]);
    }
    sim.pool_positive[j] = positive;
    const double p_one = positive == 1 ? config.se : 1.0 - config.sp;
    sim.data.z[j] = unif(rng) < p_one ? 1 : 0;
  }
  sim.data.se = config.se;
  sim.data.sp = config.sp;
  sim.data.validate();
  return sim;
}

std::vector<double> lambda_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw std::invalid_argument("grid needs 0 < lo < hi and count >= 2");
  }
  std::vector<double> grid(count);
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  for (int k = 0; k < count; ++k) {
    grid[k] = std::exp(log_lo + (log_hi - log_lo) * k / (count - 1));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

std::vector<double> lambda_grid(int n) {
  return n <= 1000 ? lambda_grid(1.0, 7.0, 25) : lambda_grid(0.5, 10.0, 25);
}

double type_i_error_rate(const std::vector<IntervalEstimate>& intervals,
                         const Eigen::VectorXd& beta_true) {
  long nulls = 0;
  long rejections = 0;
  for (const IntervalEstimate& ci : intervals) {
    if (ci.coef < 0 || ci.coef >= beta_true.size() || beta_true[ci.coef] != 0.0) {
      continue;
    }
    ++nulls;
    if (ci.lower > 0.0 || ci.upper < 0.0) {
      ++rejections;
    }
  }
  return nulls == 0 ? 0.0 : static_cast<double>(rejections) / nulls;
}

double MethodStats::mean_type_i() const { return ratio(type1_sum, type1_count); }

double coverage_rate(const CoefStats& stats) {
  return ratio(static_cast<double>(stats.covered), stats.intervals);
}

double mean_width(const CoefStats& stats) {
  return ratio(stats.width_sum, stats.width_count);
}

double mean_lower(const CoefStats& stats) {
  return ratio(stats.lower_sum, stats.width_count);
}

double mean_upper(const CoefStats& stats) {
  return ratio(stats.upper_sum, stats.width_count);
}

double mean_point(const CoefStats& stats) {
  return ratio(stats.point_sum, stats.intervals);
}

double exclude_zero_rate(const CoefStats& stats) {
  return ratio(static_cast<double>(stats.excluded_zero), stats.intervals);
}

double selection_rate(const CoefStats& stats, long method_runs) {
  return ratio(static_cast<double>(stats.intervals), method_runs);
}

namespace {

struct IntervalOutcome {
  int coef = -1;
  double lower = 0.0;
  double upper = 0.0;
  double point = 0.0;
  bool degenerate = false;
};

struct MethodOutcome {
  bool attempted = false;
  bool failed = false;
  double type1 = 0.0;
  std::vector<IntervalOutcome> intervals;
};

struct CellOutcome {
  bool fit_ok = false;
  double aic = std::numeric_limits<double>::infinity();
  double bic = std::numeric_limits<double>::infinity();
  MethodOutcome selective;
  MethodOutcome naive;
  MethodOutcome split;
};

struct ReplicateOutcome {
  std::vector<CellOutcome> cells;
  int aic_choice = -1;
  int bic_choice = -1;
};

void record_intervals(MethodOutcome* outcome,
                      const std::vector<IntervalEstimate>& cis,
                      const Eigen::VectorXd& beta_true) {
  outcome->type1 = type_i_error_rate(cis, beta_true);
  outcome->intervals.reserve(cis.size());
  for (const IntervalEstimate& ci : cis) {
    outcome->intervals.push_back(
        {ci.coef, ci.lower, ci.upper, ci.point, ci.degenerate});
  }
}

// Warm-started descending-lambda path; entry k fits grid[k] (ascending grid).
std::vector<PenalizedFit> fit_path(const Dataset& data,
                                   const std::vector<double>& grid,
                                   const EmOptions& em) {
  std::vector<PenalizedFit> fits(grid.size());
  std::optional<Coefficients> warm;
  for (int k = static_cast<int>(grid.size()) - 1; k >= 0; --k) {
    fits[k] = em_fit(data, grid[k], warm, em);
    warm = fits[k].theta_hat;
  }
  return fits;
}

ReplicateOutcome run_replicate(const StudyOptions& options,
                               const std::vector<double>& grid,
                               double assumed_se, double assumed_sp,
                               std::uint64_t replicate_seed) {
  DgpConfig config = options.config;
  config.seed = replicate_seed;
  SimulatedData sim = simulate_dataset(config);
  Dataset data = std::move(sim.data);
  data.se = assumed_se;
  data.sp = assumed_sp;
  const Eigen::VectorXd& beta_true = options.config.theta_true.beta;
  const int grid_size = static_cast<int>(grid.size());

  ReplicateOutcome outcome;
  outcome.cells.resize(grid_size);

  const std::vector<PenalizedFit> fits = fit_path(data, grid, options.em);

  Dataset test_half;
  std::vector<PenalizedFit> train_fits;
  if (options.split && data.pool_count() >= 2) {
    const auto [train_pools, test_pools] =
        split_pools(data.pool_count(), child_seed(replicate_seed, kSplitStream));
    const Dataset train_half = subset_pools(data, train_pools);
    test_half = subset_pools(data, test_pools);
    train_fits = fit_path(train_half, grid, options.em);
  }

  // The unpenalized refits behind the naive and split intervals depend on
  // lambda only through the selected model, so cache them per model.
  std::map<std::vector<int>, MethodOutcome> naive_cache;
  std::map<std::vector<int>, MethodOutcome> split_cache;

  for (int k = 0; k < grid_size; ++k) {
    CellOutcome& cell = outcome.cells[k];
    const PenalizedFit& fit = fits[k];
    cell.fit_ok = fit.converged;
    if (cell.fit_ok) {
      const std::vector<int> model = fit.selected_model();
      const double loglik = observed_loglik(fit.theta_hat, data);
      const CriterionPair criteria =
          aic_bic_from_loglik(loglik, model.size(), data.n());
      cell.aic = criteria.aic;
      cell.bic = criteria.bic;

      if (options.selective) {
        cell.selective.attempted = true;
        try {
          std::vector<IntervalEstimate> cis;
          if (!model.empty()) {
            const PostSelectionEstimate est =
                make_post_selection_estimate(fit, data);
            cis = selective_cis(est, options.level);
          }
          record_intervals(&cell.selective, cis, beta_true);
        } catch (const std::exception&) {
          cell.selective.failed = true;
        }
      }
      if (options.naive) {
        const auto cached = naive_cache.find(model);
        if (cached != naive_cache.end()) {
          cell.naive = cached->second;
        } else {
          cell.naive.attempted = true;
          try {
            record_intervals(&cell.naive, naive_ci(fit, data, options.level),
                             beta_true);
          } catch (const std::exception&) {
            cell.naive.failed = true;
          }
          naive_cache.emplace(model, cell.naive);
        }
      }
    }
    if (!train_fits.empty()) {
      const std::vector<int> train_model = train_fits[k].selected_model();
      const auto cached = train_fits[k].converged
                              ? split_cache.find(train_model)
                              : split_cache.end();
      if (train_fits[k].converged && cached != split_cache.end()) {
        cell.split = cached->second;
      } else {
        cell.split.attempted = true;
        if (!train_fits[k].converged) {
          cell.split.failed = true;
        } else {
          try {
            record_intervals(&cell.split,
                             split_ci(train_fits[k], test_half, options.level),
                             beta_true);
          } catch (const std::exception&) {
            cell.split.failed = true;
          }
          split_cache.emplace(train_model, cell.split);
        }
      }
    }
  }

  for (int k = 0; k < grid_size; ++k) {
    const CellOutcome& cell = outcome.cells[k];
    if (!cell.fit_ok) {
      continue;
    }
    if (outcome.aic_choice < 0 || cell.aic < outcome.cells[outcome.aic_choice].aic) {
      outcome.aic_choice = k;
    }
    if (outcome.bic_choice < 0 || cell.bic < outcome.cells[outcome.bic_choice].bic) {
      outcome.bic_choice = k;
    }
  }
  return outcome;
}

void fold_method(MethodStats* stats, const MethodOutcome& outcome,
                 const Eigen::VectorXd& beta_true) {
  if (!outcome.attempted) {
    return;
  }
  ++stats->attempts;
  if (outcome.failed) {
    ++stats->failures;
    return;
  }
  stats->type1_sum += outcome.type1;
  ++stats->type1_count;
  for (const IntervalOutcome& ci : outcome.intervals) {
    if (ci.coef < 0 || ci.coef >= static_cast<int>(stats->coef.size())) {
      continue;
    }
    CoefStats& acc = stats->coef[ci.coef];
    ++acc.intervals;
    const double truth = beta_true[ci.coef];
    if (ci.lower <= truth && truth <= ci.upper) {
      ++acc.covered;
    }
    if (ci.lower > 0.0 || ci.upper < 0.0) {
      ++acc.excluded_zero;
    }
    acc.point_sum += ci.point;
    if (ci.degenerate) {
      ++acc.degenerate;
    } else {
      acc.width_sum += ci.upper - ci.lower;
      acc.lower_sum += ci.lower;
      acc.upper_sum += ci.upper;
      ++acc.width_count;
    }
  }
}

// Lower median of the chosen-lambda multiset given per-index tallies.
double median_choice(const std::vector<long>& tallies,
                     const std::vector<double>& grid) {
  const long total = std::accumulate(tallies.begin(), tallies.end(), 0L);
  if (total == 0) {
    return kNaN;
  }
  const long target = (total - 1) / 2;
  long seen = 0;
  for (std::size_t k = 0; k < tallies.size(); ++k) {
    seen += tallies[k];
    if (seen > target) {
      return grid[k];
    }
  }
  return grid.back();
}

}  // namespace

StudyReport run_study(const StudyOptions& options) {
  if (options.replicates < 1) {
    throw std::invalid_argument("study needs at least one replicate");
  }
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw std::invalid_argument("confidence level must lie in (0, 1)");
  }
  const auto start = std::chrono::steady_clock::now();

  std::vector<double> grid =
      options.grid.empty() ? lambda_grid(options.config.n) : options.grid;
  std::sort(grid.begin(), grid.end());
  if (grid.empty() || grid.front() < 0.0) {
    throw std::invalid_argument("lambda grid must be nonempty and nonnegative");
  }
  const double assumed_se =
      std::isnan(options.assumed_se) ? options.config.se : options.assumed_se;
  const double assumed_sp =
      std::isnan(options.assumed_sp) ? options.config.sp : options.assumed_sp;

  const int replicates = options.replicates;
  std::vector<ReplicateOutcome> outcomes(replicates);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= replicates) {
        return;
      }
      outcomes[r] = run_replicate(options, grid, assumed_se, assumed_sp,
                                  child_seed(options.seed, r));
    }
  };

  int threads = options.threads > 0
                    ? options.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, replicates);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t]() {
        try {
          worker();
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (std::thread& th : pool) {
      th.join();
    }
    for (const std::exception_ptr& err : errors) {
      if (err) {
        std::rethrow_exception(err);
      }
    }
  }

  StudyReport report;
  report.config = options.config;
  report.assumed_se = assumed_se;
  report.assumed_sp = assumed_sp;
  report.seed = options.seed;
  report.replicates = replicates;
  report.level = options.level;
  report.grid = grid;
  report.cells.resize(grid.size());
  report.aic_choices.assign(grid.size(), 0);
  report.bic_choices.assign(grid.size(), 0);
  const int p = options.config.p();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    report.cells[k].lambda = grid[k];
    report.cells[k].selective.coef.resize(p);
    report.cells[k].naive.coef.resize(p);
    report.cells[k].split.coef.resize(p);
  }

  const Eigen::VectorXd& beta_true = options.config.theta_true.beta;
  for (int r = 0; r < replicates; ++r) {
    const ReplicateOutcome& rep = outcomes[r];
    for (std::size_t k = 0; k < grid.size(); ++k) {
      LambdaCell& cell = report.cells[k];
      const CellOutcome& out = rep.cells[k];
      ++cell.fits;
      if (!out.fit_ok) {
        ++cell.fit_failures;
      }
      fold_method(&cell.selective, out.selective, beta_true);
      fold_method(&cell.naive, out.naive, beta_true);
      fold_method(&cell.split, out.split, beta_true);
    }
    if (rep.aic_choice >= 0) {
      ++report.aic_choices[rep.aic_choice];
    }
    if (rep.bic_choice >= 0) {
      ++report.bic_choices[rep.bic_choice];
    }
  }
  report.median_aic_lambda = median_choice(report.aic_choices, grid);
  report.median_bic_lambda = median_choice(report.bic_choices, grid);
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

StudyReport misspecification_study(StudyOptions options, double assumed_se,
                                   double assumed_sp) {
  options.assumed_se = assumed_se;
  options.assumed_sp = assumed_sp;
  return run_study(options);
}

}  // namespace gtsel
