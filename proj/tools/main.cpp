// Command line front end: dataset simulation, penalized fitting with
// post-selection inference, and seeded reproduction studies with file-based
// reports. Exit codes: 0 success, 2 usage/validation, 3 I/O, 4 numerical.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gtsel/dataset_csv.hpp"
#include "gtsel/em_lasso.hpp"
#include "gtsel/errors.hpp"
#include "gtsel/inference.hpp"
#include "gtsel/model.hpp"
#include "gtsel/report_io.hpp"
#include "gtsel/selection.hpp"
#include "gtsel/simulation.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gtsel;

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

// File-system failures get their own type so the exit-code mapping can
// separate them from numerical errors.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fnv1a_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("cannot open '" + path + "' for reading");
  }
  std::uint64_t hash = 1469598103934665603ull;
  char byte;
  while (in.get(byte)) {
    hash ^= static_cast<unsigned char>(byte);
    hash *= 1099511628211ull;
  }
  char hex[24];
  std::snprintf(hex, sizeof(hex), "fnv1a:%016llx",
                static_cast<unsigned long long>(hash));
  return hex;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw io_error("cannot open '" + path.string() + "' for writing");
  }
  out << content;
  if (!out) {
    throw io_error("failed writing '" + path.string() + "'");
  }
}

// Every output file gets a sibling <file>.manifest.json recording how to
// reproduce it. The timestamp and runtime live only here, so the outputs
// themselves stay byte-identical across re-runs.
void write_manifest(const fs::path& output, const std::string& command,
                    json config, std::uint64_t seed, json input_digests,
                    double runtime_seconds) {
  json manifest = {
      {"command", command},
      {"version", GTSEL_VERSION},
      {"config", std::move(config)},
      {"seed", seed},
      {"input_digests", std::move(input_digests)},
      {"timestamp", utc_timestamp()},
      {"runtime_seconds", runtime_seconds},
  };
  write_text_file(output.string() + ".manifest.json", manifest.dump(2) + "\n");
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  int n = 1000;
  int p = 10;
  std::vector<double> theta;  // intercept first; empty -> default pattern
  int pool_size = 1;
  double se = 0.95;
  double sp = 0.97;
  std::uint64_t seed = 1;
  std::string out;
};

fs::path truth_path(const fs::path& out) {
  fs::path truth = out;
  truth.replace_extension();
  truth += ".truth.csv";
  return truth;
}

int run_simulate(const SimulateArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  DgpConfig config = DgpConfig::defaults(args.n, args.pool_size);
  config.se = args.se;
  config.sp = args.sp;
  config.seed = args.seed;
  if (args.theta.empty()) {
    if (args.p != config.p()) {
      Eigen::VectorXd beta = Eigen::VectorXd::Zero(args.p);
      for (int k = 0; k < std::min(3, args.p); ++k) {
        beta[k] = config.theta_true.beta[k];
      }
      config.theta_true.beta = beta;
    }
  } else {
    if (static_cast<int>(args.theta.size()) != args.p + 1) {
      throw std::invalid_argument(
          "--theta needs exactly p+1 values (intercept first), got " +
          std::to_string(args.theta.size()) + " for p=" + std::to_string(args.p));
    }
    config.theta_true.alpha = args.theta[0];
    config.theta_true.beta =
        Eigen::Map<const Eigen::VectorXd>(args.theta.data() + 1, args.p);
  }

  const SimulatedData sim = simulate_dataset(config);

  std::ostringstream data_csv;
  write_dataset_csv(data_csv, sim.data);
  write_text_file(args.out, data_csv.str());

  std::ostringstream truth_csv;
  write_truth_csv(truth_csv, sim.y_true);
  const fs::path truth = truth_path(args.out);
  write_text_file(truth, truth_csv.str());

  std::vector<double> beta(config.theta_true.beta.begin(),
                           config.theta_true.beta.end());
  write_manifest(args.out, "simulate",
                 {{"n", args.n},
                  {"p", args.p},
                  {"alpha", config.theta_true.alpha},
                  {"beta", beta},
                  {"pool_size", args.pool_size},
                  {"se", args.se},
                  {"sp", args.sp},
                  {"out", args.out}},
                 args.seed, json::object(), elapsed_seconds(start));

  int positive_pools = 0;
  for (int z : sim.data.z) {
    positive_pools += z;
  }
  std::printf("wrote %s (%d rows, %d pools, %d assay-positive) and %s\n",
              args.out.c_str(), sim.data.n(), sim.data.pool_count(),
              positive_pools, truth.string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// infer

struct InferArgs {
  std::string data;
  std::string lambda = "aic";
  double level = 0.95;
  std::string method = "selective";
  double se = 0.95;
  double sp = 0.97;
  std::uint64_t seed = 1;
  std::string out;
};

int run_infer(const InferArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  std::ifstream in(args.data);
  if (!in) {
    throw io_error("cannot open '" + args.data + "' for reading");
  }
  const Dataset data = read_dataset_csv(in, args.se, args.sp);

  const bool want_selective = args.method == "selective" || args.method == "all";
  const bool want_naive = args.method == "naive" || args.method == "all";
  const bool want_split = args.method == "split" || args.method == "all";

  // Resolve the penalty: a literal value, or the AIC/BIC minimizer over the
  // default grid (warm-started path, then a clean refit at the winner so the
  // result is identical to passing that value directly).
  double lambda = 0.0;
  json path_trace = json::array();
  if (args.lambda == "aic" || args.lambda == "bic") {
    const std::vector<double> grid = lambda_grid(data.n());
    std::optional<Coefficients> warm;
    std::vector<double> values(grid.size());
    for (int k = static_cast<int>(grid.size()) - 1; k >= 0; --k) {
      const PenalizedFit fit = em_fit(data, grid[k], warm);
      warm = fit.theta_hat;
      const CriterionPair crit = aic_bic_from_loglik(
          observed_loglik(fit.theta_hat, data),
          static_cast<int>(fit.selected_model().size()), data.n());
      values[k] = args.lambda == "aic" ? crit.aic : crit.bic;
      path_trace.push_back({{"lambda", grid[k]},
                            {"criterion", values[k]},
                            {"model_size", fit.selected_model().size()}});
    }
    int best = 0;
    for (int k = 1; k < static_cast<int>(grid.size()); ++k) {
      if (values[k] < values[best]) {
        best = k;
      }
    }
    lambda = grid[best];
    std::reverse(path_trace.begin(), path_trace.end());
  } else {
    try {
      std::size_t used = 0;
      lambda = std::stod(args.lambda, &used);
      if (used != args.lambda.size()) {
        throw std::invalid_argument("");
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("--lambda must be a number, 'aic' or 'bic'");
    }
    if (!(lambda >= 0.0)) {
      throw std::invalid_argument("--lambda must be non-negative");
    }
  }

  const PenalizedFit fit = em_fit(data, lambda);
  const std::vector<int> model = fit.selected_model();

  json report = {
      {"schema", kInferSchema},
      {"lambda", lambda},
      {"lambda_rule", (args.lambda == "aic" || args.lambda == "bic")
                          ? args.lambda
                          : "fixed"},
      {"level", args.level},
      {"se", args.se},
      {"sp", args.sp},
      {"method", args.method},
      {"information", "louis"},
      {"converged", fit.converged},
      {"alpha_hat", fit.theta_hat.alpha},
  };
  if (!path_trace.empty()) {
    report["criterion_path"] = path_trace;
  }
  json model_json = json::array();
  json signs_json = json::array();
  json beta_hat = json::array();
  const Eigen::VectorXd signs =
      model.empty() ? Eigen::VectorXd() : fit.selected_signs();
  for (std::size_t k = 0; k < model.size(); ++k) {
    model_json.push_back(model[k] + 1);  // 1-based covariate columns
    signs_json.push_back(signs[static_cast<int>(k)]);
    beta_hat.push_back(fit.theta_hat.beta[model[k]]);
  }
  report["model"] = std::move(model_json);
  report["signs"] = std::move(signs_json);
  report["beta_hat"] = std::move(beta_hat);

  json intervals = json::array();
  if (want_selective && !model.empty()) {
    const PostSelectionEstimate est = make_post_selection_estimate(fit, data);
    report["alpha_bar"] = est.theta_bar.alpha;
    json beta_bar = json::array();
    for (int k = 0; k < est.theta_bar.beta.size(); ++k) {
      beta_bar.push_back(est.theta_bar.beta[k]);
    }
    report["beta_bar"] = std::move(beta_bar);
    for (const IntervalEstimate& ci : selective_cis(est, args.level)) {
      intervals.push_back(interval_json(ci));
    }
  }
  if (want_naive) {
    for (const IntervalEstimate& ci : naive_ci(fit, data, args.level)) {
      intervals.push_back(interval_json(ci));
    }
  }
  if (want_split) {
    for (const IntervalEstimate& ci :
         split_inference(data, lambda, args.level, args.seed)) {
      intervals.push_back(interval_json(ci));
    }
  }
  report["intervals"] = std::move(intervals);

  write_text_file(args.out, report.dump(2) + "\n");
  write_manifest(args.out, "infer",
                 {{"data", args.data},
                  {"lambda", args.lambda},
                  {"level", args.level},
                  {"method", args.method},
                  {"se", args.se},
                  {"sp", args.sp},
                  {"out", args.out}},
                 args.seed, {{args.data, fnv1a_digest(args.data)}},
                 elapsed_seconds(start));

  std::ostringstream cols;
  for (int c : model) {
    cols << " x" << c + 1;
  }
  std::printf("lambda %.6g (%s), selected %zu column(s)%s, %zu interval(s) -> %s\n",
              lambda, report["lambda_rule"].get<std::string>().c_str(),
              model.size(), cols.str().c_str(),
              report["intervals"].size(), args.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// study

struct StudyArgs {
  std::string preset;
  int replicates = 500;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out_dir;
};

struct PhasedStudy {
  double lambda_star = 0.0;
  StudyReport selection;  // fits-only grid pass
  StudyReport report;     // single-penalty evaluation pass
};

PhasedStudy run_two_phase(const DgpConfig& config, const StudyArgs& args,
                          bool selective, bool naive, bool split,
                          double assumed_se, double assumed_sp) {
  StudyOptions phase_a;
  phase_a.config = config;
  phase_a.assumed_se = assumed_se;
  phase_a.assumed_sp = assumed_sp;
  phase_a.replicates = args.replicates;
  phase_a.seed = args.seed;
  phase_a.threads = args.threads;
  phase_a.selective = false;
  phase_a.naive = false;
  phase_a.split = false;

  PhasedStudy out;
  out.selection = run_study(phase_a);
  out.lambda_star = out.selection.median_aic_lambda;

  StudyOptions phase_b = phase_a;
  phase_b.grid = {out.lambda_star};
  phase_b.selective = selective;
  phase_b.naive = naive;
  phase_b.split = split;
  out.report = run_study(phase_b);
  return out;
}

void write_report_files(const StudyReport& report, const fs::path& stem) {
  write_text_file(stem.string() + ".json",
                  study_report_json(report).dump(2) + "\n");
  std::ostringstream csv;
  write_study_report_csv(report, csv);
  write_text_file(stem.string() + ".csv", csv.str());
}

double failure_fraction(const StudyReport& report) {
  long attempts = 0;
  long failures = 0;
  for (const LambdaCell& cell : report.cells) {
    attempts += cell.fits;
    failures += cell.fit_failures;
    for (const MethodStats* m : {&cell.selective, &cell.naive, &cell.split}) {
      attempts += m->attempts;
      failures += m->failures;
    }
  }
  return attempts == 0 ? 0.0 : static_cast<double>(failures) /
                                   static_cast<double>(attempts);
}

struct SummaryCounter {
  int metrics = 0;
  int misses = 0;

  // Coverage tolerance +/-2.5pp, width tolerance +/-15%: the bands the
  // reference numbers are validated against.
  const char* coverage(double got_pct, double ref_pct) {
    ++metrics;
    if (std::abs(got_pct - ref_pct) <= 2.5) {
      return "ok";
    }
    ++misses;
    return "OFF";
  }
  const char* width(double got, double ref) {
    ++metrics;
    if (std::abs(got - ref) <= 0.15 * ref) {
      return "ok";
    }
    ++misses;
    return "OFF";
  }
};

struct CoefRef {
  int coef;  // 0-based column
  double sel_width, sel_cov, naive_width, naive_cov;
};

void print_method_rows(const LambdaCell& cell,
                       const std::vector<CoefRef>& refs,
                       SummaryCounter* counter) {
  for (const CoefRef& ref : refs) {
    const double sel_cov = 100.0 * coverage_rate(cell.selective.coef[ref.coef]);
    const double sel_width = mean_width(cell.selective.coef[ref.coef]);
    std::printf("    coef %d: selective cov %5.1f (ref %4.1f, %s) width %4.2f "
                "(ref %3.1f, %s)",
                ref.coef + 1, sel_cov, ref.sel_cov,
                counter->coverage(sel_cov, ref.sel_cov), sel_width,
                ref.sel_width, counter->width(sel_width, ref.sel_width));
    if (cell.naive.attempts > 0) {
      const double nav_cov = 100.0 * coverage_rate(cell.naive.coef[ref.coef]);
      const double nav_width = mean_width(cell.naive.coef[ref.coef]);
      std::printf(" | naive cov %5.1f (ref %4.1f, %s) width %4.2f (ref %3.1f, %s)",
                  nav_cov, ref.naive_cov,
                  counter->coverage(nav_cov, ref.naive_cov), nav_width,
                  ref.naive_width, counter->width(nav_width, ref.naive_width));
    }
    std::printf("\n");
  }
}

int run_study_cmd(const StudyArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(args.out_dir, ec);
  if (ec) {
    throw io_error("cannot create '" + args.out_dir + "': " + ec.message());
  }
  const fs::path dir = args.out_dir;

  SummaryCounter counter;
  double worst_failures = 0.0;

  if (args.preset == "table1" || args.preset == "table2") {
    const bool misspecified = args.preset == "table2";
    // Reference coverage (%) and mean width per audited coefficient, in
    // pool-size order {1, 2, 4}.
    static const CoefRef kWellSpecified[3][3] = {
        {{1, 1.5, 93.1, 1.2, 95.6}, {3, 2.5, 94.9, 0.9, 92.8}, {5, 2.4, 95.0, 0.9, 92.5}},
        {{1, 1.7, 92.4, 1.2, 94.7}, {3, 2.8, 94.1, 1.0, 91.2}, {5, 2.9, 94.2, 1.0, 91.6}},
        {{1, 2.1, 93.9, 1.3, 95.3}, {3, 3.5, 94.2, 1.1, 90.1}, {5, 3.5, 94.0, 1.1, 89.8}},
    };
    static const CoefRef kMisspecified[3][3] = {
        {{1, 0.9, 13.8, 0.6, 10.5}, {3, 1.6, 95.3, 0.6, 92.8}, {5, 1.6, 95.7, 0.5, 92.3}},
        {{1, 1.4, 53.4, 0.8, 60.7}, {3, 2.3, 94.9, 0.8, 90.8}, {5, 2.3, 94.6, 0.8, 90.6}},
        {{1, 2.1, 84.0, 1.1, 90.0}, {3, 3.2, 93.9, 1.0, 89.3}, {5, 3.3, 93.6, 1.0, 89.0}},
    };
    std::printf("%s: coverage/width at the AIC-median penalty, n=1000, %d replicates%s\n",
                args.preset.c_str(), args.replicates,
                misspecified ? ", true accuracies 0.90/0.92 assumed 0.95/0.97"
                             : "");
    const int pool_sizes[3] = {1, 2, 4};
    for (int i = 0; i < 3; ++i) {
      DgpConfig config = DgpConfig::defaults(1000, pool_sizes[i]);
      double assumed_se = std::numeric_limits<double>::quiet_NaN();
      double assumed_sp = assumed_se;
      if (misspecified) {
        config.se = 0.90;
        config.sp = 0.92;
        assumed_se = 0.95;
        assumed_sp = 0.97;
      }
      const PhasedStudy phased =
          run_two_phase(config, args, /*selective=*/true, /*naive=*/true,
                        /*split=*/false, assumed_se, assumed_sp);
      const std::string stem = args.preset + "_m" + std::to_string(pool_sizes[i]);
      write_text_file(dir / (stem + "_selection.json"),
                      study_report_json(phased.selection).dump(2) + "\n");
      write_report_files(phased.report, dir / stem);
      worst_failures = std::max(worst_failures, failure_fraction(phased.report));

      std::printf("  m=%d, penalty %.4g:\n", pool_sizes[i], phased.lambda_star);
      print_method_rows(phased.report.cells[0],
                        {std::begin(misspecified ? kMisspecified[i]
                                                 : kWellSpecified[i]),
                         std::end(misspecified ? kMisspecified[i]
                                               : kWellSpecified[i])},
                        &counter);
    }
  } else if (args.preset == "figure1") {
    std::printf("figure1: type-I-error sweep, n=1000 pools of 4, %d replicates "
                "per penalty\n", args.replicates);
    StudyOptions options;
    options.config = DgpConfig::defaults(1000, 4);
    options.grid = lambda_grid(1.0, 7.0, 15);
    options.replicates = args.replicates;
    options.seed = args.seed;
    options.threads = args.threads;
    options.split = false;
    const StudyReport sweep = run_study(options);
    write_report_files(sweep, dir / "figure1");
    worst_failures = failure_fraction(sweep);

    std::printf("  %8s %12s %9s %10s %10s\n", "penalty", "selective-t1",
                "naive-t1", "aic-picks", "bic-picks");
    for (std::size_t k = 0; k < sweep.cells.size(); ++k) {
      std::printf("  %8.3f %12.3f %9.3f %10ld %10ld\n", sweep.cells[k].lambda,
                  sweep.cells[k].selective.mean_type_i(),
                  sweep.cells[k].naive.mean_type_i(), sweep.aic_choices[k],
                  sweep.bic_choices[k]);
    }
    std::printf("  AIC-median penalty %.4g, BIC-median penalty %.4g\n",
                sweep.median_aic_lambda, sweep.median_bic_lambda);
  } else {  // appendixC
    std::printf("appendixC: pool-level data splitting, n=1000 pools of 2, "
                "%d replicates\n", args.replicates);
    const PhasedStudy phased = run_two_phase(
        DgpConfig::defaults(1000, 2), args, /*selective=*/false,
        /*naive=*/false, /*split=*/true,
        std::numeric_limits<double>::quiet_NaN(),
        std::numeric_limits<double>::quiet_NaN());
    write_text_file(dir / "appendixC_selection.json",
                    study_report_json(phased.selection).dump(2) + "\n");
    write_report_files(phased.report, dir / "appendixC");
    worst_failures = failure_fraction(phased.report);

    // Reference split-method coverage (%) and width per coefficient.
    const double ref_cov[3] = {95.8, 94.6, 94.7};
    const double ref_width[3] = {2.2, 1.7, 1.7};
    const int coefs[3] = {1, 3, 5};
    std::printf("  m=2, penalty %.4g:\n", phased.lambda_star);
    const LambdaCell& cell = phased.report.cells[0];
    for (int k = 0; k < 3; ++k) {
      const double cov = 100.0 * coverage_rate(cell.split.coef[coefs[k]]);
      const double width = mean_width(cell.split.coef[coefs[k]]);
      std::printf("    coef %d: split cov %5.1f (ref %4.1f, %s) width %4.2f "
                  "(ref %3.1f, %s)\n",
                  coefs[k] + 1, cov, ref_cov[k],
                  counter.coverage(cov, ref_cov[k]), width, ref_width[k],
                  counter.width(width, ref_width[k]));
    }
  }

  write_manifest(dir / args.preset, "study",
                 {{"preset", args.preset},
                  {"replicates", args.replicates},
                  {"threads", args.threads},
                  {"out_dir", args.out_dir}},
                 args.seed, json::object(), elapsed_seconds(start));

  if (counter.metrics > 0) {
    std::printf("%d/%d summary metrics within tolerance",
                counter.metrics - counter.misses, counter.metrics);
  } else {
    std::printf("sweep written");
  }
  std::printf("; replicate failures %.1f%%; reports in %s\n",
              100.0 * worst_failures, args.out_dir.c_str());
  if (worst_failures > 0.05) {
    std::fprintf(stderr, "error: more than 5%% of replicates failed\n");
    return kExitNumeric;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized logistic regression with valid post-selection "
               "inference for error-prone individual and pooled assays"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Draw a dataset and its latent truth to CSV");
  simulate->add_option("--n", sim.n, "Individuals")->check(CLI::PositiveNumber);
  simulate->add_option("--p", sim.p, "Covariates")->check(CLI::PositiveNumber);
  simulate->add_option("--theta", sim.theta,
                       "Comma list of p+1 true coefficients, intercept first")
      ->delimiter(',');
  simulate->add_option("--pool-size", sim.pool_size, "Individuals per pool")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--se", sim.se, "Assay sensitivity")
      ->check(CLI::Range(1e-9, 1.0));
  simulate->add_option("--sp", sim.sp, "Assay specificity")
      ->check(CLI::Range(1e-9, 1.0));
  simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_option("--out", sim.out, "Dataset CSV path")->required();

  InferArgs inf;
  CLI::App* infer = app.add_subcommand(
      "infer", "Fit one dataset and report confidence intervals as JSON");
  infer->add_option("--data", inf.data, "Dataset CSV (pool_id,z,x1..xp)")
      ->required();
  infer->add_option("--lambda", inf.lambda,
                    "Penalty value, or 'aic'/'bic' to pick one over the grid");
  infer->add_option("--level", inf.level, "Confidence level")
      ->check(CLI::Range(1e-6, 1.0 - 1e-6));
  infer->add_option("--method", inf.method, "Inference method")
      ->check(CLI::IsMember({"selective", "naive", "split", "all"}));
  infer->add_option("--se", inf.se, "Assumed assay sensitivity")
      ->check(CLI::Range(1e-9, 1.0));
  infer->add_option("--sp", inf.sp, "Assumed assay specificity")
      ->check(CLI::Range(1e-9, 1.0));
  infer->add_option("--seed", inf.seed, "Seed for the data-splitting shuffle");
  infer->add_option("--out", inf.out, "Report JSON path")->required();

  StudyArgs study;
  CLI::App* study_cmd = app.add_subcommand(
      "study", "Reproduce a seeded simulation study and compare to references");
  study_cmd
      ->add_option("--preset", study.preset,
                   "table1 (coverage m=1/2/4), figure1 (type-I sweep m=4), "
                   "table2 (misspecified accuracies), appendixC (splitting m=2)")
      ->required()
      ->check(CLI::IsMember({"table1", "figure1", "table2", "appendixC"}));
  study_cmd->add_option("--replicates", study.replicates, "Monte Carlo size")
      ->check(CLI::PositiveNumber);
  study_cmd->add_option("--seed", study.seed, "Master seed");
  study_cmd->add_option("--threads", study.threads,
                        "Worker threads (0 = hardware)")
      ->check(CLI::NonNegativeNumber);
  study_cmd->add_option("--out-dir", study.out_dir, "Report directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      return run_simulate(sim);
    }
    if (infer->parsed()) {
      return run_infer(inf);
    }
    return run_study_cmd(study);
  } catch (const csv_format_error& e) {
    std::fprintf(stderr, "error: %s (line %d)\n", e.what(), e.line);
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
}
