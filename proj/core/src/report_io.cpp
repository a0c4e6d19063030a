#include "gtsel/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>

namespace gtsel {

namespace {

std::string format_value(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

// Store non-finite values as real JSON nulls rather than relying on the
// dump-time NaN -> null conversion, so in-memory report comparisons work.
nlohmann::json nullable(double value) {
  return std::isfinite(value) ? nlohmann::json(value)
                              : nlohmann::json(nullptr);
}

void csv_row(std::ostream& out, const std::string& lambda,
             const char* method, const char* metric, int coef,
             const std::string& value) {
  out << lambda << ',' << method << ',' << metric << ',' << coef << ','
      << value << '\n';
}

void csv_metric(std::ostream& out, const std::string& lambda,
                const char* method, const char* metric, int coef,
                double value) {
  if (!std::isfinite(value)) {
    return;
  }
  csv_row(out, lambda, method, metric, coef, format_value(value));
}

void csv_count(std::ostream& out, const std::string& lambda,
               const char* method, const char* metric, int coef, long value) {
  csv_row(out, lambda, method, metric, coef, std::to_string(value));
}

void method_csv(std::ostream& out, const std::string& lambda,
                const char* method, const MethodStats& stats) {
  if (stats.attempts == 0) {
    return;
  }
  csv_count(out, lambda, method, "attempts", 0, stats.attempts);
  csv_count(out, lambda, method, "failures", 0, stats.failures);
  csv_metric(out, lambda, method, "type_i_error", 0, stats.mean_type_i());
  for (std::size_t c = 0; c < stats.coef.size(); ++c) {
    const CoefStats& coef = stats.coef[c];
    if (coef.intervals == 0) {
      continue;
    }
    const int label = static_cast<int>(c) + 1;
    csv_metric(out, lambda, method, "selection_rate", label,
               selection_rate(coef, stats.type1_count));
    csv_metric(out, lambda, method, "coverage", label, coverage_rate(coef));
    csv_metric(out, lambda, method, "mean_point", label, mean_point(coef));
    csv_metric(out, lambda, method, "exclude_zero_rate", label,
               exclude_zero_rate(coef));
    csv_count(out, lambda, method, "degenerate", label, coef.degenerate);
    csv_metric(out, lambda, method, "mean_width", label, mean_width(coef));
    csv_metric(out, lambda, method, "mean_lower", label, mean_lower(coef));
    csv_metric(out, lambda, method, "mean_upper", label, mean_upper(coef));
  }
}

nlohmann::json coef_json(const CoefStats& stats, long method_runs) {
  return {
      {"intervals", stats.intervals},
      {"covered", stats.covered},
      {"excluded_zero", stats.excluded_zero},
      {"degenerate", stats.degenerate},
      {"selection_rate", nullable(selection_rate(stats, method_runs))},
      {"coverage", nullable(coverage_rate(stats))},
      {"mean_point", nullable(mean_point(stats))},
      {"exclude_zero_rate", nullable(exclude_zero_rate(stats))},
      {"mean_width", nullable(mean_width(stats))},
      {"mean_lower", nullable(mean_lower(stats))},
      {"mean_upper", nullable(mean_upper(stats))},
  };
}

nlohmann::json method_json(const MethodStats& stats) {
  nlohmann::json coefficients = nlohmann::json::array();
  for (std::size_t c = 0; c < stats.coef.size(); ++c) {
    nlohmann::json entry = coef_json(stats.coef[c], stats.type1_count);
    entry["coef"] = static_cast<int>(c) + 1;
    coefficients.push_back(std::move(entry));
  }
  return {
      {"attempts", stats.attempts},
      {"failures", stats.failures},
      {"runs", stats.type1_count},
      {"type_i_error", nullable(stats.mean_type_i())},
      {"coefficients", std::move(coefficients)},
  };
}

}  // namespace

nlohmann::json interval_json(const IntervalEstimate& ci) {
  return {
      {"coef", ci.coef + 1},
      {"method", method_name(ci.method)},
      {"level", ci.level},
      {"point", nullable(ci.point)},
      {"lower", nullable(ci.lower)},
      {"upper", nullable(ci.upper)},
      {"odds_lower", nullable(ci.odds_lower)},
      {"odds_upper", nullable(ci.odds_upper)},
      {"pivot_at_point", nullable(ci.pivot_at_point)},
      {"pivot_at_zero", nullable(ci.pivot_at_zero)},
      {"v_minus", nullable(ci.v_minus)},
      {"v_plus", nullable(ci.v_plus)},
      {"degenerate", ci.degenerate},
  };
}

nlohmann::json study_report_json(const StudyReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const LambdaCell& cell : report.cells) {
    cells.push_back({
        {"lambda", cell.lambda},
        {"fits", cell.fits},
        {"fit_failures", cell.fit_failures},
        {"selective", method_json(cell.selective)},
        {"naive", method_json(cell.naive)},
        {"split", method_json(cell.split)},
    });
  }
  std::vector<double> beta(report.config.theta_true.beta.begin(),
                           report.config.theta_true.beta.end());
  return {
      {"schema", kStudySchema},
      {"config",
       {
           {"n", report.config.n},
           {"p", report.config.p()},
           {"pool_size", report.config.pool_size},
           {"se", report.config.se},
           {"sp", report.config.sp},
           {"alpha_true", report.config.theta_true.alpha},
           {"beta_true", beta},
       }},
      {"assumed_se", report.assumed_se},
      {"assumed_sp", report.assumed_sp},
      {"seed", report.seed},
      {"replicates", report.replicates},
      {"level", report.level},
      {"grid", report.grid},
      {"aic_choices", report.aic_choices},
      {"bic_choices", report.bic_choices},
      {"median_aic_lambda", nullable(report.median_aic_lambda)},
      {"median_bic_lambda", nullable(report.median_bic_lambda)},
      {"cells", std::move(cells)},
  };
}

void write_study_report_csv(const StudyReport& report, std::ostream& out) {
  out << "lambda,method,metric,coef,value\n";
  csv_count(out, "", "study", "replicates", 0, report.replicates);
  csv_metric(out, "", "study", "level", 0, report.level);
  csv_metric(out, "", "aic", "median_lambda", 0, report.median_aic_lambda);
  csv_metric(out, "", "bic", "median_lambda", 0, report.median_bic_lambda);
  for (std::size_t k = 0; k < report.grid.size(); ++k) {
    const std::string lambda = format_value(report.grid[k]);
    csv_count(out, lambda, "aic", "chosen_count", 0, report.aic_choices[k]);
    csv_count(out, lambda, "bic", "chosen_count", 0, report.bic_choices[k]);
  }
  for (const LambdaCell& cell : report.cells) {
    const std::string lambda = format_value(cell.lambda);
    if (cell.fits > 0) {
      csv_count(out, lambda, "fit", "attempts", 0, cell.fits);
      csv_count(out, lambda, "fit", "failures", 0, cell.fit_failures);
    }
    method_csv(out, lambda, "selective", cell.selective);
    method_csv(out, lambda, "naive", cell.naive);
    method_csv(out, lambda, "split", cell.split);
  }
}

}  // namespace gtsel
