#pragma once

#include <iosfwd>
#include <nlohmann/json_fwd.hpp>

#include "gtsel/inference.hpp"
#include "gtsel/simulation.hpp"

namespace gtsel {

inline constexpr const char* kStudySchema = "gtsel-study-1";
inline constexpr const char* kInferSchema = "gtsel-infer-1";

// Coefficients are reported 1-based; 0 marks method-level rows. Non-finite
// values serialize as JSON null and are omitted from the CSV.
nlohmann::json interval_json(const IntervalEstimate& ci);
nlohmann::json study_report_json(const StudyReport& report);

// Tidy long format, one header row then `lambda,method,metric,coef,value`
// rows; study-level rows leave the lambda field empty.
void write_study_report_csv(const StudyReport& report, std::ostream& out);

}  // namespace gtsel
