#pragma once

#include <stdexcept>
#include <string>

namespace gtsel {

// The weighted Gram matrix (or complete-data information) of the selected
// design is not positive definite, so the estimator is not identified.
class degenerate_design_error : public std::runtime_error {
 public:
  explicit degenerate_design_error(const std::string& what)
      : std::runtime_error(what) {}
};

// Both truncated normal tail masses underflowed even after erfcx rescaling;
// the requested ratio carries no usable precision.
class tail_degeneracy_error : public std::runtime_error {
 public:
  explicit tail_degeneracy_error(const std::string& what)
      : std::runtime_error(what) {}
};

// The observed statistic violates the selection event it supposedly came
// from, e.g. a contrast value outside its truncation region.
class inconsistent_event_error : public std::runtime_error {
 public:
  explicit inconsistent_event_error(const std::string& what)
      : std::runtime_error(what) {}
};

// An iterative fit (EM outer loop, penalized M-step or unpenalized refit)
// hit its iteration cap before meeting the declared tolerance.
class non_convergence_error : public std::runtime_error {
 public:
  explicit non_convergence_error(const std::string& what)
      : std::runtime_error(what) {}
};

// Malformed CSV input; line is 1-based and 0 when the failure is not tied
// to a specific line (empty file, missing header).
class csv_format_error : public std::runtime_error {
 public:
  csv_format_error(const std::string& what, int line_number)
      : std::runtime_error(what), line(line_number) {}
  int line = 0;
};

}  // namespace gtsel
