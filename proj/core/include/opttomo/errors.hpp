#pragma once

#include <stdexcept>
#include <string>

namespace opttomo {

enum class errc {
  // configuration / validation
  config_error,
  non_positive_extent,
  margin_too_wide,
  row_out_of_range,
  geometry_missing,
  invalid_element,
  // data / ingest
  data_error,
  unreadable_file,
  odd_dimensions,
  sample_out_of_range,
  duplicate_angle,
  nonuniform_spacing,
  dimension_mismatch,
  // numeric / estimation
  numeric_failure,
  all_points_coincident,
  degenerate_corners,
  insufficient_constraints,
  ambiguous_solution,
  not_positive_definite,
};

// Coarse classification used for process exit codes:
// 2 = bad configuration, 3 = bad data, 4 = numeric failure.
enum class error_class { config = 2, data = 3, numeric = 4 };

error_class classify(errc code) noexcept;
const char* errc_name(errc code) noexcept;

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  errc code() const noexcept { return code_; }
  error_class cls() const noexcept { return classify(code_); }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace opttomo
