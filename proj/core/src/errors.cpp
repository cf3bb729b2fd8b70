#include "opttomo/errors.hpp"

namespace opttomo {

error_class classify(errc code) noexcept {
  switch (code) {
    case errc::config_error:
    case errc::non_positive_extent:
    case errc::margin_too_wide:
    case errc::row_out_of_range:
    case errc::geometry_missing:
    case errc::invalid_element:
      return error_class::config;
    case errc::data_error:
    case errc::unreadable_file:
    case errc::odd_dimensions:
    case errc::sample_out_of_range:
    case errc::duplicate_angle:
    case errc::nonuniform_spacing:
    case errc::dimension_mismatch:
      return error_class::data;
    case errc::numeric_failure:
    case errc::all_points_coincident:
    case errc::degenerate_corners:
    case errc::insufficient_constraints:
    case errc::ambiguous_solution:
    case errc::not_positive_definite:
      return error_class::numeric;
  }
  return error_class::numeric;
}

const char* errc_name(errc code) noexcept {
  switch (code) {
    case errc::config_error: return "config_error";
    case errc::non_positive_extent: return "non_positive_extent";
    case errc::margin_too_wide: return "margin_too_wide";
    case errc::row_out_of_range: return "row_out_of_range";
    case errc::geometry_missing: return "geometry_missing";
    case errc::invalid_element: return "invalid_element";
    case errc::data_error: return "data_error";
    case errc::unreadable_file: return "unreadable_file";
    case errc::odd_dimensions: return "odd_dimensions";
    case errc::sample_out_of_range: return "sample_out_of_range";
    case errc::duplicate_angle: return "duplicate_angle";
    case errc::nonuniform_spacing: return "nonuniform_spacing";
    case errc::dimension_mismatch: return "dimension_mismatch";
    case errc::numeric_failure: return "numeric_failure";
    case errc::all_points_coincident: return "all_points_coincident";
    case errc::degenerate_corners: return "degenerate_corners";
    case errc::insufficient_constraints: return "insufficient_constraints";
    case errc::ambiguous_solution: return "ambiguous_solution";
    case errc::not_positive_definite: return "not_positive_definite";
  }
  return "unknown";
}

}  // namespace opttomo
