#include "opttomo/attenuation.hpp"

#include <algorithm>
#include <cmath>

#include "opttomo/errors.hpp"

namespace opttomo {

namespace {

// Median with the even-count convention: mean of the two central order
// statistics. Reorders its scratch argument.
double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (n % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

}  // namespace

double epsilon_floor(const ProjectionStack& stack) {
  return std::exp2(-stack.bit_depth) * stack.full_scale;
}

IncidentField estimate_incident_field(const ProjectionStack& stack,
                                      const AirMarginSpec& margins) {
  if (margins.n_left + margins.n_right == 0)
    fail(errc::config_error, "air margins must cover at least one column");
  if (margins.smoothing_window == 0 || margins.smoothing_window % 2 == 0)
    fail(errc::config_error, "smoothing window must be odd");
  if (margins.n_left + margins.n_right >= stack.cols)
    fail(errc::margin_too_wide,
         "air margins leave no interior columns in the frame");

  const double floor = epsilon_floor(stack);
  const std::size_t rows = stack.rows;
  const std::size_t half = margins.smoothing_window / 2;

  IncidentField field;
  field.rows = rows;
  field.n_angles = stack.n_angles;
  field.i0.resize(rows * stack.n_angles);

  std::vector<double> air;
  air.reserve(margins.n_left + margins.n_right);
  std::vector<double> raw_median(rows);
  std::vector<double> window;
  window.reserve(margins.smoothing_window);

  for (std::size_t a = 0; a < stack.n_angles; ++a) {
    for (std::size_t r = 0; r < rows; ++r) {
      air.clear();
      for (std::size_t c = 0; c < margins.n_left; ++c)
        air.push_back(stack.at(a, r, c));
      for (std::size_t c = stack.cols - margins.n_right; c < stack.cols; ++c)
        air.push_back(stack.at(a, r, c));
      raw_median[r] = std::max(median_inplace(air), floor);
    }

    for (std::size_t r = 0; r + 1 < rows; ++r) {
      const double lo = std::min(raw_median[r], raw_median[r + 1]);
      const double hi = std::max(raw_median[r], raw_median[r + 1]);
      if (hi - lo > 0.2 * lo) field.jump_warnings.emplace_back(a, r);
    }

    // Moving median down the rows; the window shrinks symmetrically at the
    // edges so it always stays centred and odd.
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t h = std::min({half, r, rows - 1 - r});
      window.assign(raw_median.begin() + (r - h), raw_median.begin() + (r + h + 1));
      field.i0[a * rows + r] = std::max(median_inplace(window), floor);
    }
  }
  return field;
}

AttenuationStack beer_lambert(const ProjectionStack& stack,
                              const IncidentField& incident) {
  if (incident.rows != stack.rows || incident.n_angles != stack.n_angles)
    fail(errc::dimension_mismatch,
         "incident field does not match the stack dimensions");

  const double floor = epsilon_floor(stack);

  AttenuationStack mu;
  mu.rows = stack.rows;
  mu.cols = stack.cols;
  mu.n_angles = stack.n_angles;
  mu.angles_deg = stack.angles_deg;
  mu.crop = stack.crop;
  mu.geometry = stack.geometry;
  mu.data.resize(stack.data.size());

  for (std::size_t a = 0; a < stack.n_angles; ++a) {
    for (std::size_t r = 0; r < stack.rows; ++r) {
      const double i0 = incident.at(a, r);
      for (std::size_t c = 0; c < stack.cols; ++c) {
        const double i = std::max(stack.at(a, r, c), floor);
        mu.at(a, r, c) = -std::log(i / i0);
      }
    }
  }
  return mu;
}

}  // namespace opttomo
