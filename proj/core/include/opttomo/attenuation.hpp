#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "opttomo/raw.hpp"

namespace opttomo {

// Border columns treated as unobstructed air, and the row-direction median
// window used to smooth the per-row incident estimate.
struct AirMarginSpec {
  std::size_t n_left = 40;
  std::size_t n_right = 40;
  std::size_t smoothing_window = 9;  // odd
};

struct IncidentField {
  std::size_t rows = 0;
  std::size_t n_angles = 0;
  std::vector<double> i0;  // [angle][row], raw code units, >= epsilon floor
  // (angle, row) pairs where the raw air median changed by more than 20%
  // between adjacent rows.
  std::vector<std::pair<std::size_t, std::size_t>> jump_warnings;

  double at(std::size_t angle, std::size_t row) const {
    return i0[angle * rows + row];
  }
};

// Per-ray line integrals of the attenuation coefficient, same layout and
// angle grid as the stack they came from.
struct AttenuationStack {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t n_angles = 0;
  std::vector<double> angles_deg;
  CropRegion crop;
  std::vector<double> data;  // [angle][row][col]
  std::optional<EffectiveGeometry> geometry;

  double& at(std::size_t angle, std::size_t row, std::size_t col) {
    return data[(angle * rows + row) * cols + col];
  }
  double at(std::size_t angle, std::size_t row, std::size_t col) const {
    return data[(angle * rows + row) * cols + col];
  }
};

// Intensity floor in raw code units: one least-significant code of the
// digitizer, 2^-bit_depth of full scale.
double epsilon_floor(const ProjectionStack& stack);

IncidentField estimate_incident_field(const ProjectionStack& stack,
                                      const AirMarginSpec& margins);

AttenuationStack beer_lambert(const ProjectionStack& stack,
                              const IncidentField& incident);

}  // namespace opttomo
