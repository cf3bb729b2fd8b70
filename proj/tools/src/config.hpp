#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "opttomo/attenuation.hpp"
#include "opttomo/calib.hpp"
#include "opttomo/phantom.hpp"
#include "opttomo/raw.hpp"
#include "opttomo/recon.hpp"
#include "opttomo/toml.hpp"

namespace opttomo::cli {

struct RunSettings {
  unsigned threads = 0;  // 0 = all hardware threads
  std::uint64_t seed = 0;
  bool verbose = false;
  std::filesystem::path output_dir = "out";
};

struct InputSettings {
  std::filesystem::path manifest;
  BayerPattern pattern = BayerPattern::rggb;
  int bit_depth = 12;
};

struct GeometrySettings {
  std::optional<std::filesystem::path> calibration;  // calibration JSON
  std::optional<double> f_eff_px;
  std::optional<double> c_x;
  std::optional<double> c_y;
  std::optional<double> axis_distance_mm;
  std::optional<double> pixel_pitch_mm;
};

struct SimulateSettings {
  std::size_t rows = 64;
  std::size_t cols = 256;
  double angle_start_deg = 0.0;
  double angle_step_deg = 1.0;
  std::size_t n_angles = 360;
  double i0 = 3000.0;
  int bit_depth = 12;
  NoiseModel noise = NoiseModel::none;
  double counts_per_code = 1.0;
  FanMode mode = FanMode::planar;
  double vignetting_amplitude = 0.0;  // g(v) = 1 + a sin(pi v / rows)
};

struct CalibrateSettings {
  std::filesystem::path corners;
  std::optional<double> f_bare_mm;
};

struct MagnifySettings {
  TargetMeasurement bare;
  TargetMeasurement lens;
};

struct PipelineConfig {
  toml::Table raw;
  std::filesystem::path config_dir;

  RunSettings run;
  std::optional<InputSettings> input;
  std::optional<CropRegion> crop;
  AirMarginSpec flatfield;
  GeometrySettings geometry;
  ReconConfig recon;
  SimulateSettings simulate;
  DigitalPhantom phantom;
  std::optional<CalibrateSettings> calibrate;
  std::optional<MagnifySettings> magnify;
};

// Parses the config file, applies key=value overrides, extracts and
// range-checks every present section. Configuration violations throw with
// errc::config_error.
PipelineConfig load_pipeline_config(const std::filesystem::path& path,
                                    const std::vector<std::string>& overrides);

// Resolves a possibly relative path against the config file location.
std::filesystem::path resolve_path(const PipelineConfig& config,
                                   const std::filesystem::path& p);

// The effective geometry for reconstruction: direct keys win, otherwise the
// calibration sidecar referenced by [geometry].calibration.
EffectiveGeometry resolve_geometry(const PipelineConfig& config);

nlohmann::json toml_to_json(const toml::Table& table);

// Corner CSV with header plane_id,u00,v00,u10,v10,u01,v01,u11,v11; corner
// order matches the canonical square (0,0),(1,0),(0,1),(1,1).
std::vector<SquareObservation> read_corners_csv(const std::filesystem::path& path);

std::vector<double> make_angles(const SimulateSettings& sim);
std::vector<double> make_vignetting(const SimulateSettings& sim);

}  // namespace opttomo::cli
