#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "opttomo/calib.hpp"

namespace opttomo {

// Color filter layout named by the top-left 2x2 block, row-major.
enum class BayerPattern { rggb, bggr, grbg, gbrg };

BayerPattern bayer_pattern_from_string(const std::string& name);
const char* bayer_pattern_name(BayerPattern p);

// True when sensor site (row, col) carries a green filter.
bool is_green_site(BayerPattern p, std::size_t row, std::size_t col);

struct BayerMosaic {
  std::size_t width = 0;
  std::size_t height = 0;
  int bit_depth = 0;
  BayerPattern pattern = BayerPattern::rggb;
  double angle_deg = 0;
  std::vector<std::uint16_t> samples;  // row-major
};

// Full-resolution green plane; green sites keep their raw code, red/blue
// sites take the mean of adjacent green sites.
struct GreenImage {
  std::size_t width = 0;
  std::size_t height = 0;
  double angle_deg = 0;
  std::vector<double> samples;
};

struct CropRegion {
  std::size_t u0 = 0;
  std::size_t v0 = 0;
  std::size_t width = 0;
  std::size_t height = 0;
};

// Cropped frames ordered by angle. data layout: [angle][row][col].
struct ProjectionStack {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t n_angles = 0;
  std::vector<double> angles_deg;  // strictly increasing, uniform
  CropRegion crop;                 // full-frame placement of each frame
  int bit_depth = 0;
  double full_scale = 0;  // 2^bit_depth, raw code units
  std::vector<double> data;
  std::optional<EffectiveGeometry> geometry;

  double& at(std::size_t angle, std::size_t row, std::size_t col) {
    return data[(angle * rows + row) * cols + col];
  }
  double at(std::size_t angle, std::size_t row, std::size_t col) const {
    return data[(angle * rows + row) * cols + col];
  }
};

BayerMosaic load_bayer(const std::filesystem::path& path, BayerPattern pattern,
                       int bit_depth, double angle_deg = 0);

GreenImage demosaic_green(const BayerMosaic& mosaic);

// Mosaic crop keeps filter phase by renaming the pattern for odd offsets;
// crop dimensions must stay even.
BayerMosaic crop_mosaic(const BayerMosaic& mosaic, const CropRegion& crop);

GreenImage crop_green(const GreenImage& frame, const CropRegion& crop);

ProjectionStack assemble_stack(std::vector<GreenImage> frames,
                               const CropRegion& crop, int bit_depth);

// Manifest CSV with a "filename,angle_deg" header, one frame per line.
struct ManifestEntry {
  std::string filename;
  double angle_deg = 0;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace opttomo
