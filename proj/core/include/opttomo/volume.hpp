#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "opttomo/calib.hpp"

namespace opttomo {

// Reconstructed attenuation volume. data is x-fastest, then y, then slice;
// slice k lies at height slice_z_mm[k].
struct Volume {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t n_slices = 0;
  double pixel_size_mm = 0;
  double slice_pitch_mm = 0;
  std::vector<double> slice_z_mm;
  std::optional<EffectiveGeometry> geometry;
  std::vector<double> data;

  double at(std::size_t slice, std::size_t iy, std::size_t ix) const {
    return data[(slice * ny + iy) * nx + ix];
  }
};

// Raw file: IEEE 754 float32, little endian, x-fastest. The JSON sidecar
// (same stem, .json) carries dimensions, spacing, geometry and a sha256 of
// the raw bytes; extra_metadata is merged in as a "pipeline" object from a
// pre-serialized JSON snippet.
void write_volume(const Volume& volume, const std::filesystem::path& raw_path,
                  const std::string& extra_metadata_json = "");

Volume read_volume(const std::filesystem::path& raw_path);

// Exact bytes of the raw file; used for determinism checks.
std::vector<unsigned char> volume_raw_bytes(const Volume& volume);

}  // namespace opttomo
