#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace opttomo {

// Single-strip grayscale 32-bit float TIFF, little endian, one sample per
// pixel. Covers exactly what the exporter emits.
void write_tiff_f32(const std::filesystem::path& path, std::size_t width,
                    std::size_t height, const std::vector<float>& pixels);

struct TiffImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> pixels;
};

TiffImage read_tiff_f32(const std::filesystem::path& path);

}  // namespace opttomo
