#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace opttomo {

struct PgmImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::uint16_t maxval = 0;
  std::vector<std::uint16_t> samples;  // row-major
};

// Binary (P5) PGM. 16-bit samples are big-endian on disk per the format.
PgmImage read_pgm(const std::filesystem::path& path);
void write_pgm16(const std::filesystem::path& path, std::size_t width,
                 std::size_t height, std::uint16_t maxval,
                 const std::vector<std::uint16_t>& samples);
void write_pgm8(const std::filesystem::path& path, std::size_t width,
                std::size_t height, const std::vector<std::uint8_t>& samples);

}  // namespace opttomo
