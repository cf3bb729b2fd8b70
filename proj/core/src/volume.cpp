#include "opttomo/volume.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

#include "json.hpp"
#include "opttomo/errors.hpp"
#include "opttomo/sha256.hpp"

namespace opttomo {

namespace {

using nlohmann::json;

void append_f32_le(std::vector<unsigned char>& out, float value) {
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
  out.push_back(static_cast<unsigned char>(bits & 0xff));
  out.push_back(static_cast<unsigned char>((bits >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((bits >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((bits >> 24) & 0xff));
}

float read_f32_le(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                             (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

json geometry_to_json(const EffectiveGeometry& g) {
  return json{{"f_eff_px", g.f_eff_px},
              {"pixel_pitch_mm", g.pixel_pitch_mm},
              {"c_x", g.c_x},
              {"c_y", g.c_y},
              {"axis_distance_mm", g.axis_distance_mm}};
}

EffectiveGeometry geometry_from_json(const json& j) {
  EffectiveGeometry g;
  g.f_eff_px = j.at("f_eff_px").get<double>();
  g.pixel_pitch_mm = j.value("pixel_pitch_mm", 0.0);
  g.c_x = j.at("c_x").get<double>();
  g.c_y = j.at("c_y").get<double>();
  g.axis_distance_mm = j.at("axis_distance_mm").get<double>();
  return g;
}

}  // namespace

std::vector<unsigned char> volume_raw_bytes(const Volume& volume) {
  std::vector<unsigned char> bytes;
  bytes.reserve(4 * volume.data.size());
  for (double v : volume.data) append_f32_le(bytes, static_cast<float>(v));
  return bytes;
}

void write_volume(const Volume& volume, const std::filesystem::path& raw_path,
                  const std::string& extra_metadata_json) {
  if (volume.data.size() != volume.nx * volume.ny * volume.n_slices)
    fail(errc::dimension_mismatch, "volume buffer does not match dimensions");

  const std::vector<unsigned char> bytes = volume_raw_bytes(volume);
  {
    std::ofstream out(raw_path, std::ios::binary);
    if (!out) fail(errc::unreadable_file, "cannot write " + raw_path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(errc::unreadable_file, "write failed: " + raw_path.string());
  }

  json sidecar{
      {"format", "float32-le"},
      {"order", "x-fastest"},
      {"nx", volume.nx},
      {"ny", volume.ny},
      {"n_slices", volume.n_slices},
      {"voxel_size_mm",
       {volume.pixel_size_mm, volume.pixel_size_mm, volume.slice_pitch_mm}},
      {"slice_z_mm", volume.slice_z_mm},
      {"sha256", sha256_hex(bytes.data(), bytes.size())},
  };
  if (volume.geometry.has_value())
    sidecar["geometry"] = geometry_to_json(*volume.geometry);
  if (!extra_metadata_json.empty()) {
    json extra = json::parse(extra_metadata_json, nullptr, false);
    if (extra.is_discarded())
      fail(errc::config_error, "extra volume metadata is not valid JSON");
    sidecar["pipeline"] = extra;
  }

  std::filesystem::path sidecar_path = raw_path;
  sidecar_path.replace_extension(".json");
  std::ofstream out(sidecar_path);
  if (!out)
    fail(errc::unreadable_file, "cannot write " + sidecar_path.string());
  out << sidecar.dump(2) << "\n";
  if (!out)
    fail(errc::unreadable_file, "write failed: " + sidecar_path.string());
}

Volume read_volume(const std::filesystem::path& raw_path) {
  std::filesystem::path sidecar_path = raw_path;
  sidecar_path.replace_extension(".json");
  std::ifstream meta(sidecar_path);
  if (!meta)
    fail(errc::unreadable_file, "cannot open " + sidecar_path.string());
  json sidecar = json::parse(meta, nullptr, false);
  if (sidecar.is_discarded())
    fail(errc::data_error, "malformed sidecar: " + sidecar_path.string());

  Volume volume;
  try {
    volume.nx = sidecar.at("nx").get<std::size_t>();
    volume.ny = sidecar.at("ny").get<std::size_t>();
    volume.n_slices = sidecar.at("n_slices").get<std::size_t>();
    const auto& voxel = sidecar.at("voxel_size_mm");
    volume.pixel_size_mm = voxel.at(0).get<double>();
    volume.slice_pitch_mm = voxel.at(2).get<double>();
    volume.slice_z_mm =
        sidecar.value("slice_z_mm", std::vector<double>{});
    if (sidecar.contains("geometry"))
      volume.geometry = geometry_from_json(sidecar.at("geometry"));
  } catch (const json::exception& e) {
    fail(errc::data_error,
         sidecar_path.string() + ": missing or malformed field: " + e.what());
  }

  const std::size_t count = volume.nx * volume.ny * volume.n_slices;
  std::ifstream in(raw_path, std::ios::binary);
  if (!in) fail(errc::unreadable_file, "cannot open " + raw_path.string());
  std::vector<unsigned char> bytes(4 * count);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size())
    fail(errc::data_error, "raw volume shorter than sidecar dimensions: " +
                               raw_path.string());

  if (sidecar.contains("sha256") &&
      sidecar.at("sha256").get<std::string>() !=
          sha256_hex(bytes.data(), bytes.size()))
    fail(errc::data_error,
         "raw volume does not match sidecar checksum: " + raw_path.string());

  volume.data.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    volume.data[i] = read_f32_le(&bytes[4 * i]);
  return volume;
}

}  // namespace opttomo
