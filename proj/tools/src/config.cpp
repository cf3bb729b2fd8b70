#include "config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "opttomo/errors.hpp"

namespace opttomo::cli {

namespace {

using nlohmann::json;

const toml::Table* section(const toml::Table& root, const std::string& name) {
  const toml::Value* v = toml::find(root, name);
  if (v == nullptr) return nullptr;
  if (!v->is_table())
    fail(errc::config_error, "[" + name + "] must be a table");
  return &v->as_table();
}

double get_double(const toml::Table& t, const std::string& key, double fallback) {
  auto it = t.find(key);
  return it == t.end() ? fallback : it->second.as_double();
}

std::int64_t get_int(const toml::Table& t, const std::string& key,
                     std::int64_t fallback) {
  auto it = t.find(key);
  return it == t.end() ? fallback : it->second.as_int();
}

bool get_bool(const toml::Table& t, const std::string& key, bool fallback) {
  auto it = t.find(key);
  return it == t.end() ? fallback : it->second.as_bool();
}

std::string get_string(const toml::Table& t, const std::string& key,
                       const std::string& fallback) {
  auto it = t.find(key);
  return it == t.end() ? fallback : it->second.as_string();
}

std::size_t checked_size(std::int64_t v, const std::string& what) {
  if (v < 0)
    fail(errc::config_error, what + " must be non-negative, got " +
                                 std::to_string(v));
  return static_cast<std::size_t>(v);
}

std::size_t checked_positive_size(std::int64_t v, const std::string& what) {
  if (v <= 0)
    fail(errc::config_error,
         what + " must be positive, got " + std::to_string(v));
  return static_cast<std::size_t>(v);
}

TargetMeasurement parse_measurement(const toml::Table& t,
                                    const std::string& what) {
  TargetMeasurement m;
  m.feature_width_mm = get_double(t, "feature_width_mm", 0.0);
  m.feature_width_px = get_double(t, "feature_width_px", 0.0);
  m.distance_mm = get_double(t, "distance_mm", 0.0);
  if (!(m.feature_width_mm > 0) || !(m.feature_width_px > 0) ||
      !(m.distance_mm > 0))
    fail(errc::config_error, what + " needs positive feature_width_mm, "
                                    "feature_width_px and distance_mm");
  return m;
}

PhantomPrimitive parse_primitive(const toml::Table& t, std::size_t index) {
  auto where = [index](const std::string& msg) {
    return "[[phantom]] #" + std::to_string(index + 1) + ": " + msg;
  };

  std::array<double, 3> center{0, 0, 0};
  if (auto it = t.find("center"); it != t.end()) {
    const toml::Array& arr = it->second.as_array();
    if (arr.size() != 2 && arr.size() != 3)
      fail(errc::config_error, where("center must have 2 or 3 components"));
    for (std::size_t i = 0; i < arr.size(); ++i) center[i] = arr[i].as_double();
  }

  const std::string shape = get_string(t, "shape", "");
  const double mu = get_double(t, "mu", 0.0);
  if (shape == "disk") {
    return make_disk(center[0], center[1], get_double(t, "radius", 0.0), mu);
  }
  if (shape == "ellipse") {
    return make_ellipse(center[0], center[1], get_double(t, "radius_x", 0.0),
                        get_double(t, "radius_y", 0.0), mu);
  }
  if (shape == "sphere") {
    return make_sphere(center[0], center[1], center[2],
                       get_double(t, "radius", 0.0), mu);
  }
  if (shape == "cylinder") {
    return make_cylinder(center[0], center[1], center[2],
                         get_double(t, "radius", 0.0),
                         get_double(t, "half_height", 0.0), mu);
  }
  fail(errc::config_error,
       where("shape must be disk, ellipse, sphere or cylinder"));
}

}  // namespace

PipelineConfig load_pipeline_config(const std::filesystem::path& path,
                                    const std::vector<std::string>& overrides) {
  PipelineConfig cfg;
  if (!std::filesystem::exists(path))
    fail(errc::config_error, "config file does not exist: " + path.string());
  cfg.raw = toml::parse_file(path);
  cfg.config_dir = path.parent_path();

  for (const std::string& kv : overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      fail(errc::config_error, "--set expects key=value, got '" + kv + "'");
    toml::set_override(cfg.raw, kv.substr(0, eq), kv.substr(eq + 1));
  }

  if (const toml::Table* t = section(cfg.raw, "run")) {
    std::int64_t threads = get_int(*t, "threads", 0);
    if (threads < 0 || threads > 4096)
      fail(errc::config_error, "run.threads must be in 0..4096");
    cfg.run.threads = static_cast<unsigned>(threads);
    std::int64_t seed = get_int(*t, "seed", 0);
    if (seed < 0) fail(errc::config_error, "run.seed must be non-negative");
    cfg.run.seed = static_cast<std::uint64_t>(seed);
    cfg.run.verbose = get_bool(*t, "verbose", false);
    cfg.run.output_dir = get_string(*t, "output_dir", "out");
  }

  if (const toml::Table* t = section(cfg.raw, "input")) {
    InputSettings in;
    std::string manifest = get_string(*t, "manifest", "");
    if (manifest.empty())
      fail(errc::config_error, "input.manifest must be set");
    in.manifest = manifest;
    in.pattern = bayer_pattern_from_string(get_string(*t, "bayer_pattern", "rggb"));
    std::int64_t depth = get_int(*t, "bit_depth", 12);
    if (depth < 10 || depth > 16)
      fail(errc::config_error, "input.bit_depth must be in 10..16");
    in.bit_depth = static_cast<int>(depth);
    cfg.input = in;
  }

  if (const toml::Table* t = section(cfg.raw, "crop")) {
    CropRegion crop;
    crop.u0 = checked_size(get_int(*t, "u0", 0), "crop.u0");
    crop.v0 = checked_size(get_int(*t, "v0", 0), "crop.v0");
    crop.width = checked_positive_size(get_int(*t, "width", 0), "crop.width");
    crop.height = checked_positive_size(get_int(*t, "height", 0), "crop.height");
    cfg.crop = crop;
  }

  if (const toml::Table* t = section(cfg.raw, "flatfield")) {
    cfg.flatfield.n_left =
        checked_size(get_int(*t, "n_left", 40), "flatfield.n_left");
    cfg.flatfield.n_right =
        checked_size(get_int(*t, "n_right", 40), "flatfield.n_right");
    cfg.flatfield.smoothing_window = checked_positive_size(
        get_int(*t, "smoothing_window", 9), "flatfield.smoothing_window");
    if (cfg.flatfield.smoothing_window % 2 == 0)
      fail(errc::config_error, "flatfield.smoothing_window must be odd");
    if (cfg.flatfield.n_left + cfg.flatfield.n_right == 0)
      fail(errc::config_error, "flat-field air margins must be non-empty");
  }

  if (const toml::Table* t = section(cfg.raw, "geometry")) {
    if (auto it = t->find("calibration"); it != t->end()) {
      cfg.geometry.calibration = it->second.as_string();
      std::filesystem::path p = resolve_path(cfg, *cfg.geometry.calibration);
      if (!std::filesystem::exists(p))
        fail(errc::config_error,
             "geometry.calibration does not exist: " + p.string());
    }
    auto opt_double = [&](const char* key) -> std::optional<double> {
      auto it = t->find(key);
      if (it == t->end()) return std::nullopt;
      return it->second.as_double();
    };
    cfg.geometry.f_eff_px = opt_double("f_eff_px");
    cfg.geometry.c_x = opt_double("c_x");
    cfg.geometry.c_y = opt_double("c_y");
    cfg.geometry.axis_distance_mm = opt_double("axis_distance_mm");
    cfg.geometry.pixel_pitch_mm = opt_double("pixel_pitch_mm");
    if (cfg.geometry.f_eff_px.has_value() && !(*cfg.geometry.f_eff_px > 0))
      fail(errc::config_error, "geometry.f_eff_px must be positive");
    if (cfg.geometry.axis_distance_mm.has_value() &&
        !(*cfg.geometry.axis_distance_mm > 0))
      fail(errc::config_error, "geometry.axis_distance_mm must be positive");
  }

  if (const toml::Table* t = section(cfg.raw, "recon")) {
    cfg.recon.grid_size =
        checked_positive_size(get_int(*t, "grid_size", 256), "recon.grid_size");
    cfg.recon.pixel_size_mm = get_double(*t, "pixel_size_mm", 0.0);
    if (cfg.recon.pixel_size_mm < 0)
      fail(errc::config_error, "recon.pixel_size_mm must be non-negative");
    const std::string filter = get_string(*t, "filter", "ramp");
    if (filter == "ramp") {
      cfg.recon.filter = FilterKind::ramp;
    } else if (filter == "ramp_hann") {
      cfg.recon.filter = FilterKind::ramp_hann;
    } else {
      fail(errc::config_error, "recon.filter must be ramp or ramp_hann");
    }
  }

  if (const toml::Table* t = section(cfg.raw, "simulate")) {
    SimulateSettings& sim = cfg.simulate;
    sim.rows = checked_positive_size(get_int(*t, "rows", 64), "simulate.rows");
    sim.cols = checked_positive_size(get_int(*t, "cols", 256), "simulate.cols");
    sim.angle_start_deg = get_double(*t, "angle_start_deg", 0.0);
    sim.angle_step_deg = get_double(*t, "angle_step_deg", 1.0);
    if (!(sim.angle_step_deg > 0))
      fail(errc::config_error, "simulate.angle_step_deg must be positive");
    sim.n_angles =
        checked_positive_size(get_int(*t, "n_angles", 360), "simulate.n_angles");
    if (sim.n_angles < 2)
      fail(errc::config_error, "simulate.n_angles must be at least 2");
    sim.i0 = get_double(*t, "i0", 3000.0);
    if (!(sim.i0 > 0)) fail(errc::config_error, "simulate.i0 must be positive");
    std::int64_t depth = get_int(*t, "bit_depth", 12);
    if (depth < 10 || depth > 16)
      fail(errc::config_error, "simulate.bit_depth must be in 10..16");
    sim.bit_depth = static_cast<int>(depth);
    const std::string noise = get_string(*t, "noise", "none");
    if (noise == "none") {
      sim.noise = NoiseModel::none;
    } else if (noise == "poisson") {
      sim.noise = NoiseModel::poisson;
    } else {
      fail(errc::config_error, "simulate.noise must be none or poisson");
    }
    sim.counts_per_code = get_double(*t, "counts_per_code", 1.0);
    if (!(sim.counts_per_code > 0))
      fail(errc::config_error, "simulate.counts_per_code must be positive");
    const std::string mode = get_string(*t, "mode", "planar");
    if (mode == "planar") {
      sim.mode = FanMode::planar;
    } else if (mode == "oblique") {
      sim.mode = FanMode::oblique;
    } else {
      fail(errc::config_error, "simulate.mode must be planar or oblique");
    }
    sim.vignetting_amplitude = get_double(*t, "vignetting_amplitude", 0.0);
    if (sim.vignetting_amplitude <= -1.0)
      fail(errc::config_error,
           "simulate.vignetting_amplitude must keep gains positive");
  }

  if (const toml::Value* v = toml::find(cfg.raw, "phantom")) {
    if (!v->is_array())
      fail(errc::config_error, "phantom must be an array of tables");
    const toml::Array& arr = v->as_array();
    for (std::size_t i = 0; i < arr.size(); ++i)
      cfg.phantom.primitives.push_back(parse_primitive(arr[i].as_table(), i));
  }

  if (const toml::Table* t = section(cfg.raw, "calibrate")) {
    CalibrateSettings cal;
    std::string corners = get_string(*t, "corners", "");
    if (corners.empty())
      fail(errc::config_error, "calibrate.corners must be set");
    cal.corners = corners;
    if (auto it = t->find("f_bare_mm"); it != t->end()) {
      cal.f_bare_mm = it->second.as_double();
      if (!(*cal.f_bare_mm > 0))
        fail(errc::config_error, "calibrate.f_bare_mm must be positive");
    }
    cfg.calibrate = cal;
  }

  if (const toml::Table* t = section(cfg.raw, "magnify")) {
    MagnifySettings mag;
    const toml::Value* bare = toml::find(*t, "bare");
    const toml::Value* lens = toml::find(*t, "lens");
    if (bare == nullptr || lens == nullptr)
      fail(errc::config_error, "[magnify] needs bare and lens measurements");
    mag.bare = parse_measurement(bare->as_table(), "magnify.bare");
    mag.lens = parse_measurement(lens->as_table(), "magnify.lens");
    cfg.magnify = mag;
  }

  return cfg;
}

std::filesystem::path resolve_path(const PipelineConfig& config,
                                   const std::filesystem::path& p) {
  if (p.is_absolute()) return p;
  return config.config_dir / p;
}

EffectiveGeometry resolve_geometry(const PipelineConfig& config) {
  EffectiveGeometry g;
  bool have_any = false;

  if (config.geometry.calibration.has_value()) {
    std::filesystem::path p = resolve_path(config, *config.geometry.calibration);
    std::ifstream in(p);
    if (!in) fail(errc::unreadable_file, "cannot open " + p.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded())
      fail(errc::data_error, "malformed calibration JSON: " + p.string());
    if (!j.contains("effective_geometry"))
      fail(errc::geometry_missing,
           p.string() + " has no effective_geometry; run calibrate with "
                        "magnification inputs first");
    const auto& eg = j["effective_geometry"];
    try {
      g.f_eff_px = eg.at("f_eff_px").get<double>();
      g.pixel_pitch_mm = eg.value("pixel_pitch_mm", 0.0);
      g.c_x = eg.at("c_x").get<double>();
      g.c_y = eg.at("c_y").get<double>();
      g.axis_distance_mm = eg.value("axis_distance_mm", 0.0);
    } catch (const nlohmann::json::exception& e) {
      fail(errc::data_error, p.string() + ": " + e.what());
    }
    have_any = true;
  }

  if (config.geometry.f_eff_px) { g.f_eff_px = *config.geometry.f_eff_px; have_any = true; }
  if (config.geometry.c_x) { g.c_x = *config.geometry.c_x; have_any = true; }
  if (config.geometry.c_y) { g.c_y = *config.geometry.c_y; have_any = true; }
  if (config.geometry.axis_distance_mm) {
    g.axis_distance_mm = *config.geometry.axis_distance_mm;
    have_any = true;
  }
  if (config.geometry.pixel_pitch_mm)
    g.pixel_pitch_mm = *config.geometry.pixel_pitch_mm;

  if (!have_any)
    fail(errc::geometry_missing,
         "no [geometry] section; set f_eff_px, c_x, c_y and axis_distance_mm "
         "or reference a calibration file");
  if (!(g.f_eff_px > 0))
    fail(errc::config_error, "geometry.f_eff_px must be positive");
  if (!(g.axis_distance_mm > 0))
    fail(errc::config_error, "geometry.axis_distance_mm must be positive");
  return g;
}

nlohmann::json toml_to_json(const toml::Table& table) {
  using nlohmann::json;
  std::function<json(const toml::Value&)> conv = [&](const toml::Value& v) -> json {
    if (v.is_bool()) return v.as_bool();
    if (v.is_int()) return v.as_int();
    if (v.is_float()) return v.as_double();
    if (v.is_string()) return v.as_string();
    if (v.is_array()) {
      json arr = json::array();
      for (const auto& item : v.as_array()) arr.push_back(conv(item));
      return arr;
    }
    json obj = json::object();
    for (const auto& [key, value] : v.as_table()) obj[key] = conv(value);
    return obj;
  };
  json obj = json::object();
  for (const auto& [key, value] : table) obj[key] = conv(value);
  return obj;
}

std::vector<SquareObservation> read_corners_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(errc::unreadable_file, "cannot open corners: " + path.string());

  std::string line;
  if (!std::getline(in, line))
    fail(errc::data_error, "empty corners file: " + path.string());
  {
    std::string compact;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
    if (compact != "plane_id,u00,v00,u10,v10,u01,v01,u11,v11")
      fail(errc::data_error,
           "corners file must start with "
           "'plane_id,u00,v00,u10,v10,u01,v01,u11,v11': " +
               path.string());
  }

  std::vector<SquareObservation> squares;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) { blank = false; break; }
    if (blank) continue;

    std::istringstream row(line);
    std::string cell;
    std::vector<double> fields;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(cell, &used));
        std::string rest = cell.substr(used);
        for (char c : rest)
          if (!std::isspace(static_cast<unsigned char>(c)))
            throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        std::ostringstream os;
        os << path.string() << ":" << lineno << ": malformed number '" << cell
           << "'";
        fail(errc::data_error, os.str());
      }
    }
    if (fields.size() != 9) {
      std::ostringstream os;
      os << path.string() << ":" << lineno << ": expected 9 fields, got "
         << fields.size();
      fail(errc::data_error, os.str());
    }
    SquareObservation sq;
    sq.plane_id = static_cast<int>(fields[0]);
    for (int c = 0; c < 4; ++c)
      sq.corners[c] = {fields[1 + 2 * c], fields[2 + 2 * c]};
    squares.push_back(sq);
  }
  if (squares.empty())
    fail(errc::data_error, "corners file lists no squares: " + path.string());
  return squares;
}

std::vector<double> make_angles(const SimulateSettings& sim) {
  std::vector<double> angles(sim.n_angles);
  for (std::size_t i = 0; i < sim.n_angles; ++i)
    angles[i] =
        sim.angle_start_deg + static_cast<double>(i) * sim.angle_step_deg;
  return angles;
}

std::vector<double> make_vignetting(const SimulateSettings& sim) {
  if (sim.vignetting_amplitude == 0.0) return {};
  std::vector<double> g(sim.rows);
  for (std::size_t r = 0; r < sim.rows; ++r)
    g[r] = 1.0 + sim.vignetting_amplitude *
                     std::sin(std::numbers::pi * static_cast<double>(r) /
                              static_cast<double>(sim.rows));
  return g;
}

}  // namespace opttomo::cli
