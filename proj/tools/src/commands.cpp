#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <type_traits>

#include "json.hpp"
#include "opttomo/errors.hpp"
#include "opttomo/pgm.hpp"
#include "opttomo/phantom.hpp"
#include "opttomo/recon.hpp"
#include "opttomo/sha256.hpp"
#include "opttomo/tiff.hpp"
#include "opttomo/version.hpp"
#include "opttomo/volume.hpp"

namespace opttomo::cli {

namespace {

using nlohmann::json;

std::string format_index(std::size_t i, int width = 4) {
  std::ostringstream os;
  os << std::setw(width) << std::setfill('0') << i;
  return os.str();
}

struct Runner {
  PipelineConfig config;
  std::string command;
  std::filesystem::path out_dir;
  bool verbose = false;
  json stages = json::array();
  json input_hashes = json::object();
  json output_hashes = json::object();

  template <typename Fn>
  auto stage(const std::string& name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record(name, start);
    } else {
      auto result = fn();
      record(name, start);
      return result;
    }
  }

  void record(const std::string& name,
              std::chrono::steady_clock::time_point start) {
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    stages.push_back(json{{"name", name}, {"wall_ms", ms}});
    if (verbose)
      std::cerr << "[" << command << "] " << name << ": " << ms << " ms\n";
  }

  void note_output(const std::filesystem::path& path) {
    output_hashes[path.filename().string()] = sha256_file_hex(path);
  }

  void write_manifest() {
    json manifest{
        {"tool", "opttomo"},
        {"version", kVersion},
        {"command", command},
        {"config", toml_to_json(config.raw)},
        {"stages", stages},
        {"input_hashes", input_hashes},
        {"output_hashes", output_hashes},
    };
    const std::filesystem::path path = out_dir / "run_manifest.json";
    std::ofstream out(path);
    if (!out) fail(errc::unreadable_file, "cannot write " + path.string());
    out << manifest.dump(2) << "\n";
    if (!out) fail(errc::unreadable_file, "write failed: " + path.string());
    std::cout << "wrote " << path.string() << "\n";
  }
};

Runner make_runner(const CommandOptions& options, const std::string& command,
                   bool config_required = true) {
  Runner r;
  r.command = command;
  if (options.config_path.empty()) {
    if (config_required)
      fail(errc::config_error, "--config is required for " + command);
  } else {
    r.config = load_pipeline_config(options.config_path, options.overrides);
  }
  if (options.threads >= 0)
    r.config.run.threads = static_cast<unsigned>(options.threads);
  if (options.seed >= 0)
    r.config.run.seed = static_cast<std::uint64_t>(options.seed);
  r.config.run.verbose = r.config.run.verbose || options.verbose;
  if (!options.output_dir.empty()) r.config.run.output_dir = options.output_dir;
  r.verbose = r.config.run.verbose;

  r.out_dir = r.config.run.output_dir;
  if (r.out_dir.is_relative() && !options.config_path.empty())
    r.out_dir = options.config_path.parent_path() / r.out_dir;
  std::filesystem::create_directories(r.out_dir);
  return r;
}

json matrix_to_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

json geometry_to_json(const EffectiveGeometry& g) {
  return json{{"f_eff_px", g.f_eff_px},
              {"pixel_pitch_mm", g.pixel_pitch_mm},
              {"c_x", g.c_x},
              {"c_y", g.c_y},
              {"axis_distance_mm", g.axis_distance_mm}};
}

json magnification_to_json(const MagnificationEstimate& m) {
  return json{{"magnification", m.magnification},
              {"bare_extent_rad_per_px", m.bare_extent_rad_per_px},
              {"lens_extent_rad_per_px", m.lens_extent_rad_per_px}};
}

// Loads mosaics listed by the manifest, demosaics the green plane and packs
// the cropped frames into an angle-sorted stack.
ProjectionStack load_stack(Runner& r) {
  if (!r.config.input.has_value())
    fail(errc::config_error, "[input] section is required for this command");
  if (!r.config.crop.has_value())
    fail(errc::config_error, "[crop] section is required for this command");
  const InputSettings& input = *r.config.input;

  const std::filesystem::path manifest_path =
      resolve_path(r.config, input.manifest);
  if (!std::filesystem::exists(manifest_path))
    fail(errc::config_error,
         "input.manifest does not exist: " + manifest_path.string());

  auto entries = r.stage("read_manifest",
                         [&] { return read_manifest(manifest_path); });
  r.input_hashes["manifest"] = sha256_file_hex(manifest_path);

  const std::filesystem::path frame_dir = manifest_path.parent_path();
  for (const auto& e : entries) {
    if (!std::filesystem::exists(frame_dir / e.filename))
      fail(errc::config_error,
           "frame does not exist: " + (frame_dir / e.filename).string());
  }

  std::vector<GreenImage> frames;
  r.stage("load_and_demosaic", [&] {
    Sha256 combined;
    frames.reserve(entries.size());
    for (const auto& e : entries) {
      const std::filesystem::path p = frame_dir / e.filename;
      BayerMosaic mosaic =
          load_bayer(p, input.pattern, input.bit_depth, e.angle_deg);
      combined.update(mosaic.samples.data(),
                      mosaic.samples.size() * sizeof(mosaic.samples[0]));
      frames.push_back(demosaic_green(mosaic));
    }
    r.input_hashes["frames"] = combined.hex_digest();
  });

  return r.stage("assemble_stack", [&] {
    return assemble_stack(std::move(frames), *r.config.crop, input.bit_depth);
  });
}

AttenuationStack attenuation_from_stack(Runner& r, ProjectionStack& stack,
                                        IncidentField* field_out = nullptr) {
  IncidentField field = r.stage("estimate_incident_field", [&] {
    return estimate_incident_field(stack, r.config.flatfield);
  });
  if (!field.jump_warnings.empty()) {
    std::cerr << "warning: air median jumps by more than 20% between "
                 "adjacent rows at "
              << field.jump_warnings.size() << " location(s)\n";
    if (r.verbose) {
      for (const auto& [angle, row] : field.jump_warnings)
        std::cerr << "  view " << angle << ", rows " << row << "-" << row + 1
                  << "\n";
    }
  }
  AttenuationStack mu =
      r.stage("beer_lambert", [&] { return beer_lambert(stack, field); });
  if (field_out != nullptr) *field_out = std::move(field);
  return mu;
}

void export_previews(const Volume& volume, const std::filesystem::path& dir,
                     Runner* runner) {
  for (std::size_t s = 0; s < volume.n_slices; ++s) {
    const double* slice = &volume.data[s * volume.nx * volume.ny];
    const std::size_t count = volume.nx * volume.ny;
    double lo = slice[0], hi = slice[0];
    for (std::size_t i = 1; i < count; ++i) {
      lo = std::min(lo, slice[i]);
      hi = std::max(hi, slice[i]);
    }
    std::vector<std::uint8_t> bytes(count, 0);
    if (hi > lo) {
      const double scale = 255.0 / (hi - lo);
      for (std::size_t i = 0; i < count; ++i)
        bytes[i] = static_cast<std::uint8_t>(
            std::lround((slice[i] - lo) * scale));
    }
    const std::filesystem::path p =
        dir / ("preview_" + format_index(s) + ".pgm");
    write_pgm8(p, volume.nx, volume.ny, bytes);
    if (runner != nullptr) runner->note_output(p);
  }
}

void export_tiffs(const Volume& volume, const std::filesystem::path& dir,
                  Runner* runner) {
  std::vector<float> pixels(volume.nx * volume.ny);
  for (std::size_t s = 0; s < volume.n_slices; ++s) {
    const double* slice = &volume.data[s * pixels.size()];
    for (std::size_t i = 0; i < pixels.size(); ++i)
      pixels[i] = static_cast<float>(slice[i]);
    const std::filesystem::path p = dir / ("slice_" + format_index(s) + ".tif");
    write_tiff_f32(p, volume.nx, volume.ny, pixels);
    if (runner != nullptr) runner->note_output(p);
  }
}

}  // namespace

int cmd_calibrate(const CommandOptions& options) {
  Runner r = make_runner(options, "calibrate");
  if (!r.config.calibrate.has_value())
    fail(errc::config_error, "[calibrate] section is required");

  const std::filesystem::path corners_path =
      resolve_path(r.config, r.config.calibrate->corners);
  if (!std::filesystem::exists(corners_path))
    fail(errc::config_error,
         "calibrate.corners does not exist: " + corners_path.string());

  auto squares =
      r.stage("read_corners", [&] { return read_corners_csv(corners_path); });
  r.input_hashes["corners"] = sha256_file_hex(corners_path);

  CalibrationReport report =
      r.stage("calibrate", [&] { return calibrate(squares); });
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";

  json out{
      {"k", matrix_to_json(report.intrinsics.matrix())},
      {"f_x", report.intrinsics.f_x},
      {"f_y", report.intrinsics.f_y},
      {"c_x", report.intrinsics.c_x},
      {"c_y", report.intrinsics.c_y},
      {"k_normalized", matrix_to_json(report.intrinsics.normalized_k)},
      {"normalization",
       {{"alpha", report.intrinsics.normalization.alpha},
        {"t_u", report.intrinsics.normalization.t_u},
        {"t_v", report.intrinsics.normalization.t_v}}},
      {"constraint_residual", report.constraint_residual},
      {"corner_residual_px", report.corner_residual_px},
      {"n_squares", squares.size()},
      {"warnings", report.warnings},
  };

  if (r.config.magnify.has_value()) {
    MagnificationEstimate mag =
        estimate_magnification(r.config.magnify->bare, r.config.magnify->lens);
    out["magnification"] = magnification_to_json(mag);
    const bool have_f_bare = r.config.calibrate->f_bare_mm.has_value();
    const bool have_axis = r.config.geometry.axis_distance_mm.has_value();
    if (have_f_bare && have_axis) {
      EffectiveGeometry g = derive_effective_geometry(
          report.intrinsics, mag, *r.config.calibrate->f_bare_mm,
          *r.config.geometry.axis_distance_mm);
      out["effective_geometry"] = geometry_to_json(g);
    }
  }

  const std::filesystem::path path = r.out_dir / "calibration.json";
  {
    std::ofstream f(path);
    if (!f) fail(errc::unreadable_file, "cannot write " + path.string());
    f << out.dump(2) << "\n";
  }
  r.note_output(path);

  std::cout << "calibrated from " << squares.size() << " squares: f_x = "
            << report.intrinsics.f_x << " px, f_y = " << report.intrinsics.f_y
            << " px, c = (" << report.intrinsics.c_x << ", "
            << report.intrinsics.c_y << ") px, corner residual "
            << report.corner_residual_px << " px\n";
  std::cout << "wrote " << path.string() << "\n";
  r.write_manifest();
  return 0;
}

int cmd_magnify(const CommandOptions& options) {
  Runner r = make_runner(options, "magnify");
  if (!r.config.magnify.has_value())
    fail(errc::config_error, "[magnify] section is required");

  MagnificationEstimate mag = r.stage("estimate_magnification", [&] {
    return estimate_magnification(r.config.magnify->bare,
                                  r.config.magnify->lens);
  });

  const std::filesystem::path path = r.out_dir / "magnification.json";
  {
    std::ofstream f(path);
    if (!f) fail(errc::unreadable_file, "cannot write " + path.string());
    f << magnification_to_json(mag).dump(2) << "\n";
  }
  r.note_output(path);

  std::cout << "magnification " << mag.magnification << " (bare "
            << mag.bare_extent_rad_per_px << " rad/px, lens "
            << mag.lens_extent_rad_per_px << " rad/px)\n";
  std::cout << "wrote " << path.string() << "\n";
  r.write_manifest();
  return 0;
}

int cmd_preprocess(const CommandOptions& options) {
  Runner r = make_runner(options, "preprocess");
  ProjectionStack stack = load_stack(r);
  IncidentField field;
  AttenuationStack mu = attenuation_from_stack(r, stack, &field);

  r.stage("write_outputs", [&] {
    const std::filesystem::path csv_path = r.out_dir / "incident_field.csv";
    {
      std::ofstream csv(csv_path);
      if (!csv) fail(errc::unreadable_file, "cannot write " + csv_path.string());
      csv << "view,angle_deg,row,i0\n";
      for (std::size_t a = 0; a < field.n_angles; ++a)
        for (std::size_t row = 0; row < field.rows; ++row)
          csv << a << "," << stack.angles_deg[a] << "," << row << ","
              << field.at(a, row) << "\n";
    }
    r.note_output(csv_path);

    std::vector<float> pixels(mu.rows * mu.cols);
    for (std::size_t a = 0; a < mu.n_angles; ++a) {
      for (std::size_t i = 0; i < pixels.size(); ++i)
        pixels[i] = static_cast<float>(mu.data[a * pixels.size() + i]);
      const std::filesystem::path p =
          r.out_dir / ("attenuation_" + format_index(a) + ".tif");
      write_tiff_f32(p, mu.cols, mu.rows, pixels);
      r.note_output(p);
    }
  });

  std::cout << "preprocessed " << mu.n_angles << " views of " << mu.rows << "x"
            << mu.cols << " px into " << r.out_dir.string() << "\n";
  r.write_manifest();
  return 0;
}

int cmd_reconstruct(const CommandOptions& options) {
  Runner r = make_runner(options, "reconstruct");
  const EffectiveGeometry geometry = resolve_geometry(r.config);

  ProjectionStack stack = load_stack(r);
  stack.geometry = geometry;
  AttenuationStack mu = attenuation_from_stack(r, stack);

  Volume volume = r.stage("reconstruct_volume", [&] {
    return reconstruct_volume(mu, r.config.recon, r.config.run.threads);
  });

  json pipeline{
      {"filter",
       r.config.recon.filter == FilterKind::ramp ? "ramp" : "ramp_hann"},
      {"grid_size", r.config.recon.grid_size},
      {"n_views", mu.n_angles},
      {"flatfield",
       {{"n_left", r.config.flatfield.n_left},
        {"n_right", r.config.flatfield.n_right},
        {"smoothing_window", r.config.flatfield.smoothing_window}}},
  };
  const std::filesystem::path raw_path = r.out_dir / "volume.raw";
  r.stage("write_volume", [&] { write_volume(volume, raw_path, pipeline.dump()); });
  r.note_output(raw_path);
  r.note_output(r.out_dir / "volume.json");

  std::cout << "reconstructed " << volume.nx << "x" << volume.ny << "x"
            << volume.n_slices << " volume, voxel " << volume.pixel_size_mm
            << " mm\n";
  std::cout << "wrote " << raw_path.string() << "\n";
  r.write_manifest();
  return 0;
}

int cmd_simulate(const CommandOptions& options) {
  Runner r = make_runner(options, "simulate");
  if (r.config.phantom.primitives.empty())
    fail(errc::config_error, "[[phantom]] must define at least one primitive");
  const EffectiveGeometry geometry = resolve_geometry(r.config);
  const SimulateSettings& sim = r.config.simulate;

  SimulationConfig sc;
  sc.geometry = geometry;
  if (r.config.crop.has_value()) {
    sc.crop = *r.config.crop;
    if (sc.crop.width != sim.cols || sc.crop.height != sim.rows)
      fail(errc::config_error,
           "[crop] dimensions must match simulate.cols x simulate.rows");
  } else {
    sc.crop = CropRegion{0, 0, sim.cols, sim.rows};
  }
  sc.angles_deg = make_angles(sim);
  sc.i0 = sim.i0;
  sc.vignetting = make_vignetting(sim);
  sc.noise = sim.noise;
  sc.counts_per_code = sim.counts_per_code;
  sc.mode = sim.mode;
  sc.seed = r.config.run.seed;
  sc.bit_depth = sim.bit_depth;

  ProjectionStack stack = r.stage("simulate_acquisition", [&] {
    return simulate_acquisition(r.config.phantom, sc, r.config.run.threads);
  });

  const BayerPattern pattern =
      r.config.input.has_value() ? r.config.input->pattern : BayerPattern::rggb;

  r.stage("write_frames", [&] {
    std::ofstream manifest(r.out_dir / "manifest.csv");
    if (!manifest)
      fail(errc::unreadable_file,
           "cannot write " + (r.out_dir / "manifest.csv").string());
    manifest << "filename,angle_deg\n";
    for (std::size_t a = 0; a < stack.n_angles; ++a) {
      BayerMosaic mosaic = mosaic_from_stack(stack, a, pattern);
      const std::string name = "frame_" + format_index(a) + ".pgm";
      write_pgm16(r.out_dir / name, mosaic.width, mosaic.height,
                  static_cast<std::uint16_t>(stack.full_scale - 1),
                  mosaic.samples);
      manifest << name << "," << stack.angles_deg[a] << "\n";
    }
  });
  r.note_output(r.out_dir / "manifest.csv");

  std::cout << "simulated " << stack.n_angles << " frames of " << stack.rows
            << "x" << stack.cols << " px into " << r.out_dir.string() << "\n";
  r.write_manifest();
  return 0;
}

int cmd_export(const CommandOptions& options) {
  Runner r = make_runner(options, "export", /*config_required=*/false);
  if (options.volume_path.empty())
    fail(errc::config_error, "--volume is required for export");
  if (!std::filesystem::exists(options.volume_path))
    fail(errc::config_error,
         "volume does not exist: " + options.volume_path.string());
  if (options.export_format != "tiff" && options.export_format != "preview")
    fail(errc::config_error, "--format must be tiff or preview");

  Volume volume =
      r.stage("read_volume", [&] { return read_volume(options.volume_path); });
  r.input_hashes["volume"] = sha256_file_hex(options.volume_path);

  r.stage("export", [&] {
    if (options.export_format == "tiff")
      export_tiffs(volume, r.out_dir, &r);
    else
      export_previews(volume, r.out_dir, &r);
  });

  std::cout << "exported " << volume.n_slices << " slices as "
            << options.export_format << " into " << r.out_dir.string() << "\n";
  r.write_manifest();
  return 0;
}

int cmd_selftest(const CommandOptions& options) {
  (void)options;
  bool all_ok = true;
  auto check = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << "selftest " << name << ": " << (ok ? "ok" : "FAILED");
    if (!ok && !detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    all_ok = all_ok && ok;
  };

  {
    const double w71 = usaf_line_width_um(7, 1);
    const double w01 = usaf_line_width_um(0, 1);
    std::ostringstream os;
    os << "got " << w71 << " and " << w01;
    check("resolution-target-width",
          std::abs(w71 - 3.90625) < 1e-9 && std::abs(w01 - 500.0) < 1e-9,
          os.str());
  }

  {
    // Zero-frequency rejection: a constant view must filter to near zero.
    ParallelSinogram sino;
    sino.n_s = 128;
    sino.n_views = 1;
    sino.s_max_mm = 1.0;
    sino.phi_deg = {0.0};
    sino.values.assign(sino.n_s, 1.0);
    ParallelSinogram filtered = ramp_filter(sino);
    double mean = 0;
    for (double v : filtered.values) mean += v;
    mean /= static_cast<double>(filtered.values.size());
    std::ostringstream os;
    os << "mean " << mean;
    check("ramp-filter-dc", std::abs(mean) < 1e-10, os.str());
  }

  {
    // Calibration round trip on noiseless synthetic corners.
    Eigen::Matrix3d k;
    k << 1200, 0, 640, 0, 1150, 360, 0, 0, 1;
    std::vector<SquareObservation> squares;
    for (int plane = 0; plane < 2; ++plane) {
      const double tilt = plane == 0 ? 0.35 : -0.3;
      Eigen::Matrix3d rot =
          (Eigen::AngleAxisd(tilt, Eigen::Vector3d::UnitY()) *
           Eigen::AngleAxisd(0.15 * (plane + 1), Eigen::Vector3d::UnitX()))
              .toRotationMatrix();
      Eigen::Vector3d trans(0.05 * plane, -0.1, 2.2 + 0.3 * plane);
      for (int i = 0; i < 3; ++i) {
        squares.push_back(project_square(k, rot, trans, -0.4 + 0.35 * i,
                                         -0.25 + 0.1 * i, 0.22, plane));
      }
    }
    CalibrationReport report = calibrate(squares);
    const double err =
        std::max({std::abs(report.intrinsics.f_x - 1200) / 1200,
                  std::abs(report.intrinsics.f_y - 1150) / 1150,
                  std::abs(report.intrinsics.c_x - 640) / 640,
                  std::abs(report.intrinsics.c_y - 360) / 360});
    std::ostringstream os;
    os << "relative error " << err;
    check("calibration-round-trip", err < 1e-6, os.str());
  }

  DigitalPhantom phantom;
  phantom.primitives.push_back(make_disk(0.1, -0.05, 0.3, 1.0));

  EffectiveGeometry g;
  g.f_eff_px = 2000;
  g.axis_distance_mm = 50;
  g.c_x = 31.5;
  g.c_y = 7.5;

  SimulationConfig sc;
  sc.geometry = g;
  sc.crop = CropRegion{0, 0, 64, 16};
  sc.angles_deg.resize(90);
  for (std::size_t i = 0; i < 90; ++i)
    sc.angles_deg[i] = static_cast<double>(i) * 4.0;
  sc.i0 = 3000;
  sc.seed = 7;

  {
    ProjectionStack s1 = simulate_acquisition(phantom, sc, 1);
    ProjectionStack s4 = simulate_acquisition(phantom, sc, 4);
    IncidentField f1 = estimate_incident_field(s1, {8, 8, 3});
    AttenuationStack mu = beer_lambert(s1, f1);
    mu.geometry = g;
    ReconConfig rc;
    rc.grid_size = 64;
    Volume v1 = reconstruct_volume(mu, rc, 1);
    Volume v4 = reconstruct_volume(mu, rc, 4);
    const bool same_sim =
        s1.data.size() == s4.data.size() &&
        std::memcmp(s1.data.data(), s4.data.data(),
                    s1.data.size() * sizeof(double)) == 0;
    const bool same_vol =
        v1.data.size() == v4.data.size() &&
        std::memcmp(v1.data.data(), v4.data.data(),
                    v1.data.size() * sizeof(double)) == 0;
    check("thread-count-determinism", same_sim && same_vol,
          same_sim ? "volumes differ" : "simulations differ");

    // Central slice should recover the disk level.
    ReconSlice slice = reconstruct_slice(mu, 8, rc);
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t iy = 0; iy < slice.n; ++iy) {
      for (std::size_t ix = 0; ix < slice.n; ++ix) {
        const double x =
            (static_cast<double>(ix) - (slice.n - 1.0) / 2.0) *
            slice.pixel_size_mm;
        const double y =
            (static_cast<double>(iy) - (slice.n - 1.0) / 2.0) *
            slice.pixel_size_mm;
        const double dx = x - 0.1;
        const double dy = y + 0.05;
        if (std::hypot(dx, dy) < 0.3 - 2.0 * slice.pixel_size_mm) {
          sum += slice.at(iy, ix);
          ++count;
        }
      }
    }
    const double mean = count > 0 ? sum / static_cast<double>(count) : 0.0;
    std::ostringstream os;
    os << "disk mean " << mean;
    check("round-trip-level", count > 0 && std::abs(mean - 1.0) < 0.1, os.str());
  }

  if (!all_ok) {
    std::cerr << "error: self test failed\n";
    return static_cast<int>(error_class::numeric);
  }
  std::cout << "all self tests passed\n";
  return 0;
}

}  // namespace opttomo::cli
