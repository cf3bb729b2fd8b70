#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "opttomo/errors.hpp"
#include "opttomo/version.hpp"

namespace {

using opttomo::cli::CommandOptions;

int dispatch(const CLI::App& app, const CommandOptions& options) {
  using opttomo::cli::cmd_calibrate;
  using opttomo::cli::cmd_export;
  using opttomo::cli::cmd_magnify;
  using opttomo::cli::cmd_preprocess;
  using opttomo::cli::cmd_reconstruct;
  using opttomo::cli::cmd_selftest;
  using opttomo::cli::cmd_simulate;

  const CLI::App* sub = app.get_subcommands().front();
  const std::string& name = sub->get_name();
  if (name == "calibrate") return cmd_calibrate(options);
  if (name == "magnify") return cmd_magnify(options);
  if (name == "preprocess") return cmd_preprocess(options);
  if (name == "reconstruct") return cmd_reconstruct(options);
  if (name == "simulate") return cmd_simulate(options);
  if (name == "export") return cmd_export(options);
  if (name == "selftest") return cmd_selftest(options);
  opttomo::fail(opttomo::errc::config_error, "unknown command " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optical projection tomography pipeline"};
  app.set_version_flag("--version", opttomo::kVersion);
  app.require_subcommand(1);

  CommandOptions options;
  std::string config_path;
  std::string output_dir;
  std::string volume_path;

  app.add_option("--config", config_path, "pipeline configuration (TOML)");
  app.add_option("--threads", options.threads,
                 "worker threads, 0 = all hardware threads")
      ->check(CLI::Range(0, 4096));
  app.add_option("--seed", options.seed, "noise seed for simulation")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--verbose", options.verbose, "per-stage timing on stderr");
  app.add_option("--set", options.overrides,
                 "config override, dotted.key=value (repeatable)");
  app.add_option("--out", output_dir, "output directory (overrides run.output_dir)");

  auto add_sub = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    return sub;
  };

  add_sub("calibrate", "estimate camera intrinsics from target corners");
  add_sub("magnify", "estimate telecentric lens magnification");
  add_sub("preprocess", "flat-field frames and convert to attenuation");
  add_sub("reconstruct", "run the full raw-to-volume pipeline");
  add_sub("simulate", "render synthetic frames from a digital phantom");
  CLI::App* exp = add_sub("export", "convert a volume to slice images");
  exp->add_option("--volume", volume_path, "volume.raw produced by reconstruct");
  exp->add_option("--format", options.export_format, "tiff or preview");
  add_sub("selftest", "run built-in consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(opttomo::error_class::config);
  }

  options.config_path = config_path;
  options.output_dir = output_dir;
  options.volume_path = volume_path;

  try {
    return dispatch(app, options);
  } catch (const opttomo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.cls());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(opttomo::error_class::numeric);
  }
}
