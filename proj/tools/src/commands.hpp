#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace opttomo::cli {

struct CommandOptions {
  std::filesystem::path config_path;
  std::vector<std::string> overrides;
  int threads = -1;          // -1 = take from config
  long long seed = -1;       // -1 = take from config
  bool verbose = false;
  std::filesystem::path output_dir;  // empty = take from config

  // export only
  std::filesystem::path volume_path;
  std::string export_format = "tiff";
};

int cmd_calibrate(const CommandOptions& options);
int cmd_magnify(const CommandOptions& options);
int cmd_preprocess(const CommandOptions& options);
int cmd_reconstruct(const CommandOptions& options);
int cmd_simulate(const CommandOptions& options);
int cmd_export(const CommandOptions& options);
int cmd_selftest(const CommandOptions& options);

}  // namespace opttomo::cli
