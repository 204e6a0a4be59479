#pragma once

#include <string>

#include "framepred/config.hpp"

namespace framepred {

struct CliOptions {
  std::string command;          // synth | train | predict | eval
  std::string config_path;      // --config
  std::string out_dir;          // --out (overrides run.out)
  std::string preset;           // --preset (training loss preset)
  std::string checkpoint_path;  // --checkpoint (predict / eval)
  long long seed = -1;          // --seed (overrides run.seed); -1 = unset
};

/// Flag overrides applied on top of the config file, all defaults
/// materialized, unknown keys rejected. Exposed for tests.
Config resolve_config(const Config& file_cfg, const CliOptions& opts);

/// Executes one command. Throws framepred error types on failure; every run
/// writes the fully resolved config next to its outputs.
void run_command(const CliOptions& opts);

/// Argument parsing and exit-code mapping:
/// 0 success, 2 config error, 3 data error, 4 numerical divergence.
int cli_main(int argc, const char* const* argv);

}  // namespace framepred
