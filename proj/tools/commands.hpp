#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "puf/simulator.hpp"
#include "run_config.hpp"

// Subcommands of the puf-forge command-line tool. Each writes its outputs
// into `out_dir` and a short summary to `log`.
namespace puf::cli {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitValidation = 2, kExitIo = 3 };

/// SimConfig defaults overridden by config keys.
SimConfig sim_config_from(const RunConfig& config);

void cmd_simulate(const RunConfig& config, std::uint64_t seed, const std::filesystem::path& out_dir,
                  std::ostream& log);

/// `which` is one of fhd, ber, breakdown, independence, guesswork. `input`
/// and `meta` locate the bit matrix (ignored by guesswork).
void cmd_report(const std::string& which, const RunConfig& config, std::filesystem::path input,
                std::filesystem::path meta, const std::filesystem::path& out_dir, std::ostream& log);

void cmd_attack(const RunConfig& config, std::uint64_t seed, const std::filesystem::path& out_dir,
                std::ostream& log);

void cmd_distances(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

/// Parses arguments (argv[0] excluded) and dispatches; returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace puf::cli
