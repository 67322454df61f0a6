#ifndef OCLAB_CLI_HPP
#define OCLAB_CLI_HPP

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace oclab::cli {

// Exit codes: 0 success, 2 config error, 3 infeasible model, 4 invariant
// failure, 1 anything else.
constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInvariant = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs one subcommand against a parsed config document. Output files go to
// config["outputPath"] + ".csv" / ".json". Deterministic for a fixed config
// and seed, including across thread counts (OCLAB_THREADS).
int run_command(const std::string& command, const nlohmann::json& config);

// Full command-line entry point: oclab <command> <config.json> [-v].
int main_entry(int argc, char** argv);

}  // namespace oclab::cli

#endif  // OCLAB_CLI_HPP
