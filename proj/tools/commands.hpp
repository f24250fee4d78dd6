#pragma once

// Command-line front end. Each command turns its flags into a normalized JSON
// config, runs from that config alone, and echoes it into manifest.json so
// `replay` can regenerate the outputs.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace liebridge::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kInvalidConfig = 2,
    kNumerical = 3,
    kCutLocus = 4,
    kDegenerateWeights = 5,
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Full CLI: argv[0] is the program name. Never throws; returns an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs `command` from a normalized config, writing into out_dir (created if needed)
/// together with manifest.json. Throws on failure.
void execute(const std::string& command, const nlohmann::json& config, const std::string& out_dir,
             unsigned workers, std::ostream& out);

/// Reads a manifest written by execute and runs it again into out_dir.
void replay(const std::string& manifest_path, const std::string& out_dir, unsigned workers, std::ostream& out);

/// Builds a fit-metric config from an experiment JSON, filling optional fields.
/// Throws ConfigError naming the first missing required field.
nlohmann::json normalize_experiment(const nlohmann::json& experiment);

}  // namespace liebridge::cli
