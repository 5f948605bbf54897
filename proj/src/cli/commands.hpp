#pragma once

#include <iosfwd>
#include <string>

#include "run_config.hpp"

namespace censmax::cli {

// Executes one command on a validated configuration and returns its "result"
// object. CSV side outputs named in the configuration are written here.
json run_command(const std::string& command, const json& cfg);

// Full command line entry point: parses flags, merges --config, writes the
// result document (or an error document) and returns the process exit code:
// 0 success, 2 configuration, 3 data, 4 numerical, 1 anything else.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string version_string();

}  // namespace censmax::cli
