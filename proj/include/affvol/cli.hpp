#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "affvol/config.hpp"

namespace affvol {

enum ExitCode : int { exit_ok = 0, exit_validation = 2, exit_numerical = 3 };

const std::vector<std::string>& commands();

/// Runs one command and returns its artifact (CSV or JSON text). Throws the
/// library's error types.
std::string execute(const std::string& command, const RunConfig& cfg);

/// execute() with errors mapped to exit codes. The artifact goes to `out`
/// only on success; failures write a JSON error record to `err`.
int run(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// JSON error record for an exception, as written by run().
std::string error_record(const std::exception& e);
int exit_code_for(const std::exception& e);

}  // namespace affvol
