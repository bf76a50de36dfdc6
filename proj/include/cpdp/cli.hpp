#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cpdp::cli {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_data = 2;

// Runs one subcommand (ingest, simplify, predict, experiment, sweep-rho,
// report). args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cpdp::cli
