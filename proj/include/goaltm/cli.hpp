#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace goaltm {

// Runs one pipeline subcommand. args holds argv without the program name.
// Success prints a one-line JSON summary to out and returns 0. Failures print
// a diagnostic to err and return 2 (bad input, config, or missing artifact),
// 3 (provider or transport trouble), or 4 (broken invariants, corrupt or
// unusable data).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace goaltm
