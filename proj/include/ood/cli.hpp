#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ood::cli {

// Exit statuses of the command-line tool.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 1;
inline constexpr int kDataError = 2;

// Runs one `oodbench` invocation. Data goes to `out` unless a command writes
// to --out; warnings and summaries go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ood::cli
