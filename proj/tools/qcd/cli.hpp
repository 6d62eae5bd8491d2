#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace qcd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNoStop = 2;

/// Runs the `qcd` command line. `args` excludes the program name; `in` feeds
/// `detect` when no input file is given.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace qcd::cli
