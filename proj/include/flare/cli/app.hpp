#pragma once

// flarectl: batch driver over ingestion, geocoding, model fitting, prediction
// and the nightfire chain.
//
// Exit codes: 0 success, 1 invalid input or usage, 2 numerical failure or a
// fit with some R-hat >= 1.05.

#include <ostream>
#include <string>
#include <vector>

namespace flare::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitNumerical = 2;

inline constexpr double kRhatLimit = 1.05;

// args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flare::cli
