#pragma once

#include <iosfwd>

namespace nsbf::cli {

// Exit codes.
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;
constexpr int kVerificationFailure = 4;

// Entry point of the nsbf command; results go to out, diagnostics and stage
// timings to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nsbf::cli
