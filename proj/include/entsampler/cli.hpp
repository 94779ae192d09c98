#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace entsampler::cli {

enum ExitCode : int { kPass = 0, kVerificationFailure = 1, kUsageError = 2, kNumericFailure = 3 };

// Runs the command line in-process; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

// Values printed by the entropy and calc commands use this fixed format.
std::string format_value(double v);

}  // namespace entsampler::cli
