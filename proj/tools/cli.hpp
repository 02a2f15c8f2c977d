#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tdfdr::cli {

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,         // unknown flag, missing argument, bad subcommand
    kInvalidValue = 3,  // value out of range or unparseable
    kIoFailure = 4,
    kDataError = 5,     // input matrix or stored report is malformed
};

/// Runs one command line (argv without the program name). Output files go
/// where the command's --output flag points; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tdfdr::cli
