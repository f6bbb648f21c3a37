#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rul::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kDataError = 3,
    kNumericalError = 4,
    kIoError = 5,
};

/// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace rul::cli
