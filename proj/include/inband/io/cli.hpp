#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace inband::io {

/// Command-line front end. `args` excludes the program name. Returns 0 on
/// success, 1 when the input carries no usable signal (or a stage fails on
/// it), 2 on usage, file or format errors.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Sets the log level from INBAND_LOG (trace, debug, info, warn, error, off);
/// warn when unset or unrecognised.
void configure_logging();

}  // namespace inband::io
