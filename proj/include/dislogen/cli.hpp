#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dislogen::cli {

// Runs the command line tool. Results go to `out`; failures are reported on
// `err` as one JSON object {"error": kind, "message": ...} with exit code 2
// for usage errors and 1 otherwise.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dislogen::cli
