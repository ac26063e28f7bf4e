#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bdt {

/// Entry point of the `bdt` tool. `args` excludes the program name. Returns
/// 0 on success, 1 when verify finds a failure, 2 on input errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bdt
