#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace conespec::cli {

enum ExitCode { ok = 0, failure = 1, indeterminate = 2 };

/// Runs `conespec <analyze|embed|cones|sweep> ...` with args excluding the
/// program name. Human-readable output goes to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace conespec::cli
