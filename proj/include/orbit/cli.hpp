#pragma once

#include <ostream>

#include "orbit/dual_oracle.hpp"

namespace orbit {

enum ExitCode { kExitOk = 0, kExitCheckFailed = 1, kExitConfigError = 2 };

/// Entry point of the `orbit` tool. `solver` replaces the dual backup in
/// duals-check (empty: the library solvers).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            const dual::BackupSolver& solver = {});

}  // namespace orbit
