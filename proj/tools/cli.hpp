#pragma once

#include <cstdint>
#include <iosfwd>

#include "lgsq/core.hpp"

namespace lgsq::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInvalid = 2,
  kConvergence = 3,
  kPartialGrid = 4,
  kValidateFailed = 5,
};

/// Parses argv and runs one subcommand. Data goes to `out` unless --out names a
/// file; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct ValidateOptions {
  std::uint64_t seed = 20240611;
  int cases = 200;
  int threads = 0;
  /// Test-only negative control: flips the sign of the kernel cross term on
  /// the closed-form side of every comparison.
  bool inject_sign_flip = false;
};

int run_validate(const ValidateOptions& opt, const ToleranceConfig& tol, std::ostream& out,
                 std::ostream& err);

}  // namespace lgsq::cli
