#pragma once

namespace maxent::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kNotConverged = 3,
  kPrecondition = 4,
};

int run(int argc, char** argv);

}  // namespace maxent::cli
