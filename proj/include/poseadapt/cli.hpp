#pragma once

#include <string>
#include <vector>

namespace poseadapt {

/// Entry point behind the poseadapt binary; exposed so tests can drive the
/// commands in-process. Returns the process exit code.
int run_cli(const std::vector<std::string>& args);

}  // namespace poseadapt
