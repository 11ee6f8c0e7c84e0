#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace earlybird {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs argv[0] (looked up on PATH) without a shell. stdin_data, when given,
/// is fed to the child; stdout is captured fully, stderr separately.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::filesystem::path& cwd = {},
                          const std::string* stdin_data = nullptr);

}  // namespace earlybird
