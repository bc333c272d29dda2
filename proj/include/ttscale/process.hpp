// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ttscale {

struct ProcessResult {
  std::string stdout_text;
  std::string stderr_text;
  int exit_code = 0;  // negative signal number when killed by a signal
  bool timed_out = false;
  bool spawn_failed = false;
  double wall_time_s = 0.0;
};

/// Runs argv[0] (PATH lookup) with `input` on stdin, capturing both streams.
/// The whole process group is killed once `timeout_s` elapses.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input,
                          double timeout_s);

}  // namespace ttscale
