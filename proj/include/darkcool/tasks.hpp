#pragma once

#include <string>
#include <vector>

#include "darkcool/run_config.hpp"

namespace darkcool {

struct TaskOutcome {
  int exit_code = 0;  // 0 success, 3 numerical failure
  std::string summary;
  std::vector<std::string> files;
};

/// Executes the configured task and writes data.csv, manifest.json and
/// summary.txt (as selected) into the output directory. Configuration problems
/// throw ConfigError; numerical failures are reported through exit_code 3 with
/// whatever partial results exist still written.
TaskOutcome run_task(const RunConfig& cfg);

/// CSV header for a task's data.csv.
std::string csv_header(Task task);

}  // namespace darkcool
