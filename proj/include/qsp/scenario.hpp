#pragma once

#include <string>
#include <vector>

#include "qsp/config.hpp"
#include "qsp/verify.hpp"

namespace qsp {

struct ScenarioOptions {
  std::string output_dir;          // overrides the config when non-empty
  std::vector<Task> task_override; // replaces the config task set when non-empty
  FieldCorruption corruption;      // test hook wired to --corrupt-width
};

struct ScenarioResult {
  int exit_code = 0;  // 0 clean, 1 when any check fails or the solver aborts
  bool solver_failed = false;
  std::string diagnostic;
  std::vector<ResidualReport> checks;  // everything report.txt judged
};

// Solve, write the per-task CSV artifacts into the output directory, and
// summarize every check in report.txt.  Filesystem errors throw; solver and
// check failures are reported through the result instead.
ScenarioResult run_scenario(const ScenarioConfig& config,
                            const ScenarioOptions& options = {});

}  // namespace qsp
