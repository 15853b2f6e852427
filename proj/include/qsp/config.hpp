#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "qsp/dde.hpp"
#include "qsp/packet.hpp"
#include "qsp/params.hpp"

namespace qsp {

enum class Task { solve, fields, verify, propagator, reproduce };

const char* task_name(Task t);
Task parse_task(const std::string& name);  // throws std::runtime_error on unknown names

struct ScenarioConfig {
  SimParams params;
  InitialConditions ics;
  StepSpec step;                  // t_end defaults to 10 tau when not given
  std::optional<SpaceGrid> grid;  // required by fields / propagator / reproduce
  int t_samples = 5;              // time slices written to fields.csv
  std::set<Task> tasks = {Task::solve};
  std::string output_dir = "out";
  ActionConvention convention = ActionConvention::delayed_minus_current;
};

// Line-based `key = value` text with [section] headers ([params], [ics],
// [run]) and the top-level keys tasks / output_dir / action_sign_convention.
// `#` and `;` start comments.  [params] takes either alpha and tau directly
// (with optional hbar, mass) or the electron constants e, m, c, L, never both.
// Throws std::runtime_error naming the offending key or section.
ScenarioConfig parse_config(std::string_view text);

}  // namespace qsp
