#include "qsp/config.hpp"

#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace qsp {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::string trim(std::string_view s) {
  const char* ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    fail("key '" + key + "' needs a number, got '" + value + "'");
  return v;
}

int to_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    fail("key '" + key + "' needs an integer, got '" + value + "'");
  return static_cast<int>(v);
}

// raw key/value store per section, filled by the line scanner
using Section = std::map<std::string, std::string>;

struct RawConfig {
  Section top, params, ics, run;
};

RawConfig scan(std::string_view text) {
  RawConfig raw;
  Section* current = &raw.top;
  std::string current_name = "(top level)";
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') fail("malformed section header: " + body);
      const std::string name = trim(body.substr(1, body.size() - 2));
      if (name == "params") current = &raw.params;
      else if (name == "ics") current = &raw.ics;
      else if (name == "run") current = &raw.run;
      else fail("unknown section '[" + name + "]'");
      current_name = name;
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      fail("line " + std::to_string(lineno) + " is not 'key = value': " + body);
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) fail("empty key on line " + std::to_string(lineno));
    if (!current->emplace(key, value).second)
      fail("duplicate key '" + key + "' in " + current_name);
  }
  return raw;
}

// pull a key out of the section; leftovers at the end are unknown-key errors
std::optional<std::string> take(Section& s, const std::string& key) {
  auto it = s.find(key);
  if (it == s.end()) return std::nullopt;
  std::string v = it->second;
  s.erase(it);
  return v;
}

void reject_leftovers(const Section& s, const std::string& section_name) {
  if (s.empty()) return;
  fail("unknown key '" + (section_name.empty() ? "" : section_name + ".") +
       s.begin()->first + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

}  // namespace

const char* task_name(Task t) {
  switch (t) {
    case Task::solve: return "solve";
    case Task::fields: return "fields";
    case Task::verify: return "verify";
    case Task::propagator: return "propagator";
    case Task::reproduce: return "reproduce";
  }
  return "?";
}

Task parse_task(const std::string& name) {
  for (Task t : {Task::solve, Task::fields, Task::verify, Task::propagator,
                 Task::reproduce})
    if (name == task_name(t)) return t;
  fail("unknown task '" + name + "'");
}

ScenarioConfig parse_config(std::string_view text) {
  RawConfig raw = scan(text);
  ScenarioConfig cfg;

  // ---- top level ----
  if (auto v = take(raw.top, "tasks")) {
    cfg.tasks.clear();
    for (const std::string& item : split_list(*v)) cfg.tasks.insert(parse_task(item));
    if (cfg.tasks.empty()) fail("key 'tasks' lists no tasks");
  }
  if (auto v = take(raw.top, "output_dir")) cfg.output_dir = *v;
  if (auto v = take(raw.top, "action_sign_convention")) {
    if (*v == "eq313") cfg.convention = ActionConvention::delayed_minus_current;
    else if (*v == "eq318") cfg.convention = ActionConvention::current_minus_delayed;
    else fail("key 'action_sign_convention' must be eq313 or eq318, got '" + *v + "'");
  }
  reject_leftovers(raw.top, "");

  // ---- params: direct alpha/tau or electron constants, never both ----
  const auto alpha = take(raw.params, "alpha");
  const auto tau = take(raw.params, "tau");
  const auto hbar = take(raw.params, "hbar");
  const auto mass = take(raw.params, "mass");
  const auto c_e = take(raw.params, "e");
  const auto c_m = take(raw.params, "m");
  const auto c_c = take(raw.params, "c");
  const auto c_L = take(raw.params, "L");
  reject_leftovers(raw.params, "params");

  const bool direct = alpha || tau || mass;
  const bool constants = c_e || c_m || c_c || c_L;
  if (direct && constants)
    fail("section [params] gives both alpha/tau and electron constants; pick one style");
  if (constants) {
    if (!(c_e && c_m && c_c && c_L))
      fail("section [params] is missing one of the electron constants e, m, c, L");
    ElectronConstants ec;
    ec.e = to_double("params.e", *c_e);
    ec.m = to_double("params.m", *c_m);
    ec.c = to_double("params.c", *c_c);
    ec.L = to_double("params.L", *c_L);
    cfg.params = derive_params(ec, hbar ? to_double("params.hbar", *hbar) : 1.0);
  } else {
    if (!alpha) fail("section [params] is missing 'alpha'");
    if (!tau) fail("section [params] is missing 'tau'");
    cfg.params.alpha = to_double("params.alpha", *alpha);
    cfg.params.tau = to_double("params.tau", *tau);
    if (hbar) cfg.params.hbar = to_double("params.hbar", *hbar);
    if (mass) cfg.params.mass = to_double("params.mass", *mass);
    cfg.params.validate();
  }

  // ---- ics ----
  if (auto v = take(raw.ics, "x_o")) cfg.ics.x_o = to_double("ics.x_o", *v);
  if (auto v = take(raw.ics, "v_o")) cfg.ics.v_o = to_double("ics.v_o", *v);
  if (auto v = take(raw.ics, "a_o")) cfg.ics.a_o = to_double("ics.a_o", *v);
  if (auto v = take(raw.ics, "b_o")) cfg.ics.b_o = to_double("ics.b_o", *v);
  if (auto v = take(raw.ics, "prehistory")) {
    if (*v == "constant") cfg.ics.prehistory.kind = Prehistory::Kind::constant;
    else if (*v == "linear-ramp") cfg.ics.prehistory.kind = Prehistory::Kind::linear_ramp;
    else fail("key 'ics.prehistory' must be constant or linear-ramp, got '" + *v + "'");
  }
  if (auto v = take(raw.ics, "kappa_q"))
    cfg.ics.prehistory.ramp.kappa_q = to_double("ics.kappa_q", *v);
  if (auto v = take(raw.ics, "kappa_a"))
    cfg.ics.prehistory.ramp.kappa_a = to_double("ics.kappa_a", *v);
  reject_leftovers(raw.ics, "ics");
  cfg.ics.validate();

  // ---- run ----
  if (auto v = take(raw.run, "t_end")) cfg.step.t_end = to_double("run.t_end", *v);
  else cfg.step.t_end = 10.0 * cfg.params.tau;
  if (auto v = take(raw.run, "steps_per_delay"))
    cfg.step.steps_per_delay = to_int("run.steps_per_delay", *v);
  if (auto v = take(raw.run, "t_samples")) cfg.t_samples = to_int("run.t_samples", *v);
  const auto gx0 = take(raw.run, "x_min");
  const auto gx1 = take(raw.run, "x_max");
  const auto gn = take(raw.run, "n");
  reject_leftovers(raw.run, "run");
  const int given = int(bool(gx0)) + int(bool(gx1)) + int(bool(gn));
  if (given == 3) {
    SpaceGrid g;
    g.x_min = to_double("run.x_min", *gx0);
    g.x_max = to_double("run.x_max", *gx1);
    g.n_points = to_int("run.n", *gn);
    g.validate();
    cfg.grid = g;
  } else if (given != 0) {
    fail("run.grid needs x_min, x_max and n together");
  }

  cfg.step.validate();
  if (cfg.t_samples < 1) fail("key 'run.t_samples' must be at least 1");

  const bool needs_grid = cfg.tasks.count(Task::fields) ||
                          cfg.tasks.count(Task::propagator) ||
                          cfg.tasks.count(Task::reproduce);
  if (needs_grid && !cfg.grid)
    fail("section [run] is missing run.grid (x_min, x_max, n), required by the "
         "fields/propagator/reproduce tasks");
  return cfg;
}

}  // namespace qsp
