#pragma once

// Run orchestration: build the effective configuration (scenario defaults,
// overlaid by the config file, overlaid by CLI flags), execute the requested
// tasks in fixed order, write the report plus CSV sidecars, and derive the
// process exit status from the agreement matrix:
//
//   0  every expected conclusion matched by at least one observation, none opposed
//   1  a task raised a runtime error (captured in the report as an error block)
//   2  an observation contradicts an expected conclusion (or another observation)
//   3  no contradiction, but at least one expected conclusion had no observation

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "divlab/config.hpp"
#include "divlab/scenarios.hpp"

namespace divlab {

struct CliOverrides {
  std::optional<std::string> scenario;
  std::optional<int> dim;
  std::optional<std::string> variant;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  // Forced task list (subcommand semantics). When `restrict_tasks` is set
  // instead, configured/default tasks are intersected with it.
  std::optional<std::vector<std::string>> tasks;
  std::optional<std::vector<std::string>> restrict_tasks;
};

struct RunConfig {
  std::string scenario;
  int dim = 2;
  std::string variant;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::vector<std::string> tasks;
  RunDefaults params;
};

// Validates every section/key of the config file against the documented
// schema (unknown keys are rejected) and resolves precedence. `cfg` may be
// null (pure-CLI run). A config file must carry [run] seed unless --seed is
// given; without a config file the seed falls back to 1.
RunConfig load_run_config(const ConfigFile* cfg, const CliOverrides& cli);

struct RunOutcome {
  int exit_code = 0;
  std::string run_dir;
  std::string report_path;
  std::string report_text;
  int agree = 0;
  int contradictions = 0;
  int inconclusive = 0;
  bool task_error = false;
};

// Executes one configured run; writes <out>/<slug>/report.txt and sidecars.
RunOutcome run_one(const RunConfig& rc);

// Executes the built-in plan into per-run directories plus a top-level
// summary.txt; the exit code is the most severe across runs (1 > 2 > 3 > 0).
RunOutcome run_all(const std::string& out_dir, std::uint64_t seed);

// "flat-bm-d2", "gradient-drift-d2-bounded", ...
std::string run_slug(const std::string& scenario, int dim, const std::string& variant);

extern const char* kDivlabVersion;

}  // namespace divlab
