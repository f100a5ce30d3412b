#pragma once

// The scenario catalog: named coefficient fields with analytic derivative and
// product closures, the expected classification facts used by the agreement
// matrix, and per-scenario default parameters for every probe.

#include <string>
#include <vector>

#include "divlab/criteria.hpp"
#include "divlab/field.hpp"
#include "divlab/quadrature.hpp"
#include "divlab/sde.hpp"
#include "divlab/semigroup.hpp"

namespace divlab {

struct ScenarioInfo {
  std::string id;
  std::string summary;
  std::vector<int> dims;
  std::vector<std::string> variants;  // empty when the scenario has none
};

std::vector<ScenarioInfo> scenario_catalog();

// Builds the named field. Unknown ids/dims/variants raise ErrKind::schema.
CoefficientField make_scenario(const std::string& id, int dim,
                               const std::string& variant = "");

// bump-chain-antisymmetric with its off-diagonal entries scaled by `scale`
// (scale = 1 is the catalog field). Used by the scaling study.
CoefficientField bump_antisymmetric_scaled(int dim, double scale);

// One expected classification fact: key (e.g. "conservative"), value
// (e.g. "yes"), and the anchor rule the expectation rests on.
struct ExpectedFact {
  std::string key;
  std::string value;
  std::string anchor;
};

std::vector<ExpectedFact> expected_facts(const std::string& id, int dim,
                                         const std::string& variant = "");

struct RunDefaults {
  CriteriaSpec criteria;
  MuQuadSpec mu;
  MassProbeSpec mass;
  GreenProbeSpec green;
  SdeOptions sde;
  OccupationSpec occupation;
  std::vector<std::string> tasks;  // default task list for the probe command
};

RunDefaults scenario_defaults(const std::string& id, int dim,
                              const std::string& variant = "");

// The built-in (scenario, dim) -> tasks table used by run-all.
struct PlanEntry {
  std::string scenario;
  int dim = 2;
  std::string variant;
  std::vector<std::string> tasks;
};

std::vector<PlanEntry> run_all_plan();

}  // namespace divlab
