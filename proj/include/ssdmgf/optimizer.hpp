#pragma once

#include <optional>
#include <string>

#include "ssdmgf/feasibility.hpp"
#include "ssdmgf/plan.hpp"

namespace ssdmgf {

struct SolveBudget {
    long max_nodes = 100000;
    double max_seconds = 60.0;
};

struct SolveStats {
    long nodes_explored = 0;
    long nodes_to_first_feasible = -1; // -1 = none found
    double ms_total = 0.0;
    double ms_to_first_feasible = -1.0;
    double first_objective = 0.0;
    double best_objective = 0.0;
    bool proven_optimal = false;
    bool warm_provided = false;
    bool warm_accepted = false;
    bool warm_seeded = false; // schedule-constrained dive produced the incumbent
    std::string warm_family;
    std::string warm_reject_reason;
};

struct SolveResult {
    RestorationPlan plan;
    SolveStats stats;
};

/// Best-first branch-and-bound over per-step switching and pickup bundles.
/// Continuous quantities are filled deterministically and every accepted node
/// is screened by the step validator, so the returned plan always validates
/// cleanly under `rules`.
SolveResult solve(const SystemModel& m, const ScenarioSpec& sc, const GridConfig& cfg,
                  RuleSet rules, const std::optional<PartialAssignment>& warm,
                  const SolveBudget& budget);

/// Exhaustive enumeration for desk-sized instances. Throws
/// std::invalid_argument beyond 5 blocks, 6 steps, or 2 sync switches.
RestorationPlan brute_force_small(const SystemModel& m, const ScenarioSpec& sc,
                                  const GridConfig& cfg, RuleSet rules);

/// Write the full mixed-integer model (quadratic caps replaced by an inner
/// octagonal approximation) in LP text format.
void export_model(const SystemModel& m, const ScenarioSpec& sc, const GridConfig& cfg,
                  RuleSet rules, const std::string& path);

} // namespace ssdmgf
