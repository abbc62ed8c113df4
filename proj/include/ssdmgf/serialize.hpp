#pragma once

#include <string>

#include "ssdmgf/optimizer.hpp"
#include "ssdmgf/plan.hpp"
#include "ssdmgf/scenario.hpp"

namespace ssdmgf {

/// Plan on disk: one long-format CSV (family,t,a,b,value) with a fixed family
/// order, plus a sidecar JSON manifest at `<path>.manifest.json` carrying the
/// horizon, step length, feeder hash, and the effective configuration.
void save_plan(const SystemModel& m, const ScenarioSpec& sc, const GridConfig& cfg,
               RuleSet rules, const RestorationPlan& plan, const std::string& path);

/// Rebuild a plan from its CSV. Shape comes from the model; the horizon comes
/// from the rows themselves. Unknown families or out-of-range indices throw
/// ParseError. The manifest, when present next to the CSV, must agree on the
/// feeder hash.
RestorationPlan load_plan(const SystemModel& m, const std::string& path);

std::string violations_to_json(const ViolationReport& rep);
std::string stats_to_json(const SolveStats& st);

std::string scenario_to_json(const ScenarioSpec& sc);
ScenarioSpec scenario_from_json_text(const std::string& text, const std::string& origin);
ScenarioSpec load_scenario(const std::string& path);
void save_scenario(const std::string& path, const ScenarioSpec& sc);

/// Feature tensors are stored raw: magic "SSDF", four u32 dims (T, K, F, E),
/// then the block tensor and the edge flags as little-endian f64.
void save_features(const std::string& path, const FeatureTensor& x);
FeatureTensor load_features(const std::string& path);

} // namespace ssdmgf
