#pragma once

#include <string>
#include <vector>

#include "ssdmgf/config.hpp"
#include "ssdmgf/sync.hpp"
#include "ssdmgf/topology.hpp"

namespace ssdmgf {

/// One outage case: when the blackout starts, how long the upstream grid
/// stays away, which block is damaged (unrestorable), and the demand season.
struct ScenarioSpec {
    std::string id;
    std::string season;      // profile suffix, e.g. "winter"
    int t0_hour = 12;        // blackout onset, hour of day
    int nu_minutes = 240;    // grid recovery delay after onset
    int damaged_block = -1;  // -1 = none
    int horizon_steps = 32;
    double dt_minutes = 15.0;
    std::uint64_t seed = 42;

    /// Grid availability at step t (step 0 is the onset itself).
    bool tg_available(int t) const { return t * dt_minutes >= static_cast<double>(nu_minutes); }
    /// Absolute minute of day at step t.
    double minute_of_day(int t) const { return t0_hour * 60.0 + t * dt_minutes; }
};

/// Which split a scenario lands in for learning experiments.
enum class Split { Train, Val, Test };
std::string to_string(Split s);

struct ScenarioSet {
    std::vector<ScenarioSpec> scenarios;
    std::vector<Split> split; // parallel to scenarios
};

/// Full factorial case grid: onset hours 6..16, recovery delays
/// {60, 120, 240} minutes, every non-black-start block damaged once, four
/// seasons. Split assignment is a seeded 8:1:1 shuffle reproducible from the
/// seed alone.
ScenarioSet generate_scenarios(const Feeder& f, const BlockPartition& bp,
                               const SourceBlocks& sb, const GridConfig& cfg,
                               std::uint64_t seed);

inline const std::vector<std::string>& season_names() {
    static const std::vector<std::string> names{"spring", "summer", "fall", "winter"};
    return names;
}

/// Per-step per-block descriptors fed to a label predictor, plus a static
/// per-switch-edge flag vector. The 10 block channels are, in order:
/// critical demand, noncritical demand, PV potential, grid availability,
/// damaged flag, storage flag, storage rating, storage energy, incident
/// energization switches, incident synchronization switches.
struct FeatureTensor {
    int T = 0;
    int K = 0; // blocks
    int F = 0; // block feature channels
    int E = 0; // backbone switch edges
    std::vector<double> x;          // T*K*F row-major
    std::vector<double> edge_flags; // length E, 1.0 where the edge is a sync switch

    double& at(int t, int k, int f) {
        return x[static_cast<std::size_t>((t * K + k) * F + f)];
    }
    double at(int t, int k, int f) const {
        return x[static_cast<std::size_t>((t * K + k) * F + f)];
    }
};

FeatureTensor build_features(const Feeder& f, const BlockPartition& bp, const Backbone& bb,
                             const SourceBlocks& sb, const ScenarioSpec& sc,
                             const GridConfig& cfg);

/// Supervision extracted from a finished plan: per-step island root label for
/// every block (0 = de-energized, r >= 1 = index into bs_blocks()+1) and
/// per-step closure events for synchronization switches.
struct Labels {
    int T = 0;
    int K = 0;
    int E = 0; // synchronization switches, backbone ssw_edges() order
    std::vector<int> root;          // T*K
    std::vector<std::uint8_t> sync; // T*E, 1 on the closing step

    int root_at(int t, int k) const { return root[static_cast<std::size_t>(t * K + k)]; }
    std::uint8_t sync_at(int t, int e) const { return sync[static_cast<std::size_t>(t * E + e)]; }
};

struct RestorationPlan; // plan.hpp

Labels label_plan(const Feeder& f, const BlockPartition& bp, const Backbone& bb,
                  const SourceBlocks& sb, const RestorationPlan& plan);

} // namespace ssdmgf
