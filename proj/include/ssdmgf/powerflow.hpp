#pragma once

#include <string>
#include <vector>

#include "ssdmgf/feeder.hpp"

namespace ssdmgf {

/// Snapshot of the switched topology at one step.
struct EnergizedState {
    std::vector<std::uint8_t> bus_on;      // per bus
    std::vector<std::uint8_t> line_closed; // per line (non-switchable lines follow their block)
};

/// Rooted spanning forest of the energized, closed-line subgraph.
struct Forest {
    std::vector<int> component;   // bus -> island id, -1 when de-energized
    std::vector<int> parent_line; // bus -> line index into the tree, -1 at roots/dead buses
    std::vector<int> parent_bus;  // bus -> upstream bus, -1 at roots/dead buses
    std::vector<int> roots;       // island id -> root bus
    std::vector<std::vector<int>> order; // island id -> buses in BFS order from the root
    bool radial = true;           // false when a closed line closes a cycle
    std::vector<int> extra_lines; // closed lines that were not needed (cycle makers)

    int num_islands() const { return static_cast<int>(roots.size()); }
};

/// Build the forest by BFS from each root. Roots must be energized buses, one
/// per expected island; islands reachable from no root get the lowest-index
/// energized bus as a fallback root so the caller can still inspect them.
Forest build_forest(const Feeder& f, const EnergizedState& st, const std::vector<int>& roots);

/// Flows and squared voltages computed over a rooted forest: line flows are
/// oriented parent -> child and aggregate everything below, root voltage is
/// fixed per island and propagated through the line drop relation.
struct TreeFlow {
    std::vector<double> p_flow; // lines*3, oriented from the tree parent side
    std::vector<double> q_flow;
    std::vector<double> v_sq;   // buses*3, zero on dead buses
    bool ok = true;
    std::string error;
};

/// `p_inj`/`q_inj` are net per-bus per-phase injections (generation positive,
/// demand negative) and must sum to ~0 per island for the result to satisfy
/// nodal balance at the root. `root_v_sq` is the squared voltage magnitude
/// applied at each island root.
TreeFlow solve_tree_flow(const Feeder& f, const EnergizedState& st, const Forest& forest,
                         const std::vector<double>& p_inj, const std::vector<double>& q_inj,
                         double root_v_sq = 1.0);

} // namespace ssdmgf
