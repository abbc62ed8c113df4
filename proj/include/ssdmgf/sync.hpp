#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssdmgf/topology.hpp"

namespace ssdmgf {

/// For one synchronization switch: the unordered pairs of black-start blocks
/// it can merge. A pair (k, k') qualifies when some simple backbone path from
/// k to k' crosses this switch as its only synchronization switch and visits
/// no third black-start block. Pairs are stored (min, max) by block id.
struct SswDomain {
    int edge = -1; // backbone edge index
    int line = -1; // feeder line index
    std::vector<std::pair<int, int>> pairs;
};

std::vector<SswDomain> compute_ssw_domains(const Backbone& bb, const SourceBlocks& sb);

/// Union of all mergeable pairs: vertices are black-start blocks, an edge
/// means at least one switch can merge the two islands.
struct SyncGraph {
    std::vector<int> bs_blocks;
    std::vector<std::pair<int, int>> edges; // (min, max) block ids, deduplicated, sorted
    /// For each edge above, the switches that realize it (feeder line indices).
    std::vector<std::vector<int>> realized_by;
};

SyncGraph build_sync_graph(const Backbone& bb, const SourceBlocks& sb,
                           const std::vector<SswDomain>& domains);

/// One synchronization mode: a partition of the active black-start blocks.
/// Parts are sorted internally and by first element, so equal partitions
/// compare equal structurally.
struct Mode {
    bool tg_present = false;
    std::vector<std::vector<int>> parts;
    int klass = 0;             // number of parts
    int realizations = 0;      // distinct switch configurations producing this partition
};

struct ModeCatalogue {
    std::vector<Mode> modes; // deterministic order: tg ascending, class descending, parts lex

    /// Index of the mode equal to `parts` under `tg_present`, or nullopt.
    std::optional<int> find(const std::vector<std::vector<int>>& parts, bool tg_present) const;
    /// Count of modes per class value, over the whole catalogue.
    std::map<int, int> class_histogram() const;
};

/// Enumerate every switch-configuration product for one grid-availability
/// flag and collect the distinct partitions.
std::vector<Mode> enumerate_modes(const SourceBlocks& sb, const std::vector<SswDomain>& domains,
                                  bool tg_present);

/// Both flags combined (grid-absent modes first). Feeders without a TG get
/// only the tg_present=false half.
ModeCatalogue enumerate_mode_catalogue(const Feeder& f, const Backbone& bb,
                                       const SourceBlocks& sb);

/// Pairwise synchronization indicators over the full black-start block list
/// (fixed order from SourceBlocks::bs_blocks()). Symmetric; diagonal unused.
struct SyncMatrix {
    int n = 0;
    std::vector<std::uint8_t> cells; // n*n row-major

    explicit SyncMatrix(int n_ = 0) : n(n_), cells(static_cast<std::size_t>(n_ * n_), 0) {}
    std::uint8_t at(int i, int j) const { return cells[static_cast<std::size_t>(i * n + j)]; }
    void set(int i, int j, std::uint8_t v) {
        cells[static_cast<std::size_t>(i * n + j)] = v;
        cells[static_cast<std::size_t>(j * n + i)] = v;
    }
    bool operator==(const SyncMatrix&) const = default;
};

/// Partition the given subset of matrix indices by synchronization closure.
/// Returns nullopt if the 1-cells are not transitively closed over the subset
/// (two indicators claim a shared partner but not each other).
std::optional<std::vector<std::vector<int>>>
partition_from_sync(const SyncMatrix& m, const std::vector<int>& active_indices);

struct TransitionViolation {
    int center = -1; // matrix index k whose two new links straddle the triple
    int left = -1;   // k'
    int right = -1;  // k''
    int lhs = 0;     // delta(k,k') + delta(k,k'') - prev(k',k''), violating when > 1
};

struct TransitionReport {
    bool monotone = true;  // no indicator may fall back to 0
    bool safe = true;      // no island absorbs more than one other island per step
    std::vector<TransitionViolation> violations;
    bool ok() const { return monotone && safe; }
};

/// Check a single step of synchronization indicators against the previous
/// step: indicators are irreversible, and each step may merge at most two
/// pre-existing islands per synchronization event group.
TransitionReport check_transition_safety(const SyncMatrix& prev, const SyncMatrix& next);

} // namespace ssdmgf
