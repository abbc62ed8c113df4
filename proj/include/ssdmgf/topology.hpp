#pragma once

#include <vector>

#include "ssdmgf/feeder.hpp"

namespace ssdmgf {

/// Grouping of buses into blocks: maximal sets connected by non-switchable
/// lines. Block ids are assigned by ascending lowest bus declaration index,
/// so a feeder file that declares buses block by block gets sequential ids.
struct BlockPartition {
    int num_blocks = 0;
    std::vector<int> block_of_bus;               // bus index -> block id
    std::vector<std::vector<int>> buses_of_block; // block id -> bus indices, ascending
    std::vector<std::vector<int>> lines_of_block; // block id -> internal line indices
};

BlockPartition partition_blocks(const Feeder& f);

/// Block-level multigraph whose edges are the switchable lines. Parallel
/// switches between the same block pair stay distinct edges (they are
/// distinct physical devices with their own state).
struct Backbone {
    struct Edge {
        int line = -1; // index into Feeder::lines
        int u = -1;    // block ids
        int v = -1;
        LineKind kind = LineKind::Esw;
    };
    int num_blocks = 0;
    std::vector<Edge> edges;                    // declaration order of the underlying lines
    std::vector<std::vector<int>> incident;     // block id -> edge indices

    int other(int edge, int block) const {
        const Edge& e = edges[static_cast<std::size_t>(edge)];
        return e.u == block ? e.v : e.u;
    }
    std::vector<int> ssw_edges() const;
    std::vector<int> esw_edges() const;
};

/// Throws ParseError if a switchable line has both endpoints inside one block
/// (such a switch could never change the island structure and almost always
/// indicates a mis-tagged line class).
Backbone build_backbone(const Feeder& f, const BlockPartition& bp);

/// A simple path in the backbone: blocks visited and the edges between them.
struct BackbonePath {
    std::vector<int> blocks; // length n+1
    std::vector<int> edges;  // backbone edge indices, length n
};

/// All simple paths from block `src` to block `dst`, depth-first, children in
/// ascending edge order, so output order is deterministic.
std::vector<BackbonePath> enumerate_simple_paths(const Backbone& bb, int src, int dst);

/// Block ids hosting grid-forming sources. The TG block (if any) comes first,
/// BESS blocks follow in ascending block id.
struct SourceBlocks {
    int tg_block = -1;                 // -1 when the feeder has no TG
    std::vector<int> bess_blocks;      // ascending
    std::vector<int> bess_devices;     // feeder device index per entry above
    int tg_device = -1;

    /// Black-start block ids: TG block (if present) then BESS blocks.
    std::vector<int> bs_blocks() const;
    bool is_bs(int block) const;
};

SourceBlocks find_source_blocks(const Feeder& f, const BlockPartition& bp);

} // namespace ssdmgf
