#include "ssdmgf/topology.hpp"

#include <algorithm>
#include <numeric>

namespace ssdmgf {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
            a = parent[static_cast<std::size_t>(a)];
        }
        return a;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

} // namespace

BlockPartition partition_blocks(const Feeder& f) {
    const int n = static_cast<int>(f.buses.size());
    UnionFind uf(n);
    for (const auto& l : f.lines)
        if (l.kind == LineKind::Normal) uf.unite(l.from, l.to);

    // Map union-find roots to block ids ordered by lowest member bus index.
    std::vector<int> root_of_bus(static_cast<std::size_t>(n));
    std::vector<int> first_bus_of_root(static_cast<std::size_t>(n), -1);
    for (int b = 0; b < n; ++b) {
        int r = uf.find(b);
        root_of_bus[static_cast<std::size_t>(b)] = r;
        if (first_bus_of_root[static_cast<std::size_t>(r)] < 0)
            first_bus_of_root[static_cast<std::size_t>(r)] = b;
    }
    std::vector<int> roots;
    for (int r = 0; r < n; ++r)
        if (first_bus_of_root[static_cast<std::size_t>(r)] >= 0) roots.push_back(r);
    std::sort(roots.begin(), roots.end(), [&](int a, int b) {
        return first_bus_of_root[static_cast<std::size_t>(a)] < first_bus_of_root[static_cast<std::size_t>(b)];
    });

    BlockPartition bp;
    bp.num_blocks = static_cast<int>(roots.size());
    std::vector<int> block_of_root(static_cast<std::size_t>(n), -1);
    for (std::size_t i = 0; i < roots.size(); ++i)
        block_of_root[static_cast<std::size_t>(roots[i])] = static_cast<int>(i);

    bp.block_of_bus.resize(static_cast<std::size_t>(n));
    bp.buses_of_block.resize(static_cast<std::size_t>(bp.num_blocks));
    for (int b = 0; b < n; ++b) {
        int blk = block_of_root[static_cast<std::size_t>(root_of_bus[static_cast<std::size_t>(b)])];
        bp.block_of_bus[static_cast<std::size_t>(b)] = blk;
        bp.buses_of_block[static_cast<std::size_t>(blk)].push_back(b);
    }

    bp.lines_of_block.resize(static_cast<std::size_t>(bp.num_blocks));
    for (std::size_t li = 0; li < f.lines.size(); ++li) {
        const auto& l = f.lines[li];
        if (l.kind != LineKind::Normal) continue;
        int blk = bp.block_of_bus[static_cast<std::size_t>(l.from)];
        bp.lines_of_block[static_cast<std::size_t>(blk)].push_back(static_cast<int>(li));
    }
    return bp;
}

std::vector<int> Backbone::ssw_edges() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (edges[i].kind == LineKind::Ssw) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<int> Backbone::esw_edges() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (edges[i].kind == LineKind::Esw) out.push_back(static_cast<int>(i));
    return out;
}

Backbone build_backbone(const Feeder& f, const BlockPartition& bp) {
    Backbone bb;
    bb.num_blocks = bp.num_blocks;
    bb.incident.resize(static_cast<std::size_t>(bp.num_blocks));
    for (std::size_t li = 0; li < f.lines.size(); ++li) {
        const auto& l = f.lines[li];
        if (l.kind == LineKind::Normal) continue;
        int u = bp.block_of_bus[static_cast<std::size_t>(l.from)];
        int v = bp.block_of_bus[static_cast<std::size_t>(l.to)];
        if (u == v)
            throw ParseError("switch '" + l.id + "' has both endpoints in one block; "
                             "it can never alter the island structure");
        Backbone::Edge e;
        e.line = static_cast<int>(li);
        e.u = u;
        e.v = v;
        e.kind = l.kind;
        int ei = static_cast<int>(bb.edges.size());
        bb.edges.push_back(e);
        bb.incident[static_cast<std::size_t>(u)].push_back(ei);
        bb.incident[static_cast<std::size_t>(v)].push_back(ei);
    }
    return bb;
}

std::vector<BackbonePath> enumerate_simple_paths(const Backbone& bb, int src, int dst) {
    std::vector<BackbonePath> out;
    if (src == dst) return out;
    std::vector<char> visited(static_cast<std::size_t>(bb.num_blocks), 0);
    BackbonePath cur;
    cur.blocks.push_back(src);
    visited[static_cast<std::size_t>(src)] = 1;

    // Iterative DFS keeps this safe for long chains; the per-node cursor walks
    // incident edges in ascending index order for determinism.
    struct Frame {
        int block;
        std::size_t next = 0;
    };
    std::vector<Frame> stack{{src, 0}};
    while (!stack.empty()) {
        Frame& fr = stack.back();
        const auto& inc = bb.incident[static_cast<std::size_t>(fr.block)];
        if (fr.next >= inc.size()) {
            visited[static_cast<std::size_t>(fr.block)] = 0;
            cur.blocks.pop_back();
            if (!cur.edges.empty()) cur.edges.pop_back();
            stack.pop_back();
            continue;
        }
        int ei = inc[fr.next++];
        int nb = bb.other(ei, fr.block);
        if (visited[static_cast<std::size_t>(nb)]) continue;
        cur.blocks.push_back(nb);
        cur.edges.push_back(ei);
        if (nb == dst) {
            out.push_back(cur);
            cur.blocks.pop_back();
            cur.edges.pop_back();
            continue;
        }
        visited[static_cast<std::size_t>(nb)] = 1;
        stack.push_back({nb, 0});
    }
    return out;
}

std::vector<int> SourceBlocks::bs_blocks() const {
    std::vector<int> out;
    if (tg_block >= 0) out.push_back(tg_block);
    out.insert(out.end(), bess_blocks.begin(), bess_blocks.end());
    return out;
}

bool SourceBlocks::is_bs(int block) const {
    if (block == tg_block) return true;
    return std::find(bess_blocks.begin(), bess_blocks.end(), block) != bess_blocks.end();
}

SourceBlocks find_source_blocks(const Feeder& f, const BlockPartition& bp) {
    SourceBlocks sb;
    std::vector<std::pair<int, int>> bess; // (block, device)
    for (std::size_t di = 0; di < f.devices.size(); ++di) {
        const auto& d = f.devices[di];
        int blk = bp.block_of_bus[static_cast<std::size_t>(d.bus)];
        if (d.type == DeviceType::Tg) {
            sb.tg_block = blk;
            sb.tg_device = static_cast<int>(di);
        } else if (d.type == DeviceType::Bess) {
            bess.emplace_back(blk, static_cast<int>(di));
        }
    }
    std::sort(bess.begin(), bess.end());
    for (auto& [blk, dev] : bess) {
        if (!sb.bess_blocks.empty() && sb.bess_blocks.back() == blk)
            throw ParseError("two grid-forming storage units in one block is unsupported");
        if (blk == sb.tg_block)
            throw ParseError("storage unit shares a block with the grid interface");
        sb.bess_blocks.push_back(blk);
        sb.bess_devices.push_back(dev);
    }
    return sb;
}

} // namespace ssdmgf
