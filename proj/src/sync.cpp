#include "ssdmgf/sync.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace ssdmgf {

namespace {

std::vector<std::vector<int>> canonical_parts(std::vector<std::vector<int>> parts) {
    for (auto& p : parts) std::sort(p.begin(), p.end());
    std::sort(parts.begin(), parts.end());
    return parts;
}

} // namespace

std::vector<SswDomain> compute_ssw_domains(const Backbone& bb, const SourceBlocks& sb) {
    std::vector<SswDomain> domains;
    const auto bs = sb.bs_blocks();
    const auto ssw = bb.ssw_edges();

    std::vector<char> is_bs(static_cast<std::size_t>(bb.num_blocks), 0);
    for (int k : bs) is_bs[static_cast<std::size_t>(k)] = 1;
    std::vector<char> is_ssw_edge(bb.edges.size(), 0);
    for (int e : ssw) is_ssw_edge[static_cast<std::size_t>(e)] = 1;

    for (int e : ssw) {
        SswDomain d;
        d.edge = e;
        d.line = bb.edges[static_cast<std::size_t>(e)].line;
        for (std::size_t i = 0; i < bs.size(); ++i) {
            for (std::size_t j = i + 1; j < bs.size(); ++j) {
                int k1 = bs[i];
                int k2 = bs[j];
                bool ok = false;
                for (const auto& path : enumerate_simple_paths(bb, k1, k2)) {
                    int ssw_hits = 0;
                    bool through_e = false;
                    for (int pe : path.edges) {
                        if (is_ssw_edge[static_cast<std::size_t>(pe)]) {
                            ++ssw_hits;
                            if (pe == e) through_e = true;
                        }
                    }
                    if (ssw_hits != 1 || !through_e) continue;
                    bool interior_bs = false;
                    for (std::size_t v = 1; v + 1 < path.blocks.size(); ++v)
                        if (is_bs[static_cast<std::size_t>(path.blocks[v])]) interior_bs = true;
                    if (!interior_bs) {
                        ok = true;
                        break;
                    }
                }
                if (ok) d.pairs.emplace_back(std::min(k1, k2), std::max(k1, k2));
            }
        }
        std::sort(d.pairs.begin(), d.pairs.end());
        domains.push_back(std::move(d));
    }
    return domains;
}

SyncGraph build_sync_graph(const Backbone& bb, const SourceBlocks& sb,
                           const std::vector<SswDomain>& domains) {
    (void)bb;
    SyncGraph g;
    g.bs_blocks = sb.bs_blocks();
    std::map<std::pair<int, int>, std::vector<int>> by_pair;
    for (const auto& d : domains)
        for (const auto& p : d.pairs) by_pair[p].push_back(d.line);
    for (auto& [pair, lines] : by_pair) {
        g.edges.push_back(pair);
        std::sort(lines.begin(), lines.end());
        g.realized_by.push_back(lines);
    }
    return g;
}

std::vector<Mode> enumerate_modes(const SourceBlocks& sb, const std::vector<SswDomain>& domains,
                                  bool tg_present) {
    std::vector<int> active = tg_present ? sb.bs_blocks() : sb.bess_blocks;
    if (tg_present && sb.tg_block < 0) return {};

    // Per-switch options: index -1 keeps the switch out of the configuration,
    // otherwise pick one mergeable pair. Pairs touching the grid block are
    // only available while the grid is up.
    std::vector<std::vector<std::pair<int, int>>> options;
    for (const auto& d : domains) {
        std::vector<std::pair<int, int>> opts;
        for (const auto& p : d.pairs) {
            if (!tg_present && (p.first == sb.tg_block || p.second == sb.tg_block)) continue;
            opts.push_back(p);
        }
        options.push_back(std::move(opts));
    }

    std::map<std::vector<std::vector<int>>, int> seen; // canonical parts -> realization count
    std::vector<int> choice(domains.size(), -1);

    auto realize = [&]() {
        std::map<int, int> comp;
        for (int k : active) comp[k] = k;
        std::function<int(int)> find = [&](int a) {
            while (comp[a] != a) a = comp[a] = comp[comp[a]];
            return a;
        };
        for (std::size_t i = 0; i < domains.size(); ++i) {
            if (choice[i] < 0) continue;
            auto [a, b] = options[i][static_cast<std::size_t>(choice[i])];
            comp[find(a)] = find(b);
        }
        std::map<int, std::vector<int>> groups;
        for (int k : active) groups[find(k)].push_back(k);
        std::vector<std::vector<int>> parts;
        for (auto& [root, members] : groups) parts.push_back(members);
        ++seen[canonical_parts(std::move(parts))];
    };

    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == domains.size()) {
            realize();
            return;
        }
        choice[i] = -1;
        rec(i + 1);
        for (std::size_t o = 0; o < options[i].size(); ++o) {
            choice[i] = static_cast<int>(o);
            rec(i + 1);
        }
        choice[i] = -1;
    };
    rec(0);

    std::vector<Mode> modes;
    for (const auto& [parts, count] : seen) {
        Mode m;
        m.tg_present = tg_present;
        m.parts = parts;
        m.klass = static_cast<int>(parts.size());
        m.realizations = count;
        modes.push_back(std::move(m));
    }
    std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
        if (a.klass != b.klass) return a.klass > b.klass;
        return a.parts < b.parts;
    });
    return modes;
}

ModeCatalogue enumerate_mode_catalogue(const Feeder& f, const Backbone& bb,
                                       const SourceBlocks& sb) {
    auto domains = compute_ssw_domains(bb, sb);
    ModeCatalogue cat;
    auto off = enumerate_modes(sb, domains, false);
    cat.modes.insert(cat.modes.end(), off.begin(), off.end());
    if (f.has_tg()) {
        auto on = enumerate_modes(sb, domains, true);
        cat.modes.insert(cat.modes.end(), on.begin(), on.end());
    }
    return cat;
}

std::optional<int> ModeCatalogue::find(const std::vector<std::vector<int>>& parts,
                                       bool tg_present) const {
    auto canon = canonical_parts(parts);
    for (std::size_t i = 0; i < modes.size(); ++i)
        if (modes[i].tg_present == tg_present && modes[i].parts == canon)
            return static_cast<int>(i);
    return std::nullopt;
}

std::map<int, int> ModeCatalogue::class_histogram() const {
    std::map<int, int> h;
    for (const auto& m : modes) ++h[m.klass];
    return h;
}

std::optional<std::vector<std::vector<int>>>
partition_from_sync(const SyncMatrix& m, const std::vector<int>& active_indices) {
    // Group by direct links, then verify the links were already transitive:
    // every pair inside a group must carry an explicit 1.
    std::map<int, int> comp;
    for (int i : active_indices) comp[i] = i;
    std::function<int(int)> find = [&](int a) {
        while (comp[a] != a) a = comp[a] = comp[comp[a]];
        return a;
    };
    for (std::size_t a = 0; a < active_indices.size(); ++a)
        for (std::size_t b = a + 1; b < active_indices.size(); ++b)
            if (m.at(active_indices[a], active_indices[b]))
                comp[find(active_indices[a])] = find(active_indices[b]);

    std::map<int, std::vector<int>> groups;
    for (int i : active_indices) groups[find(i)].push_back(i);
    std::vector<std::vector<int>> parts;
    for (auto& [root, members] : groups) {
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b)
                if (!m.at(members[a], members[b])) return std::nullopt;
        parts.push_back(members);
    }
    std::sort(parts.begin(), parts.end());
    return parts;
}

TransitionReport check_transition_safety(const SyncMatrix& prev, const SyncMatrix& next) {
    TransitionReport rep;
    const int n = prev.n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (next.at(i, j) < prev.at(i, j)) rep.monotone = false;

    auto delta = [&](int i, int j) { return static_cast<int>(next.at(i, j)) - static_cast<int>(prev.at(i, j)); };
    for (int k = 0; k < n; ++k) {
        for (int a = 0; a < n; ++a) {
            if (a == k) continue;
            for (int b = a + 1; b < n; ++b) {
                if (b == k) continue;
                int lhs = delta(k, a) + delta(k, b) - static_cast<int>(prev.at(a, b));
                if (lhs > 1) {
                    rep.safe = false;
                    rep.violations.push_back({k, a, b, lhs});
                }
            }
        }
    }
    return rep;
}

} // namespace ssdmgf
