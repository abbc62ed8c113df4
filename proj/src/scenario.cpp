#include "ssdmgf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "ssdmgf/plan.hpp"

namespace ssdmgf {

std::string to_string(Split s) {
    switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    }
    return "?";
}

ScenarioSet generate_scenarios(const Feeder& f, const BlockPartition& bp,
                               const SourceBlocks& sb, const GridConfig& cfg,
                               std::uint64_t seed) {
    (void)f;
    ScenarioSet set;
    std::vector<int> damage_candidates;
    for (int k = 0; k < bp.num_blocks; ++k)
        if (!sb.is_bs(k)) damage_candidates.push_back(k);

    int counter = 0;
    for (const auto& season : season_names()) {
        for (int t0 = 6; t0 <= 16; ++t0) {
            for (int nu : {60, 120, 240}) {
                for (int dmg : damage_candidates) {
                    ScenarioSpec sc;
                    sc.season = season;
                    sc.t0_hour = t0;
                    sc.nu_minutes = nu;
                    sc.damaged_block = dmg;
                    sc.horizon_steps = cfg.horizon_steps;
                    sc.dt_minutes = cfg.dt_minutes;
                    sc.seed = seed;
                    char buf[32];
                    std::snprintf(buf, sizeof buf, "sc%04d", counter++);
                    sc.id = buf;
                    set.scenarios.push_back(std::move(sc));
                }
            }
        }
    }

    // Deterministic 8:1:1 assignment: shuffle indices with the seed, carve
    // off the tail tenths for validation and test.
    std::vector<std::size_t> order(set.scenarios.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    const std::size_t n = order.size();
    const std::size_t n_test = n / 10;
    const std::size_t n_val = n / 10;
    set.split.assign(n, Split::Train);
    for (std::size_t i = 0; i < n_test; ++i) set.split[order[i]] = Split::Test;
    for (std::size_t i = n_test; i < n_test + n_val; ++i) set.split[order[i]] = Split::Val;
    return set;
}

FeatureTensor build_features(const Feeder& f, const BlockPartition& bp, const Backbone& bb,
                             const SourceBlocks& sb, const ScenarioSpec& sc,
                             const GridConfig& cfg) {
    (void)cfg;
    FeatureTensor ft;
    ft.T = sc.horizon_steps;
    ft.K = bp.num_blocks;
    ft.F = 10;
    ft.E = static_cast<int>(bb.edges.size());
    ft.x.assign(static_cast<std::size_t>(ft.T) * static_cast<std::size_t>(ft.K) *
                    static_cast<std::size_t>(ft.F),
                0.0);
    ft.edge_flags.assign(static_cast<std::size_t>(ft.E), 0.0);
    for (int e = 0; e < ft.E; ++e)
        if (bb.edges[static_cast<std::size_t>(e)].kind == LineKind::Ssw)
            ft.edge_flags[static_cast<std::size_t>(e)] = 1.0;

    // Static per-block aggregates.
    std::vector<double> bess_s(static_cast<std::size_t>(ft.K), 0.0);
    std::vector<double> bess_e(static_cast<std::size_t>(ft.K), 0.0);
    std::vector<double> n_esw(static_cast<std::size_t>(ft.K), 0.0);
    std::vector<double> n_ssw(static_cast<std::size_t>(ft.K), 0.0);
    for (const auto& d : f.devices) {
        if (d.type != DeviceType::Bess) continue;
        int k = bp.block_of_bus[static_cast<std::size_t>(d.bus)];
        bess_s[static_cast<std::size_t>(k)] += d.s_max;
        bess_e[static_cast<std::size_t>(k)] += d.e_nom;
    }
    for (const auto& e : bb.edges) {
        auto& tally = e.kind == LineKind::Ssw ? n_ssw : n_esw;
        tally[static_cast<std::size_t>(e.u)] += 1.0;
        tally[static_cast<std::size_t>(e.v)] += 1.0;
    }

    for (int t = 0; t < ft.T; ++t) {
        double minute = sc.minute_of_day(t);
        std::vector<double> cl(static_cast<std::size_t>(ft.K), 0.0);
        std::vector<double> nl(static_cast<std::size_t>(ft.K), 0.0);
        std::vector<double> pv(static_cast<std::size_t>(ft.K), 0.0);
        for (const auto& ld : f.loads) {
            int k = bp.block_of_bus[static_cast<std::size_t>(ld.bus)];
            double s = sum(ld.p_peak) * f.profile_factor(ld.profile, sc.season, minute);
            (ld.critical ? cl : nl)[static_cast<std::size_t>(k)] += s;
        }
        for (const auto& d : f.devices) {
            if (d.type != DeviceType::Pv) continue;
            int k = bp.block_of_bus[static_cast<std::size_t>(d.bus)];
            pv[static_cast<std::size_t>(k)] +=
                d.s_max * f.profile_factor(d.profile, sc.season, minute);
        }
        double u_tg = sc.tg_available(t) ? 1.0 : 0.0;
        for (int k = 0; k < ft.K; ++k) {
            auto kk = static_cast<std::size_t>(k);
            ft.at(t, k, 0) = cl[kk];
            ft.at(t, k, 1) = nl[kk];
            ft.at(t, k, 2) = pv[kk];
            ft.at(t, k, 3) = u_tg;
            ft.at(t, k, 4) = k == sc.damaged_block ? 1.0 : 0.0;
            ft.at(t, k, 5) = bess_s[kk] > 0.0 ? 1.0 : 0.0;
            ft.at(t, k, 6) = bess_s[kk];
            ft.at(t, k, 7) = bess_e[kk];
            ft.at(t, k, 8) = n_esw[kk];
            ft.at(t, k, 9) = n_ssw[kk];
        }
    }
    (void)sb;
    return ft;
}

Labels label_plan(const Feeder& f, const BlockPartition& bp, const Backbone& bb,
                  const SourceBlocks& sb, const RestorationPlan& plan) {
    (void)f;
    Labels lb;
    lb.T = plan.T;
    lb.K = bp.num_blocks;
    auto ssw = bb.ssw_edges();
    lb.E = static_cast<int>(ssw.size());
    lb.root.assign(static_cast<std::size_t>(lb.T) * static_cast<std::size_t>(lb.K), 0);
    lb.sync.assign(static_cast<std::size_t>(lb.T) * static_cast<std::size_t>(lb.E), 0);

    // Root label r >= 1 indexes the black-start blocks in ascending block id;
    // 0 means de-energized.
    auto universe = sb.bs_blocks();
    std::sort(universe.begin(), universe.end());
    for (int t = 0; t < lb.T; ++t) {
        // Island decomposition over closed switches; label every energized
        // block with 1 + the index of its island's leading source block.
        std::vector<int> comp(static_cast<std::size_t>(lb.K));
        for (int k = 0; k < lb.K; ++k) comp[static_cast<std::size_t>(k)] = k;
        std::function<int(int)> find = [&](int a) {
            while (comp[static_cast<std::size_t>(a)] != a)
                a = comp[static_cast<std::size_t>(a)] =
                        comp[static_cast<std::size_t>(comp[static_cast<std::size_t>(a)])];
            return a;
        };
        for (const auto& e : bb.edges)
            if (plan.line(t, e.line)) comp[static_cast<std::size_t>(find(e.u))] = find(e.v);

        for (int k = 0; k < lb.K; ++k) {
            if (!plan.bk(t, k)) continue;
            // Representative source of the island: grid if its block is live
            // and attached, otherwise the lowest-id storage block.
            int rep = -1;
            for (int kb : universe) {
                if (!plan.bk(t, kb)) continue;
                if (kb == sb.tg_block && !plan.u_tg[static_cast<std::size_t>(t)]) continue;
                if (find(kb) != find(k)) continue;
                if (kb == sb.tg_block) {
                    rep = kb;
                    break;
                }
                if (rep < 0) rep = kb;
            }
            int label = 0;
            if (rep >= 0) {
                auto it = std::lower_bound(universe.begin(), universe.end(), rep);
                label = static_cast<int>(it - universe.begin()) + 1;
            }
            lb.root[static_cast<std::size_t>(t * lb.K + k)] = label;
        }
        for (std::size_t e = 0; e < ssw.size(); ++e) {
            int line = bb.edges[static_cast<std::size_t>(ssw[e])].line;
            bool newly = plan.line(t, line) && (t == 0 || !plan.line(t - 1, line));
            lb.sync[static_cast<std::size_t>(t) * static_cast<std::size_t>(lb.E) + e] = newly ? 1 : 0;
        }
    }
    return lb;
}

} // namespace ssdmgf
