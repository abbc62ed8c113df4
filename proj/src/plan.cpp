#include "ssdmgf/plan.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace ssdmgf {

int SystemModel::bs_index(int block) const {
    for (std::size_t i = 0; i < bs_blocks.size(); ++i)
        if (bs_blocks[i] == block) return static_cast<int>(i);
    return -1;
}

SystemModel SystemModel::build(Feeder f) {
    SystemModel m;
    m.feeder = std::move(f);
    m.blocks = partition_blocks(m.feeder);
    m.backbone = build_backbone(m.feeder, m.blocks);
    m.sources = find_source_blocks(m.feeder, m.blocks);
    m.domains = compute_ssw_domains(m.backbone, m.sources);
    m.catalogue = enumerate_mode_catalogue(m.feeder, m.backbone, m.sources);
    m.bs_blocks = m.sources.bs_blocks();
    return m;
}

RestorationPlan RestorationPlan::sized(const SystemModel& m, int T) {
    RestorationPlan p;
    p.T = T;
    p.num_blocks = m.blocks.num_blocks;
    p.num_buses = static_cast<int>(m.feeder.buses.size());
    p.num_lines = static_cast<int>(m.feeder.lines.size());
    p.num_devices = static_cast<int>(m.feeder.devices.size());
    p.num_loads = static_cast<int>(m.feeder.loads.size());
    p.n_bs = static_cast<int>(m.bs_blocks.size());
    auto zt = [T](int w) { return static_cast<std::size_t>(T) * static_cast<std::size_t>(w); };
    p.u_bk.assign(zt(p.num_blocks), 0);
    p.u_line.assign(zt(p.num_lines), 0);
    p.u_nlb.assign(zt(p.num_buses), 0);
    p.u_tg.assign(static_cast<std::size_t>(T), 0);
    p.sync.assign(static_cast<std::size_t>(T), SyncMatrix(p.n_bs));
    p.mode_index.assign(static_cast<std::size_t>(T), -1);
    p.s_count.assign(static_cast<std::size_t>(T), 0);
    p.f_block.assign(zt(p.num_blocks), 0.0);
    p.f_bus.assign(zt(p.num_buses), 0.0);
    p.p_dev.assign(zt(p.num_devices) * 3, 0.0);
    p.q_dev.assign(zt(p.num_devices) * 3, 0.0);
    p.soc.assign(zt(p.num_devices), 0.0);
    p.p_load.assign(zt(p.num_loads) * 3, 0.0);
    p.q_load.assign(zt(p.num_loads) * 3, 0.0);
    p.p_flow.assign(zt(p.num_lines) * 3, 0.0);
    p.q_flow.assign(zt(p.num_lines) * 3, 0.0);
    p.v_sq.assign(zt(p.num_buses) * 3, 0.0);
    return p;
}

Vec3 nominal_load_p(const Feeder& f, const Load& ld, const ScenarioSpec& sc, int t) {
    double fac = f.profile_factor(ld.profile, sc.season, sc.minute_of_day(t));
    return fac * ld.p_peak;
}

double clpu_multiplier(const GridConfig& cfg, int age) {
    if (age < 0) return 0.0;
    if (age < 3) return 1.0 + cfg.beta[static_cast<std::size_t>(age)];
    return 1.0;
}

double pv_eta(const Feeder& f, const Device& d, const ScenarioSpec& sc, int t) {
    return f.profile_factor(d.profile, sc.season, sc.minute_of_day(t));
}

double step_value(const SystemModel& m, const GridConfig& cfg, const RestorationPlan& plan, int t) {
    double cl = 0.0, nl = 0.0;
    for (int ld = 0; ld < plan.num_loads; ++ld) {
        double s = 0.0;
        for (int n = 0; n < 3; ++n) s += plan.load_p(t, ld, n);
        if (m.feeder.loads[static_cast<std::size_t>(ld)].critical) cl += s;
        else nl += s;
    }
    return cfg.dt_minutes * (cfg.alpha_cl * cl + cfg.alpha_nl * nl);
}

double restored_value(const SystemModel& m, const ScenarioSpec& sc, const GridConfig& cfg,
                      const RestorationPlan& plan) {
    (void)sc;
    double total = 0.0;
    for (int t = 0; t < plan.T; ++t) total += step_value(m, cfg, plan, t);
    return total;
}

std::string to_string(RuleSet r) {
    switch (r) {
    case RuleSet::Ssdmgf: return "ssdmgf";
    case RuleSet::Ndmgf: return "ndmgf";
    case RuleSet::RuleBased: return "rr";
    }
    return "?";
}

RuleSet rule_set_from_string(const std::string& s) {
    if (s == "ssdmgf") return RuleSet::Ssdmgf;
    if (s == "ndmgf") return RuleSet::Ndmgf;
    if (s == "rr") return RuleSet::RuleBased;
    throw ParseError("unknown rule set '" + s + "' (expected ssdmgf|ndmgf|rr)");
}

std::string ViolationReport::summary(std::size_t max_items) const {
    std::ostringstream os;
    os << violations.size() << " violation(s)";
    for (std::size_t i = 0; i < violations.size() && i < max_items; ++i) {
        const auto& v = violations[i];
        os << "\n  [" << v.constraint << "] t=" << v.t << " " << v.entity;
        if (v.residual != 0.0) os << " residual=" << v.residual;
        if (!v.detail.empty()) os << " (" << v.detail << ")";
    }
    if (violations.size() > max_items) os << "\n  ...";
    return os.str();
}

namespace {

// Age of an indicator at step t: 0 on the step it turned 1, growing while it
// stays 1, -1 if it is 0 at t.
template <typename Get>
int indicator_age(int t, Get&& on) {
    if (!on(t)) return -1;
    int age = 0;
    for (int tau = t - 1; tau >= 0 && on(tau); --tau) ++age;
    return age;
}

} // namespace

void apply_actions(const SystemModel& m, const ScenarioSpec& sc, RestorationPlan& plan, int t,
                   const StepActions& act) {
    const auto& f = m.feeder;
    // Carry the previous step's switching state forward.
    for (int k = 0; k < plan.num_blocks; ++k)
        plan.u_bk[RestorationPlan::idx2(t, k, plan.num_blocks)] =
            t > 0 ? plan.bk(t - 1, k) : 0;
    for (int l = 0; l < plan.num_lines; ++l)
        plan.u_line[RestorationPlan::idx2(t, l, plan.num_lines)] =
            t > 0 ? plan.line(t - 1, l) : 0;
    for (int b = 0; b < plan.num_buses; ++b)
        plan.u_nlb[RestorationPlan::idx2(t, b, plan.num_buses)] =
            t > 0 ? plan.nlb(t - 1, b) : 0;

    plan.u_tg[static_cast<std::size_t>(t)] = sc.tg_available(t) ? 1 : 0;

    auto energize_block = [&](int k) {
        plan.u_bk[RestorationPlan::idx2(t, k, plan.num_blocks)] = 1;
        for (int li : m.blocks.lines_of_block[static_cast<std::size_t>(k)])
            plan.u_line[RestorationPlan::idx2(t, li, plan.num_lines)] = 1;
    };

    if (t == 0) {
        for (int k : m.sources.bess_blocks) energize_block(k);
    }
    if (plan.u_tg[static_cast<std::size_t>(t)] && m.sources.tg_block >= 0 &&
        m.sources.tg_block != sc.damaged_block)
        energize_block(m.sources.tg_block);

    for (int li : act.close_esw) {
        const auto& l = f.lines[static_cast<std::size_t>(li)];
        if (l.kind != LineKind::Esw) throw std::logic_error("close_esw on a non-ESW line");
        plan.u_line[RestorationPlan::idx2(t, li, plan.num_lines)] = 1;
        int kf = m.blocks.block_of_bus[static_cast<std::size_t>(l.from)];
        int kt = m.blocks.block_of_bus[static_cast<std::size_t>(l.to)];
        bool from_live = t > 0 && plan.bk(t - 1, kf);
        bool to_live = t > 0 && plan.bk(t - 1, kt);
        if (from_live == to_live)
            throw std::logic_error("ESW closure needs exactly one energized side");
        energize_block(from_live ? kt : kf);
    }
    for (int li : act.close_ssw) {
        if (f.lines[static_cast<std::size_t>(li)].kind != LineKind::Ssw)
            throw std::logic_error("close_ssw on a non-SSW line");
        plan.u_line[RestorationPlan::idx2(t, li, plan.num_lines)] = 1;
    }
    for (int b : act.pickup_buses)
        plan.u_nlb[RestorationPlan::idx2(t, b, plan.num_buses)] = 1;
}

std::optional<std::string> fill_step(const SystemModel& m, const ScenarioSpec& sc,
                                     const GridConfig& cfg, RestorationPlan& plan, int t) {
    const auto& f = m.feeder;
    const int nb = plan.num_buses;
    const int ndev = plan.num_devices;
    const int nload = plan.num_loads;
    const bool tg_on = plan.u_tg[static_cast<std::size_t>(t)] != 0;

    // --- load demand with cold-pickup amplification ---
    for (int ld = 0; ld < nload; ++ld) {
        const Load& load = f.loads[static_cast<std::size_t>(ld)];
        int k = m.blocks.block_of_bus[static_cast<std::size_t>(load.bus)];
        int age;
        if (load.critical)
            age = indicator_age(t, [&](int tau) { return plan.bk(tau, k) != 0; });
        else
            age = indicator_age(t, [&](int tau) { return plan.nlb(tau, load.bus) != 0; });
        double mult = age < 0 ? 0.0 : clpu_multiplier(cfg, age);
        double fac = f.profile_factor(load.profile, sc.season, sc.minute_of_day(t));
        for (int n = 0; n < 3; ++n) {
            plan.p_load[RestorationPlan::idx3(t, ld, n, nload)] =
                mult * fac * load.p_peak[static_cast<std::size_t>(n)];
            plan.q_load[RestorationPlan::idx3(t, ld, n, nload)] =
                mult * fac * load.q_peak[static_cast<std::size_t>(n)];
        }
    }

    // --- PV output, gated on block status a configurable number of steps back ---
    for (int d = 0; d < ndev; ++d) {
        const Device& dev = f.devices[static_cast<std::size_t>(d)];
        if (dev.type != DeviceType::Pv) continue;
        int k = m.blocks.block_of_bus[static_cast<std::size_t>(dev.bus)];
        int tau = t - cfg.pv_delay_steps;
        bool gate = tau >= 0 && plan.bk(tau, k);
        double eta = pv_eta(f, dev, sc, t);
        double per_phase = gate ? eta * dev.s_max / 3.0 : 0.0;
        double tanphi = std::tan(std::acos(dev.pf));
        const PhaseSet& ph = f.buses[static_cast<std::size_t>(dev.bus)].phases;
        for (int n = 0; n < 3; ++n) {
            double p = ph.has(n) ? per_phase : 0.0;
            plan.p_dev[RestorationPlan::idx3(t, d, n, ndev)] = p;
            plan.q_dev[RestorationPlan::idx3(t, d, n, ndev)] = p * tanphi;
        }
    }

    // --- island structure over energized blocks and closed switches ---
    std::vector<int> comp(static_cast<std::size_t>(m.blocks.num_blocks));
    std::iota(comp.begin(), comp.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (comp[static_cast<std::size_t>(a)] != a)
            a = comp[static_cast<std::size_t>(a)] = comp[static_cast<std::size_t>(comp[static_cast<std::size_t>(a)])];
        return a;
    };
    auto unite = [&](int a, int b) { comp[static_cast<std::size_t>(find(a))] = find(b); };

    // Sub-island grouping excludes switches that closed this very step when
    // they are synchronization switches: no power crosses them at the
    // closing instant, so each side balances itself.
    std::vector<int> sub = comp;
    std::function<int(int)> sfind = [&](int a) {
        while (sub[static_cast<std::size_t>(a)] != a)
            a = sub[static_cast<std::size_t>(a)] = sub[static_cast<std::size_t>(sub[static_cast<std::size_t>(a)])];
        return a;
    };
    auto sunite = [&](int a, int b) { sub[static_cast<std::size_t>(sfind(a))] = sfind(b); };

    for (const auto& e : m.backbone.edges) {
        if (!plan.line(t, e.line)) continue;
        unite(e.u, e.v);
        bool newly = plan.line(t, e.line) && (t == 0 || !plan.line(t - 1, e.line));
        if (!(e.kind == LineKind::Ssw && newly)) sunite(e.u, e.v);
    }

    // --- per sub-island dispatch: sources share the net demand pro rata ---
    std::vector<double> net_p(static_cast<std::size_t>(m.blocks.num_blocks) * 3, 0.0);
    std::vector<double> net_q(static_cast<std::size_t>(m.blocks.num_blocks) * 3, 0.0);
    auto sub_of_block = [&](int k) { return sfind(k); };

    for (int ld = 0; ld < nload; ++ld) {
        int k = m.blocks.block_of_bus[static_cast<std::size_t>(f.loads[static_cast<std::size_t>(ld)].bus)];
        int g = sub_of_block(k);
        for (int n = 0; n < 3; ++n) {
            net_p[static_cast<std::size_t>(g * 3 + n)] += plan.load_p(t, ld, n);
            net_q[static_cast<std::size_t>(g * 3 + n)] += plan.load_q(t, ld, n);
        }
    }
    for (int d = 0; d < ndev; ++d) {
        if (f.devices[static_cast<std::size_t>(d)].type != DeviceType::Pv) continue;
        int k = m.blocks.block_of_bus[static_cast<std::size_t>(f.devices[static_cast<std::size_t>(d)].bus)];
        int g = sub_of_block(k);
        for (int n = 0; n < 3; ++n) {
            net_p[static_cast<std::size_t>(g * 3 + n)] -= plan.dev_p(t, d, n);
            net_q[static_cast<std::size_t>(g * 3 + n)] -= plan.dev_q(t, d, n);
        }
    }

    struct Src {
        int dev;
        int block;
        double weight;
    };
    std::vector<std::vector<Src>> sub_sources(static_cast<std::size_t>(m.blocks.num_blocks));
    for (std::size_t i = 0; i < m.sources.bess_devices.size(); ++i) {
        int k = m.sources.bess_blocks[i];
        if (!plan.bk(t, k)) continue;
        sub_sources[static_cast<std::size_t>(sub_of_block(k))].push_back(
            {m.sources.bess_devices[i], k, f.devices[static_cast<std::size_t>(m.sources.bess_devices[i])].s_max});
    }
    if (tg_on && m.sources.tg_block >= 0 && plan.bk(t, m.sources.tg_block))
        sub_sources[static_cast<std::size_t>(sub_of_block(m.sources.tg_block))].push_back(
            {m.sources.tg_device, m.sources.tg_block,
             f.devices[static_cast<std::size_t>(m.sources.tg_device)].s_max});

    for (int g = 0; g < m.blocks.num_blocks; ++g) {
        const auto& srcs = sub_sources[static_cast<std::size_t>(g)];
        bool any_demand = false;
        for (int n = 0; n < 3; ++n)
            if (std::abs(net_p[static_cast<std::size_t>(g * 3 + n)]) > 1e-12 ||
                std::abs(net_q[static_cast<std::size_t>(g * 3 + n)]) > 1e-12)
                any_demand = true;
        if (srcs.empty()) {
            if (any_demand) return "demand in a group with no source (block group " + std::to_string(g) + ")";
            continue;
        }
        for (int n = 0; n < 3; ++n) {
            double wsum = 0.0;
            for (const auto& s : srcs)
                if (f.buses[static_cast<std::size_t>(f.devices[static_cast<std::size_t>(s.dev)].bus)].phases.has(n))
                    wsum += s.weight;
            double dp = net_p[static_cast<std::size_t>(g * 3 + n)];
            double dq = net_q[static_cast<std::size_t>(g * 3 + n)];
            if (wsum <= 0.0) {
                if (std::abs(dp) > 1e-12 || std::abs(dq) > 1e-12)
                    return "phase " + std::to_string(n) + " demand with no source carrying it";
                continue;
            }
            for (const auto& s : srcs) {
                if (!f.buses[static_cast<std::size_t>(f.devices[static_cast<std::size_t>(s.dev)].bus)].phases.has(n))
                    continue;
                plan.p_dev[RestorationPlan::idx3(t, s.dev, n, ndev)] = dp * s.weight / wsum;
                plan.q_dev[RestorationPlan::idx3(t, s.dev, n, ndev)] = dq * s.weight / wsum;
            }
        }
    }

    // --- storage state of charge ---
    for (int d = 0; d < ndev; ++d) {
        const Device& dev = f.devices[static_cast<std::size_t>(d)];
        if (dev.type != DeviceType::Bess) {
            plan.soc[RestorationPlan::idx2(t, d, ndev)] = 0.0;
            continue;
        }
        double prev = t > 0 ? plan.soc_at(t - 1, d) : dev.soc_init;
        double psum = 0.0;
        for (int n = 0; n < 3; ++n) psum += plan.dev_p(t, d, n);
        plan.soc[RestorationPlan::idx2(t, d, ndev)] = prev - psum * cfg.dt_hours() / dev.e_nom;
    }

    // --- island frequencies ---
    // Representative source: the grid interface when it is inside, otherwise
    // the storage unit in the lowest-id block. Quasi-steady value is the
    // representative's setpoint minus droop times the island loading
    // fraction. On a step that merges islands, the merged island instead
    // holds the rating-weighted mean of the constituent islands' previous
    // frequencies while the controllers align.
    std::vector<char> merged_now(static_cast<std::size_t>(m.blocks.num_blocks), 0);
    for (const auto& e : m.backbone.edges) {
        if (e.kind != LineKind::Ssw) continue;
        bool newly = plan.line(t, e.line) && (t == 0 || !plan.line(t - 1, e.line));
        if (newly) merged_now[static_cast<std::size_t>(find(e.u))] = 1;
    }

    std::vector<double> island_f(static_cast<std::size_t>(m.blocks.num_blocks), 0.0);
    std::vector<char> island_done(static_cast<std::size_t>(m.blocks.num_blocks), 0);
    for (int k0 = 0; k0 < m.blocks.num_blocks; ++k0) {
        if (!plan.bk(t, k0)) continue;
        int root = find(k0);
        if (island_done[static_cast<std::size_t>(root)]) continue;
        island_done[static_cast<std::size_t>(root)] = 1;

        bool has_tg = tg_on && m.sources.tg_block >= 0 && plan.bk(t, m.sources.tg_block) &&
                      find(m.sources.tg_block) == root;
        if (has_tg) {
            island_f[static_cast<std::size_t>(root)] = 60.0;
            continue;
        }
        // Collect the island's storage sources.
        int rep_dev = -1;
        int rep_block = -1;
        double s_sum = 0.0, load_sum = 0.0;
        for (std::size_t i = 0; i < m.sources.bess_blocks.size(); ++i) {
            int k = m.sources.bess_blocks[i];
            if (!plan.bk(t, k) || find(k) != root) continue;
            if (rep_block < 0 || k < rep_block) {
                rep_block = k;
                rep_dev = m.sources.bess_devices[i];
            }
            s_sum += f.devices[static_cast<std::size_t>(m.sources.bess_devices[i])].s_max;
        }
        if (rep_dev < 0) return "energized island without any grid-forming source";
        for (int d = 0; d < ndev; ++d) {
            const Device& dev = f.devices[static_cast<std::size_t>(d)];
            if (dev.type != DeviceType::Bess) continue;
            if (find(m.blocks.block_of_bus[static_cast<std::size_t>(dev.bus)]) != root) continue;
            for (int n = 0; n < 3; ++n) load_sum += plan.dev_p(t, d, n);
        }
        if (merged_now[static_cast<std::size_t>(root)] && t > 0) {
            // Weighted mean of the previous frequencies of every constituent
            // island (weights: the ratings of their sources).
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < m.sources.bess_blocks.size(); ++i) {
                int k = m.sources.bess_blocks[i];
                if (!plan.bk(t, k) || find(k) != root) continue;
                double s = f.devices[static_cast<std::size_t>(m.sources.bess_devices[i])].s_max;
                num += s * plan.fblk(t - 1, k);
                den += s;
            }
            island_f[static_cast<std::size_t>(root)] = den > 0 ? num / den : 60.0;
        } else {
            const Device& rep = f.devices[static_cast<std::size_t>(rep_dev)];
            double loading = s_sum > 0 ? std::max(0.0, load_sum) / s_sum : 0.0;
            island_f[static_cast<std::size_t>(root)] = rep.f_set - rep.droop * loading;
        }
    }

    for (int k = 0; k < m.blocks.num_blocks; ++k)
        plan.f_block[RestorationPlan::idx2(t, k, plan.num_blocks)] =
            plan.bk(t, k) ? island_f[static_cast<std::size_t>(find(k))] : 0.0;
    // The grid block's representative frequency is pinned by availability.
    if (m.sources.tg_block >= 0)
        plan.f_block[RestorationPlan::idx2(t, m.sources.tg_block, plan.num_blocks)] =
            tg_on ? 60.0 : 0.0;
    for (int b = 0; b < nb; ++b) {
        int k = m.blocks.block_of_bus[static_cast<std::size_t>(b)];
        plan.f_bus[RestorationPlan::idx2(t, b, nb)] = plan.fblk(t, k);
    }

    // --- synchronization indicators, mode, class ---
    SyncMatrix& sm = plan.sync[static_cast<std::size_t>(t)];
    sm = SyncMatrix(plan.n_bs);
    auto active_bs = [&](int bsi) {
        int k = m.bs_blocks[static_cast<std::size_t>(bsi)];
        if (k == m.sources.tg_block) return tg_on && plan.bk(t, k);
        return plan.bk(t, k) != 0;
    };
    for (int i = 0; i < plan.n_bs; ++i)
        for (int j = i + 1; j < plan.n_bs; ++j) {
            if (!active_bs(i) || !active_bs(j)) continue;
            if (find(m.bs_blocks[static_cast<std::size_t>(i)]) ==
                find(m.bs_blocks[static_cast<std::size_t>(j)]))
                sm.set(i, j, 1);
        }
    if (t > 0) {
        const SyncMatrix& prev = plan.sync[static_cast<std::size_t>(t - 1)];
        for (int i = 0; i < plan.n_bs; ++i)
            for (int j = i + 1; j < plan.n_bs; ++j)
                if (prev.at(i, j) && !sm.at(i, j))
                    return "synchronized pair separated; islands may not split";
    }

    std::vector<std::vector<int>> parts;
    {
        std::vector<std::vector<int>> by_root(static_cast<std::size_t>(m.blocks.num_blocks));
        for (int i = 0; i < plan.n_bs; ++i) {
            if (!active_bs(i)) continue;
            int k = m.bs_blocks[static_cast<std::size_t>(i)];
            by_root[static_cast<std::size_t>(find(k))].push_back(k);
        }
        for (auto& g : by_root)
            if (!g.empty()) parts.push_back(g);
    }
    auto mode = m.catalogue.find(parts, tg_on);
    if (!mode) return "island partition not present in the mode catalogue";
    plan.mode_index[static_cast<std::size_t>(t)] = *mode;

    int ssw_closed = 0;
    for (const auto& e : m.backbone.edges)
        if (e.kind == LineKind::Ssw && plan.line(t, e.line)) ++ssw_closed;
    plan.s_count[static_cast<std::size_t>(t)] =
        static_cast<int>(m.sources.bess_blocks.size()) + (tg_on ? 1 : 0) - ssw_closed;
    if (plan.s_count[static_cast<std::size_t>(t)] != static_cast<int>(parts.size()))
        return "island count disagrees with the switching balance";

    // --- flows and voltages over the rooted forest ---
    EnergizedState st;
    st.bus_on.resize(static_cast<std::size_t>(nb));
    st.line_closed.resize(static_cast<std::size_t>(plan.num_lines));
    for (int b = 0; b < nb; ++b)
        st.bus_on[static_cast<std::size_t>(b)] =
            plan.bk(t, m.blocks.block_of_bus[static_cast<std::size_t>(b)]);
    for (int l = 0; l < plan.num_lines; ++l)
        st.line_closed[static_cast<std::size_t>(l)] = plan.line(t, l);

    std::vector<int> roots;
    std::vector<char> root_done(static_cast<std::size_t>(m.blocks.num_blocks), 0);
    if (tg_on && m.sources.tg_block >= 0 && plan.bk(t, m.sources.tg_block)) {
        roots.push_back(f.devices[static_cast<std::size_t>(m.sources.tg_device)].bus);
        root_done[static_cast<std::size_t>(find(m.sources.tg_block))] = 1;
    }
    for (std::size_t i = 0; i < m.sources.bess_blocks.size(); ++i) {
        int k = m.sources.bess_blocks[i];
        if (!plan.bk(t, k)) continue;
        int root = find(k);
        if (root_done[static_cast<std::size_t>(root)]) continue;
        root_done[static_cast<std::size_t>(root)] = 1;
        roots.push_back(f.devices[static_cast<std::size_t>(m.sources.bess_devices[i])].bus);
    }

    Forest forest = build_forest(f, st, roots);
    if (!forest.radial) return "closed lines form a loop";

    std::vector<double> p_inj(static_cast<std::size_t>(nb) * 3, 0.0);
    std::vector<double> q_inj(static_cast<std::size_t>(nb) * 3, 0.0);
    for (int d = 0; d < ndev; ++d) {
        int b = f.devices[static_cast<std::size_t>(d)].bus;
        for (int n = 0; n < 3; ++n) {
            p_inj[static_cast<std::size_t>(b * 3 + n)] += plan.dev_p(t, d, n);
            q_inj[static_cast<std::size_t>(b * 3 + n)] += plan.dev_q(t, d, n);
        }
    }
    for (int ld = 0; ld < nload; ++ld) {
        int b = f.loads[static_cast<std::size_t>(ld)].bus;
        for (int n = 0; n < 3; ++n) {
            p_inj[static_cast<std::size_t>(b * 3 + n)] -= plan.load_p(t, ld, n);
            q_inj[static_cast<std::size_t>(b * 3 + n)] -= plan.load_q(t, ld, n);
        }
    }

    TreeFlow tf = solve_tree_flow(f, st, forest, p_inj, q_inj, 1.0);
    if (!tf.ok) return tf.error;
    for (int l = 0; l < plan.num_lines; ++l)
        for (int n = 0; n < 3; ++n) {
            plan.p_flow[RestorationPlan::idx3(t, l, n, plan.num_lines)] =
                tf.p_flow[static_cast<std::size_t>(l * 3 + n)];
            plan.q_flow[RestorationPlan::idx3(t, l, n, plan.num_lines)] =
                tf.q_flow[static_cast<std::size_t>(l * 3 + n)];
        }
    for (int b = 0; b < nb; ++b)
        for (int n = 0; n < 3; ++n)
            plan.v_sq[RestorationPlan::idx3(t, b, n, nb)] =
                tf.v_sq[static_cast<std::size_t>(b * 3 + n)];
    return std::nullopt;
}

RestorationPlan baseline_plan(const SystemModel& m, const ScenarioSpec& sc, const GridConfig& cfg) {
    RestorationPlan plan = RestorationPlan::sized(m, sc.horizon_steps);
    for (int t = 0; t < plan.T; ++t) {
        apply_actions(m, sc, plan, t, StepActions{});
        if (auto err = fill_step(m, sc, cfg, plan, t))
            throw std::runtime_error("baseline plan failed at step " + std::to_string(t) + ": " + *err);
    }
    return plan;
}

} // namespace ssdmgf
