#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "ssdmgf/plan.hpp"

namespace ssdmgf {

namespace {

struct StepView {
    const SystemModel& m;
    const ScenarioSpec& sc;
    const GridConfig& cfg;
    const RestorationPlan& plan;
    int t;
    RuleSet rules;
    ViolationReport& out;

    bool tg_on() const { return plan.u_tg[static_cast<std::size_t>(t)] != 0; }
    std::uint8_t bk_prev(int k) const { return t > 0 ? plan.bk(t - 1, k) : 0; }
    std::uint8_t line_prev(int l) const { return t > 0 ? plan.line(t - 1, l) : 0; }
    std::uint8_t nlb_prev(int b) const { return t > 0 ? plan.nlb(t - 1, b) : 0; }
    std::uint8_t bus_on(int b) const {
        return plan.bk(t, m.blocks.block_of_bus[static_cast<std::size_t>(b)]);
    }
    std::uint8_t bus_on_prev(int b) const {
        return bk_prev(m.blocks.block_of_bus[static_cast<std::size_t>(b)]);
    }

    void flag(const std::string& constraint, const std::string& entity, double residual = 0.0,
              const std::string& detail = "") {
        out.violations.push_back({constraint, t, entity, residual, detail});
    }
};

// ---- switching and island structure -------------------------------------

void check_switching(StepView& v) {
    const auto& f = v.m.feeder;
    const auto& plan = v.plan;
    const int t = v.t;

    for (int k = 0; k < plan.num_blocks; ++k) {
        if (plan.bk(t, k) < v.bk_prev(k))
            v.flag("eq25a", "block " + std::to_string(k), 0, "energization is irreversible");
        if (k == v.sc.damaged_block && plan.bk(t, k))
            v.flag("rule.damaged", "block " + std::to_string(k), 0, "damaged block energized");
    }
    if (v.m.sources.tg_block >= 0) {
        bool want = v.tg_on() && v.m.sources.tg_block != v.sc.damaged_block;
        if (plan.bk(t, v.m.sources.tg_block) != (want ? 1 : 0))
            v.flag("rule.grid_block", "block " + std::to_string(v.m.sources.tg_block), 0,
                   "grid block status must track grid availability");
    }
    if ((v.sc.tg_available(t) ? 1 : 0) != plan.u_tg[static_cast<std::size_t>(t)])
        v.flag("rule.grid", "u_tg", 0, "grid availability differs from the scenario");

    // Hard-wired lines mirror their block; switches follow their own rules.
    for (int l = 0; l < plan.num_lines; ++l) {
        const Line& ln = f.lines[static_cast<std::size_t>(l)];
        int kf = v.m.blocks.block_of_bus[static_cast<std::size_t>(ln.from)];
        int kt = v.m.blocks.block_of_bus[static_cast<std::size_t>(ln.to)];
        int delta = static_cast<int>(plan.line(t, l)) - static_cast<int>(v.line_prev(l));
        switch (ln.kind) {
        case LineKind::Normal:
            if (plan.line(t, l) != plan.bk(t, kf))
                v.flag("eq25c", ln.id, 0, "in-block line must mirror its block");
            break;
        case LineKind::Esw:
            if (plan.line(t, l) > plan.bk(t, kf) || plan.line(t, l) > plan.bk(t, kt))
                v.flag("eq25d", ln.id, 0, "closed switch inside a de-energized block");
            if (plan.line(t, l) > v.bus_on_prev(ln.from) + v.bus_on_prev(ln.to))
                v.flag("eq26a", ln.id, 0, "closed with both terminals previously dead");
            if (delta > 2 - v.bus_on_prev(ln.from) - v.bus_on_prev(ln.to))
                v.flag("eq26b", ln.id, 0, "closure with both terminals already energized");
            break;
        case LineKind::Ssw:
            if (delta < 0) v.flag("eq27a", ln.id, 0, "synchronization switches never reopen");
            if (2 * plan.line(t, l) > v.bus_on_prev(ln.from) + v.bus_on_prev(ln.to))
                v.flag("eq27b", ln.id, 0, "closed without both terminals energized before");
            if (v.rules == RuleSet::RuleBased && delta > 0 && !v.tg_on())
                v.flag("rule.grid_first", ln.id, 0, "merge before grid recovery");
            break;
        }
    }

    // At most one switch newly feeds a previously de-energized block.
    for (int k = 0; k < plan.num_blocks; ++k) {
        int closures = 0, incident = 0;
        for (const auto& e : v.m.backbone.edges) {
            if (e.kind != LineKind::Esw || (e.u != k && e.v != k)) continue;
            ++incident;
            closures += static_cast<int>(plan.line(t, e.line)) - static_cast<int>(v.line_prev(e.line));
        }
        int cap = (v.bk_prev(k) ? std::max(0, incident - 2) : 0) + 1;
        if (closures > cap)
            v.flag("eq25e", "block " + std::to_string(k), closures - cap,
                   "too many simultaneous switch closures at one block");
    }

    // Counting identity: energized lines = energized buses - islands.
    int sum_l = 0, sum_b = 0, ssw_closed = 0;
    for (int l = 0; l < plan.num_lines; ++l) {
        sum_l += plan.line(t, l);
        if (f.lines[static_cast<std::size_t>(l)].kind == LineKind::Ssw) ssw_closed += plan.line(t, l);
    }
    for (int b = 0; b < plan.num_buses; ++b) sum_b += v.bus_on(b);
    int s_expect = static_cast<int>(v.m.sources.bess_blocks.size()) + (v.tg_on() ? 1 : 0) - ssw_closed;
    if (plan.s_count[static_cast<std::size_t>(t)] != s_expect)
        v.flag("eq28b", "s_t", plan.s_count[static_cast<std::size_t>(t)] - s_expect);
    if (sum_l != sum_b - plan.s_count[static_cast<std::size_t>(t)])
        v.flag("eq28a", "system", sum_l - (sum_b - plan.s_count[static_cast<std::size_t>(t)]),
               "lines vs buses minus islands");

    for (int b = 0; b < plan.num_buses; ++b) {
        int k = v.m.blocks.block_of_bus[static_cast<std::size_t>(b)];
        if (plan.nlb(t, b) > plan.bk(t, k))
            v.flag("eq33c", f.buses[static_cast<std::size_t>(b)].name, 0,
                   "pickup at a de-energized bus");
        if (plan.nlb(t, b) < v.nlb_prev(b))
            v.flag("eq33d", f.buses[static_cast<std::size_t>(b)].name, 0, "pickup is irreversible");
    }
}

// ---- synchronization indicators, mode, class ------------------------------

void check_sync(StepView& v) {
    const auto& plan = v.plan;
    const int t = v.t;
    const auto& cat = v.m.catalogue;
    const SyncMatrix& sm = plan.sync[static_cast<std::size_t>(t)];
    SyncMatrix prev = t > 0 ? plan.sync[static_cast<std::size_t>(t - 1)] : SyncMatrix(plan.n_bs);

    auto rep = check_transition_safety(prev, sm);
    if (!rep.monotone) v.flag("eq22a", "sync", 0, "synchronization indicator fell back");
    if (v.rules != RuleSet::Ndmgf && !rep.safe) {
        for (const auto& tv : rep.violations) {
            v.flag("eq24",
                   "triple (" + std::to_string(v.m.bs_blocks[static_cast<std::size_t>(tv.center)]) + "," +
                       std::to_string(v.m.bs_blocks[static_cast<std::size_t>(tv.left)]) + "," +
                       std::to_string(v.m.bs_blocks[static_cast<std::size_t>(tv.right)]) + ")",
                   tv.lhs, "more than one island merged into the same island");
        }
    }

    int mi = plan.mode_index[static_cast<std::size_t>(t)];
    if (mi < 0 || mi >= static_cast<int>(cat.modes.size())) {
        v.flag("eq20b", "mode", mi, "no mode selected");
        return;
    }
    const Mode& mode = cat.modes[static_cast<std::size_t>(mi)];
    if (mode.tg_present != v.tg_on())
        v.flag("mode.flag", "mode " + std::to_string(mi), 0,
               "selected mode assumes the wrong grid availability");
    if (mode.klass != plan.s_count[static_cast<std::size_t>(t)])
        v.flag("eq20a", "mode " + std::to_string(mi),
               mode.klass - plan.s_count[static_cast<std::size_t>(t)],
               "selected class disagrees with the island count");

    // Pairwise indicators must mirror the selected partition exactly.
    auto part_of = [&](int block) -> int {
        for (std::size_t p = 0; p < mode.parts.size(); ++p)
            for (int kb : mode.parts[p])
                if (kb == block) return static_cast<int>(p);
        return -1;
    };
    for (int i = 0; i < plan.n_bs; ++i) {
        for (int j = i + 1; j < plan.n_bs; ++j) {
            int pi = part_of(v.m.bs_blocks[static_cast<std::size_t>(i)]);
            int pj = part_of(v.m.bs_blocks[static_cast<std::size_t>(j)]);
            std::uint8_t want = (pi >= 0 && pi == pj) ? 1 : 0;
            if (sm.at(i, j) != want)
                v.flag("eq23",
                       "pair (" + std::to_string(v.m.bs_blocks[static_cast<std::size_t>(i)]) + "," +
                           std::to_string(v.m.bs_blocks[static_cast<std::size_t>(j)]) + ")",
                       sm.at(i, j) - want, "indicator disagrees with the selected mode");
        }
    }
}

// ---- frequency ------------------------------------------------------------

void check_frequency(StepView& v) {
    const auto& f = v.m.feeder;
    const auto& plan = v.plan;
    const int t = v.t;
    const double tol = v.cfg.lin_tol;
    const double eps = v.cfg.epsilon_sync;

    // Grid block representative frequency is pinned by availability.
    if (v.m.sources.tg_block >= 0) {
        double want = v.tg_on() ? 60.0 : 0.0;
        double got = plan.fblk(t, v.m.sources.tg_block);
        if (std::abs(got - want) > tol)
            v.flag("eq13", "grid block", got - want);
    }

    // Island structure for the quasi-steady law.
    std::vector<int> comp(static_cast<std::size_t>(v.m.blocks.num_blocks));
    std::iota(comp.begin(), comp.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (comp[static_cast<std::size_t>(a)] != a)
            a = comp[static_cast<std::size_t>(a)] = comp[static_cast<std::size_t>(comp[static_cast<std::size_t>(a)])];
        return a;
    };
    for (const auto& e : v.m.backbone.edges)
        if (plan.line(t, e.line)) comp[static_cast<std::size_t>(find(e.u))] = find(e.v);

    int ssw_delta_total = 0;
    for (const auto& e : v.m.backbone.edges)
        if (e.kind == LineKind::Ssw)
            ssw_delta_total += static_cast<int>(plan.line(t, e.line)) - static_cast<int>(v.line_prev(e.line));

    // Per-island quasi-steady frequency and loading step, keyed by root block.
    std::vector<double> island_qss(static_cast<std::size_t>(v.m.blocks.num_blocks), -1.0);
    std::vector<double> island_dload(static_cast<std::size_t>(v.m.blocks.num_blocks), 0.0);
    std::vector<char> done(static_cast<std::size_t>(v.m.blocks.num_blocks), 0);
    for (int k0 = 0; k0 < v.m.blocks.num_blocks; ++k0) {
        if (!plan.bk(t, k0)) continue;
        int root = find(k0);
        if (done[static_cast<std::size_t>(root)]) continue;
        done[static_cast<std::size_t>(root)] = 1;

        bool has_tg = v.tg_on() && v.m.sources.tg_block >= 0 &&
                      plan.bk(t, v.m.sources.tg_block) && find(v.m.sources.tg_block) == root;
        int rep_dev = -1, rep_block = -1;
        double s_sum = 0.0, out_sum = 0.0;
        for (std::size_t i = 0; i < v.m.sources.bess_blocks.size(); ++i) {
            int k = v.m.sources.bess_blocks[i];
            if (!plan.bk(t, k) || find(k) != root) continue;
            if (rep_block < 0 || k < rep_block) {
                rep_block = k;
                rep_dev = v.m.sources.bess_devices[i];
            }
            s_sum += f.devices[static_cast<std::size_t>(v.m.sources.bess_devices[i])].s_max;
            for (int n = 0; n < 3; ++n)
                out_sum += plan.dev_p(t, v.m.sources.bess_devices[i], n);
        }
        if (has_tg) {
            island_qss[static_cast<std::size_t>(root)] = 60.0;
        } else if (rep_dev >= 0) {
            const Device& rep = f.devices[static_cast<std::size_t>(rep_dev)];
            double loading = s_sum > 0 ? std::max(0.0, out_sum) / s_sum : 0.0;
            island_qss[static_cast<std::size_t>(root)] = rep.f_set - rep.droop * loading;
        } else {
            v.flag("island.unsourced", "block " + std::to_string(k0), 0,
                   "energized island without a grid-forming source");
            continue;
        }

        // Served-load step within the island's current footprint, for the
        // rate-of-change and nadir proxies.
        double tg_s = has_tg ? f.devices[static_cast<std::size_t>(v.m.sources.tg_device)].s_max : 0.0;
        double load_now = 0.0, load_prev = 0.0;
        for (int ld = 0; ld < plan.num_loads; ++ld) {
            int k = v.m.blocks.block_of_bus[static_cast<std::size_t>(f.loads[static_cast<std::size_t>(ld)].bus)];
            if (!plan.bk(t, k) || find(k) != root) continue;
            for (int n = 0; n < 3; ++n) {
                load_now += plan.load_p(t, ld, n);
                if (t > 0) load_prev += plan.load_p(t - 1, ld, n);
            }
        }
        double denom = s_sum + tg_s;
        island_dload[static_cast<std::size_t>(root)] =
            denom > 0 ? std::max(0.0, load_now - load_prev) / denom : 0.0;
    }

    // Per black-start source: band, quasi-steady pinning, proxies.
    for (int i = 0; i < plan.n_bs; ++i) {
        int k = v.m.bs_blocks[static_cast<std::size_t>(i)];
        bool is_tg = k == v.m.sources.tg_block;
        if (is_tg && !v.tg_on()) continue; // pinned to 0 by eq13 while away
        if (!plan.bk(t, k)) continue;
        double fk = plan.fblk(t, k);
        if (fk < v.cfg.f_floor - tol || fk > v.cfg.f_ceil + tol)
            v.flag("eq15", "block " + std::to_string(k), fk, "frequency outside the band");

        int root = find(k);
        double qss = island_qss[static_cast<std::size_t>(root)];
        if (qss >= 0 && (qss < v.cfg.f_floor - tol || qss > v.cfg.f_ceil + tol))
            v.flag("eq15.qss", "block " + std::to_string(k), qss);

        double dl = island_dload[static_cast<std::size_t>(root)];
        if (v.cfg.rocof_gain * dl > v.cfg.rocof_max + tol)
            v.flag("eq15.rocof", "block " + std::to_string(k), v.cfg.rocof_gain * dl,
                   "pickup step too large for the island");
        if (fk - v.cfg.nadir_gain * dl < v.cfg.nadir_floor - tol)
            v.flag("eq15.nadir", "block " + std::to_string(k), fk - v.cfg.nadir_gain * dl);

        if (!is_tg) {
            int partners = 0;
            for (int j = 0; j < plan.n_bs; ++j)
                if (j != i) partners += plan.sync[static_cast<std::size_t>(t)].at(i, j);
            int delta_sync = ssw_delta_total * partners;
            if (delta_sync == 0 && qss >= 0 && std::abs(fk - qss) > 1e-7)
                v.flag("eq14", "block " + std::to_string(k), fk - qss,
                       "frequency departs from the quasi-steady value without a merge event");
        }
    }

    // Switch-terminal buses follow their block; closed switches tie their
    // terminals together (with the synchronization tolerance on merges).
    for (const auto& e : v.m.backbone.edges) {
        const Line& ln = f.lines[static_cast<std::size_t>(e.line)];
        for (int b : {ln.from, ln.to}) {
            int k = v.m.blocks.block_of_bus[static_cast<std::size_t>(b)];
            if (std::abs(plan.fbus(t, b) - plan.fblk(t, k)) > tol)
                v.flag("eq16", f.buses[static_cast<std::size_t>(b)].name,
                       plan.fbus(t, b) - plan.fblk(t, k));
        }
        double diff = plan.fbus(t, ln.from) - plan.fbus(t, ln.to);
        double slack = (1 - plan.line(t, e.line)) * v.cfg.f_ceil;
        if (ln.kind == LineKind::Esw) {
            if (std::abs(diff) > slack + tol)
                v.flag("eq17", ln.id, std::abs(diff) - slack);
        } else {
            if (std::abs(diff) > slack + eps + tol)
                v.flag("eq18", ln.id, std::abs(diff) - slack - eps);
        }
    }

    // Pairwise windows: synchronized pairs agree within eps, distinct pairs
    // keep a 2*eps guard band (and stay within the ceiling gap).
    for (int i = 0; i < plan.n_bs; ++i) {
        for (int j = i + 1; j < plan.n_bs; ++j) {
            double fi = plan.fblk(t, v.m.bs_blocks[static_cast<std::size_t>(i)]);
            double fj = plan.fblk(t, v.m.bs_blocks[static_cast<std::size_t>(j)]);
            double ad = std::abs(fj - fi);
            std::string ent = "pair (" + std::to_string(v.m.bs_blocks[static_cast<std::size_t>(i)]) +
                              "," + std::to_string(v.m.bs_blocks[static_cast<std::size_t>(j)]) + ")";
            if (plan.sync[static_cast<std::size_t>(t)].at(i, j)) {
                if (ad > eps + tol) v.flag("eq22", ent, ad - eps, "synchronized pair drifted apart");
            } else {
                if (ad < 2 * eps - tol)
                    v.flag("eq22", ent, 2 * eps - ad, "distinct islands too close in frequency");
                if (ad > v.cfg.f_ceil + tol)
                    v.flag("eq22", ent, ad - v.cfg.f_ceil, "frequency gap exceeds the ceiling");
            }
        }
    }
}

// ---- devices and loads ------------------------------------------------------

void check_devices(StepView& v) {
    const auto& f = v.m.feeder;
    const auto& plan = v.plan;
    const int t = v.t;
    const double tol = v.cfg.lin_tol;

    for (int d = 0; d < plan.num_devices; ++d) {
        const Device& dev = f.devices[static_cast<std::size_t>(d)];
        const PhaseSet& ph = f.buses[static_cast<std::size_t>(dev.bus)].phases;
        if (dev.type == DeviceType::Tg) {
            double cap = (v.tg_on() ? dev.s_max / 3.0 : 0.0);
            for (int n = 0; n < 3; ++n) {
                double p = plan.dev_p(t, d, n), q = plan.dev_q(t, d, n);
                if (p * p + q * q > cap * cap + v.cfg.quad_tol)
                    v.flag("eq29", dev.id + " phase " + std::to_string(n),
                           p * p + q * q - cap * cap);
            }
        } else if (dev.type == DeviceType::Bess) {
            double cap = dev.s_max / 3.0;
            double psum = 0.0;
            for (int n = 0; n < 3; ++n) {
                double p = plan.dev_p(t, d, n), q = plan.dev_q(t, d, n);
                psum += p;
                if (p * p + q * q > cap * cap + v.cfg.quad_tol)
                    v.flag("eq30a", dev.id + " phase " + std::to_string(n),
                           p * p + q * q - cap * cap);
            }
            double prev = t > 0 ? plan.soc_at(t - 1, d) : dev.soc_init;
            double want = prev - psum * v.cfg.dt_hours() / dev.e_nom;
            if (std::abs(plan.soc_at(t, d) - want) > tol)
                v.flag("eq30b", dev.id, plan.soc_at(t, d) - want, "state-of-charge bookkeeping");
            if (plan.soc_at(t, d) < dev.soc_min - tol || plan.soc_at(t, d) > dev.soc_max + tol)
                v.flag("eq30c", dev.id, plan.soc_at(t, d), "state of charge outside bounds");
        } else {
            int k = v.m.blocks.block_of_bus[static_cast<std::size_t>(dev.bus)];
            int tau = t - v.cfg.pv_delay_steps;
            bool gate = tau >= 0 && plan.bk(tau, k);
            double eta = pv_eta(f, dev, v.sc, t);
            double want_p = gate ? eta * dev.s_max / 3.0 : 0.0;
            double tanphi = std::tan(std::acos(dev.pf));
            for (int n = 0; n < 3; ++n) {
                double wp = ph.has(n) ? want_p : 0.0;
                if (std::abs(plan.dev_p(t, d, n) - wp) > tol)
                    v.flag("eq31a", dev.id + " phase " + std::to_string(n),
                           plan.dev_p(t, d, n) - wp);
                if (std::abs(plan.dev_q(t, d, n) - wp * tanphi) > tol)
                    v.flag("eq31b", dev.id + " phase " + std::to_string(n),
                           plan.dev_q(t, d, n) - wp * tanphi);
            }
        }
    }

    // Demand equalities with the pickup staircase exactly as modeled:
    // multiplier = u_t + sum_o beta_o * (u_{t-o+1} - u_{t-o}).
    for (int ld = 0; ld < plan.num_loads; ++ld) {
        const Load& load = f.loads[static_cast<std::size_t>(ld)];
        int k = v.m.blocks.block_of_bus[static_cast<std::size_t>(load.bus)];
        auto ind = [&](int tau) -> int {
            if (tau < 0) return 0;
            return load.critical ? plan.bk(tau, k) : plan.nlb(tau, load.bus);
        };
        double mult = ind(t);
        for (int o = 1; o <= 3; ++o)
            mult += v.cfg.beta[static_cast<std::size_t>(o - 1)] *
                    (ind(t - (o - 1)) - ind(t - (o - 1) - 1));
        double fac = f.profile_factor(load.profile, v.sc.season, v.sc.minute_of_day(t));
        const char* idp = load.critical ? "eq32a" : "eq33a";
        const char* idq = load.critical ? "eq32b" : "eq33b";
        for (int n = 0; n < 3; ++n) {
            double wp = mult * fac * load.p_peak[static_cast<std::size_t>(n)];
            double wq = mult * fac * load.q_peak[static_cast<std::size_t>(n)];
            if (std::abs(plan.load_p(t, ld, n) - wp) > tol)
                v.flag(idp, load.id + " phase " + std::to_string(n), plan.load_p(t, ld, n) - wp);
            if (std::abs(plan.load_q(t, ld, n) - wq) > tol)
                v.flag(idq, load.id + " phase " + std::to_string(n), plan.load_q(t, ld, n) - wq);
        }
    }
}

// ---- power flow ---------------------------------------------------------

void check_flow(StepView& v) {
    const auto& f = v.m.feeder;
    const auto& plan = v.plan;
    const int t = v.t;
    const double tol = v.cfg.lin_tol;

    // Nodal balance: stored flows plus net injection cancel at every bus.
    std::vector<double> bal_p(static_cast<std::size_t>(plan.num_buses) * 3, 0.0);
    std::vector<double> bal_q(static_cast<std::size_t>(plan.num_buses) * 3, 0.0);
    for (int d = 0; d < plan.num_devices; ++d) {
        int b = f.devices[static_cast<std::size_t>(d)].bus;
        for (int n = 0; n < 3; ++n) {
            bal_p[static_cast<std::size_t>(b * 3 + n)] += plan.dev_p(t, d, n);
            bal_q[static_cast<std::size_t>(b * 3 + n)] += plan.dev_q(t, d, n);
        }
    }
    for (int ld = 0; ld < plan.num_loads; ++ld) {
        int b = f.loads[static_cast<std::size_t>(ld)].bus;
        for (int n = 0; n < 3; ++n) {
            bal_p[static_cast<std::size_t>(b * 3 + n)] -= plan.load_p(t, ld, n);
            bal_q[static_cast<std::size_t>(b * 3 + n)] -= plan.load_q(t, ld, n);
        }
    }
    for (int l = 0; l < plan.num_lines; ++l) {
        const Line& ln = f.lines[static_cast<std::size_t>(l)];
        for (int n = 0; n < 3; ++n) {
            bal_p[static_cast<std::size_t>(ln.from * 3 + n)] -= plan.flow_p(t, l, n);
            bal_q[static_cast<std::size_t>(ln.from * 3 + n)] -= plan.flow_q(t, l, n);
            bal_p[static_cast<std::size_t>(ln.to * 3 + n)] += plan.flow_p(t, l, n);
            bal_q[static_cast<std::size_t>(ln.to * 3 + n)] += plan.flow_q(t, l, n);
        }
    }
    for (int b = 0; b < plan.num_buses; ++b)
        for (int n = 0; n < 3; ++n) {
            double rp = bal_p[static_cast<std::size_t>(b * 3 + n)];
            double rq = bal_q[static_cast<std::size_t>(b * 3 + n)];
            if (std::abs(rp) > tol || std::abs(rq) > tol)
                v.flag("eq34", f.buses[static_cast<std::size_t>(b)].name + " phase " + std::to_string(n),
                       std::max(std::abs(rp), std::abs(rq)), "nodal balance");
        }

    // Voltage drop along closed lines; open lines only keep the relaxation.
    for (int l = 0; l < plan.num_lines; ++l) {
        const Line& ln = f.lines[static_cast<std::size_t>(l)];
        double slack = plan.line(t, l) ? 0.0 : v.cfg.v_ceil_sq();
        for (int n = 0; n < 3; ++n) {
            if (!ln.phases.has(n)) continue;
            double drop = 0.0;
            for (int mph = 0; mph < 3; ++mph) {
                if (!ln.phases.has(mph)) continue;
                drop += ln.r[static_cast<std::size_t>(n * 3 + mph)] * plan.flow_p(t, l, mph) +
                        ln.x[static_cast<std::size_t>(n * 3 + mph)] * plan.flow_q(t, l, mph);
            }
            double resid = plan.vsq(t, ln.to, n) - (plan.vsq(t, ln.from, n) - 2.0 * drop);
            if (std::abs(resid) > slack + tol)
                v.flag("eq35", ln.id + " phase " + std::to_string(n), resid);
        }
    }

    // Flow limits: plain lines and extension switches are gated by their
    // status; synchronization switches instead enforce zero transfer on the
    // closing step and their rating otherwise.
    for (int l = 0; l < plan.num_lines; ++l) {
        const Line& ln = f.lines[static_cast<std::size_t>(l)];
        int delta = static_cast<int>(plan.line(t, l)) - static_cast<int>(v.line_prev(l));
        for (int n = 0; n < 3; ++n) {
            double fp = std::abs(plan.flow_p(t, l, n));
            double fq = std::abs(plan.flow_q(t, l, n));
            if (ln.kind == LineKind::Ssw) {
                double capp = (delta == 1 ? 0.0 : ln.p_max[static_cast<std::size_t>(n)]);
                double capq = (delta == 1 ? 0.0 : ln.q_max[static_cast<std::size_t>(n)]);
                if (fp > capp + tol || fq > capq + tol)
                    v.flag("eq19", ln.id + " phase " + std::to_string(n), std::max(fp - capp, fq - capq),
                           delta == 1 ? "power across a switch at its closing instant" : "rating");
            } else {
                double capp = plan.line(t, l) * ln.p_max[static_cast<std::size_t>(n)];
                double capq = plan.line(t, l) * ln.q_max[static_cast<std::size_t>(n)];
                if (fp > capp + tol || fq > capq + tol)
                    v.flag("eq36a", ln.id + " phase " + std::to_string(n),
                           std::max(fp - capp, fq - capq));
            }
        }
    }

    // Voltage band, squared, gated by bus status; grid bus pinned at 1.
    for (int b = 0; b < plan.num_buses; ++b) {
        const Bus& bus = f.buses[static_cast<std::size_t>(b)];
        double lo = v.bus_on(b) * v.cfg.v_floor_sq();
        double hi = v.bus_on(b) * v.cfg.v_ceil_sq();
        for (int n = 0; n < 3; ++n) {
            if (!bus.phases.has(n)) continue;
            double val = plan.vsq(t, b, n);
            if (val < lo - tol || val > hi + tol)
                v.flag("eq36b", bus.name + " phase " + std::to_string(n), val);
        }
    }
    if (v.tg_on() && v.m.sources.tg_block >= 0 && plan.bk(t, v.m.sources.tg_block)) {
        int b = f.devices[static_cast<std::size_t>(v.m.sources.tg_device)].bus;
        for (int n = 0; n < 3; ++n) {
            if (!f.buses[static_cast<std::size_t>(b)].phases.has(n)) continue;
            if (std::abs(plan.vsq(t, b, n) - 1.0) > tol)
                v.flag("rule.grid_voltage", f.buses[static_cast<std::size_t>(b)].name,
                       plan.vsq(t, b, n) - 1.0, "grid bus voltage not held at 1.0");
        }
    }

    // Radiality of the energized subgraph (the counting identity alone cannot
    // distinguish a loop plus a split from a forest).
    EnergizedState st;
    st.bus_on.resize(static_cast<std::size_t>(plan.num_buses));
    st.line_closed.resize(static_cast<std::size_t>(plan.num_lines));
    for (int b = 0; b < plan.num_buses; ++b) st.bus_on[static_cast<std::size_t>(b)] = v.bus_on(b);
    for (int l = 0; l < plan.num_lines; ++l) st.line_closed[static_cast<std::size_t>(l)] = plan.line(t, l);
    Forest forest = build_forest(f, st, {});
    if (!forest.radial)
        v.flag("island.radial", "system", 0, "closed lines form a loop or feed a dead bus");
}

} // namespace

void validate_step(const SystemModel& m, const ScenarioSpec& sc, const GridConfig& cfg,
                   const RestorationPlan& plan, int t, RuleSet rules, ViolationReport& out) {
    StepView v{m, sc, cfg, plan, t, rules, out};
    check_switching(v);
    check_sync(v);
    check_frequency(v);
    check_devices(v);
    check_flow(v);
}

ViolationReport validate_plan(const SystemModel& m, const ScenarioSpec& sc,
                              const GridConfig& cfg, const RestorationPlan& plan,
                              RuleSet rules) {
    if (plan.num_blocks != m.blocks.num_blocks ||
        plan.num_buses != static_cast<int>(m.feeder.buses.size()) ||
        plan.num_lines != static_cast<int>(m.feeder.lines.size()) ||
        plan.num_devices != static_cast<int>(m.feeder.devices.size()) ||
        plan.num_loads != static_cast<int>(m.feeder.loads.size()) ||
        plan.n_bs != static_cast<int>(m.bs_blocks.size()))
        throw std::invalid_argument("plan dimensions do not match the feeder model");
    if (plan.T <= 0 || static_cast<int>(plan.u_tg.size()) != plan.T)
        throw std::invalid_argument("plan horizon is empty or inconsistent");

    ViolationReport rep;
    for (int t = 0; t < plan.T; ++t) validate_step(m, sc, cfg, plan, t, rules, rep);
    return rep;
}

} // namespace ssdmgf
