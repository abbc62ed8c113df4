#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ssdmgf/optimizer.hpp"

namespace ssdmgf {

namespace {

std::string num(double v) {
    if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Accumulates one LP file. Rows are written one per line in the strict shape
///   name: s c v s c v ... OP rhs
/// with every sign and coefficient spelled out, so downstream parsers can
/// stay dumb.
struct LpFile {
    std::ostringstream objective;
    std::ostringstream rows;
    std::ostringstream bounds;
    std::vector<std::string> binaries;
    std::vector<std::string> generals;
    int n_rows = 0;

    void obj_term(double coef, const std::string& var) {
        if (coef == 0.0) return;
        objective << (coef < 0 ? " - " : " + ") << num(std::abs(coef)) << ' ' << var;
    }
    void bound(const std::string& var, double lo, double hi) {
        bounds << ' ' << num(lo) << " <= " << var << " <= " << num(hi) << '\n';
    }
    void fix(const std::string& var, double v) { bound(var, v, v); }
};

struct Row {
    LpFile& f;
    std::string text;
    int terms = 0;

    Row(LpFile& file, const std::string& name) : f(file) { text = ' ' + name + ':'; }
    Row& add(double coef, const std::string& var) {
        if (coef == 0.0) return *this;
        text += coef < 0 ? " - " : " + ";
        text += num(std::abs(coef));
        text += ' ';
        text += var;
        ++terms;
        return *this;
    }
    void close(const char* op, double rhs) {
        if (terms == 0) return; // a fully constant row carries no information
        f.rows << text << ' ' << op << ' ' << num(rhs) << '\n';
        ++f.n_rows;
    }
    void le(double rhs) { close("<=", rhs); }
    void ge(double rhs) { close(">=", rhs); }
    void eq(double rhs) { close("=", rhs); }
};

std::string name1(const char* stem, int t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%d", stem, t);
    return buf;
}
std::string name2(const char* stem, int t, int a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%d_%d", stem, t, a);
    return buf;
}
std::string name3(const char* stem, int t, int a, int b) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%d_%d_%d", stem, t, a, b);
    return buf;
}

} // namespace

void export_model(const SystemModel& m, const ScenarioSpec& sc, const GridConfig& cfg,
                  RuleSet rules, const std::string& path) {
    const Feeder& f = m.feeder;
    const int T = sc.horizon_steps;
    const int K = m.blocks.num_blocks;
    const int L = static_cast<int>(f.lines.size());
    const int B = static_cast<int>(f.buses.size());
    const int D = static_cast<int>(f.devices.size());
    const int LD = static_cast<int>(f.loads.size());
    const int nbs = static_cast<int>(m.bs_blocks.size());
    const int n_bess = static_cast<int>(m.sources.bess_blocks.size());
    const double eps = cfg.epsilon_sync;
    const double fce = cfg.f_ceil;
    const double big_f = fce + 2.0 * eps; // releases a frequency window entirely
    const double vce = cfg.v_ceil_sq();

    LpFile lp;

    // Variable name shorthands.
    auto uBK = [](int t, int k) { return name2("uBK", t, k); };
    auto uL = [](int t, int l) { return name2("uL", t, l); };
    auto uNLB = [](int t, int b) { return name2("uNLB", t, b); };
    auto uTG = [](int t) { return name1("uTG", t); };
    auto uSY = [](int t, int i, int j) { return name3("uSY", t, i, j); };
    auto uMU = [](int t, int i, int j) { return name3("uMU", t, i, j); };
    auto uMD = [](int t, int mo) { return name2("uMD", t, mo); };
    auto uCL = [](int t, int c) { return name2("uCL", t, c); };
    auto sT = [](int t) { return name1("sT", t); };
    auto fK = [](int t, int k) { return name2("fK", t, k); };
    auto fB = [](int t, int b) { return name2("fB", t, b); };
    auto pD = [](int t, int d, int n) { return name3("pD", t, d, n); };
    auto qD = [](int t, int d, int n) { return name3("qD", t, d, n); };
    auto pLD = [](int t, int ld, int n) { return name3("pLD", t, ld, n); };
    auto qLD = [](int t, int ld, int n) { return name3("qLD", t, ld, n); };
    auto pF = [](int t, int l, int n) { return name3("pF", t, l, n); };
    auto qF = [](int t, int l, int n) { return name3("qF", t, l, n); };
    auto vSQ = [](int t, int b, int n) { return name3("v", t, b, n); };
    auto soc = [](int t, int d) { return name2("soc", t, d); };

    // Buses that terminate a switchable line (these carry fB variables) and
    // buses hosting at least one deferrable load (these carry uNLB variables).
    std::set<int> term_buses;
    for (const auto& e : m.backbone.edges) {
        term_buses.insert(f.lines[static_cast<std::size_t>(e.line)].from);
        term_buses.insert(f.lines[static_cast<std::size_t>(e.line)].to);
    }
    std::set<int> nl_buses;
    for (const auto& load : f.loads)
        if (!load.critical) nl_buses.insert(load.bus);

    auto tg_on = [&](int t) { return sc.tg_available(t) ? 1.0 : 0.0; };
    auto block_of = [&](int b) { return m.blocks.block_of_bus[static_cast<std::size_t>(b)]; };

    // ---- objective: value-weighted restored demand over the horizon --------
    lp.objective << " obj:";
    for (int t = 0; t < T; ++t)
        for (int ld = 0; ld < LD; ++ld) {
            double w = cfg.dt_minutes *
                       (f.loads[static_cast<std::size_t>(ld)].critical ? cfg.alpha_cl : cfg.alpha_nl);
            for (int n = 0; n < 3; ++n) lp.obj_term(w, pLD(t, ld, n));
        }

    // ---- frequency: pinning, bands, switch ties, pair windows --------------
    for (int t = 0; t < T; ++t) {
        if (m.sources.tg_block >= 0)
            Row(lp, name1("eq13", t)).add(1, fK(t, m.sources.tg_block)).add(-60.0, uTG(t)).eq(0);
        for (int k = 0; k < K; ++k) {
            Row(lp, name2("eq15lo", t, k)).add(1, fK(t, k)).add(-cfg.f_floor, uBK(t, k)).ge(0);
            Row(lp, name2("eq15hi", t, k)).add(1, fK(t, k)).add(-fce, uBK(t, k)).le(0);
        }
        for (int b : term_buses)
            Row(lp, name2("eq16", t, b)).add(1, fB(t, b)).add(-1, fK(t, block_of(b))).eq(0);
        for (const auto& e : m.backbone.edges) {
            const Line& ln = f.lines[static_cast<std::size_t>(e.line)];
            double gap = e.kind == LineKind::Ssw ? eps : 0.0;
            const char* tag = e.kind == LineKind::Ssw ? "eq18" : "eq17";
            Row(lp, name2(tag, t, e.line) + "a")
                .add(1, fB(t, ln.from)).add(-1, fB(t, ln.to)).add(fce, uL(t, e.line))
                .le(fce + gap);
            Row(lp, name2(tag, t, e.line) + "b")
                .add(1, fB(t, ln.to)).add(-1, fB(t, ln.from)).add(fce, uL(t, e.line))
                .le(fce + gap);
        }
        for (int i = 0; i < nbs; ++i)
            for (int j = i + 1; j < nbs; ++j) {
                std::string fi = fK(t, m.bs_blocks[static_cast<std::size_t>(i)]);
                std::string fj = fK(t, m.bs_blocks[static_cast<std::size_t>(j)]);
                // synchronized pairs agree within eps
                Row(lp, name3("eq22sa", t, i, j))
                    .add(1, fi).add(-1, fj).add(big_f, uSY(t, i, j)).le(eps + big_f);
                Row(lp, name3("eq22sb", t, i, j))
                    .add(1, fj).add(-1, fi).add(big_f, uSY(t, i, j)).le(eps + big_f);
                // distinct islands keep a 2*eps guard band, side picked by uMU
                Row(lp, name3("eq22ga", t, i, j))
                    .add(1, fi).add(-1, fj).add(-big_f, uMU(t, i, j)).add(big_f, uSY(t, i, j))
                    .ge(2 * eps - big_f);
                Row(lp, name3("eq22gb", t, i, j))
                    .add(1, fj).add(-1, fi).add(big_f, uMU(t, i, j)).add(big_f, uSY(t, i, j))
                    .ge(2 * eps);
                // and never drift further apart than the ceiling
                Row(lp, name3("eq22ca", t, i, j)).add(1, fi).add(-1, fj).le(fce);
                Row(lp, name3("eq22cb", t, i, j)).add(1, fj).add(-1, fi).le(fce);
            }
    }

    // ---- synchronization indicators, modes, classes -------------------------
    const auto& modes = m.catalogue.modes;
    const int M = static_cast<int>(modes.size());
    auto same_part = [&](const Mode& mo, int bi, int bj) {
        for (const auto& part : mo.parts) {
            bool a = false, b = false;
            for (int kb : part) {
                a = a || kb == bi;
                b = b || kb == bj;
            }
            if (a && b) return true;
            if (a || b) return false;
        }
        return false;
    };
    for (int t = 0; t < T; ++t) {
        Row pick(lp, name1("eq20b", t));
        for (int mo = 0; mo < M; ++mo) pick.add(1, uMD(t, mo));
        pick.eq(1);

        Row cls_pick(lp, name1("eq20c", t));
        Row cls_count(lp, name1("eq20a", t));
        for (int c = 1; c <= nbs; ++c) {
            cls_pick.add(1, uCL(t, c));
            cls_count.add(c, uCL(t, c));
            Row link(lp, name2("eq21", t, c));
            for (int mo = 0; mo < M; ++mo)
                if (modes[static_cast<std::size_t>(mo)].klass == c) link.add(1, uMD(t, mo));
            link.add(-1, uCL(t, c)).eq(0);
        }
        cls_pick.eq(1);
        cls_count.add(-1, sT(t)).eq(0);

        Row flag(lp, name1("modeflag", t));
        for (int mo = 0; mo < M; ++mo)
            if (modes[static_cast<std::size_t>(mo)].tg_present) flag.add(1, uMD(t, mo));
        flag.add(-1, uTG(t)).eq(0);

        for (int i = 0; i < nbs; ++i)
            for (int j = i + 1; j < nbs; ++j) {
                int bi = m.bs_blocks[static_cast<std::size_t>(i)];
                int bj = m.bs_blocks[static_cast<std::size_t>(j)];
                Row mirror(lp, name3("eq23", t, i, j));
                for (int mo = 0; mo < M; ++mo)
                    if (same_part(modes[static_cast<std::size_t>(mo)], bi, bj))
                        mirror.add(1, uMD(t, mo));
                mirror.add(-1, uSY(t, i, j)).eq(0);
                if (t > 0)
                    Row(lp, name3("eq22m", t, i, j))
                        .add(1, uSY(t, i, j)).add(-1, uSY(t - 1, i, j)).ge(0);
            }

        // one merge event per island per step
        if (rules != RuleSet::Ndmgf && t > 0) {
            auto sy = [&](int tt, int a, int b) {
                return a < b ? uSY(tt, a, b) : uSY(tt, b, a);
            };
            for (int c = 0; c < nbs; ++c)
                for (int i = 0; i < nbs; ++i)
                    for (int j = i + 1; j < nbs; ++j) {
                        if (i == c || j == c) continue;
                        Row(lp, name3(("eq24_" + std::to_string(c)).c_str(), t, i, j))
                            .add(1, sy(t, c, i)).add(-1, sy(t - 1, c, i))
                            .add(1, sy(t, c, j)).add(-1, sy(t - 1, c, j))
                            .add(-1, sy(t - 1, i, j))
                            .le(1);
                    }
        }
    }

    // ---- switching ----------------------------------------------------------
    for (int t = 0; t < T; ++t) {
        for (int k = 0; k < K; ++k)
            if (t > 0)
                Row(lp, name2("eq25a", t, k)).add(1, uBK(t, k)).add(-1, uBK(t - 1, k)).ge(0);
        if (m.sources.tg_block >= 0 && m.sources.tg_block != sc.damaged_block)
            Row(lp, name1("gridblk", t)).add(1, uBK(t, m.sources.tg_block)).add(-1, uTG(t)).eq(0);

        for (const auto& e : m.backbone.edges) {
            const Line& ln = f.lines[static_cast<std::size_t>(e.line)];
            int kf = block_of(ln.from), kt = block_of(ln.to);
            if (e.kind == LineKind::Esw) {
                Row(lp, name2("eq25d", t, e.line) + "a").add(1, uL(t, e.line)).add(-1, uBK(t, kf)).le(0);
                Row(lp, name2("eq25d", t, e.line) + "b").add(1, uL(t, e.line)).add(-1, uBK(t, kt)).le(0);
                Row r26a(lp, name2("eq26a", t, e.line));
                r26a.add(1, uL(t, e.line));
                if (t > 0) r26a.add(-1, uBK(t - 1, kf)).add(-1, uBK(t - 1, kt));
                r26a.le(0);
                Row r26b(lp, name2("eq26b", t, e.line));
                r26b.add(1, uL(t, e.line));
                double rhs = 2;
                if (t > 0) r26b.add(-1, uL(t - 1, e.line)).add(1, uBK(t - 1, kf)).add(1, uBK(t - 1, kt));
                r26b.le(rhs);
            } else {
                if (t > 0)
                    Row(lp, name2("eq27a", t, e.line)).add(1, uL(t, e.line)).add(-1, uL(t - 1, e.line)).ge(0);
                Row r27b(lp, name2("eq27b", t, e.line));
                r27b.add(2, uL(t, e.line));
                if (t > 0) r27b.add(-1, uBK(t - 1, kf)).add(-1, uBK(t - 1, kt));
                r27b.le(0);
                if (rules == RuleSet::RuleBased) {
                    Row lock(lp, name2("rrlock", t, e.line));
                    lock.add(1, uL(t, e.line)).add(-1, uTG(t));
                    if (t > 0) lock.add(-1, uL(t - 1, e.line));
                    lock.le(0);
                }
            }
        }
        for (int l = 0; l < L; ++l) {
            const Line& ln = f.lines[static_cast<std::size_t>(l)];
            if (ln.kind == LineKind::Normal)
                Row(lp, name2("eq25c", t, l)).add(1, uL(t, l)).add(-1, uBK(t, block_of(ln.from))).eq(0);
        }
        for (int k = 0; k < K; ++k) {
            std::vector<int> inc;
            for (const auto& e : m.backbone.edges)
                if (e.kind == LineKind::Esw && (e.u == k || e.v == k)) inc.push_back(e.line);
            if (inc.empty()) continue;
            Row r(lp, name2("eq25e", t, k));
            for (int l : inc) {
                r.add(1, uL(t, l));
                if (t > 0) r.add(-1, uL(t - 1, l));
            }
            double mk = std::max(0, static_cast<int>(inc.size()) - 2);
            if (t > 0 && mk > 0) r.add(-mk, uBK(t - 1, k));
            r.le(1);
        }

        // island counting identities
        Row count(lp, name1("eq28a", t));
        for (int l = 0; l < L; ++l) count.add(1, uL(t, l));
        for (int k = 0; k < K; ++k)
            count.add(-static_cast<double>(m.blocks.buses_of_block[static_cast<std::size_t>(k)].size()),
                      uBK(t, k));
        count.add(1, sT(t)).eq(0);

        Row isl(lp, name1("eq28b", t));
        isl.add(1, sT(t)).add(-1, uTG(t));
        for (int e : m.backbone.ssw_edges())
            isl.add(1, uL(t, m.backbone.edges[static_cast<std::size_t>(e)].line));
        isl.eq(n_bess);

        for (int b : nl_buses) {
            Row(lp, name2("eq33c", t, b)).add(1, uNLB(t, b)).add(-1, uBK(t, block_of(b))).le(0);
            if (t > 0)
                Row(lp, name2("eq33d", t, b)).add(1, uNLB(t, b)).add(-1, uNLB(t - 1, b)).ge(0);
        }
    }

    // ---- devices -------------------------------------------------------------
    const double oct_apothem = std::cos(std::atan(1.0) / 2.0); // cos(pi/8)
    for (int t = 0; t < T; ++t) {
        for (int d = 0; d < D; ++d) {
            const Device& dev = f.devices[static_cast<std::size_t>(d)];
            double cap = dev.s_max / 3.0;
            if (dev.type == DeviceType::Tg) {
                for (int n = 0; n < 3; ++n)
                    for (int i = 0; i < 8; ++i) {
                        double th = std::atan(1.0) / 2.0 + i * std::atan(1.0);
                        Row(lp, name3(("eq29_" + std::to_string(i)).c_str(), t, d, n))
                            .add(std::cos(th), pD(t, d, n)).add(std::sin(th), qD(t, d, n))
                            .add(-cap * oct_apothem, uTG(t))
                            .le(0);
                    }
            } else if (dev.type == DeviceType::Bess) {
                for (int n = 0; n < 3; ++n)
                    for (int i = 0; i < 8; ++i) {
                        double th = std::atan(1.0) / 2.0 + i * std::atan(1.0);
                        Row(lp, name3(("eq30a_" + std::to_string(i)).c_str(), t, d, n))
                            .add(std::cos(th), pD(t, d, n)).add(std::sin(th), qD(t, d, n))
                            .le(cap * oct_apothem);
                    }
                Row r(lp, name2("eq30b", t, d));
                r.add(1, soc(t, d));
                double scale = cfg.dt_hours() / dev.e_nom;
                for (int n = 0; n < 3; ++n) r.add(scale, pD(t, d, n));
                if (t > 0) {
                    r.add(-1, soc(t - 1, d));
                    r.eq(0);
                } else {
                    r.eq(dev.soc_init);
                }
            } else {
                int tau = t - cfg.pv_delay_steps;
                const PhaseSet& ph = f.buses[static_cast<std::size_t>(dev.bus)].phases;
                double eta = pv_eta(f, dev, sc, t);
                double tanphi = std::tan(std::acos(dev.pf));
                for (int n = 0; n < 3; ++n) {
                    if (tau < 0 || !ph.has(n)) continue; // pinned to zero in bounds
                    Row(lp, name3("eq31a", t, d, n))
                        .add(1, pD(t, d, n)).add(-eta * cap, uBK(tau, block_of(dev.bus))).eq(0);
                    Row(lp, name3("eq31b", t, d, n))
                        .add(1, qD(t, d, n)).add(-tanphi, pD(t, d, n)).eq(0);
                }
            }
        }

        // demand staircase after (re-)energization
        for (int ld = 0; ld < LD; ++ld) {
            const Load& load = f.loads[static_cast<std::size_t>(ld)];
            int kb = block_of(load.bus);
            double fac = f.profile_factor(load.profile, sc.season, sc.minute_of_day(t));
            // multiplier = ind_t + sum_o beta_o (ind_{t-o+1} - ind_{t-o}), folded per lag
            double w0 = 1.0 + cfg.beta[0];
            double w1 = cfg.beta[1] - cfg.beta[0];
            double w2 = cfg.beta[2] - cfg.beta[1];
            double w3 = -cfg.beta[2];
            auto ind = [&](int tt) {
                return load.critical ? uBK(tt, kb) : uNLB(tt, load.bus);
            };
            const char* tagp = load.critical ? "eq32a" : "eq33a";
            const char* tagq = load.critical ? "eq32b" : "eq33b";
            for (int n = 0; n < 3; ++n) {
                double pp = fac * load.p_peak[static_cast<std::size_t>(n)];
                double qq = fac * load.q_peak[static_cast<std::size_t>(n)];
                Row rp(lp, name3(tagp, t, ld, n));
                Row rq(lp, name3(tagq, t, ld, n));
                rp.add(1, pLD(t, ld, n));
                rq.add(1, qLD(t, ld, n));
                double ws[4] = {w0, w1, w2, w3};
                for (int lag = 0; lag < 4; ++lag) {
                    if (t - lag < 0) break;
                    rp.add(-pp * ws[lag], ind(t - lag));
                    rq.add(-qq * ws[lag], ind(t - lag));
                }
                rp.eq(0);
                rq.eq(0);
            }
        }
    }

    // ---- network: balance, drops, caps, bands ---------------------------------
    for (int t = 0; t < T; ++t) {
        for (int b = 0; b < B; ++b)
            for (int n = 0; n < 3; ++n) {
                Row rp(lp, name3("eq34p", t, b, n));
                Row rq(lp, name3("eq34q", t, b, n));
                for (int d = 0; d < D; ++d)
                    if (f.devices[static_cast<std::size_t>(d)].bus == b) {
                        rp.add(1, pD(t, d, n));
                        rq.add(1, qD(t, d, n));
                    }
                for (int ld = 0; ld < LD; ++ld)
                    if (f.loads[static_cast<std::size_t>(ld)].bus == b) {
                        rp.add(-1, pLD(t, ld, n));
                        rq.add(-1, qLD(t, ld, n));
                    }
                for (int l = 0; l < L; ++l) {
                    const Line& ln = f.lines[static_cast<std::size_t>(l)];
                    if (ln.from == b) {
                        rp.add(-1, pF(t, l, n));
                        rq.add(-1, qF(t, l, n));
                    } else if (ln.to == b) {
                        rp.add(1, pF(t, l, n));
                        rq.add(1, qF(t, l, n));
                    }
                }
                rp.eq(0);
                rq.eq(0);
            }

        for (int l = 0; l < L; ++l) {
            const Line& ln = f.lines[static_cast<std::size_t>(l)];
            for (int n = 0; n < 3; ++n) {
                if (ln.phases.has(n)) {
                    Row ra(lp, name3("eq35a", t, l, n));
                    Row rb(lp, name3("eq35b", t, l, n));
                    ra.add(1, vSQ(t, ln.to, n)).add(-1, vSQ(t, ln.from, n));
                    rb.add(-1, vSQ(t, ln.to, n)).add(1, vSQ(t, ln.from, n));
                    for (int mp = 0; mp < 3; ++mp) {
                        if (!ln.phases.has(mp)) continue;
                        double rr = ln.r[static_cast<std::size_t>(n * 3 + mp)];
                        double xx = ln.x[static_cast<std::size_t>(n * 3 + mp)];
                        ra.add(2 * rr, pF(t, l, mp)).add(2 * xx, qF(t, l, mp));
                        rb.add(-2 * rr, pF(t, l, mp)).add(-2 * xx, qF(t, l, mp));
                    }
                    ra.add(vce, uL(t, l)).le(vce);
                    rb.add(vce, uL(t, l)).le(vce);
                }
                double pmax = ln.p_max[static_cast<std::size_t>(n)];
                double qmax = ln.q_max[static_cast<std::size_t>(n)];
                if (ln.kind == LineKind::Ssw) {
                    // transfer permitted only once the merge is in the past
                    Row rpa(lp, name3("eq19pa", t, l, n));
                    Row rpb(lp, name3("eq19pb", t, l, n));
                    Row rqa(lp, name3("eq19qa", t, l, n));
                    Row rqb(lp, name3("eq19qb", t, l, n));
                    rpa.add(1, pF(t, l, n));
                    rpb.add(-1, pF(t, l, n));
                    rqa.add(1, qF(t, l, n));
                    rqb.add(-1, qF(t, l, n));
                    if (t > 0) {
                        rpa.add(-pmax, uL(t - 1, l));
                        rpb.add(-pmax, uL(t - 1, l));
                        rqa.add(-qmax, uL(t - 1, l));
                        rqb.add(-qmax, uL(t - 1, l));
                    }
                    rpa.le(0);
                    rpb.le(0);
                    rqa.le(0);
                    rqb.le(0);
                } else {
                    Row(lp, name3("eq36pa", t, l, n)).add(1, pF(t, l, n)).add(-pmax, uL(t, l)).le(0);
                    Row(lp, name3("eq36pb", t, l, n)).add(-1, pF(t, l, n)).add(-pmax, uL(t, l)).le(0);
                    Row(lp, name3("eq36qa", t, l, n)).add(1, qF(t, l, n)).add(-qmax, uL(t, l)).le(0);
                    Row(lp, name3("eq36qb", t, l, n)).add(-1, qF(t, l, n)).add(-qmax, uL(t, l)).le(0);
                }
            }
        }

        for (int b = 0; b < B; ++b) {
            const Bus& bus = f.buses[static_cast<std::size_t>(b)];
            for (int n = 0; n < 3; ++n) {
                if (!bus.phases.has(n)) continue;
                Row(lp, name3("eq36lo", t, b, n))
                    .add(1, vSQ(t, b, n)).add(-cfg.v_floor_sq(), uBK(t, block_of(b))).ge(0);
                Row(lp, name3("eq36hi", t, b, n))
                    .add(1, vSQ(t, b, n)).add(-vce, uBK(t, block_of(b))).le(0);
            }
        }
        if (m.sources.tg_block >= 0 && m.sources.tg_block != sc.damaged_block) {
            int tb = f.devices[static_cast<std::size_t>(m.sources.tg_device)].bus;
            for (int n = 0; n < 3; ++n) {
                if (!f.buses[static_cast<std::size_t>(tb)].phases.has(n)) continue;
                Row(lp, name3("gridv", t, tb, n)).add(1, vSQ(t, tb, n)).add(-1.0, uTG(t)).eq(0);
            }
        }
    }

    // ---- bounds and integrality ------------------------------------------------
    for (int t = 0; t < T; ++t) {
        lp.fix(uTG(t), tg_on(t));
        lp.binaries.push_back(uTG(t));
        lp.bound(sT(t), 0, nbs);
        lp.generals.push_back(sT(t));
        for (int k = 0; k < K; ++k) {
            if (k == sc.damaged_block) lp.fix(uBK(t, k), 0);
            lp.binaries.push_back(uBK(t, k));
            lp.bound(fK(t, k), 0, fce);
        }
        for (int l = 0; l < L; ++l) lp.binaries.push_back(uL(t, l));
        for (int b : nl_buses) lp.binaries.push_back(uNLB(t, b));
        for (int mo = 0; mo < M; ++mo) lp.binaries.push_back(uMD(t, mo));
        for (int c = 1; c <= nbs; ++c) lp.binaries.push_back(uCL(t, c));
        for (int i = 0; i < nbs; ++i)
            for (int j = i + 1; j < nbs; ++j) {
                lp.binaries.push_back(uSY(t, i, j));
                lp.binaries.push_back(uMU(t, i, j));
            }
        for (int b : term_buses) lp.bound(fB(t, b), 0, fce);
        for (int d = 0; d < D; ++d) {
            const Device& dev = f.devices[static_cast<std::size_t>(d)];
            double cap = dev.s_max / 3.0;
            if (dev.type == DeviceType::Pv) {
                const PhaseSet& ph = f.buses[static_cast<std::size_t>(dev.bus)].phases;
                int tau = t - cfg.pv_delay_steps;
                for (int n = 0; n < 3; ++n) {
                    double hi = (tau >= 0 && ph.has(n)) ? cap : 0.0;
                    lp.bound(pD(t, d, n), 0, hi);
                    lp.bound(qD(t, d, n), 0, hi);
                }
            } else {
                for (int n = 0; n < 3; ++n) {
                    lp.bound(pD(t, d, n), -cap, cap);
                    lp.bound(qD(t, d, n), -cap, cap);
                }
                if (dev.type == DeviceType::Bess)
                    lp.bound(soc(t, d), dev.soc_min, dev.soc_max);
            }
        }
        for (int ld = 0; ld < LD; ++ld) {
            const Load& load = f.loads[static_cast<std::size_t>(ld)];
            double fac = f.profile_factor(load.profile, sc.season, sc.minute_of_day(t));
            double mult = 1.0 + cfg.beta[0];
            for (int n = 0; n < 3; ++n) {
                double pp = mult * fac * load.p_peak[static_cast<std::size_t>(n)];
                double qq = mult * fac * load.q_peak[static_cast<std::size_t>(n)];
                lp.bound(pLD(t, ld, n), std::min(0.0, pp), std::max(0.0, pp));
                lp.bound(qLD(t, ld, n), std::min(0.0, qq), std::max(0.0, qq));
            }
        }
        for (int l = 0; l < L; ++l) {
            const Line& ln = f.lines[static_cast<std::size_t>(l)];
            for (int n = 0; n < 3; ++n) {
                lp.bound(pF(t, l, n), -ln.p_max[static_cast<std::size_t>(n)],
                         ln.p_max[static_cast<std::size_t>(n)]);
                lp.bound(qF(t, l, n), -ln.q_max[static_cast<std::size_t>(n)],
                         ln.q_max[static_cast<std::size_t>(n)]);
            }
        }
        for (int b = 0; b < B; ++b) {
            const Bus& bus = f.buses[static_cast<std::size_t>(b)];
            for (int n = 0; n < 3; ++n)
                lp.bound(vSQ(t, b, n), 0, bus.phases.has(n) ? vce : 0.0);
        }
    }

    // ---- assemble ---------------------------------------------------------------
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write model file: " + path);
    out << "\\ restoration model, horizon " << T << " steps of " << cfg.dt_minutes << " min\n";
    out << "\\ rules: " << to_string(rules) << ", scenario: " << sc.id << "\n";
    out << "\\ quadratic capability caps appear as inscribed octagon cuts\n";
    out << "\\ quasi-steady frequency pinning is search-side only and is not exported\n";
    out << "\\ merge-switch transfer is gated on the prior-step closure status\n";
    out << "Maximize\n" << lp.objective.str() << "\n";
    out << "Subject To\n" << lp.rows.str();
    out << "Bounds\n" << lp.bounds.str();
    auto names = [&](const std::vector<std::string>& v) {
        int col = 0;
        for (const auto& s : v) {
            out << ' ' << s;
            if (++col % 8 == 0) out << '\n';
        }
        if (col % 8) out << '\n';
    };
    out << "Binaries\n";
    names(lp.binaries);
    out << "Generals\n";
    names(lp.generals);
    out << "End\n";
    if (!out.good()) throw ParseError("short write on model file: " + path);
}

} // namespace ssdmgf
