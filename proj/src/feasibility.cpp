#include "ssdmgf/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ssdmgf {

using nlohmann::json;

bool Logits::shape_ok() const {
    if (T <= 0 || K <= 0 || R <= 0 || E < 0) return false;
    if (z_root.size() != static_cast<std::size_t>(T) * static_cast<std::size_t>(K) *
                             static_cast<std::size_t>(R))
        return false;
    if (z_sync.size() != static_cast<std::size_t>(T) * static_cast<std::size_t>(E)) return false;
    auto finite = [](double v) { return std::isfinite(v); };
    return std::all_of(z_root.begin(), z_root.end(), finite) &&
           std::all_of(z_sync.begin(), z_sync.end(), finite);
}

Logits load_logits(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open logits file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    Logits z;
    z.T = j.at("T").get<int>();
    z.K = j.at("K").get<int>();
    z.R = j.at("R").get<int>();
    z.E = j.at("E").get<int>();
    z.z_root = j.at("z_root").get<std::vector<double>>();
    z.z_sync = j.at("z_sync").get<std::vector<double>>();
    if (!z.shape_ok()) throw std::runtime_error(path + ": logits shape/payload mismatch");
    return z;
}

void save_logits(const std::string& path, const Logits& z) {
    json j{{"T", z.T}, {"K", z.K}, {"R", z.R}, {"E", z.E},
           {"z_root", z.z_root}, {"z_sync", z.z_sync}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write logits file: " + path);
    out << j.dump(2) << '\n';
}

namespace {

/// Hop distances in the backbone from one block to all blocks.
std::vector<int> block_hops(const Backbone& bb, int src) {
    std::vector<int> dist(static_cast<std::size_t>(bb.num_blocks), -1);
    std::deque<int> q{src};
    dist[static_cast<std::size_t>(src)] = 0;
    while (!q.empty()) {
        int k = q.front();
        q.pop_front();
        for (int e : bb.incident[static_cast<std::size_t>(k)]) {
            int o = bb.other(e, k);
            if (dist[static_cast<std::size_t>(o)] < 0) {
                dist[static_cast<std::size_t>(o)] = dist[static_cast<std::size_t>(k)] + 1;
                q.push_back(o);
            }
        }
    }
    return dist;
}

std::vector<int> ascending_universe(const SystemModel& m) {
    std::vector<int> u = m.bs_blocks;
    std::sort(u.begin(), u.end());
    return u;
}

std::vector<double> softmax(const std::vector<double>& z) {
    double zmax = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - zmax);
        denom += p[i];
    }
    for (double& v : p) v /= denom;
    return p;
}

int rho_find(std::vector<int>& rho, int r) {
    while (rho[static_cast<std::size_t>(r)] != r) {
        rho[static_cast<std::size_t>(r)] =
            rho[static_cast<std::size_t>(rho[static_cast<std::size_t>(r)])];
        r = rho[static_cast<std::size_t>(r)];
    }
    return r;
}

/// Canonical partition (block ids) of the active matrix indices.
std::vector<std::vector<int>> canonical_parts(const std::vector<std::vector<int>>& idx_parts,
                                              const std::vector<int>& bs_blocks) {
    std::vector<std::vector<int>> parts;
    parts.reserve(idx_parts.size());
    for (const auto& p : idx_parts) {
        std::vector<int> blocks;
        blocks.reserve(p.size());
        for (int i : p) blocks.push_back(bs_blocks[static_cast<std::size_t>(i)]);
        std::sort(blocks.begin(), blocks.end());
        parts.push_back(std::move(blocks));
    }
    std::sort(parts.begin(), parts.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return parts;
}

} // namespace

Logits heuristic_logits(const SystemModel& m, const ScenarioSpec& sc, const GridConfig& cfg) {
    (void)cfg;
    Logits z;
    auto universe = ascending_universe(m);
    z.T = sc.horizon_steps;
    z.K = m.blocks.num_blocks;
    z.R = 1 + static_cast<int>(universe.size());
    auto ssw = m.backbone.ssw_edges();
    z.E = static_cast<int>(ssw.size());
    z.z_root.assign(static_cast<std::size_t>(z.T) * static_cast<std::size_t>(z.K) *
                        static_cast<std::size_t>(z.R),
                    0.0);
    z.z_sync.assign(static_cast<std::size_t>(z.T) * static_cast<std::size_t>(z.E), 0.0);

    // Per-root reach scores: rating shrunk by hop distance.
    std::vector<std::vector<int>> hops;
    std::vector<double> rating(universe.size(), 0.0);
    for (std::size_t r = 0; r < universe.size(); ++r) {
        hops.push_back(block_hops(m.backbone, universe[r]));
        if (universe[r] == m.sources.tg_block) {
            rating[r] = m.sources.tg_device >= 0
                            ? m.feeder.devices[static_cast<std::size_t>(m.sources.tg_device)].s_max
                            : 1.0;
        } else {
            for (std::size_t i = 0; i < m.sources.bess_blocks.size(); ++i)
                if (m.sources.bess_blocks[i] == universe[r])
                    rating[r] =
                        m.feeder.devices[static_cast<std::size_t>(m.sources.bess_devices[i])].s_max;
        }
    }

    for (int t = 0; t < z.T; ++t) {
        bool tg_on = sc.tg_available(t);
        for (int k = 0; k < z.K; ++k) {
            if (k == sc.damaged_block) {
                z.root_at(t, k, 0) = 6.0;
                for (int r = 1; r < z.R; ++r) z.root_at(t, k, r) = -6.0;
                continue;
            }
            // Dead stays attractive early and decays as restoration spreads.
            z.root_at(t, k, 0) = 1.6 - 0.22 * t;
            for (int r = 1; r < z.R; ++r) {
                int root_block = universe[static_cast<std::size_t>(r - 1)];
                int d = hops[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(k)];
                double reach = d < 0 ? -4.0 : rating[static_cast<std::size_t>(r - 1)] /
                                                  (1.0 + static_cast<double>(d));
                double score = 2.2 * (k == root_block ? 1.0 : 0.0) + reach -
                               0.35 * static_cast<double>(d < 0 ? 8 : d);
                if (root_block == m.sources.tg_block) score += tg_on ? 0.8 : -8.0;
                z.root_at(t, k, r) = score;
            }
        }
        // Closures on a staggered timetable, earliest switch first.
        for (int e = 0; e < z.E; ++e) {
            int due = 6 + 3 * e;
            z.z_sync.at(static_cast<std::size_t>(t * z.E + e)) = t >= due ? 0.9 : -1.1;
        }
    }
    return z;
}

ResolveOptions make_resolve_options(const SystemModel& m, const ScenarioSpec& sc,
                                    double lambda) {
    ResolveOptions opt;
    opt.lambda = lambda;
    opt.universe = ascending_universe(m);
    if (m.sources.tg_block >= 0) {
        auto it = std::lower_bound(opt.universe.begin(), opt.universe.end(), m.sources.tg_block);
        opt.tg_label = static_cast<int>(it - opt.universe.begin()) + 1;
    }
    opt.tg_on.resize(static_cast<std::size_t>(sc.horizon_steps));
    for (int t = 0; t < sc.horizon_steps; ++t)
        opt.tg_on[static_cast<std::size_t>(t)] = sc.tg_available(t) ? 1 : 0;
    for (int e : m.backbone.ssw_edges()) {
        const auto& edge = m.backbone.edges[static_cast<std::size_t>(e)];
        opt.ssw_ends.push_back({edge.u, edge.v});
    }
    return opt;
}

int assign_root(const std::vector<double>& p, double lambda, int tg_label,
                bool tg_selectable) {
    if (tg_label > 0 && tg_selectable && p[static_cast<std::size_t>(tg_label)] > lambda)
        return tg_label;
    if (p[0] > lambda) return 0;
    int best = -1;
    double best_p = -1.0;
    for (std::size_t r = 0; r < p.size(); ++r) {
        if (tg_label > 0 && !tg_selectable && static_cast<int>(r) == tg_label) continue;
        if (p[r] > best_p) {
            best_p = p[r];
            best = static_cast<int>(r);
        }
    }
    return best;
}

void unite(std::vector<int>& rho, int i, int j, int tg_label) {
    if (i == j) throw std::invalid_argument("unite: identical labels");
    if (tg_label > 0 && i == tg_label) {
        rho[static_cast<std::size_t>(j)] = i;
    } else if (tg_label > 0 && j == tg_label) {
        rho[static_cast<std::size_t>(i)] = j;
    } else {
        rho[static_cast<std::size_t>(std::max(i, j))] = std::min(i, j);
    }
}

void resolve_step(ResolutionState& st, const Logits& z, int t, const ResolveOptions& opt,
                  bool allow_closures, FeasibleOutputs& out) {
    bool tg_on = t < static_cast<int>(opt.tg_on.size()) && opt.tg_on[static_cast<std::size_t>(t)];

    if (allow_closures) {
        // Candidate switches: positive score, never closed before.
        std::vector<int> cand;
        for (int e = 0; e < z.E; ++e)
            if (z.sync_at(t, e) > 0.0 && !st.u_e[static_cast<std::size_t>(e)]) cand.push_back(e);
        std::sort(cand.begin(), cand.end(), [&](int a, int b) {
            double za = z.sync_at(t, a), zb = z.sync_at(t, b);
            if (za != zb) return za > zb;
            return a < b;
        });
        std::vector<std::pair<int, int>> accepted;
        for (int e : cand) {
            int lu = st.labels[static_cast<std::size_t>(opt.ssw_ends[static_cast<std::size_t>(e)][0])];
            int lv = st.labels[static_cast<std::size_t>(opt.ssw_ends[static_cast<std::size_t>(e)][1])];
            if (lu == 0 || lv == 0 || lu == lv) continue;
            bool overlap = false;
            for (const auto& [a, b] : accepted)
                if (a == lu || a == lv || b == lu || b == lv) overlap = true;
            if (overlap) continue;
            accepted.emplace_back(lu, lv);
            st.u_e[static_cast<std::size_t>(e)] = 1;
            out.sync[static_cast<std::size_t>(t * z.E + e)] = 1;
            unite(st.rho, lu, lv, opt.tg_label);
        }
    }

    // Label pass: live labels follow their representative, dead blocks re-run
    // the assignment rule on this step's scores.
    for (int k = 0; k < z.K; ++k) {
        int prev = st.labels[static_cast<std::size_t>(k)];
        int next;
        if (prev != 0) {
            next = rho_find(st.rho, prev);
        } else {
            std::vector<double> row(static_cast<std::size_t>(z.R));
            for (int r = 0; r < z.R; ++r) row[static_cast<std::size_t>(r)] = z.root_at(t, k, r);
            int pick = assign_root(softmax(row), opt.lambda, opt.tg_label, tg_on);
            next = pick == 0 ? 0 : rho_find(st.rho, pick);
        }
        st.labels[static_cast<std::size_t>(k)] = next;
        out.labels[static_cast<std::size_t>(t * z.K + k)] = next;
    }

    // Full compression so the stored map is idempotent.
    for (int r = 1; r < z.R; ++r) rho_find(st.rho, r);
    out.rho_t[static_cast<std::size_t>(t)] = st.rho;
}

FeasibleOutputs resolve_sequence(const Logits& z, const ResolveOptions& opt,
                                 ResolutionState* final_state) {
    if (!z.shape_ok()) throw std::invalid_argument("resolve_sequence: bad logits shape");
    if (static_cast<int>(opt.ssw_ends.size()) != z.E)
        throw std::invalid_argument("resolve_sequence: switch count mismatch");
    if (static_cast<int>(opt.universe.size()) + 1 != z.R)
        throw std::invalid_argument("resolve_sequence: root universe mismatch");

    FeasibleOutputs out;
    out.T = z.T;
    out.K = z.K;
    out.R = z.R;
    out.E = z.E;
    out.labels.assign(static_cast<std::size_t>(z.T) * static_cast<std::size_t>(z.K), 0);
    out.sync.assign(static_cast<std::size_t>(z.T) * static_cast<std::size_t>(z.E), 0);
    out.rho_t.assign(static_cast<std::size_t>(z.T), {});

    ResolutionState st;
    st.labels.assign(static_cast<std::size_t>(z.K), 0);
    st.u_e.assign(static_cast<std::size_t>(z.E), 0);
    st.rho.resize(static_cast<std::size_t>(z.R));
    std::iota(st.rho.begin(), st.rho.end(), 0);

    for (int t = 0; t < z.T; ++t) resolve_step(st, z, t, opt, t > 0, out);
    if (final_state) *final_state = st;
    return out;
}

FeasibleOutputs load_feasible(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open feasible-outputs file: " + path);
    json j;
    in >> j;
    FeasibleOutputs fo;
    fo.T = j.at("T").get<int>();
    fo.K = j.at("K").get<int>();
    fo.R = j.at("R").get<int>();
    fo.E = j.at("E").get<int>();
    fo.labels = j.at("labels").get<std::vector<int>>();
    auto sync = j.at("sync").get<std::vector<int>>();
    fo.sync.assign(sync.begin(), sync.end());
    fo.rho_t = j.at("rho").get<std::vector<std::vector<int>>>();
    if (fo.labels.size() != static_cast<std::size_t>(fo.T) * static_cast<std::size_t>(fo.K) ||
        fo.sync.size() != static_cast<std::size_t>(fo.T) * static_cast<std::size_t>(fo.E) ||
        fo.rho_t.size() != static_cast<std::size_t>(fo.T))
        throw std::runtime_error(path + ": feasible-outputs shape mismatch");
    return fo;
}

void save_feasible(const std::string& path, const FeasibleOutputs& fo) {
    json j{{"T", fo.T}, {"K", fo.K}, {"R", fo.R}, {"E", fo.E},
           {"labels", fo.labels},
           {"sync", std::vector<int>(fo.sync.begin(), fo.sync.end())},
           {"rho", fo.rho_t}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write feasible-outputs file: " + path);
    out << j.dump(2) << '\n';
}

StePair ste_wrap(std::vector<double> hard, std::vector<double> soft) {
    if (hard.size() != soft.size())
        throw std::invalid_argument("ste_wrap: shape mismatch");
    return StePair{std::move(hard), std::move(soft)};
}

FeasibleOutputs outputs_from_labels(const Labels& lb, int R) {
    FeasibleOutputs fo;
    fo.T = lb.T;
    fo.K = lb.K;
    fo.R = R;
    fo.E = lb.E;
    fo.labels.assign(lb.root.begin(), lb.root.end());
    fo.sync.assign(lb.sync.begin(), lb.sync.end());
    fo.rho_t.assign(static_cast<std::size_t>(lb.T), {});
    return fo;
}

LossBreakdown metrics(const FeasibleOutputs& y, const FeasibleOutputs& ybar, double gamma,
                      double eta) {
    if (y.T != ybar.T || y.K != ybar.K || y.R != ybar.R || y.E != ybar.E)
        throw std::invalid_argument("metrics: shape mismatch");
    if (y.T < 2) throw std::invalid_argument("metrics: horizon too short for the churn term");

    LossBreakdown lb;
    const double tkr = static_cast<double>(y.T) * y.K * y.R;
    const double te = static_cast<double>(y.T) * std::max(1, y.E);

    // One-hot L1 between differing labels contributes 2 per disagreement.
    double root_l1 = 0.0;
    for (std::size_t i = 0; i < y.labels.size(); ++i)
        if (y.labels[i] != ybar.labels[i]) root_l1 += 2.0;
    lb.root = root_l1 / tkr;

    double sync_l1 = 0.0, spar = 0.0;
    for (std::size_t i = 0; i < y.sync.size(); ++i) {
        sync_l1 += std::abs(static_cast<double>(y.sync[i]) - static_cast<double>(ybar.sync[i]));
        spar += static_cast<double>(y.sync[i]);
    }
    lb.sync = sync_l1 / te;
    lb.spar = spar / te;

    double churn = 0.0;
    for (int t = 1; t < y.T; ++t)
        for (int k = 0; k < y.K; ++k)
            if (y.label_at(t, k) != y.label_at(t - 1, k)) churn += 2.0;
    lb.temp = churn / (static_cast<double>(y.T - 1) * y.K * y.R);

    lb.total = lb.root + lb.sync + gamma * lb.spar + eta * lb.temp;
    return lb;
}

PartialAssignment extract_warm_start(const FeasibleOutputs& fo, const SystemModel& m,
                                     const ScenarioSpec& sc) {
    PartialAssignment pa;
    pa.T = fo.T;
    pa.n_ssw = fo.E;
    pa.family = "CAWS";
    pa.u_ssw.assign(static_cast<std::size_t>(fo.T) * static_cast<std::size_t>(fo.E), 0);

    auto universe = ascending_universe(m);
    const int n = static_cast<int>(m.bs_blocks.size());
    // Matrix index in plan order -> label index in ascending order.
    std::vector<int> label_of(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        auto it = std::lower_bound(universe.begin(), universe.end(), m.bs_blocks[static_cast<std::size_t>(i)]);
        label_of[static_cast<std::size_t>(i)] = static_cast<int>(it - universe.begin()) + 1;
    }

    for (int t = 0; t < fo.T; ++t)
        for (int e = 0; e < fo.E; ++e) {
            bool closed = (t > 0 && pa.ssw_at(t - 1, e)) || fo.sync_at(t, e);
            pa.u_ssw[static_cast<std::size_t>(t * fo.E + e)] = closed ? 1 : 0;
        }

    bool catalogued = true;
    std::vector<SyncMatrix> sync;
    std::vector<int> mode_index, klass;
    for (int t = 0; t < fo.T; ++t) {
        bool tg_on = sc.tg_available(t);
        std::vector<int> rho = fo.rho_t[static_cast<std::size_t>(t)];
        SyncMatrix sm(n);
        std::vector<int> active;
        for (int i = 0; i < n; ++i) {
            if (m.bs_blocks[static_cast<std::size_t>(i)] == m.sources.tg_block && !tg_on) continue;
            active.push_back(i);
        }
        for (std::size_t a = 0; a < active.size(); ++a)
            for (std::size_t b = a + 1; b < active.size(); ++b) {
                int la = label_of[static_cast<std::size_t>(active[a])];
                int lc = label_of[static_cast<std::size_t>(active[b])];
                if (rho_find(rho, la) == rho_find(rho, lc)) sm.set(active[a], active[b], 1);
            }
        auto idx_parts = partition_from_sync(sm, active);
        if (!idx_parts) {
            catalogued = false;
            break;
        }
        auto parts = canonical_parts(*idx_parts, m.bs_blocks);
        auto mode = m.catalogue.find(parts, tg_on);
        if (!mode) {
            catalogued = false;
            break;
        }
        sync.push_back(std::move(sm));
        mode_index.push_back(*mode);
        klass.push_back(static_cast<int>(parts.size()));
    }

    if (catalogued) {
        pa.sync = std::move(sync);
        pa.mode_index = std::move(mode_index);
        pa.klass = std::move(klass);
    } else {
        pa.degraded = true;
    }
    return pa;
}

PartialAssignment warm_from_plan(const RestorationPlan& plan, const SystemModel& m) {
    PartialAssignment pa;
    pa.T = plan.T;
    pa.family = "OSWS";
    auto ssw = m.backbone.ssw_edges();
    pa.n_ssw = static_cast<int>(ssw.size());
    pa.u_ssw.assign(static_cast<std::size_t>(pa.T) * static_cast<std::size_t>(pa.n_ssw), 0);
    for (int t = 0; t < pa.T; ++t)
        for (int e = 0; e < pa.n_ssw; ++e) {
            int line = m.backbone.edges[static_cast<std::size_t>(ssw[static_cast<std::size_t>(e)])].line;
            pa.u_ssw[static_cast<std::size_t>(t * pa.n_ssw + e)] = plan.line(t, line);
        }
    pa.sync = plan.sync;
    pa.mode_index = plan.mode_index;
    pa.klass = plan.s_count;
    return pa;
}

PartialAssignment make_azws(const SystemModel& m, const ScenarioSpec& sc) {
    PartialAssignment pa;
    pa.T = sc.horizon_steps;
    pa.family = "AZWS";
    pa.n_ssw = static_cast<int>(m.backbone.ssw_edges().size());
    pa.u_ssw.assign(static_cast<std::size_t>(pa.T) * static_cast<std::size_t>(pa.n_ssw), 0);
    const int n = static_cast<int>(m.bs_blocks.size());
    for (int t = 0; t < pa.T; ++t) {
        bool tg_on = sc.tg_available(t);
        pa.sync.emplace_back(n);
        std::vector<std::vector<int>> parts;
        for (int i = 0; i < n; ++i) {
            int block = m.bs_blocks[static_cast<std::size_t>(i)];
            if (block == m.sources.tg_block && !tg_on) continue;
            parts.push_back({block});
        }
        std::sort(parts.begin(), parts.end(),
                  [](const auto& a, const auto& b) { return a.front() < b.front(); });
        auto mode = m.catalogue.find(parts, tg_on);
        pa.mode_index.push_back(mode ? *mode : -1);
        pa.klass.push_back(static_cast<int>(parts.size()));
    }
    return pa;
}

PartialAssignment make_rws(const SystemModel& m, const ScenarioSpec& sc, std::uint64_t seed) {
    PartialAssignment pa;
    pa.T = sc.horizon_steps;
    pa.family = "RWS";
    pa.n_ssw = static_cast<int>(m.backbone.ssw_edges().size());
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    pa.u_ssw.resize(static_cast<std::size_t>(pa.T) * static_cast<std::size_t>(pa.n_ssw));
    for (auto& v : pa.u_ssw) v = coin(rng) ? 1 : 0;
    const int n = static_cast<int>(m.bs_blocks.size());
    std::uniform_int_distribution<int> mode_pick(0, static_cast<int>(m.catalogue.modes.size()) - 1);
    std::uniform_int_distribution<int> class_pick(1, std::max(1, n));
    for (int t = 0; t < pa.T; ++t) {
        SyncMatrix sm(n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) sm.set(i, j, coin(rng) ? 1 : 0);
        pa.sync.push_back(std::move(sm));
        pa.mode_index.push_back(mode_pick(rng));
        pa.klass.push_back(class_pick(rng));
    }
    return pa;
}

WarmCheck check_warm(const PartialAssignment& pa, const SystemModel& m,
                     const ScenarioSpec& sc) {
    WarmCheck wc;
    auto fail = [&](std::string why) {
        wc.consistent = false;
        wc.reason = std::move(why);
        return wc;
    };
    if (pa.empty()) return wc; // nothing fixed is trivially consistent
    const int n = static_cast<int>(m.bs_blocks.size());
    const int n_ssw = static_cast<int>(m.backbone.ssw_edges().size());
    if (pa.T != sc.horizon_steps) return fail("horizon mismatch");
    if (pa.n_ssw != n_ssw) return fail("switch count mismatch");
    if (pa.u_ssw.size() != static_cast<std::size_t>(pa.T) * static_cast<std::size_t>(n_ssw))
        return fail("switch schedule size mismatch");

    for (int e = 0; e < n_ssw; ++e) {
        if (pa.ssw_at(0, e)) return fail("switch closed at the first step");
        for (int t = 1; t < pa.T; ++t)
            if (pa.ssw_at(t, e) < pa.ssw_at(t - 1, e))
                return fail("switch schedule not monotone");
    }

    if (pa.degraded) return wc; // only the schedule is pinned; checked above

    if (pa.sync.size() != static_cast<std::size_t>(pa.T) ||
        pa.mode_index.size() != static_cast<std::size_t>(pa.T) ||
        pa.klass.size() != static_cast<std::size_t>(pa.T))
        return fail("per-step family sizes mismatch");

    int bess_count = static_cast<int>(m.sources.bess_blocks.size());
    for (int t = 0; t < pa.T; ++t) {
        const SyncMatrix& sm = pa.sync[static_cast<std::size_t>(t)];
        if (sm.n != n) return fail("sync matrix size mismatch");
        bool tg_on = sc.tg_available(t);
        std::vector<int> active;
        for (int i = 0; i < n; ++i) {
            bool is_tg = m.bs_blocks[static_cast<std::size_t>(i)] == m.sources.tg_block;
            if (is_tg && !tg_on) {
                for (int j = 0; j < n; ++j)
                    if (j != i && sm.at(i, j))
                        return fail("inactive grid root participates in a sync pair");
                continue;
            }
            active.push_back(i);
        }
        auto idx_parts = partition_from_sync(sm, active);
        if (!idx_parts) return fail("sync matrix not transitively closed");
        auto parts = canonical_parts(*idx_parts, m.bs_blocks);
        auto mode = m.catalogue.find(parts, tg_on);
        if (!mode) return fail("partition not in the mode catalogue");
        if (pa.mode_index[static_cast<std::size_t>(t)] != *mode) return fail("mode index mismatch");
        if (pa.klass[static_cast<std::size_t>(t)] != static_cast<int>(parts.size()))
            return fail("class count mismatch");

        // Island count identity ties the partition to the switch schedule.
        int closed = 0;
        for (int e = 0; e < n_ssw; ++e) closed += pa.ssw_at(t, e);
        int expected = bess_count + (tg_on ? 1 : 0) - closed;
        if (static_cast<int>(parts.size()) != expected)
            return fail("class count inconsistent with the switch schedule");

        if (t > 0) {
            auto tr = check_transition_safety(pa.sync[static_cast<std::size_t>(t - 1)], sm);
            if (!tr.monotone) return fail("sync indicators regress");
            if (!tr.safe) return fail("transition merges more than two islands");
        }
    }
    return wc;
}

namespace {

json sync_to_json(const SyncMatrix& sm) {
    return json{{"n", sm.n}, {"cells", std::vector<int>(sm.cells.begin(), sm.cells.end())}};
}

SyncMatrix sync_from_json(const json& j) {
    SyncMatrix sm(j.at("n").get<int>());
    auto cells = j.at("cells").get<std::vector<int>>();
    if (cells.size() != sm.cells.size()) throw std::runtime_error("sync matrix payload mismatch");
    std::copy(cells.begin(), cells.end(), sm.cells.begin());
    return sm;
}

} // namespace

void save_warm(const std::string& path, const PartialAssignment& pa) {
    json j{{"T", pa.T},
           {"n_ssw", pa.n_ssw},
           {"u_ssw", std::vector<int>(pa.u_ssw.begin(), pa.u_ssw.end())},
           {"mode_index", pa.mode_index},
           {"class", pa.klass},
           {"degraded", pa.degraded},
           {"family", pa.family}};
    j["sync"] = json::array();
    for (const auto& sm : pa.sync) j["sync"].push_back(sync_to_json(sm));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write warm-start file: " + path);
    out << j.dump(2) << '\n';
}

PartialAssignment load_warm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open warm-start file: " + path);
    json j;
    in >> j;
    PartialAssignment pa;
    pa.T = j.at("T").get<int>();
    pa.n_ssw = j.at("n_ssw").get<int>();
    auto ussw = j.at("u_ssw").get<std::vector<int>>();
    pa.u_ssw.assign(ussw.begin(), ussw.end());
    pa.mode_index = j.at("mode_index").get<std::vector<int>>();
    pa.klass = j.at("class").get<std::vector<int>>();
    pa.degraded = j.at("degraded").get<bool>();
    pa.family = j.at("family").get<std::string>();
    for (const auto& s : j.at("sync")) pa.sync.push_back(sync_from_json(s));
    return pa;
}

} // namespace ssdmgf
