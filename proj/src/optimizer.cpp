#include "ssdmgf/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "ssdmgf/common.hpp"

namespace ssdmgf {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

/// Immutable per-solve context: the instance plus precomputed value tables.
struct Ctx {
    const SystemModel& m;
    const ScenarioSpec& sc;
    const GridConfig& cfg;
    RuleSet rules;
    int T;

    // dval[t*L+ld]: objective weight of load ld fully served at unit pickup
    // multiplier during step t (dt * alpha * profile * peak sum).
    std::vector<double> dval;
    // Suffix sums of the per-step optimistic ceiling (multiplier 1+beta1),
    // used as a quick cap; exact bounds are assembled per node.
    std::vector<int> esw_edges;   // backbone edge ids
    std::vector<int> ssw_edge_ids;
    std::vector<int> nl_buses;    // buses carrying at least one NL load
    std::vector<std::vector<int>> nl_loads_of_bus; // parallel to nl_buses
    std::vector<int> esw_count_of_block;
};

Ctx make_ctx(const SystemModel& m, const ScenarioSpec& sc, const GridConfig& cfg,
             RuleSet rules) {
    Ctx c{m, sc, cfg, rules, sc.horizon_steps, {}, {}, {}, {}, {}, {}};
    const auto& f = m.feeder;
    int L = static_cast<int>(f.loads.size());
    c.dval.assign(static_cast<std::size_t>(c.T) * static_cast<std::size_t>(L), 0.0);
    for (int t = 0; t < c.T; ++t)
        for (int ld = 0; ld < L; ++ld) {
            const Load& load = f.loads[static_cast<std::size_t>(ld)];
            double alpha = load.critical ? cfg.alpha_cl : cfg.alpha_nl;
            double prof = f.profile_factor(load.profile, sc.season, sc.minute_of_day(t));
            c.dval[static_cast<std::size_t>(t * L + ld)] =
                cfg.dt_minutes * alpha * prof * sum(load.p_peak);
        }
    for (std::size_t e = 0; e < m.backbone.edges.size(); ++e) {
        if (m.backbone.edges[e].kind == LineKind::Esw) c.esw_edges.push_back(static_cast<int>(e));
        if (m.backbone.edges[e].kind == LineKind::Ssw) c.ssw_edge_ids.push_back(static_cast<int>(e));
    }
    std::vector<std::vector<int>> by_bus(f.buses.size());
    for (std::size_t ld = 0; ld < f.loads.size(); ++ld)
        if (!f.loads[ld].critical) by_bus[static_cast<std::size_t>(f.loads[ld].bus)].push_back(static_cast<int>(ld));
    for (std::size_t b = 0; b < by_bus.size(); ++b)
        if (!by_bus[b].empty()) {
            c.nl_buses.push_back(static_cast<int>(b));
            c.nl_loads_of_bus.push_back(by_bus[b]);
        }
    c.esw_count_of_block.assign(static_cast<std::size_t>(m.blocks.num_blocks), 0);
    for (int e : c.esw_edges) {
        const auto& edge = m.backbone.edges[static_cast<std::size_t>(e)];
        ++c.esw_count_of_block[static_cast<std::size_t>(edge.u)];
        ++c.esw_count_of_block[static_cast<std::size_t>(edge.v)];
    }
    return c;
}

/// Pickup age of an indicator series at step t (steps since it turned on,
/// capped at 3; -1 when off). The series accessor hides which family it is.
template <typename OnAt>
int age_at(OnAt&& on, int t) {
    if (t < 0 || !on(t)) return -1;
    int age = 0;
    while (age < 3 && t - age - 1 >= 0 && on(t - age - 1)) ++age;
    return age;
}

/// Exact future value of already-served loads plus an optimistic ceiling for
/// everything not yet served, from step t_from to the horizon end.
double completion_bound(const Ctx& c, const RestorationPlan& plan, int t_from) {
    if (t_from >= c.T) return 0.0;
    const auto& f = c.m.feeder;
    const int L = static_cast<int>(f.loads.size());
    const double top_mult = 1.0 + c.cfg.beta[0];
    double total = 0.0;
    for (int ld = 0; ld < L; ++ld) {
        const Load& load = f.loads[static_cast<std::size_t>(ld)];
        int block = c.m.blocks.block_of_bus[static_cast<std::size_t>(load.bus)];
        if (block == c.sc.damaged_block) continue;
        int age;
        if (load.critical) {
            age = age_at([&](int tt) { return plan.bk(tt, block) != 0; }, t_from - 1);
        } else {
            age = age_at([&](int tt) { return plan.nlb(tt, load.bus) != 0; }, t_from - 1);
        }
        for (int t = t_from; t < c.T; ++t) {
            double mult =
                age >= 0 ? clpu_multiplier(c.cfg, age + (t - t_from + 1)) : top_mult;
            total += mult * c.dval[static_cast<std::size_t>(t * L + ld)];
        }
    }
    return total;
}

/// 64-bit digest of the decision-relevant state after step t: indicators,
/// pickup ages (saturated), and storage levels rounded to 1e-9.
std::uint64_t state_digest(const Ctx& c, const RestorationPlan& plan, int t) {
    std::string buf;
    buf.reserve(256);
    auto put8 = [&](std::uint8_t v) { buf.push_back(static_cast<char>(v)); };
    auto put64 = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) put8(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    put64(static_cast<std::uint64_t>(t));
    for (int k = 0; k < plan.num_blocks; ++k) {
        put8(plan.bk(t, k));
        put8(static_cast<std::uint8_t>(
            1 + age_at([&](int tt) { return plan.bk(tt, k) != 0; }, t)));
    }
    for (const auto& e : c.m.backbone.edges) put8(plan.line(t, e.line));
    for (std::size_t i = 0; i < c.nl_buses.size(); ++i) {
        int b = c.nl_buses[i];
        put8(plan.nlb(t, b));
        put8(static_cast<std::uint8_t>(
            1 + age_at([&](int tt) { return plan.nlb(tt, b) != 0; }, t)));
    }
    put8(plan.u_tg[static_cast<std::size_t>(t)]);
    for (int d = 0; d < plan.num_devices; ++d) {
        if (c.m.feeder.devices[static_cast<std::size_t>(d)].type != DeviceType::Bess) continue;
        put64(static_cast<std::uint64_t>(std::llround(plan.soc_at(t, d) * 1e9)));
    }
    return fnv1a64(buf.data(), buf.size());
}

struct IslandView {
    std::vector<int> comp; // block -> island representative (energized only)
    int find(int k) {
        while (comp[static_cast<std::size_t>(k)] != k)
            k = comp[static_cast<std::size_t>(k)] =
                    comp[static_cast<std::size_t>(comp[static_cast<std::size_t>(k)])];
        return k;
    }
};

IslandView islands_at(const Ctx& c, const RestorationPlan& plan, int t) {
    IslandView iv;
    iv.comp.resize(static_cast<std::size_t>(c.m.blocks.num_blocks));
    for (int k = 0; k < c.m.blocks.num_blocks; ++k) iv.comp[static_cast<std::size_t>(k)] = k;
    for (const auto& e : c.m.backbone.edges)
        if (plan.line(t, e.line)) {
            int a = iv.find(e.u), b = iv.find(e.v);
            if (a != b) iv.comp[static_cast<std::size_t>(a)] = b;
        }
    return iv;
}

/// All admissible action bundles for step t given the plan through t-1.
/// `forced_ssw` pins the sync closures to exactly that set (may be empty).
std::vector<StepActions> enumerate_bundles(const Ctx& c, const RestorationPlan& plan, int t,
                                           const std::vector<int>* forced_ssw) {
    const auto& m = c.m;
    const bool switching = t > 0;

    struct EswCand {
        int line;
        int dead_block;
        int live_block;
    };
    std::vector<EswCand> esw;
    struct SswCand {
        int line;
        int ia, ib; // island representatives, ia < ib
    };
    std::vector<SswCand> ssw;

    IslandView iv;
    if (switching) {
        iv = islands_at(c, plan, t - 1);
        for (int e : c.esw_edges) {
            const auto& edge = m.backbone.edges[static_cast<std::size_t>(e)];
            bool lu = plan.bk(t - 1, edge.u), lv = plan.bk(t - 1, edge.v);
            if (lu == lv) continue;
            int dead = lu ? edge.v : edge.u;
            if (dead == c.sc.damaged_block) continue;
            esw.push_back({edge.line, dead, lu ? edge.u : edge.v});
        }
        bool allow_merge = c.rules != RuleSet::RuleBased || c.sc.tg_available(t);
        if (allow_merge)
            for (int e : c.ssw_edge_ids) {
                const auto& edge = m.backbone.edges[static_cast<std::size_t>(e)];
                if (plan.line(t - 1, edge.line)) continue;
                if (!plan.bk(t - 1, edge.u) || !plan.bk(t - 1, edge.v)) continue;
                int ia = iv.find(edge.u), ib = iv.find(edge.v);
                if (ia == ib) continue;
                ssw.push_back({edge.line, std::min(ia, ib), std::max(ia, ib)});
            }
    }

    // ESW subsets: one feeding switch per dead block, per-block event caps.
    std::vector<std::vector<int>> esw_sets{{}};
    {
        std::vector<std::vector<int>> sets;
        std::vector<int> cur;
        auto ok_caps = [&](const std::vector<int>& lines) {
            std::vector<int> events(static_cast<std::size_t>(m.blocks.num_blocks), 0);
            std::vector<int> dead_hit(static_cast<std::size_t>(m.blocks.num_blocks), 0);
            for (int ln : lines) {
                for (const auto& cand : esw)
                    if (cand.line == ln) {
                        if (++dead_hit[static_cast<std::size_t>(cand.dead_block)] > 1) return false;
                    }
                const Line& line = m.feeder.lines[static_cast<std::size_t>(ln)];
                int bu = m.blocks.block_of_bus[static_cast<std::size_t>(line.from)];
                int bv = m.blocks.block_of_bus[static_cast<std::size_t>(line.to)];
                ++events[static_cast<std::size_t>(bu)];
                ++events[static_cast<std::size_t>(bv)];
            }
            for (int k = 0; k < m.blocks.num_blocks; ++k) {
                int cap = (plan.bk(t - 1, k)
                               ? std::max(0, c.esw_count_of_block[static_cast<std::size_t>(k)] - 2)
                               : 0) +
                          1;
                if (events[static_cast<std::size_t>(k)] > cap) return false;
            }
            return true;
        };
        std::function<void(std::size_t)> rec = [&](std::size_t i) {
            if (i == esw.size()) {
                if (ok_caps(cur)) sets.push_back(cur);
                return;
            }
            rec(i + 1);
            cur.push_back(esw[i].line);
            rec(i + 1);
            cur.pop_back();
        };
        if (switching && !esw.empty()) {
            rec(0);
            std::sort(sets.begin(), sets.end());
            esw_sets = std::move(sets);
        }
    }

    // SSW subsets: matchings over islands (or forests for the unrestricted
    // policy), or exactly the forced set.
    std::vector<std::vector<int>> ssw_sets{{}};
    if (switching && forced_ssw) {
        std::vector<int> forced = *forced_ssw;
        std::sort(forced.begin(), forced.end());
        bool ok = true;
        std::vector<std::pair<int, int>> pairs;
        for (int ln : forced) {
            auto it = std::find_if(ssw.begin(), ssw.end(),
                                   [&](const SswCand& s) { return s.line == ln; });
            if (it == ssw.end()) {
                ok = false;
                break;
            }
            pairs.emplace_back(it->ia, it->ib);
        }
        if (ok && c.rules != RuleSet::Ndmgf) {
            for (std::size_t a = 0; a < pairs.size() && ok; ++a)
                for (std::size_t b = a + 1; b < pairs.size(); ++b)
                    if (pairs[a].first == pairs[b].first || pairs[a].first == pairs[b].second ||
                        pairs[a].second == pairs[b].first || pairs[a].second == pairs[b].second) {
                        ok = false;
                        break;
                    }
        }
        if (!ok) return {}; // schedule cannot be realized at this step
        ssw_sets = {std::move(forced)};
    } else if (switching && !ssw.empty()) {
        std::vector<std::vector<int>> sets;
        std::vector<std::size_t> cur;
        std::function<void(std::size_t)> rec = [&](std::size_t i) {
            if (i == ssw.size()) {
                std::vector<int> lines;
                for (std::size_t j : cur) lines.push_back(ssw[j].line);
                std::sort(lines.begin(), lines.end());
                sets.push_back(std::move(lines));
                return;
            }
            rec(i + 1);
            // adding candidate i must keep the merge structure admissible
            bool ok = true;
            if (c.rules == RuleSet::Ndmgf) {
                // forest over islands: no repeated pair, no cycle
                IslandView tmp;
                tmp.comp.resize(iv.comp.size());
                for (std::size_t z = 0; z < iv.comp.size(); ++z)
                    tmp.comp[z] = static_cast<int>(z);
                for (std::size_t j : cur) {
                    int a = tmp.find(ssw[j].ia), b = tmp.find(ssw[j].ib);
                    if (a != b) tmp.comp[static_cast<std::size_t>(a)] = b;
                }
                if (tmp.find(ssw[i].ia) == tmp.find(ssw[i].ib)) ok = false;
            } else {
                for (std::size_t j : cur)
                    if (ssw[j].ia == ssw[i].ia || ssw[j].ia == ssw[i].ib ||
                        ssw[j].ib == ssw[i].ia || ssw[j].ib == ssw[i].ib)
                        ok = false;
            }
            if (ok) {
                cur.push_back(i);
                rec(i + 1);
                cur.pop_back();
            }
        };
        rec(0);
        std::sort(sets.begin(), sets.end(),
                  [](const auto& a, const auto& b) {
                      if (a.size() != b.size()) return a.size() < b.size();
                      return a < b;
                  });
        ssw_sets = std::move(sets);
    }

    // Pickup candidates depend on which blocks the bundle just energized.
    std::vector<StepActions> out;
    for (const auto& esw_set : esw_sets) {
        std::vector<std::uint8_t> live(static_cast<std::size_t>(m.blocks.num_blocks), 0);
        for (int k = 0; k < m.blocks.num_blocks; ++k) live[static_cast<std::size_t>(k)] = plan.bk(std::max(0, t - 1), k);
        if (t == 0) {
            // step 0 state comes from the self-start rules, not from t-1
            for (int k = 0; k < m.blocks.num_blocks; ++k) live[static_cast<std::size_t>(k)] = 0;
            for (int k : m.sources.bess_blocks)
                if (k != c.sc.damaged_block) live[static_cast<std::size_t>(k)] = 1;
        }
        for (int ln : esw_set) {
            const Line& line = m.feeder.lines[static_cast<std::size_t>(ln)];
            live[static_cast<std::size_t>(m.blocks.block_of_bus[static_cast<std::size_t>(line.from)])] = 1;
            live[static_cast<std::size_t>(m.blocks.block_of_bus[static_cast<std::size_t>(line.to)])] = 1;
        }
        if (m.sources.tg_block >= 0 && c.sc.tg_available(t) &&
            m.sources.tg_block != c.sc.damaged_block)
            live[static_cast<std::size_t>(m.sources.tg_block)] = 1;

        std::vector<int> cand;
        for (std::size_t i = 0; i < c.nl_buses.size(); ++i) {
            int b = c.nl_buses[i];
            if (t > 0 && plan.nlb(t - 1, b)) continue;
            int k = m.blocks.block_of_bus[static_cast<std::size_t>(b)];
            if (!live[static_cast<std::size_t>(k)]) continue;
            cand.push_back(b);
        }

        std::vector<std::vector<int>> pick_sets;
        if (cand.size() <= 6) {
            for (std::uint32_t mask = 0; mask < (1u << cand.size()); ++mask) {
                std::vector<int> ps;
                for (std::size_t i = 0; i < cand.size(); ++i)
                    if (mask & (1u << i)) ps.push_back(cand[i]);
                pick_sets.push_back(std::move(ps));
            }
            std::sort(pick_sets.begin(), pick_sets.end(),
                      [](const auto& a, const auto& b) {
                          if (a.size() != b.size()) return a.size() < b.size();
                          return a < b;
                      });
        } else {
            // nested greedy prefixes, highest immediate value first
            std::vector<std::pair<double, int>> scored;
            for (int b : cand) {
                double v = 0.0;
                for (std::size_t i = 0; i < c.nl_buses.size(); ++i)
                    if (c.nl_buses[i] == b)
                        for (int ld : c.nl_loads_of_bus[i])
                            v += c.dval[static_cast<std::size_t>(
                                t * static_cast<int>(m.feeder.loads.size()) + ld)];
                scored.emplace_back(-v, b);
            }
            std::sort(scored.begin(), scored.end());
            pick_sets.push_back({});
            std::vector<int> prefix;
            for (const auto& [negv, b] : scored) {
                prefix.push_back(b);
                auto sorted = prefix;
                std::sort(sorted.begin(), sorted.end());
                pick_sets.push_back(sorted);
            }
        }

        for (const auto& ssw_set : ssw_sets)
            for (const auto& ps : pick_sets) {
                StepActions act;
                act.close_esw = esw_set;
                act.close_ssw = ssw_set;
                act.pickup_buses = ps;
                out.push_back(std::move(act));
            }
    }
    return out;
}

struct Node {
    long id = 0;
    int depth = 0;
    int switches = 0;
    double value = 0.0;
    double bound = 0.0;
    std::vector<StepActions> acts;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound < b.bound; // max-heap on bound
        if (a.switches != b.switches) return a.switches > b.switches;
        return a.id > b.id;
    }
};

/// Rebuild the plan prefix a node's action list encodes. The steps were all
/// validated when the node was created, so fill errors here are logic bugs.
RestorationPlan replay(const Ctx& c, const std::vector<StepActions>& acts) {
    RestorationPlan plan = RestorationPlan::sized(c.m, c.T);
    for (std::size_t t = 0; t < acts.size(); ++t) {
        apply_actions(c.m, c.sc, plan, static_cast<int>(t), acts[t]);
        auto err = fill_step(c.m, c.sc, c.cfg, plan, static_cast<int>(t));
        if (err) throw std::logic_error("replay failed at step " + std::to_string(t) + ": " + *err);
    }
    return plan;
}

/// Try one bundle on top of a prefix plan. Returns the extended value on
/// success and leaves `work` holding the extended plan.
std::optional<double> try_bundle(const Ctx& c, const RestorationPlan& prefix, int t,
                                 const StepActions& act, double value, RestorationPlan& work) {
    work = prefix;
    apply_actions(c.m, c.sc, work, t, act);
    if (fill_step(c.m, c.sc, c.cfg, work, t)) return std::nullopt;
    ViolationReport rep;
    validate_step(c.m, c.sc, c.cfg, work, t, c.rules, rep);
    if (!rep.ok()) return std::nullopt;
    return value + step_value(c.m, c.cfg, work, t);
}

struct SearchOutcome {
    std::optional<RestorationPlan> best;
    SolveStats stats;
    bool exhausted = false;
};

/// Core engine shared by solve() and the exhaustive oracle. `initial_best`
/// prunes against an incumbent objective found outside this call.
SearchOutcome run_search(const Ctx& c, const std::optional<PartialAssignment>& schedule,
                         const SolveBudget& budget, bool use_bound,
                         double initial_best = -1.0) {
    SearchOutcome res;
    auto t0 = Clock::now();

    std::vector<std::vector<int>> forced_by_step;
    if (schedule) {
        auto ssw_edges = c.m.backbone.ssw_edges();
        forced_by_step.assign(static_cast<std::size_t>(c.T), {});
        for (int t = 0; t < c.T; ++t)
            for (int e = 0; e < schedule->n_ssw; ++e) {
                bool now = schedule->ssw_at(t, e);
                bool before = t > 0 && schedule->ssw_at(t - 1, e);
                if (now && !before)
                    forced_by_step[static_cast<std::size_t>(t)].push_back(
                        c.m.backbone.edges[static_cast<std::size_t>(ssw_edges[static_cast<std::size_t>(e)])].line);
            }
    }

    std::unordered_map<std::uint64_t, double> seen;
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    long next_id = 0;
    double best_value = initial_best;

    auto note_leaf = [&](const Node& leaf) {
        if (leaf.value > best_value) {
            best_value = leaf.value;
            res.best = replay(c, leaf.acts);
            res.stats.best_objective = leaf.value;
            if (res.stats.nodes_to_first_feasible < 0) {
                res.stats.nodes_to_first_feasible = res.stats.nodes_explored;
                res.stats.ms_to_first_feasible = elapsed_ms(t0);
                res.stats.first_objective = leaf.value;
            }
        }
    };

    RestorationPlan work = RestorationPlan::sized(c.m, c.T);

    // Expands one node. Children go onto the open heap except the one with the
    // best bound, which is handed back so the caller can keep diving; leaves
    // are recorded on the spot. `prefix` must hold the plan the node's action
    // list encodes through depth-1.
    auto expand = [&](const Node& node, const RestorationPlan& prefix,
                      std::optional<Node>& dive_next) {
        ++res.stats.nodes_explored;
        dive_next.reset();
        int t = node.depth;
        const std::vector<int>* forced =
            schedule ? &forced_by_step[static_cast<std::size_t>(t)] : nullptr;
        auto bundles = enumerate_bundles(c, prefix, t, forced);
        for (const auto& act : bundles) {
            auto val = try_bundle(c, prefix, t, act, node.value, work);
            if (!val) continue;
            Node child;
            child.id = next_id++;
            child.depth = t + 1;
            child.switches = node.switches + static_cast<int>(act.close_esw.size()) +
                             static_cast<int>(act.close_ssw.size());
            child.value = *val;
            child.acts = node.acts;
            child.acts.push_back(act);
            if (child.depth == c.T) {
                child.bound = child.value;
                note_leaf(child);
                continue;
            }
            std::uint64_t key = state_digest(c, work, t);
            auto it = seen.find(key);
            if (it != seen.end() && it->second >= child.value) continue;
            seen[key] = child.value;
            child.bound = child.value + completion_bound(c, work, t + 1);
            if (use_bound && child.bound <= best_value) continue;
            if (!dive_next || child.bound > dive_next->bound) {
                if (dive_next) open.push(std::move(*dive_next));
                dive_next = std::move(child);
            } else {
                open.push(std::move(child));
            }
        }
    };

    auto over_budget = [&] {
        return res.stats.nodes_explored >= budget.max_nodes ||
               elapsed_ms(t0) >= budget.max_seconds * 1000.0;
    };

    Node root;
    root.id = next_id++;
    root.bound = std::numeric_limits<double>::infinity();
    open.push(root);

    while (!open.empty()) {
        if (over_budget()) break;
        Node node = open.top();
        open.pop();
        if (use_bound && node.bound <= best_value) {
            res.exhausted = true; // everything left is dominated
            break;
        }
        // Plunge: follow the best-child chain to a leaf so a complete plan
        // appears early, queueing the siblings passed over along the way.
        std::optional<Node> cur(std::move(node));
        RestorationPlan prefix =
            cur->acts.empty() ? RestorationPlan::sized(c.m, c.T) : replay(c, cur->acts);
        while (cur) {
            if (over_budget()) {
                open.push(std::move(*cur));
                break;
            }
            if (use_bound && cur->bound <= best_value) break;
            std::optional<Node> next;
            expand(*cur, prefix, next);
            if (next) {
                // extend the running prefix with the chosen action bundle
                apply_actions(c.m, c.sc, prefix, next->depth - 1, next->acts.back());
                if (fill_step(c.m, c.sc, c.cfg, prefix, next->depth - 1))
                    throw std::logic_error("dive re-fill failed");
            }
            cur = std::move(next);
        }
    }
    if (open.empty()) res.exhausted = true;
    res.stats.ms_total = elapsed_ms(t0);
    res.stats.proven_optimal = res.exhausted && res.best.has_value();
    return res;
}

} // namespace

SolveResult solve(const SystemModel& m, const ScenarioSpec& sc, const GridConfig& cfg,
                  RuleSet rules, const std::optional<PartialAssignment>& warm,
                  const SolveBudget& budget) {
    Ctx c = make_ctx(m, sc, cfg, rules);
    auto t0 = Clock::now();

    SolveResult out;
    std::optional<PartialAssignment> schedule;
    if (warm && !warm->empty()) {
        out.stats.warm_provided = true;
        out.stats.warm_family = warm->family;
        WarmCheck wc = check_warm(*warm, m, sc);
        out.stats.warm_accepted = wc.consistent;
        out.stats.warm_reject_reason = wc.reason;
        if (wc.consistent) schedule = *warm;
    }

    // Phase A: follow the pinned synchronization schedule to an incumbent.
    std::optional<RestorationPlan> incumbent;
    SolveStats phase_a;
    if (schedule) {
        SolveBudget slice;
        slice.max_nodes = std::min<long>(std::max<long>(budget.max_nodes / 2, 1), 4000);
        slice.max_seconds = budget.max_seconds / 4.0;
        auto seeded = run_search(c, schedule, slice, true);
        phase_a = seeded.stats;
        if (seeded.best) {
            incumbent = std::move(seeded.best);
            out.stats.warm_seeded = true;
        }
    }

    // Phase B: unconstrained best-first search, pruning against the seeded
    // incumbent when one exists.
    double inc_value = incumbent ? restored_value(m, sc, cfg, *incumbent) : -1.0;
    SolveBudget rest = budget;
    rest.max_nodes = std::max<long>(0, budget.max_nodes - phase_a.nodes_explored);
    rest.max_seconds = std::max(0.0, budget.max_seconds - phase_a.ms_total / 1000.0);
    auto main = run_search(c, std::nullopt, rest, true, inc_value);

    out.stats.nodes_explored = phase_a.nodes_explored + main.stats.nodes_explored;
    if (incumbent) {
        out.stats.nodes_to_first_feasible = phase_a.nodes_to_first_feasible;
        out.stats.ms_to_first_feasible = phase_a.ms_to_first_feasible;
        out.stats.first_objective = phase_a.first_objective;
    } else {
        out.stats.nodes_to_first_feasible = main.stats.nodes_to_first_feasible;
        out.stats.ms_to_first_feasible = main.stats.ms_to_first_feasible;
        out.stats.first_objective = main.stats.first_objective;
    }

    if (main.best && main.stats.best_objective > inc_value) {
        out.plan = std::move(*main.best);
        out.stats.best_objective = main.stats.best_objective;
    } else if (incumbent) {
        out.plan = std::move(*incumbent);
        out.stats.best_objective = inc_value;
    } else {
        out.plan = baseline_plan(m, sc, cfg);
        out.stats.best_objective = restored_value(m, sc, cfg, out.plan);
        out.stats.first_objective = out.stats.best_objective;
    }
    out.stats.proven_optimal = main.exhausted && (incumbent || main.best);
    out.stats.ms_total = elapsed_ms(t0);
    return out;
}

RestorationPlan brute_force_small(const SystemModel& m, const ScenarioSpec& sc,
                                  const GridConfig& cfg, RuleSet rules) {
    if (m.blocks.num_blocks > 5 || sc.horizon_steps > 6 ||
        m.backbone.ssw_edges().size() > 2)
        throw std::invalid_argument("instance too large for exhaustive search");
    Ctx c = make_ctx(m, sc, cfg, rules);
    SolveBudget unlimited;
    unlimited.max_nodes = 5000000;
    unlimited.max_seconds = 600.0;
    auto res = run_search(c, std::nullopt, unlimited, false);
    if (!res.exhausted) throw std::runtime_error("exhaustive search did not complete");
    if (!res.best) return baseline_plan(m, sc, cfg);
    return std::move(*res.best);
}

} // namespace ssdmgf
