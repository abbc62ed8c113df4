// Command-line front end. Every subcommand is a thin wrapper over one or two
// library calls; all knobs resolve as flags > config file > built-in defaults
// and the effective configuration is echoed into each output manifest.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ssdmgf/feasibility.hpp"
#include "ssdmgf/optimizer.hpp"
#include "ssdmgf/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ssdmgf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolations = 2;
constexpr int kExitError = 3;

/// Options shared by every subcommand. Optionals hold flag overrides that
/// beat the config file.
struct Common {
    std::string feeder_path;
    std::string config_path;
    std::uint64_t seed = 42;

    std::optional<double> alpha_cl, alpha_nl, lambda, dt_minutes, epsilon_sync;
    std::optional<double> budget_seconds;
    std::optional<long long> budget_nodes;
    std::optional<int> horizon_steps, pv_delay_steps;
};

void add_common(CLI::App* cmd, Common& c, bool feeder_required = true) {
    auto* f = cmd->add_option("--feeder", c.feeder_path, "feeder description file");
    if (feeder_required) f->required();
    cmd->add_option("--config", c.config_path, "JSON config file");
    cmd->add_option("--seed", c.seed, "random seed (default 42)");
    cmd->add_option("--alpha-cl", c.alpha_cl, "critical load weight");
    cmd->add_option("--alpha-nl", c.alpha_nl, "non-critical load weight");
    cmd->add_option("--lambda", c.lambda, "root-resolution threshold");
    cmd->add_option("--dt-minutes", c.dt_minutes, "step length in minutes");
    cmd->add_option("--horizon-steps", c.horizon_steps, "number of plan steps");
    cmd->add_option("--epsilon-sync", c.epsilon_sync, "sync frequency window, Hz");
    cmd->add_option("--pv-delay-steps", c.pv_delay_steps, "PV reconnection delay");
    cmd->add_option("--budget-nodes", c.budget_nodes, "search node budget");
    cmd->add_option("--budget-seconds", c.budget_seconds, "search time budget");
}

GridConfig effective_config(const Common& c) {
    GridConfig cfg = load_config(c.config_path);
    if (c.alpha_cl) cfg.alpha_cl = *c.alpha_cl;
    if (c.alpha_nl) cfg.alpha_nl = *c.alpha_nl;
    if (c.lambda) cfg.lambda = *c.lambda;
    if (c.dt_minutes) cfg.dt_minutes = *c.dt_minutes;
    if (c.horizon_steps) cfg.horizon_steps = *c.horizon_steps;
    if (c.epsilon_sync) cfg.epsilon_sync = *c.epsilon_sync;
    if (c.pv_delay_steps) cfg.pv_delay_steps = *c.pv_delay_steps;
    if (c.budget_nodes) cfg.budget_nodes = static_cast<std::uint64_t>(*c.budget_nodes);
    if (c.budget_seconds) cfg.budget_seconds = *c.budget_seconds;
    return cfg;
}

SolveBudget budget_from(const GridConfig& cfg) {
    SolveBudget b;
    b.max_nodes = static_cast<long>(cfg.budget_nodes);
    b.max_seconds = cfg.budget_seconds;
    return b;
}

/// A scenario loaded from disk adopts the effective horizon/step only when
/// the file carries none of its own; files written by `scenarios` always do.
ScenarioSpec read_scenario(const std::string& path) { return load_scenario(path); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

json config_echo(const GridConfig& cfg) { return json::parse(config_to_json(cfg)); }

void emit(const std::string& out_path, const json& j) {
    std::string text = j.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_text(out_path, text);
}

int worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 2;
    if (const char* env = std::getenv("SSDMGF_THREADS")) {
        long v = std::atol(env);
        if (v > 0 && static_cast<unsigned>(v) < n) n = static_cast<unsigned>(v);
    }
    return static_cast<int>(n);
}

// ---------------------------------------------------------------- ingest --

int cmd_ingest(const Common& c, const std::string& out_path) {
    GridConfig cfg = effective_config(c);
    Feeder f = load_feeder(c.feeder_path);
    SystemModel m = SystemModel::build(f);
    json j;
    j["feeder"] = f.source_path;
    j["feeder_hash"] = to_hex(f.file_hash);
    j["buses"] = f.buses.size();
    j["lines"] = f.lines.size();
    j["devices"] = f.devices.size();
    j["loads"] = f.loads.size();
    j["blocks"] = m.blocks.num_blocks;
    j["switches"] = m.backbone.edges.size();
    j["sync_switches"] = m.backbone.ssw_edges().size();
    json bs = json::array();
    for (int k : m.bs_blocks) bs.push_back(k);
    j["black_start_blocks"] = bs;
    j["has_grid_tie"] = f.has_tg();
    j["modes"] = m.catalogue.modes.size();
    j["config"] = config_echo(cfg);
    emit(out_path, j);
    return kExitOk;
}

// ----------------------------------------------------------------- modes --

int cmd_modes(const Common& c, const std::string& tg_sel, const std::string& out_path) {
    GridConfig cfg = effective_config(c);
    Feeder f = load_feeder(c.feeder_path);
    SystemModel m = SystemModel::build(f);
    json arr = json::array();
    std::map<int, int> histogram;
    for (const auto& mo : m.catalogue.modes) {
        if (tg_sel == "0" && mo.tg_present) continue;
        if (tg_sel == "1" && !mo.tg_present) continue;
        json parts = json::array();
        for (const auto& part : mo.parts) {
            json p = json::array();
            for (int k : part) p.push_back(k);
            parts.push_back(p);
        }
        arr.push_back(json{{"tg", mo.tg_present ? 1 : 0},
                           {"class", mo.klass},
                           {"parts", parts}});
        ++histogram[mo.klass];
    }
    json hist;
    for (const auto& [k, n] : histogram) hist[std::to_string(k)] = n;
    json j{{"feeder_hash", to_hex(f.file_hash)},
           {"count", arr.size()},
           {"class_histogram", hist},
           {"modes", arr},
           {"config", config_echo(cfg)}};
    emit(out_path, j);
    return kExitOk;
}

// ------------------------------------------------------------- scenarios --

int cmd_scenarios(const Common& c, const std::string& out_dir) {
    GridConfig cfg = effective_config(c);
    Feeder f = load_feeder(c.feeder_path);
    SystemModel m = SystemModel::build(f);
    ScenarioSet set = generate_scenarios(f, m.blocks, m.sources, cfg, c.seed);
    fs::create_directories(out_dir);
    json listing = json::array();
    for (std::size_t i = 0; i < set.scenarios.size(); ++i) {
        const ScenarioSpec& sc = set.scenarios[i];
        std::string file = sc.id + ".json";
        save_scenario((fs::path(out_dir) / file).string(), sc);
        listing.push_back(json{{"id", sc.id},
                               {"file", file},
                               {"split", to_string(set.split[i])},
                               {"season", sc.season},
                               {"t0_hour", sc.t0_hour},
                               {"nu_minutes", sc.nu_minutes},
                               {"damaged_block", sc.damaged_block}});
    }
    std::size_t n_train = 0, n_val = 0, n_test = 0;
    for (Split s : set.split) {
        if (s == Split::Train) ++n_train;
        if (s == Split::Val) ++n_val;
        if (s == Split::Test) ++n_test;
    }
    json man{{"feeder_hash", to_hex(f.file_hash)},
             {"count", set.scenarios.size()},
             {"train", n_train},
             {"val", n_val},
             {"test", n_test},
             {"seed", c.seed},
             {"scenarios", listing},
             {"config", config_echo(cfg)}};
    write_text((fs::path(out_dir) / "manifest.json").string(), man.dump(2) + "\n");
    std::cout << "wrote " << set.scenarios.size() << " scenarios (" << n_train << " train, "
              << n_val << " val, " << n_test << " test) to " << out_dir << "\n";
    return kExitOk;
}

// -------------------------------------------------------------- features --

int cmd_features(const Common& c, const std::string& sc_path, const std::string& out_path) {
    GridConfig cfg = effective_config(c);
    Feeder f = load_feeder(c.feeder_path);
    SystemModel m = SystemModel::build(f);
    ScenarioSpec sc = read_scenario(sc_path);
    FeatureTensor ft = build_features(f, m.blocks, m.backbone, m.sources, sc, cfg);
    save_features(out_path, ft);
    json man{{"scenario", sc.id},
             {"T", ft.T},
             {"K", ft.K},
             {"F", ft.F},
             {"E", ft.E},
             {"feeder_hash", to_hex(f.file_hash)},
             {"config", config_echo(cfg)}};
    write_text(out_path + ".manifest.json", man.dump(2) + "\n");
    std::cout << "features " << ft.T << "x" << ft.K << "x" << ft.F << " + " << ft.E
              << " edge flags -> " << out_path << "\n";
    return kExitOk;
}

// ----------------------------------------------------------------- solve --

std::optional<PartialAssignment> make_warm(const std::string& spec, const SystemModel& m,
                                           const ScenarioSpec& sc, const GridConfig& cfg,
                                           RuleSet rules, std::uint64_t seed,
                                           const SolveBudget& budget) {
    if (spec.empty() || spec == "none") return std::nullopt;
    if (spec == "zero") return make_azws(m, sc);
    if (spec == "random") return make_rws(m, sc, seed);
    if (spec == "oracle") {
        SolveResult ref = solve(m, sc, cfg, rules, std::nullopt, budget);
        return warm_from_plan(ref.plan, m);
    }
    return load_warm(spec); // anything else is a path to a saved assignment
}

int cmd_solve(const Common& c, const std::string& sc_path, const std::string& rules_name,
              const std::string& warm_spec, const std::string& out_path,
              const std::string& stats_path) {
    GridConfig cfg = effective_config(c);
    Feeder f = load_feeder(c.feeder_path);
    SystemModel m = SystemModel::build(f);
    ScenarioSpec sc = read_scenario(sc_path);
    RuleSet rules = rule_set_from_string(rules_name);
    SolveBudget budget = budget_from(cfg);
    auto warm = make_warm(warm_spec, m, sc, cfg, rules, c.seed, budget);
    SolveResult res = solve(m, sc, cfg, rules, warm, budget);
    save_plan(m, sc, cfg, rules, res.plan, out_path);
    json st = json::parse(stats_to_json(res.stats));
    st["scenario"] = sc.id;
    st["rules"] = to_string(rules);
    st["config"] = config_echo(cfg);
    if (!stats_path.empty()) write_text(stats_path, st.dump(2) + "\n");
    std::cout << "objective " << res.stats.best_objective << " after "
              << res.stats.nodes_explored << " nodes ("
              << (res.stats.proven_optimal ? "optimal" : "budget-limited") << ") -> "
              << out_path << "\n";
    return kExitOk;
}

// -------------------------------------------------------------- validate --

int cmd_validate(const Common& c, const std::string& sc_path, const std::string& plan_path,
                 const std::string& rules_name, const std::string& out_path) {
    GridConfig cfg = effective_config(c);
    Feeder f = load_feeder(c.feeder_path);
    SystemModel m = SystemModel::build(f);
    ScenarioSpec sc = read_scenario(sc_path);
    RuleSet rules = rule_set_from_string(rules_name);
    RestorationPlan plan = load_plan(m, plan_path);
    ViolationReport rep = validate_plan(m, sc, cfg, plan, rules);
    if (!out_path.empty()) write_text(out_path, violations_to_json(rep) + "\n");
    if (rep.ok()) {
        std::cout << "plan is feasible under " << to_string(rules) << " rules\n";
        return kExitOk;
    }
    std::cout << rep.violations.size() << " violations\n" << rep.summary() << "\n";
    return kExitViolations;
}

// --------------------------------------------------------------- resolve --

int cmd_resolve(const Common& c, const std::string& sc_path, const std::string& logits_path,
                const std::string& out_path) {
    GridConfig cfg = effective_config(c);
    Feeder f = load_feeder(c.feeder_path);
    SystemModel m = SystemModel::build(f);
    ScenarioSpec sc = read_scenario(sc_path);
    Logits z = logits_path.empty() ? heuristic_logits(m, sc, cfg) : load_logits(logits_path);
    FeasibleOutputs fo = resolve_sequence(z, make_resolve_options(m, sc, cfg.lambda));
    save_feasible(out_path, fo);
    int closures = 0;
    for (std::uint8_t s : fo.sync) closures += s;
    std::cout << "resolved " << fo.T << " steps, " << closures << " closures -> " << out_path
              << "\n";
    return kExitOk;
}

// ------------------------------------------------------------- warmstart --

int cmd_warmstart(const Common& c, const std::string& sc_path, const std::string& family,
                  const std::string& logits_path, const std::string& plan_path,
                  const std::string& out_path) {
    GridConfig cfg = effective_config(c);
    Feeder f = load_feeder(c.feeder_path);
    SystemModel m = SystemModel::build(f);
    ScenarioSpec sc = read_scenario(sc_path);

    PartialAssignment pa;
    if (family == "azws") {
        pa = make_azws(m, sc);
    } else if (family == "rws") {
        pa = make_rws(m, sc, c.seed);
    } else if (family == "caws") {
        Logits z = logits_path.empty() ? heuristic_logits(m, sc, cfg) : load_logits(logits_path);
        FeasibleOutputs fo = resolve_sequence(z, make_resolve_options(m, sc, cfg.lambda));
        pa = extract_warm_start(fo, m, sc);
    } else if (family == "osws") {
        if (plan_path.empty()) throw std::runtime_error("--family osws needs --plan");
        RestorationPlan plan = load_plan(m, plan_path);
        pa = warm_from_plan(plan, m);
    } else {
        throw std::runtime_error("unknown warm-start family: " + family);
    }
    WarmCheck wc = check_warm(pa, m, sc);
    save_warm(out_path, pa);
    std::cout << pa.family << (wc.consistent ? " consistent" : " inconsistent: " + wc.reason)
              << " -> " << out_path << "\n";
    return kExitOk;
}

// ----------------------------------------------------------------- batch --

struct BatchRow {
    std::string scenario;
    std::string split;
    std::string strategy;
    std::string plan_file;
    SolveStats stats;
    std::size_t violations = 0;
    std::string error;
};

int cmd_batch(const Common& c, const std::string& sc_dir, const std::string& strategies_csv,
              const std::string& rules_name, const std::string& split_sel, long limit,
              const std::string& out_dir) {
    GridConfig cfg = effective_config(c);
    Feeder f = load_feeder(c.feeder_path);
    SystemModel m = SystemModel::build(f);
    RuleSet rules = rule_set_from_string(rules_name);
    SolveBudget budget = budget_from(cfg);

    std::vector<std::string> strategies;
    for (const auto& s : split_fields(strategies_csv, ','))
        if (!trim(s).empty()) strategies.push_back(trim(s));
    if (strategies.empty()) throw std::runtime_error("no strategies given");

    // scenario listing comes from the manifest when present (it carries the
    // split), otherwise every *.json in the directory is taken
    struct Item {
        std::string path;
        std::string split = "train";
    };
    std::vector<Item> items;
    fs::path man_path = fs::path(sc_dir) / "manifest.json";
    if (fs::exists(man_path)) {
        std::ifstream in(man_path);
        json man;
        in >> man;
        for (const auto& row : man.at("scenarios")) {
            Item it;
            it.path = (fs::path(sc_dir) / row.at("file").get<std::string>()).string();
            it.split = row.at("split").get<std::string>();
            items.push_back(std::move(it));
        }
    } else {
        for (const auto& entry : fs::directory_iterator(sc_dir)) {
            if (entry.path().extension() != ".json") continue;
            if (entry.path().filename() == "manifest.json") continue;
            items.push_back({entry.path().string(), "train"});
        }
        std::sort(items.begin(), items.end(),
                  [](const Item& a, const Item& b) { return a.path < b.path; });
    }
    if (split_sel != "all") {
        std::vector<Item> kept;
        for (auto& it : items)
            if (it.split == split_sel) kept.push_back(std::move(it));
        items = std::move(kept);
    }
    if (limit > 0 && static_cast<long>(items.size()) > limit)
        items.resize(static_cast<std::size_t>(limit));
    if (items.empty()) throw std::runtime_error("no scenarios selected from " + sc_dir);

    fs::create_directories(out_dir);

    std::vector<BatchRow> rows(items.size() * strategies.size());
    std::atomic<std::size_t> next{0};
    const std::size_t total = rows.size();

    auto run_row = [&](std::size_t idx) {
        const Item& item = items[idx / strategies.size()];
        const std::string& strat = strategies[idx % strategies.size()];
        BatchRow& row = rows[idx];
        row.strategy = strat;
        row.split = item.split;
        try {
            ScenarioSpec sc = read_scenario(item.path);
            row.scenario = sc.id;
            std::optional<PartialAssignment> warm;
            if (strat == "wws") {
                warm = std::nullopt;
            } else if (strat == "azws") {
                warm = make_azws(m, sc);
            } else if (strat == "rws") {
                warm = make_rws(m, sc, c.seed ^ fnv1a64(sc.id.data(), sc.id.size()));
            } else if (strat == "caws") {
                Logits z = heuristic_logits(m, sc, cfg);
                FeasibleOutputs fo = resolve_sequence(z, make_resolve_options(m, sc, cfg.lambda));
                warm = extract_warm_start(fo, m, sc);
            } else if (strat == "osws") {
                SolveResult ref = solve(m, sc, cfg, rules, std::nullopt, budget);
                warm = warm_from_plan(ref.plan, m);
            } else {
                throw std::runtime_error("unknown strategy: " + strat);
            }
            SolveResult res = solve(m, sc, cfg, rules, warm, budget);
            ViolationReport rep = validate_plan(m, sc, cfg, res.plan, rules);
            row.stats = res.stats;
            row.violations = rep.violations.size();
            row.plan_file = "plan_" + sc.id + "_" + strat + ".csv";
            save_plan(m, sc, cfg, rules, res.plan, (fs::path(out_dir) / row.plan_file).string());
        } catch (const std::exception& e) {
            row.error = e.what();
            if (row.scenario.empty()) row.scenario = fs::path(item.path).stem().string();
        }
    };

    int n_workers = std::min<int>(worker_count(), static_cast<int>(total));
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                std::size_t idx = next.fetch_add(1);
                if (idx >= total) return;
                run_row(idx);
            }
        });
    for (auto& th : pool) th.join();

    // single-owner aggregation pass
    std::ostringstream csv;
    csv << "scenario,split,strategy,objective,first_objective,nodes,nodes_to_first,"
           "ms_total,ms_to_first,warm_provided,warm_accepted,warm_seeded,proven_optimal,"
           "violations,plan_file,error\n";
    for (const auto& r : rows) {
        const SolveStats& s = r.stats;
        csv << r.scenario << ',' << r.split << ',' << r.strategy << ',' << s.best_objective
            << ',' << s.first_objective << ',' << s.nodes_explored << ','
            << s.nodes_to_first_feasible << ',' << s.ms_total << ',' << s.ms_to_first_feasible
            << ',' << (s.warm_provided ? 1 : 0) << ',' << (s.warm_accepted ? 1 : 0) << ','
            << (s.warm_seeded ? 1 : 0) << ',' << (s.proven_optimal ? 1 : 0) << ','
            << r.violations << ',' << r.plan_file << ',' << r.error << '\n';
    }
    write_text((fs::path(out_dir) / "rows.csv").string(), csv.str());

    // speedup ratios vs the no-warm rows, paired per scenario
    std::map<std::string, const BatchRow*> wws_rows;
    for (const auto& r : rows)
        if (r.strategy == "wws" && r.error.empty()) wws_rows[r.scenario] = &r;
    json agg;
    for (const auto& strat : strategies) {
        if (strat == "wws") continue;
        std::vector<double> time_ratio, node_ratio, gap_gain;
        for (const auto& r : rows) {
            if (r.strategy != strat || !r.error.empty()) continue;
            auto it = wws_rows.find(r.scenario);
            if (it == wws_rows.end()) continue;
            const SolveStats& a = it->second->stats; // baseline
            const SolveStats& b = r.stats;
            if (a.ms_to_first_feasible > 0 && b.ms_to_first_feasible > 0)
                time_ratio.push_back(a.ms_to_first_feasible / b.ms_to_first_feasible);
            if (a.nodes_to_first_feasible > 0 && b.nodes_to_first_feasible > 0)
                node_ratio.push_back(static_cast<double>(a.nodes_to_first_feasible) /
                                     static_cast<double>(b.nodes_to_first_feasible));
            if (a.best_objective > 0 && b.best_objective > 0) {
                double gap_a = (a.best_objective - a.first_objective) / a.best_objective;
                double gap_b = (b.best_objective - b.first_objective) / b.best_objective;
                gap_gain.push_back(gap_a - gap_b);
            }
        }
        auto geomean = [](std::vector<double> v) {
            if (v.empty()) return 0.0;
            double s = 0.0;
            for (double x : v) s += std::log(x);
            return std::exp(s / static_cast<double>(v.size()));
        };
        auto median = [](std::vector<double> v) {
            if (v.empty()) return 0.0;
            std::sort(v.begin(), v.end());
            std::size_t n = v.size();
            return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        };
        auto mean = [](const std::vector<double>& v) {
            if (v.empty()) return 0.0;
            double s = 0.0;
            for (double x : v) s += x;
            return s / static_cast<double>(v.size());
        };
        agg[strat] = json{{"pairs", time_ratio.size()},
                          {"geomean_time_speedup", geomean(time_ratio)},
                          {"median_time_speedup", median(time_ratio)},
                          {"geomean_node_speedup", geomean(node_ratio)},
                          {"median_node_speedup", median(node_ratio)},
                          {"mean_gap_improvement", mean(gap_gain)},
                          {"median_gap_improvement", median(gap_gain)}};
    }
    json summary{{"rows", rows.size()},
                 {"strategies", strategies},
                 {"rules", to_string(rules)},
                 {"split", split_sel},
                 {"aggregates_vs_wws", agg},
                 {"config", config_echo(cfg)}};
    write_text((fs::path(out_dir) / "aggregates.json").string(), summary.dump(2) + "\n");
    std::cout << "batch: " << rows.size() << " rows across " << items.size() << " scenarios -> "
              << out_dir << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- report --

void render_plan_rows(const SystemModel& m, const GridConfig& cfg, const ScenarioSpec& sc,
                      const RestorationPlan& plan, const std::string& tag,
                      std::ostringstream& load_csv, std::ostringstream& class_csv,
                      std::ostringstream& freq_csv, std::ostringstream& soc_csv,
                      std::ostringstream& volt_csv) {
    const Feeder& f = m.feeder;
    for (int t = 0; t < plan.T; ++t) {
        double p_cl = 0.0, p_nl = 0.0;
        for (std::size_t ld = 0; ld < f.loads.size(); ++ld) {
            double p = 0.0;
            for (int n = 0; n < 3; ++n) p += plan.load_p(t, static_cast<int>(ld), n);
            (f.loads[ld].critical ? p_cl : p_nl) += p;
        }
        load_csv << sc.id << ',' << tag << ',' << t << ',' << t * cfg.dt_minutes << ','
                 << p_cl << ',' << p_nl << ',' << step_value(m, cfg, plan, t) << '\n';
        int mode = plan.mode_index[static_cast<std::size_t>(t)];
        int klass = mode >= 0 ? m.catalogue.modes[static_cast<std::size_t>(mode)].klass : 0;
        class_csv << sc.id << ',' << tag << ',' << t << ',' << klass << ',' << mode << ','
                  << plan.s_count[static_cast<std::size_t>(t)] << '\n';
        for (int k = 0; k < plan.num_blocks; ++k)
            if (plan.bk(t, k))
                freq_csv << sc.id << ',' << tag << ',' << t << ',' << k << ',' << plan.fblk(t, k)
                         << '\n';
        for (int d = 0; d < plan.num_devices; ++d)
            if (f.devices[static_cast<std::size_t>(d)].type == DeviceType::Bess)
                soc_csv << sc.id << ',' << tag << ',' << t << ','
                        << f.devices[static_cast<std::size_t>(d)].id << ',' << plan.soc_at(t, d)
                        << '\n';
        for (int b = 0; b < plan.num_buses; ++b) {
            int k = m.blocks.block_of_bus[static_cast<std::size_t>(b)];
            if (!plan.bk(t, k)) continue;
            for (int n = 0; n < 3; ++n) {
                if (!f.buses[static_cast<std::size_t>(b)].phases.has(n)) continue;
                volt_csv << sc.id << ',' << tag << ',' << t << ','
                         << f.buses[static_cast<std::size_t>(b)].name << ',' << "abc"[n] << ','
                         << std::sqrt(plan.vsq(t, b, n)) << '\n';
            }
        }
    }
}

int cmd_report(const Common& c, const std::string& sc_path, const std::string& plan_path,
               const std::string& batch_dir, const std::string& out_dir) {
    GridConfig cfg = effective_config(c);
    Feeder f = load_feeder(c.feeder_path);
    SystemModel m = SystemModel::build(f);
    fs::create_directories(out_dir);

    std::ostringstream load_csv, class_csv, freq_csv, soc_csv, volt_csv;
    load_csv << "scenario,strategy,t,minutes,p_cl,p_nl,step_value\n";
    class_csv << "scenario,strategy,t,class,mode,islands\n";
    freq_csv << "scenario,strategy,t,block,f_hz\n";
    soc_csv << "scenario,strategy,t,device,soc\n";
    volt_csv << "scenario,strategy,t,bus,phase,v_pu\n";

    if (!batch_dir.empty()) {
        std::ifstream in(fs::path(batch_dir) / "rows.csv");
        if (!in) throw std::runtime_error("missing rows.csv in " + batch_dir);
        std::string line;
        std::getline(in, line); // header
        auto cols = split_fields(line, ',');
        auto col_of = [&](const std::string& name) {
            for (std::size_t i = 0; i < cols.size(); ++i)
                if (cols[i] == name) return static_cast<int>(i);
            throw std::runtime_error("rows.csv lacks column " + name);
        };
        int c_strat = col_of("strategy"), c_plan = col_of("plan_file"), c_err = col_of("error");
        // scenario files live next to the batch output only as ids; the plan
        // manifest carries the scenario body, so reload from there
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            auto v = split_fields(line, ',');
            if (!trim(v[static_cast<std::size_t>(c_err)]).empty()) continue;
            std::string plan_file = v[static_cast<std::size_t>(c_plan)];
            if (plan_file.empty()) continue;
            std::string ppath = (fs::path(batch_dir) / plan_file).string();
            std::ifstream man(ppath + ".manifest.json");
            if (!man) throw std::runtime_error("missing manifest for " + ppath);
            json mj;
            man >> mj;
            ScenarioSpec sc =
                scenario_from_json_text(mj.at("scenario").dump(), ppath + ".manifest.json");
            RestorationPlan plan = load_plan(m, ppath);
            render_plan_rows(m, cfg, sc, plan, v[static_cast<std::size_t>(c_strat)], load_csv,
                             class_csv, freq_csv, soc_csv, volt_csv);
        }
    } else {
        if (sc_path.empty() || plan_path.empty())
            throw std::runtime_error("report needs --batch-dir or both --scenario and --plan");
        ScenarioSpec sc = read_scenario(sc_path);
        RestorationPlan plan = load_plan(m, plan_path);
        render_plan_rows(m, cfg, sc, plan, "plan", load_csv, class_csv, freq_csv, soc_csv,
                         volt_csv);
    }

    write_text((fs::path(out_dir) / "restored_load.csv").string(), load_csv.str());
    write_text((fs::path(out_dir) / "class_mode.csv").string(), class_csv.str());
    write_text((fs::path(out_dir) / "frequency.csv").string(), freq_csv.str());
    write_text((fs::path(out_dir) / "soc.csv").string(), soc_csv.str());
    write_text((fs::path(out_dir) / "voltage.csv").string(), volt_csv.str());
    json man{{"outputs",
              {"restored_load.csv", "class_mode.csv", "frequency.csv", "soc.csv",
               "voltage.csv"}},
             {"config", config_echo(cfg)}};
    write_text((fs::path(out_dir) / "manifest.json").string(), man.dump(2) + "\n");
    std::cout << "report -> " << out_dir << "\n";
    return kExitOk;
}

// ---------------------------------------------------------- export-model --

int cmd_export(const Common& c, const std::string& sc_path, const std::string& rules_name,
               const std::string& out_path) {
    GridConfig cfg = effective_config(c);
    Feeder f = load_feeder(c.feeder_path);
    SystemModel m = SystemModel::build(f);
    ScenarioSpec sc = read_scenario(sc_path);
    RuleSet rules = rule_set_from_string(rules_name);
    export_model(m, sc, cfg, rules, out_path);
    std::cout << "model -> " << out_path << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"black-start restoration toolkit for switchable distribution feeders"};
    app.require_subcommand(1);

    Common c_ingest, c_modes, c_scen, c_feat, c_solve, c_validate, c_resolve, c_warm, c_batch,
        c_report, c_export;

    auto* ingest = app.add_subcommand("ingest", "parse a feeder file and summarize the model");
    std::string ingest_out;
    add_common(ingest, c_ingest);
    ingest->add_option("--out", ingest_out, "summary JSON (stdout when omitted)");

    auto* modes = app.add_subcommand("modes", "enumerate the synchronization mode catalogue");
    std::string modes_tg = "both", modes_out;
    add_common(modes, c_modes);
    modes->add_option("--tg", modes_tg, "grid-tie filter: 0, 1, or both")
        ->check(CLI::IsMember({"0", "1", "both"}));
    modes->add_option("--out", modes_out, "catalogue JSON (stdout when omitted)");

    auto* scen = app.add_subcommand("scenarios", "generate the outage scenario grid");
    std::string scen_out;
    add_common(scen, c_scen);
    scen->add_option("--out", scen_out, "output directory")->required();

    auto* feat = app.add_subcommand("features", "build the per-scenario feature tensor");
    std::string feat_sc, feat_out;
    add_common(feat, c_feat);
    feat->add_option("--scenario", feat_sc, "scenario JSON")->required();
    feat->add_option("--out", feat_out, "feature tensor file")->required();

    auto* solve_cmd = app.add_subcommand("solve", "search for a restoration plan");
    std::string solve_sc, solve_rules = "ssdmgf", solve_warm = "none", solve_out,
                solve_stats;
    add_common(solve_cmd, c_solve);
    solve_cmd->add_option("--scenario", solve_sc, "scenario JSON")->required();
    solve_cmd->add_option("--rules", solve_rules, "ssdmgf, ndmgf, or rr");
    solve_cmd->add_option("--warm", solve_warm,
                          "none, zero, random, oracle, or a saved assignment path");
    solve_cmd->add_option("--out", solve_out, "plan CSV")->required();
    solve_cmd->add_option("--stats", solve_stats, "solver stats JSON");

    auto* val = app.add_subcommand("validate", "check a plan against every constraint");
    std::string val_sc, val_plan, val_rules = "ssdmgf", val_out;
    add_common(val, c_validate);
    val->add_option("--scenario", val_sc, "scenario JSON")->required();
    val->add_option("--plan", val_plan, "plan CSV")->required();
    val->add_option("--rules", val_rules, "ssdmgf, ndmgf, or rr");
    val->add_option("--out", val_out, "violation report JSON");

    auto* res = app.add_subcommand("resolve", "project logits onto a feasible trajectory");
    std::string res_sc, res_logits, res_out;
    add_common(res, c_resolve);
    res->add_option("--scenario", res_sc, "scenario JSON")->required();
    res->add_option("--logits", res_logits, "logits JSON (built-in heuristic when omitted)");
    res->add_option("--out", res_out, "feasible outputs JSON")->required();

    auto* warm = app.add_subcommand("warmstart", "build a warm-start assignment");
    std::string warm_sc, warm_family, warm_logits, warm_plan, warm_out;
    add_common(warm, c_warm);
    warm->add_option("--scenario", warm_sc, "scenario JSON")->required();
    warm->add_option("--family", warm_family, "azws, rws, caws, or osws")->required();
    warm->add_option("--logits", warm_logits, "logits JSON for caws");
    warm->add_option("--plan", warm_plan, "solved plan CSV for osws");
    warm->add_option("--out", warm_out, "assignment JSON")->required();

    auto* batch = app.add_subcommand("batch", "solve scenario x strategy grid under one budget");
    std::string batch_dir, batch_strats = "wws,azws,caws,osws", batch_rules = "ssdmgf",
                batch_split = "test", batch_out;
    long batch_limit = 0;
    add_common(batch, c_batch);
    batch->add_option("--scenario-dir", batch_dir, "directory from `scenarios`")->required();
    batch->add_option("--strategies", batch_strats, "comma list: wws,azws,rws,caws,osws");
    batch->add_option("--rules", batch_rules, "ssdmgf, ndmgf, or rr");
    batch->add_option("--split", batch_split, "train, val, test, or all")
        ->check(CLI::IsMember({"train", "val", "test", "all"}));
    batch->add_option("--limit", batch_limit, "cap on scenario count (0 = all)");
    batch->add_option("--out", batch_out, "output directory")->required();

    auto* rep = app.add_subcommand("report", "render plot-ready CSVs from solved plans");
    std::string rep_sc, rep_plan, rep_batch, rep_out;
    add_common(rep, c_report);
    rep->add_option("--scenario", rep_sc, "scenario JSON (single-plan mode)");
    rep->add_option("--plan", rep_plan, "plan CSV (single-plan mode)");
    rep->add_option("--batch-dir", rep_batch, "directory from `batch`");
    rep->add_option("--out", rep_out, "output directory")->required();

    auto* exp = app.add_subcommand("export-model", "write the step-coupled MILP as an LP file");
    std::string exp_sc, exp_rules = "ssdmgf", exp_out;
    add_common(exp, c_export);
    exp->add_option("--scenario", exp_sc, "scenario JSON")->required();
    exp->add_option("--rules", exp_rules, "ssdmgf, ndmgf, or rr");
    exp->add_option("--out", exp_out, "LP file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(c_ingest, ingest_out);
        if (modes->parsed()) return cmd_modes(c_modes, modes_tg, modes_out);
        if (scen->parsed()) return cmd_scenarios(c_scen, scen_out);
        if (feat->parsed()) return cmd_features(c_feat, feat_sc, feat_out);
        if (solve_cmd->parsed())
            return cmd_solve(c_solve, solve_sc, solve_rules, solve_warm, solve_out, solve_stats);
        if (val->parsed()) return cmd_validate(c_validate, val_sc, val_plan, val_rules, val_out);
        if (res->parsed()) return cmd_resolve(c_resolve, res_sc, res_logits, res_out);
        if (warm->parsed())
            return cmd_warmstart(c_warm, warm_sc, warm_family, warm_logits, warm_plan, warm_out);
        if (batch->parsed())
            return cmd_batch(c_batch, batch_dir, batch_strats, batch_rules, batch_split,
                             batch_limit, batch_out);
        if (rep->parsed()) return cmd_report(c_report, rep_sc, rep_plan, rep_batch, rep_out);
        if (exp->parsed()) return cmd_export(c_export, exp_sc, exp_rules, exp_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
