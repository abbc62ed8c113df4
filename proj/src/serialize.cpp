#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ssdmgf/serialize.hpp"

namespace ssdmgf {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    out << text;
    if (!out.good()) throw ParseError("short write on " + path);
}

} // namespace

void save_plan(const SystemModel& m, const ScenarioSpec& sc, const GridConfig& cfg,
               RuleSet rules, const RestorationPlan& plan, const std::string& path) {
    std::ostringstream out;
    out << "family,t,a,b,value\n";
    char buf[96];
    auto row_i = [&](const char* fam, int t, int a, int b, long long v) {
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%lld\n", fam, t, a, b, v);
        out << buf;
    };
    auto row_d = [&](const char* fam, int t, int a, int b, double v) {
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%.17g\n", fam, t, a, b, v);
        out << buf;
    };
    for (int t = 0; t < plan.T; ++t) {
        row_i("utg", t, -1, -1, plan.u_tg[static_cast<std::size_t>(t)]);
        row_i("s", t, -1, -1, plan.s_count[static_cast<std::size_t>(t)]);
        row_i("mode", t, -1, -1, plan.mode_index[static_cast<std::size_t>(t)]);
        for (int k = 0; k < plan.num_blocks; ++k) row_i("bk", t, k, -1, plan.bk(t, k));
        for (int l = 0; l < plan.num_lines; ++l) row_i("line", t, l, -1, plan.line(t, l));
        for (int b = 0; b < plan.num_buses; ++b) row_i("nlb", t, b, -1, plan.nlb(t, b));
        for (int i = 0; i < plan.n_bs; ++i)
            for (int j = i + 1; j < plan.n_bs; ++j)
                row_i("sync", t, i, j, plan.sync[static_cast<std::size_t>(t)].at(i, j));
        for (int k = 0; k < plan.num_blocks; ++k) row_d("fblk", t, k, -1, plan.fblk(t, k));
        for (int b = 0; b < plan.num_buses; ++b) row_d("fbus", t, b, -1, plan.fbus(t, b));
        for (int d = 0; d < plan.num_devices; ++d) {
            row_d("soc", t, d, -1, plan.soc_at(t, d));
            for (int n = 0; n < 3; ++n) {
                row_d("devp", t, d, n, plan.dev_p(t, d, n));
                row_d("devq", t, d, n, plan.dev_q(t, d, n));
            }
        }
        for (int ld = 0; ld < plan.num_loads; ++ld)
            for (int n = 0; n < 3; ++n) {
                row_d("loadp", t, ld, n, plan.load_p(t, ld, n));
                row_d("loadq", t, ld, n, plan.load_q(t, ld, n));
            }
        for (int l = 0; l < plan.num_lines; ++l)
            for (int n = 0; n < 3; ++n) {
                row_d("flowp", t, l, n, plan.flow_p(t, l, n));
                row_d("flowq", t, l, n, plan.flow_q(t, l, n));
            }
        for (int b = 0; b < plan.num_buses; ++b)
            for (int n = 0; n < 3; ++n) row_d("vsq", t, b, n, plan.vsq(t, b, n));
    }
    write_file(path, out.str());

    json man;
    man["horizon_steps"] = plan.T;
    man["dt_minutes"] = sc.dt_minutes;
    man["feeder"] = m.feeder.source_path;
    man["feeder_hash"] = to_hex(m.feeder.file_hash);
    man["scenario"] = json::parse(scenario_to_json(sc));
    man["rules"] = to_string(rules);
    man["objective"] = restored_value(m, sc, cfg, plan);
    man["config"] = json::parse(config_to_json(cfg));
    write_file(path + ".manifest.json", man.dump(2) + "\n");
}

RestorationPlan load_plan(const SystemModel& m, const std::string& path) {
    std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "family,t,a,b,value")
        throw ParseError(path + ": expected plan CSV header");

    struct Cell {
        std::string fam;
        int t, a, b;
        double v;
    };
    std::vector<Cell> cells;
    int T = 0;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto f = split_fields(line, ',');
        if (f.size() != 5)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 5 fields");
        Cell c;
        c.fam = f[0];
        try {
            c.t = std::stoi(f[1]);
            c.a = std::stoi(f[2]);
            c.b = std::stoi(f[3]);
            c.v = std::stod(f[4]);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad number");
        }
        if (c.t < 0) throw ParseError(path + ":" + std::to_string(lineno) + ": negative step");
        T = std::max(T, c.t + 1);
        cells.push_back(std::move(c));
    }
    if (T == 0) throw ParseError(path + ": no data rows");

    RestorationPlan plan = RestorationPlan::sized(m, T);
    auto need = [&](bool ok, const Cell& c) {
        if (!ok)
            throw ParseError(path + ": index out of range in family " + c.fam + " at t=" +
                             std::to_string(c.t));
    };
    for (const Cell& c : cells) {
        int t = c.t, a = c.a, b = c.b;
        if (c.fam == "utg") {
            plan.u_tg[static_cast<std::size_t>(t)] = c.v != 0;
        } else if (c.fam == "s") {
            plan.s_count[static_cast<std::size_t>(t)] = static_cast<int>(c.v);
        } else if (c.fam == "mode") {
            plan.mode_index[static_cast<std::size_t>(t)] = static_cast<int>(c.v);
        } else if (c.fam == "bk") {
            need(a >= 0 && a < plan.num_blocks, c);
            plan.u_bk[RestorationPlan::idx2(t, a, plan.num_blocks)] = c.v != 0;
        } else if (c.fam == "line") {
            need(a >= 0 && a < plan.num_lines, c);
            plan.u_line[RestorationPlan::idx2(t, a, plan.num_lines)] = c.v != 0;
        } else if (c.fam == "nlb") {
            need(a >= 0 && a < plan.num_buses, c);
            plan.u_nlb[RestorationPlan::idx2(t, a, plan.num_buses)] = c.v != 0;
        } else if (c.fam == "sync") {
            need(a >= 0 && b >= 0 && a < plan.n_bs && b < plan.n_bs, c);
            plan.sync[static_cast<std::size_t>(t)].set(a, b, c.v != 0);
        } else if (c.fam == "fblk") {
            need(a >= 0 && a < plan.num_blocks, c);
            plan.f_block[RestorationPlan::idx2(t, a, plan.num_blocks)] = c.v;
        } else if (c.fam == "fbus") {
            need(a >= 0 && a < plan.num_buses, c);
            plan.f_bus[RestorationPlan::idx2(t, a, plan.num_buses)] = c.v;
        } else if (c.fam == "soc") {
            need(a >= 0 && a < plan.num_devices, c);
            plan.soc[RestorationPlan::idx2(t, a, plan.num_devices)] = c.v;
        } else if (c.fam == "devp" || c.fam == "devq") {
            need(a >= 0 && a < plan.num_devices && b >= 0 && b < 3, c);
            (c.fam == "devp" ? plan.p_dev : plan.q_dev)[RestorationPlan::idx3(
                t, a, b, plan.num_devices)] = c.v;
        } else if (c.fam == "loadp" || c.fam == "loadq") {
            need(a >= 0 && a < plan.num_loads && b >= 0 && b < 3, c);
            (c.fam == "loadp" ? plan.p_load : plan.q_load)[RestorationPlan::idx3(
                t, a, b, plan.num_loads)] = c.v;
        } else if (c.fam == "flowp" || c.fam == "flowq") {
            need(a >= 0 && a < plan.num_lines && b >= 0 && b < 3, c);
            (c.fam == "flowp" ? plan.p_flow : plan.q_flow)[RestorationPlan::idx3(
                t, a, b, plan.num_lines)] = c.v;
        } else if (c.fam == "vsq") {
            need(a >= 0 && a < plan.num_buses && b >= 0 && b < 3, c);
            plan.v_sq[RestorationPlan::idx3(t, a, b, plan.num_buses)] = c.v;
        } else {
            throw ParseError(path + ": unknown family " + c.fam);
        }
    }

    std::ifstream man(path + ".manifest.json");
    if (man) {
        json j = json::parse(man, nullptr, true, true);
        if (j.contains("feeder_hash") &&
            j["feeder_hash"].get<std::string>() != to_hex(m.feeder.file_hash))
            throw ParseError(path + ": manifest feeder hash does not match the loaded feeder");
    }
    return plan;
}

std::string violations_to_json(const ViolationReport& rep) {
    json arr = json::array();
    for (const auto& v : rep.violations) {
        json j;
        j["constraint"] = v.constraint;
        j["t"] = v.t;
        j["entity"] = v.entity;
        j["residual"] = v.residual;
        if (!v.detail.empty()) j["detail"] = v.detail;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::string stats_to_json(const SolveStats& st) {
    json j;
    j["nodes_explored"] = st.nodes_explored;
    j["nodes_to_first_feasible"] = st.nodes_to_first_feasible;
    j["ms_total"] = st.ms_total;
    j["ms_to_first_feasible"] = st.ms_to_first_feasible;
    j["first_objective"] = st.first_objective;
    j["best_objective"] = st.best_objective;
    j["proven_optimal"] = st.proven_optimal;
    j["warm_provided"] = st.warm_provided;
    j["warm_accepted"] = st.warm_accepted;
    j["warm_seeded"] = st.warm_seeded;
    j["warm_family"] = st.warm_family;
    j["warm_reject_reason"] = st.warm_reject_reason;
    return j.dump(2) + "\n";
}

std::string scenario_to_json(const ScenarioSpec& sc) {
    json j;
    j["id"] = sc.id;
    j["season"] = sc.season;
    j["t0_hour"] = sc.t0_hour;
    j["nu_minutes"] = sc.nu_minutes;
    j["damaged_block"] = sc.damaged_block;
    j["horizon_steps"] = sc.horizon_steps;
    j["dt_minutes"] = sc.dt_minutes;
    j["seed"] = sc.seed;
    return j.dump(2) + "\n";
}

ScenarioSpec scenario_from_json_text(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
    ScenarioSpec sc;
    try {
        sc.id = j.value("id", std::string{});
        sc.season = j.value("season", std::string{});
        sc.t0_hour = j.value("t0_hour", sc.t0_hour);
        sc.nu_minutes = j.value("nu_minutes", sc.nu_minutes);
        sc.damaged_block = j.value("damaged_block", sc.damaged_block);
        sc.horizon_steps = j.value("horizon_steps", sc.horizon_steps);
        sc.dt_minutes = j.value("dt_minutes", sc.dt_minutes);
        sc.seed = j.value("seed", sc.seed);
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
    if (sc.horizon_steps <= 0) throw ParseError(origin + ": horizon_steps must be positive");
    if (sc.dt_minutes <= 0) throw ParseError(origin + ": dt_minutes must be positive");
    return sc;
}

ScenarioSpec load_scenario(const std::string& path) {
    return scenario_from_json_text(read_file(path), path);
}

void save_scenario(const std::string& path, const ScenarioSpec& sc) {
    write_file(path, scenario_to_json(sc));
}

namespace {

void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
std::uint32_t get_u32(const std::string& s, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + static_cast<std::size_t>(i)]))
             << (8 * i);
    return v;
}

} // namespace

void save_features(const std::string& path, const FeatureTensor& x) {
    std::string buf = "SSDF";
    put_u32(buf, static_cast<std::uint32_t>(x.T));
    put_u32(buf, static_cast<std::uint32_t>(x.K));
    put_u32(buf, static_cast<std::uint32_t>(x.F));
    put_u32(buf, static_cast<std::uint32_t>(x.E));
    auto put_f64 = [&](double d) {
        static_assert(sizeof(double) == 8);
        char raw[8];
        std::memcpy(raw, &d, 8);
        buf.append(raw, 8);
    };
    for (double d : x.x) put_f64(d);
    for (double d : x.edge_flags) put_f64(d);
    write_file(path, buf);
}

FeatureTensor load_features(const std::string& path) {
    std::string buf = read_file(path);
    if (buf.size() < 20 || buf.compare(0, 4, "SSDF") != 0)
        throw ParseError(path + ": not a feature tensor file");
    FeatureTensor x;
    x.T = static_cast<int>(get_u32(buf, 4));
    x.K = static_cast<int>(get_u32(buf, 8));
    x.F = static_cast<int>(get_u32(buf, 12));
    x.E = static_cast<int>(get_u32(buf, 16));
    std::size_t nx = static_cast<std::size_t>(x.T) * static_cast<std::size_t>(x.K) *
                     static_cast<std::size_t>(x.F);
    std::size_t ne = static_cast<std::size_t>(x.E);
    if (buf.size() != 20 + 8 * (nx + ne))
        throw ParseError(path + ": truncated feature tensor");
    auto get_f64 = [&](std::size_t at) {
        double d;
        std::memcpy(&d, buf.data() + at, 8);
        return d;
    };
    x.x.resize(nx);
    x.edge_flags.resize(ne);
    for (std::size_t i = 0; i < nx; ++i) x.x[i] = get_f64(20 + 8 * i);
    for (std::size_t i = 0; i < ne; ++i) x.edge_flags[i] = get_f64(20 + 8 * (nx + i));
    return x;
}

} // namespace ssdmgf
