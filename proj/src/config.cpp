#include "ssdmgf/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ssdmgf/common.hpp"

namespace ssdmgf {

using nlohmann::json;

GridConfig parse_config(const std::string& json_text, const std::string& origin) {
    GridConfig c;
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
    if (!j.is_object()) throw ParseError(origin + ": config must be a JSON object");

    for (auto& [key, val] : j.items()) {
        try {
            if (key == "alpha_cl") c.alpha_cl = val.get<double>();
            else if (key == "alpha_nl") c.alpha_nl = val.get<double>();
            else if (key == "beta") {
                auto v = val.get<std::vector<double>>();
                if (v.size() != 3) throw ParseError(origin + ": beta needs 3 entries");
                c.beta = {v[0], v[1], v[2]};
            } else if (key == "epsilon_sync") c.epsilon_sync = val.get<double>();
            else if (key == "f_floor") c.f_floor = val.get<double>();
            else if (key == "f_ceil") c.f_ceil = val.get<double>();
            else if (key == "rocof_gain") c.rocof_gain = val.get<double>();
            else if (key == "rocof_max") c.rocof_max = val.get<double>();
            else if (key == "nadir_gain") c.nadir_gain = val.get<double>();
            else if (key == "nadir_floor") c.nadir_floor = val.get<double>();
            else if (key == "v_floor") c.v_floor = val.get<double>();
            else if (key == "v_ceil") c.v_ceil = val.get<double>();
            else if (key == "lin_tol") c.lin_tol = val.get<double>();
            else if (key == "quad_tol") c.quad_tol = val.get<double>();
            else if (key == "pv_delay_steps") c.pv_delay_steps = val.get<int>();
            else if (key == "dt_minutes") c.dt_minutes = val.get<double>();
            else if (key == "horizon_steps") c.horizon_steps = val.get<int>();
            else if (key == "lambda") c.lambda = val.get<double>();
            else if (key == "budget_nodes") c.budget_nodes = val.get<std::uint64_t>();
            else if (key == "budget_seconds") c.budget_seconds = val.get<double>();
            else throw ParseError(origin + ": unknown config key '" + key + "'");
        } catch (const json::exception& e) {
            throw ParseError(origin + ": key '" + key + "': " + e.what());
        }
    }
    if (c.dt_minutes <= 0 || c.horizon_steps <= 0)
        throw ParseError(origin + ": time discretization must be positive");
    if (c.epsilon_sync <= 0) throw ParseError(origin + ": epsilon_sync must be positive");
    return c;
}

GridConfig load_config(const std::string& path) {
    if (path.empty()) return GridConfig{};
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string config_to_json(const GridConfig& c) {
    json j;
    j["alpha_cl"] = c.alpha_cl;
    j["alpha_nl"] = c.alpha_nl;
    j["beta"] = {c.beta[0], c.beta[1], c.beta[2]};
    j["epsilon_sync"] = c.epsilon_sync;
    j["f_floor"] = c.f_floor;
    j["f_ceil"] = c.f_ceil;
    j["rocof_gain"] = c.rocof_gain;
    j["rocof_max"] = c.rocof_max;
    j["nadir_gain"] = c.nadir_gain;
    j["nadir_floor"] = c.nadir_floor;
    j["v_floor"] = c.v_floor;
    j["v_ceil"] = c.v_ceil;
    j["lin_tol"] = c.lin_tol;
    j["quad_tol"] = c.quad_tol;
    j["pv_delay_steps"] = c.pv_delay_steps;
    j["dt_minutes"] = c.dt_minutes;
    j["horizon_steps"] = c.horizon_steps;
    j["lambda"] = c.lambda;
    j["budget_nodes"] = c.budget_nodes;
    j["budget_seconds"] = c.budget_seconds;
    return j.dump(2);
}

} // namespace ssdmgf
