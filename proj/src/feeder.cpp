#include "ssdmgf/feeder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ssdmgf {

namespace {

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t n = 0;
        double v = std::stod(s, &n);
        if (n != s.size()) throw std::invalid_argument(s);
        if (!std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(where + ": bad number '" + s + "'");
    }
}

struct SectionLine {
    std::string section;
    std::string text;
    int lineno;
};

std::vector<SectionLine> tokenize(const std::string& text, const std::string& origin) {
    std::vector<SectionLine> out;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        if (section.empty())
            throw ParseError(origin + ":" + std::to_string(lineno) + ": data before any section header");
        out.push_back({section, line, lineno});
    }
    return out;
}

void apply_phase_mask(const PhaseSet& ps, Mat3& m) {
    for (int i = 0; i < kPhases; ++i)
        for (int j = 0; j < kPhases; ++j)
            if (!ps.has(i) || !ps.has(j)) m[static_cast<std::size_t>(i * 3 + j)] = 0.0;
}

void apply_phase_mask(const PhaseSet& ps, Vec3& v) {
    for (int i = 0; i < kPhases; ++i)
        if (!ps.has(i)) v[static_cast<std::size_t>(i)] = 0.0;
}

std::map<std::string, std::string> parse_kv(const std::vector<std::string>& fields,
                                            std::size_t first, const std::string& where) {
    std::map<std::string, std::string> kv;
    for (std::size_t i = first; i < fields.size(); ++i) {
        if (fields[i].empty()) continue;
        auto eq = fields[i].find('=');
        if (eq == std::string::npos)
            throw ParseError(where + ": expected key=value, got '" + fields[i] + "'");
        std::string key = trim(fields[i].substr(0, eq));
        std::string val = trim(fields[i].substr(eq + 1));
        if (!kv.emplace(key, val).second)
            throw ParseError(where + ": duplicate key '" + key + "'");
    }
    return kv;
}

} // namespace

int Feeder::bus_index(const std::string& name) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].name == name) return static_cast<int>(i);
    return -1;
}

int Feeder::line_index(const std::string& id) const {
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (lines[i].id == id) return static_cast<int>(i);
    return -1;
}

int Feeder::device_index(const std::string& id) const {
    for (std::size_t i = 0; i < devices.size(); ++i)
        if (devices[i].id == id) return static_cast<int>(i);
    return -1;
}

std::vector<int> Feeder::device_indices(DeviceType t) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < devices.size(); ++i)
        if (devices[i].type == t) out.push_back(static_cast<int>(i));
    return out;
}

double Feeder::profile_factor(const std::string& name, const std::string& season,
                              double minute_of_day) const {
    if (name.empty()) return 1.0;
    const Profile* p = nullptr;
    if (!season.empty()) {
        auto it = profiles.find(name + "_" + season);
        if (it != profiles.end()) p = &it->second;
    }
    if (!p) {
        auto it = profiles.find(name);
        if (it != profiles.end()) p = &it->second;
    }
    if (!p) return 1.0;
    double m = std::fmod(minute_of_day, 1440.0);
    if (m < 0) m += 1440.0;
    auto hour = static_cast<std::size_t>(m / 60.0);
    if (hour >= p->hourly.size()) hour = p->hourly.size() - 1;
    return p->hourly[hour];
}

std::string to_string(LineKind k) {
    switch (k) {
    case LineKind::Normal: return "LN";
    case LineKind::Esw: return "ESW";
    case LineKind::Ssw: return "SSW";
    }
    return "?";
}

std::string to_string(DeviceType t) {
    switch (t) {
    case DeviceType::Tg: return "TG";
    case DeviceType::Bess: return "BESS";
    case DeviceType::Pv: return "PV";
    }
    return "?";
}

Feeder parse_feeder(const std::string& text, const std::string& origin) {
    Feeder f;
    auto rows = tokenize(text, origin);

    auto where = [&](const SectionLine& r) { return origin + ":" + std::to_string(r.lineno); };

    for (const auto& r : rows) {
        auto fields = split_fields(r.text, ',');
        if (r.section == "base") {
            auto eq = r.text.find('=');
            if (eq == std::string::npos)
                throw ParseError(where(r) + ": expected key = value");
            std::string key = trim(r.text.substr(0, eq));
            double val = parse_double(trim(r.text.substr(eq + 1)), where(r));
            if (key == "s_base_mva") f.s_base_mva = val;
            else if (key == "v_base_kv") f.v_base_kv = val;
            else if (key == "f_nominal") f.f_nominal = val;
            else throw ParseError(where(r) + ": unknown base key '" + key + "'");
        } else if (r.section == "buses") {
            if (fields.size() != 2)
                throw ParseError(where(r) + ": bus record needs 'name, phases'");
            Bus b;
            b.name = fields[0];
            b.phases = PhaseSet::parse(fields[1]);
            if (f.bus_index(b.name) >= 0)
                throw ParseError(where(r) + ": duplicate bus '" + b.name + "'");
            f.buses.push_back(std::move(b));
        } else if (r.section == "lines") {
            if (fields.size() != 29)
                throw ParseError(where(r) + ": line record needs 29 fields "
                                 "(id, from, to, phases, class, r x 9, x x 9, p_max x 3, q_max x 3), got " +
                                 std::to_string(fields.size()));
            Line l;
            l.id = fields[0];
            if (f.line_index(l.id) >= 0)
                throw ParseError(where(r) + ": duplicate line '" + l.id + "'");
            l.from = f.bus_index(fields[1]);
            l.to = f.bus_index(fields[2]);
            if (l.from < 0 || l.to < 0)
                throw ParseError(where(r) + ": unknown endpoint bus");
            if (l.from == l.to)
                throw ParseError(where(r) + ": line endpoints coincide");
            l.phases = PhaseSet::parse(fields[3]);
            if (!l.phases.subset_of(f.buses[static_cast<std::size_t>(l.from)].phases) ||
                !l.phases.subset_of(f.buses[static_cast<std::size_t>(l.to)].phases))
                throw ParseError(where(r) + ": line phases not carried by both endpoint buses");
            if (fields[4] == "LN") l.kind = LineKind::Normal;
            else if (fields[4] == "ESW") l.kind = LineKind::Esw;
            else if (fields[4] == "SSW") l.kind = LineKind::Ssw;
            else throw ParseError(where(r) + ": unknown line class '" + fields[4] + "'");
            for (int i = 0; i < 9; ++i)
                l.r[static_cast<std::size_t>(i)] = parse_double(fields[static_cast<std::size_t>(5 + i)], where(r));
            for (int i = 0; i < 9; ++i)
                l.x[static_cast<std::size_t>(i)] = parse_double(fields[static_cast<std::size_t>(14 + i)], where(r));
            for (int i = 0; i < 3; ++i)
                l.p_max[static_cast<std::size_t>(i)] = parse_double(fields[static_cast<std::size_t>(23 + i)], where(r));
            for (int i = 0; i < 3; ++i)
                l.q_max[static_cast<std::size_t>(i)] = parse_double(fields[static_cast<std::size_t>(26 + i)], where(r));
            for (double v : l.p_max)
                if (v < 0) throw ParseError(where(r) + ": negative flow limit");
            for (double v : l.q_max)
                if (v < 0) throw ParseError(where(r) + ": negative flow limit");
            apply_phase_mask(l.phases, l.r);
            apply_phase_mask(l.phases, l.x);
            apply_phase_mask(l.phases, l.p_max);
            apply_phase_mask(l.phases, l.q_max);
            f.lines.push_back(std::move(l));
        } else if (r.section == "devices") {
            if (fields.size() < 3)
                throw ParseError(where(r) + ": device record needs at least 'id, type, bus'");
            Device d;
            d.id = fields[0];
            if (f.device_index(d.id) >= 0)
                throw ParseError(where(r) + ": duplicate device '" + d.id + "'");
            if (fields[1] == "TG") d.type = DeviceType::Tg;
            else if (fields[1] == "BESS") d.type = DeviceType::Bess;
            else if (fields[1] == "PV") d.type = DeviceType::Pv;
            else throw ParseError(where(r) + ": unknown device type '" + fields[1] + "'");
            d.bus = f.bus_index(fields[2]);
            if (d.bus < 0) throw ParseError(where(r) + ": unknown device bus '" + fields[2] + "'");
            auto kv = parse_kv(fields, 3, where(r));
            for (const auto& [key, val] : kv) {
                if (key == "s_max" || key == "s_nom" || key == "s_cap") d.s_max = parse_double(val, where(r));
                else if (key == "e_nom") d.e_nom = parse_double(val, where(r));
                else if (key == "soc_init") d.soc_init = parse_double(val, where(r));
                else if (key == "soc_min") d.soc_min = parse_double(val, where(r));
                else if (key == "soc_max") d.soc_max = parse_double(val, where(r));
                else if (key == "f_set") d.f_set = parse_double(val, where(r));
                else if (key == "droop") d.droop = parse_double(val, where(r));
                else if (key == "pf") d.pf = parse_double(val, where(r));
                else if (key == "profile") d.profile = val;
                else throw ParseError(where(r) + ": unknown device key '" + key + "'");
            }
            if (d.s_max <= 0 && d.type != DeviceType::Pv)
                throw ParseError(where(r) + ": device needs a positive rating");
            if (d.type == DeviceType::Bess) {
                if (d.e_nom <= 0) throw ParseError(where(r) + ": BESS needs e_nom > 0");
                if (!(0.0 <= d.soc_min && d.soc_min < d.soc_max && d.soc_max <= 1.0))
                    throw ParseError(where(r) + ": BESS SoC bounds out of order");
                if (d.soc_init < d.soc_min || d.soc_init > d.soc_max)
                    throw ParseError(where(r) + ": BESS initial SoC outside bounds");
            }
            if (d.type == DeviceType::Pv && (d.pf <= 0.0 || d.pf > 1.0))
                throw ParseError(where(r) + ": PV power factor must be in (0, 1]");
            f.devices.push_back(std::move(d));
        } else if (r.section == "loads") {
            if (fields.size() != 10 && fields.size() != 11)
                throw ParseError(where(r) + ": load record needs "
                                 "'id, bus, class, phases, p x 3, q x 3 [, profile]'");
            Load ld;
            ld.id = fields[0];
            for (const auto& other : f.loads)
                if (other.id == ld.id)
                    throw ParseError(where(r) + ": duplicate load '" + ld.id + "'");
            ld.bus = f.bus_index(fields[1]);
            if (ld.bus < 0) throw ParseError(where(r) + ": unknown load bus '" + fields[1] + "'");
            if (fields[2] == "CL") ld.critical = true;
            else if (fields[2] == "NL") ld.critical = false;
            else throw ParseError(where(r) + ": load class must be CL or NL");
            ld.phases = PhaseSet::parse(fields[3]);
            if (!ld.phases.subset_of(f.buses[static_cast<std::size_t>(ld.bus)].phases))
                throw ParseError(where(r) + ": load phases not present at bus");
            for (int i = 0; i < 3; ++i)
                ld.p_peak[static_cast<std::size_t>(i)] = parse_double(fields[static_cast<std::size_t>(4 + i)], where(r));
            for (int i = 0; i < 3; ++i)
                ld.q_peak[static_cast<std::size_t>(i)] = parse_double(fields[static_cast<std::size_t>(7 + i)], where(r));
            for (double v : ld.p_peak)
                if (v < 0) throw ParseError(where(r) + ": negative load");
            apply_phase_mask(ld.phases, ld.p_peak);
            apply_phase_mask(ld.phases, ld.q_peak);
            if (fields.size() == 11) ld.profile = fields[10];
            f.loads.push_back(std::move(ld));
        } else if (r.section == "profiles") {
            if (fields.size() != 25)
                throw ParseError(where(r) + ": profile record needs 'name, 24 hourly factors'");
            Profile p;
            p.name = fields[0];
            if (f.profiles.count(p.name))
                throw ParseError(where(r) + ": duplicate profile '" + p.name + "'");
            p.hourly.reserve(24);
            for (int i = 0; i < 24; ++i) {
                double v = parse_double(fields[static_cast<std::size_t>(1 + i)], where(r));
                if (v < 0) throw ParseError(where(r) + ": negative profile factor");
                p.hourly.push_back(v);
            }
            f.profiles.emplace(p.name, std::move(p));
        } else {
            throw ParseError(where(r) + ": unknown section '" + r.section + "'");
        }
    }

    if (f.buses.empty()) throw ParseError(origin + ": no buses");
    if (f.device_indices(DeviceType::Tg).size() > 1)
        throw ParseError(origin + ": more than one transmission-grid interface");
    return f;
}

Feeder load_feeder(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open feeder file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    Feeder f = parse_feeder(text, path);
    f.source_path = path;
    f.file_hash = fnv1a64(text.data(), text.size());
    return f;
}

} // namespace ssdmgf
