#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssdmgf/common.hpp"

namespace ssdmgf {

enum class LineKind {
    Normal, ///< hard-wired segment, energized together with its block
    Esw,    ///< remote-controlled switch used to extend an island
    Ssw     ///< synchronization-capable switch used to merge islands
};

enum class DeviceType { Tg, Bess, Pv };

struct Bus {
    std::string name;
    PhaseSet phases;
};

struct Line {
    std::string id;
    int from = -1;
    int to = -1;
    PhaseSet phases;
    LineKind kind = LineKind::Normal;
    Mat3 r{}; ///< p.u. resistance matrix, row-major, phases absent are zero rows
    Mat3 x{};
    Vec3 p_max{}; ///< per-phase flow magnitude limits, p.u.
    Vec3 q_max{};
};

struct Device {
    std::string id;
    DeviceType type = DeviceType::Bess;
    int bus = -1;
    double s_max = 0.0;   ///< apparent power rating, p.u. (TG s_max, BESS s_nom, PV plant capacity)
    double e_nom = 0.0;   ///< BESS energy capacity, p.u.-hours
    double soc_init = 0.9;
    double soc_min = 0.2;
    double soc_max = 1.0;
    double f_set = 60.0;  ///< grid-forming nominal frequency setpoint, Hz
    double droop = 0.005; ///< Hz per unit of loading fraction
    double pf = 0.943;    ///< PV operating power factor (lagging)
    std::string profile;  ///< PV irradiance profile name, empty = flat 1.0
};

struct Load {
    std::string id;
    int bus = -1;
    bool critical = false; ///< true = critical load, false = non-critical (deferrable)
    PhaseSet phases;
    Vec3 p_peak{}; ///< per-phase peak demand, p.u.
    Vec3 q_peak{};
    std::string profile; ///< daily shape name, empty = flat 1.0
};

/// Hourly daily shape; factor(t) is piecewise constant over each hour.
struct Profile {
    std::string name;
    std::vector<double> hourly; // 24 values
};

struct Feeder {
    double s_base_mva = 1.0;
    double v_base_kv = 4.16;
    double f_nominal = 60.0;

    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<Device> devices;
    std::vector<Load> loads;
    std::map<std::string, Profile> profiles;

    std::string source_path;
    std::uint64_t file_hash = 0;

    int bus_index(const std::string& name) const;
    int line_index(const std::string& id) const;
    int device_index(const std::string& id) const;

    std::vector<int> device_indices(DeviceType t) const;
    bool has_tg() const { return !device_indices(DeviceType::Tg).empty(); }

    /// Daily shape factor for profile `name` at absolute minute-of-day m.
    /// Season-specific variants named "<name>_<season>" take precedence when
    /// `season` is non-empty; a missing profile resolves to 1.0.
    double profile_factor(const std::string& name, const std::string& season,
                          double minute_of_day) const;
};

/// Parse the structured-text feeder format from a string. `origin` is used in
/// error messages only.
Feeder parse_feeder(const std::string& text, const std::string& origin);

/// Load a feeder file from disk, recording its path and content hash.
Feeder load_feeder(const std::string& path);

std::string to_string(LineKind k);
std::string to_string(DeviceType t);

} // namespace ssdmgf
