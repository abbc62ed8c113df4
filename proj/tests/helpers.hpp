#pragma once

#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>

namespace testutil {

/// Root of the bundled fixture feeders, injected by the build.
inline std::string data_path(const std::string& name) {
    const char* root = std::getenv("SSDMGF_DATA");
    if (!root) throw std::runtime_error("SSDMGF_DATA is not set");
    return std::string(root) + "/" + name;
}

/// One switch row in the feeder text format: light impedance, wide ratings.
inline std::string switch_line(const std::string& id, const std::string& from,
                               const std::string& to, const std::string& kind) {
    std::ostringstream s;
    s << id << ',' << from << ',' << to << ",abc," << kind;
    for (int i = 0; i < 9; ++i) s << ',' << (i % 4 == 0 ? 0.001 : 0.0003);
    for (int i = 0; i < 9; ++i) s << ',' << (i % 4 == 0 ? 0.002 : 0.0006);
    for (int i = 0; i < 3; ++i) s << ",3.0";
    for (int i = 0; i < 3; ++i) s << ",3.0";
    return s.str();
}

/// One non-switchable line row.
inline std::string normal_line(const std::string& id, const std::string& from,
                               const std::string& to) {
    std::ostringstream s;
    s << id << ',' << from << ',' << to << ",abc,LN";
    for (int i = 0; i < 9; ++i) s << ',' << (i % 4 == 0 ? 0.006 : 0.002);
    for (int i = 0; i < 9; ++i) s << ',' << (i % 4 == 0 ? 0.012 : 0.004);
    for (int i = 0; i < 3; ++i) s << ",2.5";
    for (int i = 0; i < 3; ++i) s << ",2.5";
    return s.str();
}

} // namespace testutil
