#include "ssdmgf/common.hpp"

#include <cctype>
#include <sstream>

namespace ssdmgf {

PhaseSet PhaseSet::parse(const std::string& s) {
    PhaseSet ps;
    for (char c : s) {
        switch (std::tolower(static_cast<unsigned char>(c))) {
        case 'a': ps.set(0); break;
        case 'b': ps.set(1); break;
        case 'c': ps.set(2); break;
        case ' ': break;
        default:
            throw ParseError("bad phase spec '" + s + "'");
        }
    }
    if (ps.mask == 0) throw ParseError("empty phase spec");
    return ps;
}

std::string PhaseSet::str() const {
    std::string out;
    if (has(0)) out += 'a';
    if (has(1)) out += 'b';
    if (has(2)) out += 'c';
    return out;
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, delim)) out.push_back(trim(cur));
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

} // namespace ssdmgf
