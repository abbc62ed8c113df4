#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssdmgf {

/// Per-phase quantity (a, b, c). Phases absent from an element are kept at 0.
using Vec3 = std::array<double, 3>;

/// Row-major 3x3 impedance block.
using Mat3 = std::array<double, 9>;

constexpr int kPhases = 3;

inline Vec3 vec3_zero() { return {0.0, 0.0, 0.0}; }

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3& operator+=(Vec3& a, const Vec3& b) {
    a[0] += b[0]; a[1] += b[1]; a[2] += b[2];
    return a;
}
inline Vec3 operator*(double s, const Vec3& a) {
    return {s * a[0], s * a[1], s * a[2]};
}
inline double sum(const Vec3& a) { return a[0] + a[1] + a[2]; }

/// Phase presence mask. Bit 0 = a, bit 1 = b, bit 2 = c.
struct PhaseSet {
    std::uint8_t mask = 0;

    static PhaseSet parse(const std::string& s);
    bool has(int phase) const { return (mask >> phase) & 1u; }
    void set(int phase) { mask |= static_cast<std::uint8_t>(1u << phase); }
    int count() const {
        int n = 0;
        for (int p = 0; p < kPhases; ++p) n += has(p);
        return n;
    }
    bool subset_of(const PhaseSet& other) const { return (mask & ~other.mask) == 0; }
    std::string str() const;
    bool operator==(const PhaseSet&) const = default;
};

/// Thrown by file and text parsers; carries a location prefix in what().
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// 64-bit FNV-1a over a byte buffer, used to fingerprint feeder files in manifests.
std::uint64_t fnv1a64(const void* data, std::size_t n);
std::string to_hex(std::uint64_t v);

/// Split on a delimiter, trimming ASCII whitespace from each piece.
std::vector<std::string> split_fields(const std::string& line, char delim);
std::string trim(const std::string& s);

} // namespace ssdmgf
