#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace cascadeopt {

/// Failure classes, mapped one-to-one onto CLI exit codes.
enum class ErrorKind {
    Validation,  // bad arguments or malformed input data (exit 2)
    Infeasible,  // no cascade satisfies a selection constraint (exit 3)
    Io,          // filesystem failure (exit 4)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(const std::string& what) { throw Error(ErrorKind::Validation, what); }
[[noreturn]] inline void fail_io(const std::string& what) { throw Error(ErrorKind::Io, what); }
[[noreturn]] inline void fail_infeasible(const std::string& what) { throw Error(ErrorKind::Infeasible, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(what);
}

enum class Label : std::uint8_t { Negative = 0, Positive = 1 };

inline bool is_positive(Label l) noexcept { return l == Label::Positive; }

// ---------------------------------------------------------------------------
// Hashing. Every pseudo-random quantity in the engine is derived from these
// so outputs are a pure function of seeds and identifiers, independent of
// standard-library distribution implementations.
// ---------------------------------------------------------------------------

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
    return mix64(h ^ (mix64(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

template <typename... Ts>
constexpr std::uint64_t hash_values(std::uint64_t first, Ts... rest) noexcept {
    std::uint64_t h = mix64(first);
    ((h = hash_combine(h, static_cast<std::uint64_t>(rest))), ...);
    return h;
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Maps a 64-bit hash to [0, 1) using its top 53 bits.
constexpr double unit_interval(std::uint64_t h) noexcept {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------------------
// Text helpers shared by the CSV/JSON readers and writers.
// ---------------------------------------------------------------------------

/// Shortest form that reads back to the same double, capped at 17 significant digits.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split_view(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::string to_hex16(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

/// Stable 64-bit cascade identity, printed as 16 lowercase hex digits so that
/// string order equals numeric order.
struct CascadeId {
    std::uint64_t value = 0;
    std::string str() const { return to_hex16(value); }
    friend auto operator<=>(const CascadeId&, const CascadeId&) = default;
};

inline CascadeId parse_cascade_id(std::string_view s) {
    require(s.size() == 16, "malformed cascade id '" + std::string(s) + "'");
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v, 16);
    require(res.ec == std::errc{} && res.ptr == s.data() + s.size(), "malformed cascade id '" + std::string(s) + "'");
    return {v};
}

}  // namespace cascadeopt
