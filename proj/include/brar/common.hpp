#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <stdexcept>
#include <string>
#include <string_view>

namespace brar {

inline constexpr const char* engine_version = "0.1.0";

// Error taxonomy; the CLI maps these onto distinct exit codes.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Precondition violations (caller bugs), distinct from data-driven failures.
struct contract_error : std::logic_error {
    using std::logic_error::logic_error;
};

#define BRAR_REQUIRE_ARG(cond, msg)            \
    do {                                       \
        if (!(cond)) throw ::brar::contract_error(msg); \
    } while (0)

// FNV-1a, used for config hashes and cache checksums.
inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
    return fnv1a64(s.data(), s.size(), h);
}

// Shortest decimal form at 17 significant digits; round-trips binary64 and
// drops trailing zeros (printf %.17g semantics).
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

// Decimal rounding to `digits` significant digits, via correctly rounded
// text conversion. Used to group statistic values that are mathematically
// equal but differ by quadrature noise.
inline double round_sig(double v, int digits) {
    if (!std::isfinite(v) || v == 0.0) return v;
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, digits - 1);
    double out = 0.0;
    std::from_chars(buf, res.ptr, out);
    return out;
}

inline std::string hex64(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace brar
