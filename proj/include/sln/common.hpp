#ifndef SLN_COMMON_HPP_
#define SLN_COMMON_HPP_

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sln {

/// Error type thrown by every operation in this library. `what()` carries a
/// human-readable message; the CLI turns it into machine-readable JSON.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

template <typename... Args>
[[noreturn]] inline void fail(Args&&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    throw Error(os.str());
}

template <typename... Args>
inline void require(bool cond, Args&&... parts) {
    if (!cond) fail(std::forward<Args>(parts)...);
}

// ---------------------------------------------------------------------------
// Hashing (FNV-1a, 64-bit). Used for manifests, cache keys, and seed
// derivation. Not cryptographic.
// ---------------------------------------------------------------------------

inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ull) {
    return fnv1a64(s.data(), s.size(), h);
}

inline std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---------------------------------------------------------------------------
// Number formatting. %.17g round-trips doubles exactly through strtod, which
// the feature-table and checkpoint formats rely on.
// ---------------------------------------------------------------------------

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(std::string_view s) {
    std::string tmp(s);
    char* end = nullptr;
    double v = std::strtod(tmp.c_str(), &end);
    require(end && *end == '\0' && end != tmp.c_str(), "not a number: '", tmp, "'");
    return v;
}

inline long long parse_int(std::string_view s) {
    std::string tmp(s);
    char* end = nullptr;
    long long v = std::strtoll(tmp.c_str(), &end, 10);
    require(end && *end == '\0' && end != tmp.c_str(), "not an integer: '", tmp, "'");
    return v;
}

// ---------------------------------------------------------------------------
// Small string utilities.
// ---------------------------------------------------------------------------

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline std::string trim(std::string_view s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

// ---------------------------------------------------------------------------
// Whole-file IO. Errors carry the path.
// ---------------------------------------------------------------------------

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open file for reading: ", path);
    std::ostringstream os;
    os << in.rdbuf();
    require(!in.bad(), "read failure: ", path);
    return os.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), "cannot open file for writing: ", path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    require(out.good(), "write failure: ", path);
}

inline uint64_t file_checksum(const std::string& path) {
    std::string data = read_file(path);
    return fnv1a64(data);
}

}  // namespace sln

#endif  // SLN_COMMON_HPP_
