#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

namespace lpdsvm {

// 17 significant digits: lossless for IEEE doubles and stable under re-export.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Shortest decimal string that parses back to the same double.
inline std::string format_shortest(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Labels render as integers when they are integral, mirroring the usual
// contents of LIBSVM-format files.
inline std::string format_label(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
        return buf;
    }
    return format_shortest(v);
}

}  // namespace lpdsvm
