#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "hcad/core/error.hpp"

namespace hcad::text {

inline std::string trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto p = s.find(sep, start);
        out.emplace_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return out;
}

/// Splits on any run of spaces/tabs and, optionally, commas.
inline std::vector<std::string> split_fields(std::string_view s, bool allow_comma) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        const bool sep = c == ' ' || c == '\t' || c == '\r' || (allow_comma && c == ',');
        if (sep) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline double parse_double(const std::string& s, const std::string& ctx) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::Format, ctx + ": not a number: '" + s + "'");
    }
}

inline long long parse_int(const std::string& s, const std::string& ctx) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::Format, ctx + ": not an integer: '" + s + "'");
    }
}

/// printf-style formatting into a std::string.
template <class... Args>
std::string format(const char* fmt, Args... args) {
    const int n = std::snprintf(nullptr, 0, fmt, args...);
    std::string out(static_cast<std::size_t>(n), '\0');
    std::snprintf(out.data(), out.size() + 1, fmt, args...);
    return out;
}

/// Shortest decimal text that parses back to exactly `v`.
inline std::string exact(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    for (int prec = 1; prec <= 17; ++prec) {
        auto s = format("%.*g", prec, v);
        if (std::stod(s) == v) return s;
    }
    return format("%.17g", v);
}

/// Half-up rounding to `digits` decimals, as used in the report tables.
inline double round_half_up(double v, int digits) {
    const double scale = std::pow(10.0, digits);
    // The small bias absorbs binary representation error of values such as 0.925.
    return std::floor(v * scale + 0.5 + 1e-9) / scale;
}

inline std::string fixed(double v, int digits) { return format("%.*f", digits, round_half_up(v, digits)); }

}  // namespace hcad::text
