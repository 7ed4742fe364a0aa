#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cma {

inline constexpr double kDefaultTol = 1e-9;

/// Closed probability interval, 0 <= lo <= hi <= 1.
struct ProbInterval {
    double lo = 0.0;
    double hi = 0.0;

    ProbInterval() = default;
    ProbInterval(double l, double h) : lo(l), hi(h) {}

    static ProbInterval point(double p) { return {p, p}; }
    static ProbInterval unit() { return {0.0, 1.0}; }
    static ProbInterval zero() { return {0.0, 0.0}; }
    static ProbInterval one() { return {1.0, 1.0}; }

    bool valid(double tol = kDefaultTol) const {
        return lo >= -tol && hi <= 1.0 + tol && lo <= hi + tol;
    }
    bool is_point(double tol = kDefaultTol) const { return hi - lo <= tol; }
    bool contains(double x, double tol = kDefaultTol) const {
        return x >= lo - tol && x <= hi + tol;
    }
    double width() const { return hi - lo; }
    double clamp(double x) const { return std::min(hi, std::max(lo, x)); }

    friend bool operator==(const ProbInterval& a, const ProbInterval& b) {
        return a.lo == b.lo && a.hi == b.hi;
    }
};

/// Parse errors carry enough context for the CLI's exit-code-2 path.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cma
