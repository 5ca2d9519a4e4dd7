#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace umdp {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double v) : lo(v), hi(v) {}
    Interval(double l, double h) : lo(l), hi(h) {}

    double width() const { return hi - lo; }
    double mag() const { return std::max(std::abs(lo), std::abs(hi)); }
};

inline Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Interval operator-(Interval a, Interval b) { return {a.lo - b.hi, a.hi - b.lo}; }
inline Interval operator-(Interval a) { return {-a.hi, -a.lo}; }

inline Interval operator*(Interval a, Interval b) {
    double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
    return {std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4})};
}

inline Interval operator*(double k, Interval a) {
    return k >= 0 ? Interval{k * a.lo, k * a.hi} : Interval{k * a.hi, k * a.lo};
}

// Range of cos over [lo, hi].
inline Interval cos(Interval a) {
    constexpr double pi = std::numbers::pi;
    if (a.width() >= 2 * pi) return {-1.0, 1.0};
    double c1 = std::cos(a.lo), c2 = std::cos(a.hi);
    Interval r{std::min(c1, c2), std::max(c1, c2)};
    // Extrema at multiples of pi inside the interval.
    double k = std::ceil(a.lo / pi);
    for (double t = k * pi; t <= a.hi; t += pi) {
        long m = static_cast<long>(std::llround(t / pi));
        if (m % 2 == 0) r.hi = 1.0;
        else r.lo = -1.0;
    }
    return r;
}

inline Interval sin(Interval a) {
    return cos(Interval{a.lo - std::numbers::pi / 2, a.hi - std::numbers::pi / 2});
}

} // namespace umdp
