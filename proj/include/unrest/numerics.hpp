#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "unrest/errors.hpp"

namespace unrest::num {

// Bisection on [lo, hi] for a callable with g(lo), g(hi) of opposite sign.
// Unconditionally convergent; all root-finding here goes through it.
template <typename G>
double bisect(G&& g, double lo, double hi, double abs_tol, const char* what = "bisect") {
    double glo = g(lo);
    double ghi = g(hi);
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if ((glo < 0.0) == (ghi < 0.0))
        throw BracketError(std::string(what) + ": no sign change on [" + std::to_string(lo) +
                           ", " + std::to_string(hi) + "]");
    while (hi - lo > abs_tol) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break; // spacing exhausted
        double gm = g(mid);
        if (gm == 0.0) return mid;
        if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Adaptive Simpson with absolute tolerance; recursion bounded by depth.
namespace detail {
template <typename G>
double simpson_rec(G& g, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = g(lm), frm = g(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
} // namespace detail

template <typename G>
double adaptive_simpson(G&& g, double a, double b, double abs_tol, int max_depth = 50) {
    if (a == b) return 0.0;
    double fa = g(a), fb = g(b);
    double m = 0.5 * (a + b);
    double fm = g(m);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(g, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

// Doubling search: smallest hi = start*2^k (k <= cap steps) with pred(hi) true.
// Returns NaN when the cap is reached without success.
template <typename P>
double doubling_search(P&& pred, double start, double cap) {
    for (double hi = start; hi <= cap; hi *= 2.0)
        if (pred(hi)) return hi;
    return std::nan("");
}

// Thomas algorithm for a tridiagonal system; diagonally dominant inputs only.
// lower/upper have n-1 entries, diag and rhs have n.
inline void solve_tridiag(const std::vector<double>& lower, const std::vector<double>& diag,
                          const std::vector<double>& upper, std::vector<double>& rhs,
                          std::vector<double>& scratch) {
    const std::size_t n = diag.size();
    scratch.resize(n);
    double d = diag[0];
    scratch[0] = upper.empty() ? 0.0 : upper[0] / d;
    rhs[0] /= d;
    for (std::size_t i = 1; i < n; ++i) {
        d = diag[i] - lower[i - 1] * scratch[i - 1];
        if (i + 1 < n) scratch[i] = upper[i] / d;
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / d;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i] * rhs[i + 1];
}

// FNV-1a over a byte string; used for model fingerprints.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Shortest exact decimal form: 17 significant digits round-trip for double.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace unrest::num
