#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "brar/common.hpp"

namespace brar {

// 15-point Kronrod extension of 7-point Gauss-Legendre on [-1, 1].
// Weight sums equal 2 to machine precision (checked in the test suite).
namespace gk15 {
inline constexpr double xgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0,
};
inline constexpr double wgk[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278,
};
inline constexpr double wg[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189, 0.4179591836734694,
};
}  // namespace gk15

struct quad_result {
    double value = 0.0;
    double error = 0.0;   // conservative |K15 - G7| estimate, summed over segments
    int segments = 0;
    bool converged = false;
};

struct quad_options {
    double abs_tol = 1e-6;
    double rel_tol = 0.0;
    int max_segments = 20000;
};

namespace detail {

struct quad_segment {
    double a, b, value, error;
    bool splittable;
};

template <class F>
inline quad_segment gk15_apply(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double kron = gk15::wgk[7] * f(c);
    double gauss = gk15::wg[3] * f(c);
    for (int j = 0; j < 7; ++j) {
        const double dx = h * gk15::xgk[j];
        const double fsum = f(c - dx) + f(c + dx);
        kron += gk15::wgk[j] * fsum;
        if (j & 1) gauss += gk15::wg[j / 2] * fsum;
    }
    kron *= h;
    gauss *= h;
    const double mid = 0.5 * (a + b);
    return {a, b, kron, std::fabs(kron - gauss), a < mid && mid < b};
}

}  // namespace detail

// Globally adaptive bisection: always refines the segment with the largest
// error estimate. Segments too narrow to bisect keep their error as an
// irreducible floor; if that floor alone exceeds the tolerance the result is
// flagged non-converged (callers decide whether that is fatal).
template <class F>
quad_result integrate_gk(const F& f, double a, double b, const quad_options& opt = {}) {
    quad_result out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    std::vector<detail::quad_segment> heap;
    heap.reserve(64);
    const auto by_error = [](const detail::quad_segment& s1, const detail::quad_segment& s2) {
        return s1.error < s2.error;
    };
    double total_value = 0.0;
    double total_error = 0.0;
    double dead_error = 0.0;  // unsplittable remainders; +inf if a node hit a pole
    const auto admit = [&](const detail::quad_segment& s) {
        if (!std::isfinite(s.value) || !std::isfinite(s.error)) {
            dead_error = std::numeric_limits<double>::infinity();
            return;
        }
        total_value += s.value;
        total_error += s.error;
        if (s.splittable) {
            heap.push_back(s);
            std::push_heap(heap.begin(), heap.end(), by_error);
        } else {
            dead_error += s.error;
            total_error -= s.error;
        }
    };
    admit(detail::gk15_apply(f, a, b));
    int n_segments = 1;
    bool met_tolerance = false;
    while (true) {
        const double tol = std::max(opt.abs_tol, opt.rel_tol * std::fabs(total_value));
        if (total_error + dead_error <= tol) {
            met_tolerance = true;
            break;
        }
        if (n_segments >= opt.max_segments || heap.empty() || std::isinf(dead_error)) break;
        std::pop_heap(heap.begin(), heap.end(), by_error);
        const detail::quad_segment worst = heap.back();
        heap.pop_back();
        total_value -= worst.value;
        total_error -= worst.error;
        const double mid = 0.5 * (worst.a + worst.b);
        admit(detail::gk15_apply(f, worst.a, mid));
        admit(detail::gk15_apply(f, mid, worst.b));
        ++n_segments;
    }
    out.value = total_value;
    out.error = total_error + dead_error;
    out.segments = n_segments;
    out.converged = met_tolerance &&
                    out.error <= std::max(opt.abs_tol, opt.rel_tol * std::fabs(out.value)) + 1e-300;
    return out;
}

// Variant that treats non-convergence as a hard numeric failure.
template <class F>
double integrate_gk_or_throw(const F& f, double a, double b, const quad_options& opt = {}) {
    const quad_result r = integrate_gk(f, a, b, opt);
    if (!r.converged) {
        throw numeric_error("quadrature did not converge: error estimate " + format_double(r.error) +
                            " after " + std::to_string(r.segments) + " segments");
    }
    return r.value;
}

}  // namespace brar
