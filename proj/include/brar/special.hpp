#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "brar/common.hpp"

namespace brar {

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// Continued fraction for the regularized incomplete beta (modified Lentz).
// Converges fast for x < (a+1)/(a+b+2); the public wrapper applies the
// symmetry split so this is always called in the convergent regime.
inline double inc_beta_cf(double a, double b, double x) {
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 400; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    throw numeric_error("incomplete beta continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b) = P(Beta(a,b) <= x).
inline double reg_inc_beta(double x, double a, double b) {
    BRAR_REQUIRE_ARG(a > 0.0 && b > 0.0, "reg_inc_beta: shape parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lbt = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    const double bt = std::exp(lbt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * detail::inc_beta_cf(a, b, x) / a;
    }
    return 1.0 - bt * detail::inc_beta_cf(b, a, 1.0 - x) / b;
}

// Survival form 1 - I_x(a, b), computed without cancellation near 1.
inline double reg_inc_beta_c(double x, double a, double b) {
    BRAR_REQUIRE_ARG(a > 0.0 && b > 0.0, "reg_inc_beta_c: shape parameters must be positive");
    if (x <= 0.0) return 1.0;
    if (x >= 1.0) return 0.0;
    const double lbt = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    const double bt = std::exp(lbt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return 1.0 - bt * detail::inc_beta_cf(a, b, x) / a;
    }
    return bt * detail::inc_beta_cf(b, a, 1.0 - x) / b;
}

inline double beta_log_pdf(double x, double a, double b) {
    if (x < 0.0 || x > 1.0) return -std::numeric_limits<double>::infinity();
    return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b);
}

// Exact binomial coefficient as unsigned 64-bit; requires the value to fit
// (n <= 62 always fits; larger n fits for small k).
inline std::uint64_t binom_u64(int n, int k) {
    BRAR_REQUIRE_ARG(n >= 0 && k >= 0 && k <= n, "binom_u64: need 0 <= k <= n");
    if (k > n - k) k = n - k;
    unsigned __int128 r = 1;
    for (int j = 1; j <= k; ++j) {
        r = r * static_cast<unsigned>(n - k + j) / static_cast<unsigned>(j);
        BRAR_REQUIRE_ARG(r <= static_cast<unsigned __int128>(UINT64_MAX), "binom_u64: overflow");
    }
    return static_cast<std::uint64_t>(r);
}

// Binomial coefficient in double; exact while below 2^53, otherwise
// correctly rounded to ~1e-15 relative via the multiplicative form.
inline double binom_double(int n, int k) {
    BRAR_REQUIRE_ARG(n >= 0 && k >= 0 && k <= n, "binom_double: need 0 <= k <= n");
    if (k > n - k) k = n - k;
    if (n <= 62) return static_cast<double>(binom_u64(n, k));
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * static_cast<double>(n - k + j) / static_cast<double>(j);
    return r;
}

inline double log_binom(int n, int k) {
    BRAR_REQUIRE_ARG(n >= 0 && k >= 0 && k <= n, "log_binom: need 0 <= k <= n");
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

namespace detail {

inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw numeric_error("incomplete gamma series did not converge");
}

inline double gamma_q_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw numeric_error("incomplete gamma continued fraction did not converge");
}

}  // namespace detail

// Regularized lower incomplete gamma P(a, x).
inline double reg_inc_gamma_p(double a, double x) {
    BRAR_REQUIRE_ARG(a > 0.0 && x >= 0.0, "reg_inc_gamma_p: need a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_cf(a, x);
}

// Upper tail of the chi-square distribution with `df` degrees of freedom.
inline double chi_square_sf(double x, double df) {
    BRAR_REQUIRE_ARG(df > 0.0, "chi_square_sf: need df > 0");
    if (x <= 0.0) return 1.0;
    if (x < df + 1.0) return 1.0 - detail::gamma_p_series(df / 2.0, x / 2.0);
    return detail::gamma_q_cf(df / 2.0, x / 2.0);
}

}  // namespace brar
