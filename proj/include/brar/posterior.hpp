#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "brar/common.hpp"
#include "brar/quadrature.hpp"
#include "brar/special.hpp"
#include "brar/state_space.hpp"

namespace brar {

struct beta_prior {
    double alpha = 1.0;
    double beta = 1.0;

    void validate() const {
        if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
            throw config_error("beta_prior: shape parameters must be positive and finite");
    }
    bool operator==(const beta_prior&) const = default;
};

// Independent Beta posteriors for the two arms given the current counts.
struct posterior_pair {
    double a_c, b_c, a_d, b_d;
};

inline posterior_pair posterior_of(const trial_state& x, const beta_prior& prior) {
    return {x.s_c + prior.alpha, (x.n_c - x.s_c) + prior.beta,
            x.s_d + prior.alpha, (x.n_d - x.s_d) + prior.beta};
}

enum class statistic_kind {
    ppcs,         // posterior probability that the control arm is superior
    wald,         // Wald statistic with add-one adjustment on both arms
    wald_plugin,  // plug-in Wald, adjusted only when an arm is empty
};

inline const char* to_string(statistic_kind k) {
    switch (k) {
        case statistic_kind::ppcs: return "ppcs";
        case statistic_kind::wald: return "wald";
        case statistic_kind::wald_plugin: return "wald-plugin";
    }
    return "?";
}

// P(theta_C >= theta_D) for theta_C ~ Beta(a_c, b_c), theta_D ~ Beta(a_d, b_d),
// reduced to a 1-D integral of the D-arm density against the C-arm survival
// function. Endpoint singularities (shape < 1) stay integrable and the rule
// never evaluates the endpoints themselves.
inline double ppcs_from_posterior(const posterior_pair& p, const quad_options& opt = {}) {
    BRAR_REQUIRE_ARG(p.a_c > 0 && p.b_c > 0 && p.a_d > 0 && p.b_d > 0,
                     "ppcs_from_posterior: posterior shapes must be positive");
    const double lb_d = log_beta(p.a_d, p.b_d);
    const auto integrand = [&](double t) {
        return std::exp((p.a_d - 1.0) * std::log(t) + (p.b_d - 1.0) * std::log1p(-t) - lb_d) *
               reg_inc_beta_c(t, p.a_c, p.b_c);
    };
    const double v = integrate_gk_or_throw(integrand, 0.0, 1.0, opt);
    return std::clamp(v, 0.0, 1.0);
}

inline double ppcs(const trial_state& x, const beta_prior& prior, const quad_options& opt = {}) {
    BRAR_REQUIRE_ARG(x.valid(), "ppcs: invalid state");
    prior.validate();
    return ppcs_from_posterior(posterior_of(x, prior), opt);
}

// Exact finite-sum evaluation of P(theta_C > theta_D) for positive integer
// shapes, via the binomial-tail identity for integer-parameter Beta CDFs:
//   F_D(x) = P(Bin(a_d + b_d - 1, x) >= a_d).
// Independent of the quadrature path; serves as its oracle in tests.
inline double ppcs_exact_integer(int a_c, int b_c, int a_d, int b_d) {
    BRAR_REQUIRE_ARG(a_c > 0 && b_c > 0 && a_d > 0 && b_d > 0,
                     "ppcs_exact_integer: shapes must be positive integers");
    const int m = a_d + b_d - 1;
    const double lb_c = log_beta(a_c, b_c);
    double sum = 0.0;
    for (int j = a_d; j <= m; ++j) {
        sum += std::exp(log_binom(m, j) + log_beta(a_c + j, b_c + m - j) - lb_c);
    }
    return std::min(sum, 1.0);
}

// Wald statistic for theta_D - theta_C with the add-one ("+1/+2") adjustment
// applied unconditionally to both arms; finite for every state, including
// empty arms.
inline double wald_statistic(const trial_state& x) {
    BRAR_REQUIRE_ARG(x.valid(), "wald_statistic: invalid state");
    const double p_c = (x.s_c + 1.0) / (x.n_c + 2.0);
    const double p_d = (x.s_d + 1.0) / (x.n_d + 2.0);
    const double v = p_c * (1.0 - p_c) / (x.n_c + 2.0) + p_d * (1.0 - p_d) / (x.n_d + 2.0);
    return (p_d - p_c) / std::sqrt(v);
}

// Plug-in Wald: raw success proportions unless an arm is empty, in which case
// both arms get the add-one adjustment. Degenerate observed proportions make
// the variance vanish; the statistic is then 0 for equal estimates and
// +/-infinity otherwise.
inline double wald_plugin_statistic(const trial_state& x) {
    BRAR_REQUIRE_ARG(x.valid(), "wald_plugin_statistic: invalid state");
    const int iota = (std::min(x.n_c, x.n_d) == 0) ? 1 : 0;
    const double d_c = x.n_c + 2.0 * iota;
    const double d_d = x.n_d + 2.0 * iota;
    const double p_c = (x.s_c + iota) / d_c;
    const double p_d = (x.s_d + iota) / d_d;
    const double v = p_c * (1.0 - p_c) / d_c + p_d * (1.0 - p_d) / d_d;
    if (v > 0.0) return (p_d - p_c) / std::sqrt(v);
    if (p_d == p_c) return 0.0;
    return std::copysign(std::numeric_limits<double>::infinity(), p_d - p_c);
}

inline double statistic_value(statistic_kind kind, const trial_state& x, const beta_prior& prior,
                              const quad_options& opt = {}) {
    switch (kind) {
        case statistic_kind::ppcs: return ppcs(x, prior, opt);
        case statistic_kind::wald: return wald_statistic(x);
        case statistic_kind::wald_plugin: return wald_plugin_statistic(x);
    }
    throw contract_error("statistic_value: unknown kind");
}

// Statistic evaluated for every state of one stage, in canonical order.
inline std::vector<double> statistic_image(int stage, statistic_kind kind, const beta_prior& prior,
                                           const quad_options& opt = {}) {
    const stage_layout layout(stage);
    std::vector<double> out(layout.size());
    for (std::int64_t idx = 0; idx < layout.size(); ++idx) {
        out[idx] = statistic_value(kind, layout.state_at(idx), prior, opt);
    }
    return out;
}

}  // namespace brar
