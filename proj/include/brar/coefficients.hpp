#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "brar/common.hpp"
#include "brar/design.hpp"
#include "brar/policy.hpp"
#include "brar/special.hpp"
#include "brar/state_space.hpp"

namespace brar {

// Stage-i vector of path-weight coefficients g_i(x): the theta-free part of
// P(X_i = x), so that P = g_i(x) * theta_C^{s_c} (1-theta_C)^{n_c-s_c}
//                               * theta_D^{s_d} (1-theta_D)^{n_d-s_d}.
struct coefficient_frontier {
    int stage = 0;
    std::vector<double> g;
};

// Closed form after a burn-in of b per arm: multinomial outcome counts on
// each arm, any allocation order. Exact integers while they fit binary64.
inline coefficient_frontier burn_in_frontier(const design_spec& design) {
    design.validate();
    const int b = design.burn_in;
    const int stage = 2 * b;
    const stage_layout layout(stage);
    coefficient_frontier out{stage, std::vector<double>(layout.size(), 0.0)};
    for (int s_c = 0; s_c <= b; ++s_c) {
        const double w_c = binom_double(b, s_c);
        for (int s_d = 0; s_d <= b; ++s_d) {
            out.g[layout.index_of({b, s_c, b, s_d})] = w_c * binom_double(b, s_d);
        }
    }
    return out;
}

// One transition of the exact recursion. Every stage-(i+1) state accumulates
// from at most four stage-i predecessors, always in the order success-C,
// failure-C, success-D, failure-D so results are bit-reproducible.
inline coefficient_frontier propagate(const coefficient_frontier& frontier, const policy_table& policy) {
    const int i = frontier.stage;
    BRAR_REQUIRE_ARG(policy.covers(i), "propagate: policy table does not cover this stage");
    const stage_layout prev(i);
    const stage_layout next(i + 1);
    BRAR_REQUIRE_ARG(static_cast<std::int64_t>(frontier.g.size()) == prev.size(),
                     "propagate: frontier size does not match its stage");
    const auto& pi = policy.stage_values(i);
    const auto& off = prev.offsets();
    coefficient_frontier out{i + 1, std::vector<double>(next.size())};
    std::int64_t idx = 0;
    for (int n_c = 0; n_c <= i + 1; ++n_c) {
        const int n_d = i + 1 - n_c;
        const int prev_nd_c = n_d;      // predecessor arm sizes after undoing a C allocation
        const int prev_nd_d = n_d - 1;  // ... and after undoing a D allocation
        for (int s_c = 0; s_c <= n_c; ++s_c) {
            for (int s_d = 0; s_d <= n_d; ++s_d, ++idx) {
                double acc = 0.0;
                if (n_c >= 1 && s_c >= 1) {
                    const std::int64_t p = off[n_c - 1] + static_cast<std::int64_t>(s_c - 1) * (prev_nd_c + 1) + s_d;
                    acc += pi[p] * frontier.g[p];
                }
                if (n_c >= 1 && s_c <= n_c - 1) {
                    const std::int64_t p = off[n_c - 1] + static_cast<std::int64_t>(s_c) * (prev_nd_c + 1) + s_d;
                    acc += pi[p] * frontier.g[p];
                }
                if (n_d >= 1 && s_d >= 1) {
                    const std::int64_t p = off[n_c] + static_cast<std::int64_t>(s_c) * (prev_nd_d + 1) + s_d - 1;
                    acc += (1.0 - pi[p]) * frontier.g[p];
                }
                if (n_d >= 1 && s_d <= n_d - 1) {
                    const std::int64_t p = off[n_c] + static_cast<std::int64_t>(s_c) * (prev_nd_d + 1) + s_d;
                    acc += (1.0 - pi[p]) * frontier.g[p];
                }
                if (!std::isfinite(acc)) {
                    const trial_state x{n_c, s_c, n_d, s_d};
                    throw numeric_error("propagate: non-finite coefficient at state (" +
                                        std::to_string(x.n_c) + "," + std::to_string(x.s_c) + "," +
                                        std::to_string(x.n_d) + "," + std::to_string(x.s_d) + ")");
                }
                out.g[idx] = acc;
            }
        }
    }
    return out;
}

// Burn-in closed form, then the recursion up to the horizon.
inline coefficient_frontier final_frontier(const design_spec& design, const policy_table& policy) {
    coefficient_frontier f = burn_in_frontier(design);
    while (f.stage < design.horizon) f = propagate(f, policy);
    return f;
}

// P(X_i = x) for all x at the frontier's stage, under per-arm success rates.
inline std::vector<double> final_distribution(const coefficient_frontier& frontier, double theta_c,
                                              double theta_d) {
    BRAR_REQUIRE_ARG(theta_c >= 0.0 && theta_c <= 1.0 && theta_d >= 0.0 && theta_d <= 1.0,
                     "final_distribution: success rates must lie in [0,1]");
    const int stage = frontier.stage;
    std::vector<double> pow_c(stage + 1), pow_fc(stage + 1), pow_d(stage + 1), pow_fd(stage + 1);
    pow_c[0] = pow_fc[0] = pow_d[0] = pow_fd[0] = 1.0;  // 0^0 = 1 by convention
    for (int k = 1; k <= stage; ++k) {
        pow_c[k] = pow_c[k - 1] * theta_c;
        pow_fc[k] = pow_fc[k - 1] * (1.0 - theta_c);
        pow_d[k] = pow_d[k - 1] * theta_d;
        pow_fd[k] = pow_fd[k - 1] * (1.0 - theta_d);
    }
    const stage_layout layout(stage);
    std::vector<double> out(layout.size());
    std::int64_t idx = 0;
    for (int n_c = 0; n_c <= stage; ++n_c) {
        const int n_d = stage - n_c;
        for (int s_c = 0; s_c <= n_c; ++s_c) {
            for (int s_d = 0; s_d <= n_d; ++s_d, ++idx) {
                out[idx] = frontier.g[idx] * pow_c[s_c] * pow_fc[n_c - s_c] * pow_d[s_d] * pow_fd[n_d - s_d];
            }
        }
    }
    return out;
}

// Compensated total of a probability vector; conservation checks compare
// this against 1.
inline double mass_sum(const std::vector<double>& p) {
    double s = 0.0, c = 0.0;
    for (double v : p) {
        const double y = v - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

}  // namespace brar
