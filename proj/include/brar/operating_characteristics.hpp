#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "brar/coefficients.hpp"
#include "brar/common.hpp"
#include "brar/design.hpp"
#include "brar/exact_tests.hpp"
#include "brar/policy.hpp"
#include "brar/quadrature.hpp"
#include "brar/state_space.hpp"

namespace brar {

enum class oc_kind : std::uint8_t { rejection_rate, epasa, piwd, bias };

inline const char* to_string(oc_kind k) {
    switch (k) {
        case oc_kind::rejection_rate: return "rejection_rate";
        case oc_kind::epasa: return "epasa";
        case oc_kind::piwd: return "piwd";
        case oc_kind::bias: return "bias";
    }
    throw contract_error("to_string: unknown oc kind");
}

struct theta_pair {
    double c = 0.5;
    double d = 0.5;
};

namespace detail {

inline double kahan_dot(const std::vector<double>& a, const std::vector<double>& b) {
    BRAR_REQUIRE_ARG(a.size() == b.size(), "kahan_dot: size mismatch");
    double acc = 0.0, carry = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double y = a[i] * b[i] - carry;
        const double s = acc + y;
        carry = (s - acc) - y;
        acc = s;
    }
    return acc;
}

inline int slice_direction(double delta) { return (delta > 0.0) - (delta < 0.0); }

}  // namespace detail

// theta_hat_D - theta_hat_C per state, with the add-one adjustment switched
// on only when an arm is empty.
inline std::vector<double> estimate_payload(int stage) {
    const std::vector<trial_state> states = enumerate_states(stage);
    std::vector<double> out(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const trial_state& x = states[i];
        const int iota = (std::min(x.n_c, x.n_d) == 0) ? 1 : 0;
        out[i] = (x.s_d + iota) / (x.n_d + 2.0 * iota) - (x.s_c + iota) / (x.n_c + 2.0 * iota);
    }
    return out;
}

// Proportion on the superior arm; at equality both arms qualify and the 1/2
// correction leaves a constant payload.
inline std::vector<double> epasa_payload(int stage, int direction) {
    const std::vector<trial_state> states = enumerate_states(stage);
    std::vector<double> out(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (direction > 0) {
            out[i] = static_cast<double>(states[i].n_d) / stage;
        } else if (direction < 0) {
            out[i] = static_cast<double>(states[i].n_c) / stage;
        } else {
            out[i] = 0.5;
        }
    }
    return out;
}

// Indicator of a strict imbalance of more than phi*stage toward the inferior
// arm.
inline std::vector<double> piwd_payload(int stage, int direction, double phi) {
    BRAR_REQUIRE_ARG(direction != 0, "piwd_payload: undefined at theta_C = theta_D");
    BRAR_REQUIRE_ARG(phi >= 0.0 && phi <= 1.0, "piwd_payload: phi out of [0,1]");
    const std::vector<trial_state> states = enumerate_states(stage);
    const double margin = phi * stage;
    std::vector<double> out(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const int inferior_minus_superior = direction > 0 ? states[i].n_c - states[i].n_d
                                                          : states[i].n_d - states[i].n_c;
        out[i] = inferior_minus_superior > margin ? 1.0 : 0.0;
    }
    return out;
}

inline std::vector<double> mask_payload(const std::vector<unsigned char>& mask) {
    std::vector<double> out(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 1.0 : 0.0;
    return out;
}

inline constexpr double slice_rel_tol_default = 1.4901161193847656e-08;  // sqrt(machine epsilon)

// g weighted by the averaged likelihood over the treatment-effect slice
// {theta_D - theta_C = delta}: the per-state weight is
//   1/(1-|delta|) * Int t^{s_C} (1-t)^{n_C-s_C} (t+delta)^{s_D} (1-t-delta)^{n_D-s_D} dt
// over the t-range keeping both rates in [0,1]; at delta = 0 the product
// collapses and the integral is the Beta function B(s+1, stage-s+1).
inline std::vector<double> slice_distribution(const coefficient_frontier& frontier, double delta,
                                              double rel_tol = slice_rel_tol_default) {
    BRAR_REQUIRE_ARG(delta > -1.0 && delta < 1.0, "slice_distribution: delta out of (-1,1)");
    BRAR_REQUIRE_ARG(rel_tol > 0.0, "slice_distribution: tolerance must be positive");
    const int stage = frontier.stage;
    const std::vector<trial_state> states = enumerate_states(stage);
    BRAR_REQUIRE_ARG(frontier.g.size() == states.size(), "slice_distribution: frontier size mismatch");
    std::vector<double> out(states.size());

    if (delta == 0.0) {
        for (std::size_t i = 0; i < states.size(); ++i) {
            if (frontier.g[i] == 0.0) continue;
            const double beta = 1.0 / ((stage + 1) * binom_double(stage, states[i].successes()));
            out[i] = frontier.g[i] * beta;
        }
        return out;
    }

    const double lo = std::max(0.0, -delta);
    const double hi = std::min(1.0, 1.0 - delta);
    const double norm = 1.0 / (hi - lo);
    quad_options opt;
    opt.abs_tol = 1e-300;
    opt.rel_tol = rel_tol;
    opt.max_segments = 4000;
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (frontier.g[i] == 0.0) continue;
        const trial_state& x = states[i];
        const auto integrand = [&](double t) {
            const double tc = std::clamp(t, 0.0, 1.0);
            const double td = std::clamp(t + delta, 0.0, 1.0);
            return std::pow(tc, x.s_c) * std::pow(1.0 - tc, x.n_c - x.s_c) * std::pow(td, x.s_d) *
                   std::pow(1.0 - td, x.n_d - x.s_d);
        };
        out[i] = frontier.g[i] * norm * integrate_gk_or_throw(integrand, lo, hi, opt);
    }
    return out;
}

// What to evaluate: the test context is consulted only for rejection rates.
struct oc_spec {
    oc_kind kind = oc_kind::epasa;
    double phi = 0.1;
    const test_definition* test = nullptr;
    const std::vector<double>* statistic = nullptr;
};

namespace detail {

inline std::vector<double> payload_for(const oc_spec& spec, int stage, int direction) {
    switch (spec.kind) {
        case oc_kind::rejection_rate:
            BRAR_REQUIRE_ARG(spec.test != nullptr && spec.statistic != nullptr,
                             "oc_spec: rejection rate needs a test and its statistic image");
            return mask_payload(rejection_mask(*spec.test, *spec.statistic));
        case oc_kind::epasa: return epasa_payload(stage, direction);
        case oc_kind::piwd: return piwd_payload(stage, direction, spec.phi);
        case oc_kind::bias: return estimate_payload(stage);
    }
    throw contract_error("oc_spec: unknown kind");
}

inline double finish_oc(const oc_spec& spec, const std::vector<double>& payload,
                        const std::vector<double>& weights, double effect) {
    const double raw = kahan_dot(payload, weights);
    if (spec.kind == oc_kind::bias) return raw - effect * mass_sum(weights);
    return raw;
}

}  // namespace detail

// E[f(X, theta)] as the inner product of the payload with the exact
// final-state distribution.
inline double oc_point(const coefficient_frontier& frontier, const oc_spec& spec, theta_pair theta) {
    const int direction = detail::slice_direction(theta.d - theta.c);
    const std::vector<double> payload = detail::payload_for(spec, frontier.stage, direction);
    const std::vector<double> weights = final_distribution(frontier, theta.c, theta.d);
    return detail::finish_oc(spec, payload, weights, theta.d - theta.c);
}

// Average of the OC over the slice {theta_D - theta_C = delta}.
inline double average_oc(const coefficient_frontier& frontier, const oc_spec& spec, double delta,
                         double rel_tol = slice_rel_tol_default) {
    const std::vector<double> payload =
        detail::payload_for(spec, frontier.stage, detail::slice_direction(delta));
    const std::vector<double> weights = slice_distribution(frontier, delta, rel_tol);
    return detail::finish_oc(spec, payload, weights, delta);
}

// theta_D values {max(delta,0) + k*step} while both rates stay in [0,1].
inline std::vector<theta_pair> theta_slice_grid(double delta, double step = 0.01) {
    BRAR_REQUIRE_ARG(delta > -1.0 && delta < 1.0, "theta_slice_grid: delta out of (-1,1)");
    BRAR_REQUIRE_ARG(step > 0.0 && step <= 1.0, "theta_slice_grid: step out of (0,1]");
    const double lo_d = std::max(delta, 0.0);
    const int count = static_cast<int>(std::floor((1.0 - std::fabs(delta)) / step + 1e-9)) + 1;
    std::vector<theta_pair> grid(count);
    for (int k = 0; k < count; ++k) {
        const double td = std::min(1.0, lo_d + k * step);
        grid[k] = {std::clamp(td - delta, 0.0, 1.0), td};
    }
    return grid;
}

struct grid_extrema_result {
    double min_value = std::numeric_limits<double>::quiet_NaN();
    double max_value = std::numeric_limits<double>::quiet_NaN();
    theta_pair argmin{};
    theta_pair argmax{};
};

// Extrema of the pointwise OC over a theta grid, reusing the stored g and the
// payload across grid points.
inline grid_extrema_result grid_extrema(const coefficient_frontier& frontier, const oc_spec& spec,
                                        const std::vector<theta_pair>& grid) {
    BRAR_REQUIRE_ARG(!grid.empty(), "grid_extrema: empty grid");
    grid_extrema_result out;
    std::vector<double> payload;
    int payload_direction = 2;  // outside {-1,0,1} forces the first build
    for (const theta_pair& theta : grid) {
        const int direction = detail::slice_direction(theta.d - theta.c);
        if (direction != payload_direction) {
            payload = detail::payload_for(spec, frontier.stage, direction);
            payload_direction = direction;
        }
        const std::vector<double> weights = final_distribution(frontier, theta.c, theta.d);
        const double v = detail::finish_oc(spec, payload, weights, theta.d - theta.c);
        if (!(v >= out.min_value)) {  // NaN-initialized: first value seeds both
            out.min_value = v;
            out.argmin = theta;
        }
        if (!(v <= out.max_value)) {
            out.max_value = v;
            out.argmax = theta;
        }
    }
    return out;
}

enum class test_mode : std::uint8_t { calibrated, ux, cxs, asymptotic };

inline const char* to_string(test_mode m) {
    switch (m) {
        case test_mode::calibrated: return "calibrated";
        case test_mode::ux: return "ux";
        case test_mode::cxs: return "cxs";
        case test_mode::asymptotic: return "asymptotic";
    }
    throw contract_error("to_string: unknown test mode");
}

struct test_choice {
    test_mode mode = test_mode::calibrated;
    statistic_kind statistic = statistic_kind::ppcs;
    double theta_null = 0.5;
    double alpha_upper = 0.025;
    double alpha_lower = 0.025;
    double asymptotic_crit = 1.959964;  // two-sided normal 5% point
};

inline test_definition build_test(const test_choice& choice, const coefficient_frontier& frontier,
                                  const std::vector<double>& t) {
    switch (choice.mode) {
        case test_mode::calibrated:
            return calibrated_critical_values(frontier.stage, frontier.g, t, choice.statistic,
                                              choice.theta_null, choice.alpha_upper,
                                              choice.alpha_lower);
        case test_mode::ux:
            return ux_critical_values(frontier.stage, frontier.g, t, choice.statistic,
                                      choice.alpha_upper, choice.alpha_lower);
        case test_mode::cxs:
            return cxs_critical_values(frontier.stage, frontier.g, t, choice.statistic,
                                       choice.alpha_upper, choice.alpha_lower);
        case test_mode::asymptotic: {
            test_definition def;
            def.family = test_family::calibrated;
            def.statistic = choice.statistic;
            def.stage = frontier.stage;
            def.alpha_upper = choice.alpha_upper;
            def.alpha_lower = choice.alpha_lower;
            def.upper = {choice.asymptotic_crit, true};
            def.lower = {-choice.asymptotic_crit, true};
            return def;
        }
    }
    throw contract_error("build_test: unknown mode");
}

// One sweep entry: the average and grid extrema of one OC on one slice.
struct oc_row {
    int burn_in = 0;
    double burn_in_proportion = 0.0;
    std::string test;  // empty for test-independent kinds
    statistic_kind statistic = statistic_kind::ppcs;
    oc_kind kind = oc_kind::epasa;
    double delta = 0.0;
    double average = 0.0;
    grid_extrema_result extrema{};
};

inline oc_row evaluate_slice(const coefficient_frontier& frontier, const oc_spec& spec, double delta,
                             double grid_step = 0.01, double rel_tol = slice_rel_tol_default) {
    oc_row row;
    row.kind = spec.kind;
    row.delta = delta;
    row.average = average_oc(frontier, spec, delta, rel_tol);
    row.extrema = grid_extrema(frontier, spec, theta_slice_grid(delta, grid_step));
    return row;
}

// One row per (b, test, delta) for rejection rates plus one per (b, kind,
// delta) for the test-independent metrics; frontiers are rebuilt per b from
// the shared policy table.
inline std::vector<oc_row> burnin_sweep(const design_spec& base, const policy_table& policy,
                                        const std::vector<int>& b_list,
                                        const std::vector<test_choice>& tests,
                                        const std::vector<oc_kind>& kinds,
                                        const std::vector<double>& deltas, double phi = 0.1,
                                        double grid_step = 0.01,
                                        double rel_tol = slice_rel_tol_default) {
    base.validate();
    std::vector<double> images[3];
    const auto image_of = [&](statistic_kind kind) -> const std::vector<double>& {
        auto& slot = images[static_cast<int>(kind)];
        if (slot.empty()) {
            quad_options opt;
            opt.abs_tol = base.stat_tol;
            slot = statistic_image(base.horizon, kind, base.prior, opt);
        }
        return slot;
    };

    std::vector<oc_row> rows;
    for (const int b : b_list) {
        BRAR_REQUIRE_ARG(b >= 0 && 2 * b <= base.horizon, "burnin_sweep: burn-in out of range");
        design_spec design = base;
        design.burn_in = b;
        const coefficient_frontier frontier = final_frontier(design, policy);

        for (const oc_kind kind : kinds) {
            if (kind == oc_kind::rejection_rate) {
                for (const test_choice& choice : tests) {
                    const std::vector<double>& t = image_of(choice.statistic);
                    const test_definition def = build_test(choice, frontier, t);
                    oc_spec spec;
                    spec.kind = kind;
                    spec.test = &def;
                    spec.statistic = &t;
                    for (const double delta : deltas) {
                        oc_row row = evaluate_slice(frontier, spec, delta, grid_step, rel_tol);
                        row.burn_in = b;
                        row.burn_in_proportion = design.burn_in_proportion();
                        row.test = to_string(choice.mode);
                        row.statistic = choice.statistic;
                        rows.push_back(std::move(row));
                    }
                }
            } else {
                oc_spec spec;
                spec.kind = kind;
                spec.phi = phi;
                for (const double delta : deltas) {
                    if (kind == oc_kind::piwd && delta == 0.0) continue;
                    oc_row row = evaluate_slice(frontier, spec, delta, grid_step, rel_tol);
                    row.burn_in = b;
                    row.burn_in_proportion = design.burn_in_proportion();
                    rows.push_back(std::move(row));
                }
            }
        }
    }
    return rows;
}

// Smallest b maximizing exact power at theta, with critical values recomputed
// per b.
inline int optimal_burnin(const design_spec& base, const policy_table& policy,
                          const test_choice& choice, theta_pair theta) {
    base.validate();
    BRAR_REQUIRE_ARG(theta.c != theta.d, "optimal_burnin: power point must be off the diagonal");
    quad_options opt;
    opt.abs_tol = base.stat_tol;
    const std::vector<double> t = statistic_image(base.horizon, choice.statistic, base.prior, opt);

    int best_b = 0;
    double best_power = -1.0;
    for (int b = 0; 2 * b <= base.horizon; ++b) {
        design_spec design = base;
        design.burn_in = b;
        const coefficient_frontier frontier = final_frontier(design, policy);
        const test_definition def = build_test(choice, frontier, t);
        oc_spec spec;
        spec.kind = oc_kind::rejection_rate;
        spec.test = &def;
        spec.statistic = &t;
        const double power = oc_point(frontier, spec, theta);
        if (power > best_power) {
            best_power = power;
            best_b = b;
        }
    }
    return best_b;
}

struct pobp_entry {
    theta_pair theta{};
    int b_star = 0;
};

// optimal_burnin over a whole theta grid, hoisting the statistic image,
// frontier, and critical values out of the per-point loop. Agrees with the
// pointwise version entry by entry (same strict-improvement tie rule).
inline std::vector<pobp_entry> optimal_burnin_map(const design_spec& base,
                                                  const policy_table& policy,
                                                  const test_choice& choice,
                                                  const std::vector<theta_pair>& grid) {
    base.validate();
    BRAR_REQUIRE_ARG(!grid.empty(), "optimal_burnin_map: empty grid");
    for (const theta_pair& theta : grid)
        BRAR_REQUIRE_ARG(theta.c != theta.d,
                         "optimal_burnin_map: power points must be off the diagonal");
    quad_options opt;
    opt.abs_tol = base.stat_tol;
    const std::vector<double> t = statistic_image(base.horizon, choice.statistic, base.prior, opt);

    std::vector<pobp_entry> out(grid.size());
    std::vector<double> best(grid.size(), -1.0);
    for (std::size_t i = 0; i < grid.size(); ++i) out[i].theta = grid[i];
    for (int b = 0; 2 * b <= base.horizon; ++b) {
        design_spec design = base;
        design.burn_in = b;
        const coefficient_frontier frontier = final_frontier(design, policy);
        const test_definition def = build_test(choice, frontier, t);
        oc_spec spec;
        spec.kind = oc_kind::rejection_rate;
        spec.test = &def;
        spec.statistic = &t;
        const std::vector<double> payload = detail::payload_for(spec, frontier.stage, 0);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const std::vector<double> weights = final_distribution(frontier, grid[i].c, grid[i].d);
            const double power = detail::kahan_dot(payload, weights);
            if (power > best[i]) {
                best[i] = power;
                out[i].b_star = b;
            }
        }
    }
    return out;
}

}  // namespace brar
