#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "brar/common.hpp"
#include "brar/posterior.hpp"
#include "brar/special.hpp"
#include "brar/state_space.hpp"

namespace brar {

enum class block_rule {
    deterministic,  // control count rounded from block * clipped PPCS
    binomial,       // control count drawn Binomial(block, clipped PPCS)
};

inline const char* to_string(block_rule r) {
    switch (r) {
        case block_rule::deterministic: return "deterministic";
        case block_rule::binomial: return "binomial";
    }
    return "?";
}

enum class gs_cause {
    efficacy,       // 1 - PPCS reached the threshold: developmental arm superior
    futility,       // PPCS reached the threshold: control arm superior
    final_no_stop,  // horizon reached without either condition
};

inline const char* to_string(gs_cause c) {
    switch (c) {
        case gs_cause::efficacy: return "efficacy";
        case gs_cause::futility: return "futility";
        case gs_cause::final_no_stop: return "final-no-stop";
    }
    return "?";
}

// Group-sequential response-adaptive design: a burn-in of `burn_in` per arm
// allocated in half-and-half blocks, then blocks of `block` participants with
// a control fraction driven by the clipped PPCS of the state at the block
// boundary. Analyses run at every block boundary from 2*burn_in on; the trial
// stops early when PPCS >= ost (futility) or 1 - PPCS >= ost (efficacy), and
// the final analysis at the horizon applies the same rule. A threshold above
// 1 disables stopping and rejection entirely.
struct gs_design_spec {
    int horizon = 150;
    int block = 30;
    int burn_in = 15;  // per arm
    beta_prior prior{};
    double clip_lo = 0.25;
    double clip_hi = 0.75;
    double ost = 0.986;
    block_rule rule = block_rule::deterministic;
    double stat_tol = 1e-6;  // quadrature tolerance for non-integer priors

    void validate() const {
        if (horizon < 1 || horizon > 254) throw config_error("gs_design_spec: horizon must be in [1, 254]");
        if (block < 2 || block % 2 != 0)
            throw config_error("gs_design_spec: block size must be even and at least 2");
        if (horizon % block != 0)
            throw config_error("gs_design_spec: horizon must be a whole number of blocks");
        if (burn_in < 0 || 2 * burn_in > horizon)
            throw config_error("gs_design_spec: burn-in must satisfy 0 <= 2b <= horizon");
        if ((2 * burn_in) % block != 0)
            throw config_error("gs_design_spec: burn-in must end on a block boundary");
        prior.validate();
        if (!(clip_lo >= 0.0 && clip_lo <= clip_hi && clip_hi <= 1.0))
            throw config_error("gs_design_spec: clipping bounds must satisfy 0 <= lo <= hi <= 1");
        if (!(ost > 0.5) || !std::isfinite(ost))
            throw config_error("gs_design_spec: stopping threshold must be finite and above 0.5");
        if (!(stat_tol > 0.0)) throw config_error("gs_design_spec: quadrature tolerance must be positive");
    }

    int burn_in_stage() const { return 2 * burn_in; }

    std::string canonical_string() const {
        return "gs;n=" + std::to_string(horizon) + ";block=" + std::to_string(block) +
               ";b=" + std::to_string(burn_in) + ";prior=" + format_double(prior.alpha) + "," +
               format_double(prior.beta) + ";clip=" + format_double(clip_lo) + "," +
               format_double(clip_hi) + ";ost=" + format_double(ost) + ";rule=" + to_string(rule) +
               ";stol=" + format_double(stat_tol);
    }
    std::uint64_t hash() const { return fnv1a64(canonical_string()); }
};

// Control-arm count of one block under the deterministic rule: block * p
// rounded half away from zero.
inline int block_control_count(double allocation_prob, int block) {
    BRAR_REQUIRE_ARG(allocation_prob >= 0.0 && allocation_prob <= 1.0 && block >= 0,
                     "block_control_count: allocation probability must lie in [0,1]");
    return static_cast<int>(std::llround(static_cast<double>(block) * allocation_prob));
}

// Memoized PPCS lookup keyed by the packed state. Integer prior shapes take
// the exact finite-sum path; anything else falls back to quadrature.
class ppcs_memo {
public:
    explicit ppcs_memo(beta_prior prior, double tol = 1e-6) : prior_(prior) {
        prior_.validate();
        BRAR_REQUIRE_ARG(tol > 0.0, "ppcs_memo: tolerance must be positive");
        opt_.abs_tol = tol;
        integer_prior_ = std::floor(prior_.alpha) == prior_.alpha &&
                         std::floor(prior_.beta) == prior_.beta && prior_.alpha < 1e6 &&
                         prior_.beta < 1e6;
    }

    double operator()(const trial_state& x) {
        const std::uint32_t key = x.pack();
        if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
        double v;
        if (integer_prior_) {
            const int a = static_cast<int>(prior_.alpha);
            const int b = static_cast<int>(prior_.beta);
            v = ppcs_exact_integer(x.s_c + a, x.n_c - x.s_c + b, x.s_d + a, x.n_d - x.s_d + b);
        } else {
            v = ppcs(x, prior_, opt_);
        }
        cache_.emplace(key, v);
        return v;
    }

    const beta_prior& prior() const { return prior_; }
    std::size_t size() const { return cache_.size(); }

private:
    beta_prior prior_;
    quad_options opt_{};
    bool integer_prior_ = false;
    std::unordered_map<std::uint32_t, double> cache_;
};

// One absorbed or final path bundle: every trajectory sharing the stopping
// analysis and the state there. `coeff` is the theta-free path weight, so the
// probability is coeff * theta_C^{s_c} (1-theta_C)^{n_c-s_c}
//                      * theta_D^{s_d} (1-theta_D)^{n_d-s_d}.
struct gs_path {
    int stop_stage = 0;
    gs_cause cause = gs_cause::final_no_stop;
    trial_state state;
    double coeff = 0.0;
};

struct gs_kernel {
    gs_design_spec design;
    std::vector<gs_path> paths;
};

// Same bundle weighted at a specific success-rate pair.
struct gs_outcome {
    int stop_stage = 0;
    gs_cause cause = gs_cause::final_no_stop;
    trial_state state;
    double weight = 0.0;
};

namespace detail {

// Forward pass over block boundaries. `on_path` receives every absorbed or
// final bundle; `on_value` sees each analyzed (stage, PPCS) pair before the
// stopping rule is applied. States iterate in canonical layout order, so both
// callbacks fire in a reproducible sequence.
template <class PathSink, class ValueSink>
void gs_forward(const gs_design_spec& d, ppcs_memo& memo, double ost, PathSink&& on_path,
                ValueSink&& on_value) {
    const int b = d.burn_in;
    int stage = d.burn_in_stage();
    stage_layout layout(stage);
    std::vector<double> cur(layout.size(), 0.0);
    for (int s_c = 0; s_c <= b; ++s_c) {
        const double w_c = binom_double(b, s_c);
        for (int s_d = 0; s_d <= b; ++s_d) {
            cur[layout.index_of({b, s_c, b, s_d})] = w_c * binom_double(b, s_d);
        }
    }
    while (true) {
        const bool final_stage = stage == d.horizon;
        std::vector<double> nxt;
        stage_layout next_layout(final_stage ? stage : stage + d.block);
        if (!final_stage) nxt.assign(next_layout.size(), 0.0);
        const auto& next_off = next_layout.offsets();
        for (std::int64_t idx = 0; idx < layout.size(); ++idx) {
            const double coeff = cur[idx];
            if (coeff == 0.0) continue;
            const trial_state x = layout.state_at(idx);
            const double t = memo(x);
            on_value(stage, t);
            if (final_stage) {
                const gs_cause cause = (1.0 - t >= ost) ? gs_cause::efficacy
                                       : (t >= ost)     ? gs_cause::futility
                                                        : gs_cause::final_no_stop;
                on_path(gs_path{stage, cause, x, coeff});
                continue;
            }
            if (t >= ost) {
                on_path(gs_path{stage, gs_cause::futility, x, coeff});
                continue;
            }
            if (1.0 - t >= ost) {
                on_path(gs_path{stage, gs_cause::efficacy, x, coeff});
                continue;
            }
            const double q = std::clamp(t, d.clip_lo, d.clip_hi);
            const int m_lo = d.rule == block_rule::deterministic ? block_control_count(q, d.block) : 0;
            const int m_hi = d.rule == block_rule::deterministic ? m_lo : d.block;
            for (int m = m_lo; m <= m_hi; ++m) {
                const int k = d.block - m;
                double w_m = coeff;
                if (d.rule == block_rule::binomial) {
                    w_m *= binom_double(d.block, m) * std::pow(q, m) * std::pow(1.0 - q, k);
                    if (w_m == 0.0) continue;
                }
                const int n_c = x.n_c + m;
                const int n_d = x.n_d + k;
                for (int j_c = 0; j_c <= m; ++j_c) {
                    const double w_c = w_m * binom_double(m, j_c);
                    const std::int64_t row =
                        next_off[n_c] + static_cast<std::int64_t>(x.s_c + j_c) * (n_d + 1) + x.s_d;
                    for (int j_d = 0; j_d <= k; ++j_d) {
                        nxt[row + j_d] += w_c * binom_double(k, j_d);
                    }
                }
            }
        }
        if (final_stage) break;
        cur = std::move(nxt);
        stage += d.block;
        layout = next_layout;
    }
}

}  // namespace detail

inline gs_kernel build_gs_kernel(const gs_design_spec& design, ppcs_memo& memo) {
    design.validate();
    BRAR_REQUIRE_ARG(memo.prior() == design.prior, "build_gs_kernel: memo prior differs from the design");
    gs_kernel kernel{design, {}};
    detail::gs_forward(
        design, memo, design.ost, [&](const gs_path& p) { kernel.paths.push_back(p); },
        [](int, double) {});
    return kernel;
}

inline gs_kernel build_gs_kernel(const gs_design_spec& design) {
    ppcs_memo memo(design.prior, design.stat_tol);
    return build_gs_kernel(design, memo);
}

// Probability of one path bundle under per-arm success rates, with power
// tables shared across the whole kernel.
namespace detail {

struct theta_powers {
    std::vector<double> s_c, f_c, s_d, f_d;

    theta_powers(int max_exp, double theta_c, double theta_d)
        : s_c(max_exp + 1), f_c(max_exp + 1), s_d(max_exp + 1), f_d(max_exp + 1) {
        s_c[0] = f_c[0] = s_d[0] = f_d[0] = 1.0;  // 0^0 = 1 by convention
        for (int k = 1; k <= max_exp; ++k) {
            s_c[k] = s_c[k - 1] * theta_c;
            f_c[k] = f_c[k - 1] * (1.0 - theta_c);
            s_d[k] = s_d[k - 1] * theta_d;
            f_d[k] = f_d[k - 1] * (1.0 - theta_d);
        }
    }

    double weight(const gs_path& p) const {
        const trial_state& x = p.state;
        return p.coeff * s_c[x.s_c] * f_c[x.n_c - x.s_c] * s_d[x.s_d] * f_d[x.n_d - x.s_d];
    }
};

}  // namespace detail

inline std::vector<gs_outcome> gs_distribution(const gs_kernel& kernel, double theta_c, double theta_d) {
    BRAR_REQUIRE_ARG(theta_c >= 0.0 && theta_c <= 1.0 && theta_d >= 0.0 && theta_d <= 1.0,
                     "gs_distribution: success rates must lie in [0,1]");
    const detail::theta_powers pw(kernel.design.horizon, theta_c, theta_d);
    std::vector<gs_outcome> out;
    out.reserve(kernel.paths.size());
    for (const gs_path& p : kernel.paths) {
        out.push_back({p.stop_stage, p.cause, p.state, pw.weight(p)});
    }
    return out;
}

inline std::vector<gs_outcome> gs_distribution(const gs_design_spec& design, double theta_c,
                                               double theta_d) {
    return gs_distribution(build_gs_kernel(design), theta_c, theta_d);
}

// Rejection probability: efficacy declared at any analysis, final included.
inline double gs_rejection(const gs_kernel& kernel, double theta_c, double theta_d) {
    BRAR_REQUIRE_ARG(theta_c >= 0.0 && theta_c <= 1.0 && theta_d >= 0.0 && theta_d <= 1.0,
                     "gs_rejection: success rates must lie in [0,1]");
    const detail::theta_powers pw(kernel.design.horizon, theta_c, theta_d);
    double sum = 0.0, comp = 0.0;
    for (const gs_path& p : kernel.paths) {
        if (p.cause != gs_cause::efficacy) continue;
        const double y = pw.weight(p) - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

enum class pniwd_scope {
    full,      // post-stop participants imputed to the recommended arm
    realized,  // allocations up to the stopping analysis only
};

inline const char* to_string(pniwd_scope s) {
    switch (s) {
        case pniwd_scope::full: return "full";
        case pniwd_scope::realized: return "realized";
    }
    return "?";
}

struct gs_report {
    double rejection = 0.0;      // P(efficacy at any analysis)
    double epasa = 0.0;          // expected share of allocations on the developmental arm
    double pniwd = 0.0;          // P(no imbalance toward the control arm beyond phi)
    double expected_size = 0.0;  // E[number of participants at the stopping analysis]
};

// Summary operating characteristics at one success-rate pair. The allocation
// metrics treat the developmental arm as the superior one, so theta_d must be
// at least theta_c. Efficacy stops impute the remaining horizon to the
// developmental arm, futility stops to control; the realized scope instead
// compares proportions among the participants actually allocated.
inline gs_report gs_ocs(const gs_kernel& kernel, double theta_c, double theta_d, double phi = 0.1,
                        pniwd_scope scope = pniwd_scope::full) {
    BRAR_REQUIRE_ARG(theta_c >= 0.0 && theta_c <= 1.0 && theta_d >= 0.0 && theta_d <= 1.0,
                     "gs_ocs: success rates must lie in [0,1]");
    BRAR_REQUIRE_ARG(theta_d >= theta_c, "gs_ocs: developmental arm must not be inferior");
    BRAR_REQUIRE_ARG(phi >= 0.0 && phi <= 1.0, "gs_ocs: imbalance margin must lie in [0,1]");
    const int horizon = kernel.design.horizon;
    const detail::theta_powers pw(horizon, theta_c, theta_d);
    double rej = 0.0, alloc = 0.0, wrong = 0.0, size = 0.0;
    for (const gs_path& p : kernel.paths) {
        const double w = pw.weight(p);
        const bool eff = p.cause == gs_cause::efficacy;
        if (eff) rej += w;
        const int remaining = horizon - p.stop_stage;
        alloc += w * (p.state.n_d + (eff ? remaining : 0));
        size += w * p.stop_stage;
        if (scope == pniwd_scope::full) {
            const int n_c_full = p.state.n_c + (p.cause == gs_cause::futility ? remaining : 0);
            if (2.0 * n_c_full - horizon > phi * horizon) wrong += w;
        } else {
            if (2.0 * p.state.n_c - p.stop_stage > phi * p.stop_stage) wrong += w;
        }
    }
    return {rej, alloc / horizon, 1.0 - wrong, size};
}

// Smallest true negative rate over a null grid: 1 - max type I error.
inline double gs_mtnr(const gs_kernel& kernel, const std::vector<double>& null_grid) {
    BRAR_REQUIRE_ARG(!null_grid.empty(), "gs_mtnr: null grid must be nonempty");
    double worst = 0.0;
    for (double th : null_grid) worst = std::max(worst, gs_rejection(kernel, th, th));
    return 1.0 - worst;
}

// Every value the stopping rule can compare against the threshold: PPCS and
// its complement at each reachable analysis state when nothing ever stops,
// restricted to the meaningful range (0.5, 1].
inline std::vector<double> gs_threshold_candidates(const gs_design_spec& design, ppcs_memo& memo) {
    design.validate();
    std::vector<double> values;
    const double no_stop = std::nextafter(1.0, 2.0);
    detail::gs_forward(
        design, memo, no_stop, [](const gs_path&) {},
        [&](int, double t) {
            if (t > 0.5 && t <= 1.0) values.push_back(t);
            if (1.0 - t > 0.5) values.push_back(1.0 - t);
        });
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (values.empty()) throw numeric_error("gs_threshold_candidates: no achievable threshold");
    return values;
}

namespace detail {

// Smallest candidate whose type I error stays within alpha, by bisection on
// the threshold-indexed error curve (raising the threshold shrinks both
// stopping regions, so the curve is treated as nonincreasing).
template <class ErrorAt>
double smallest_controlling_threshold(const std::vector<double>& candidates, double alpha,
                                      ErrorAt&& error_at) {
    if (error_at(candidates.front()) <= alpha) return candidates.front();
    std::size_t lo = 0, hi = candidates.size() - 1;  // error(lo) > alpha
    if (error_at(candidates[hi]) > alpha)
        throw numeric_error("calibrate: no achievable threshold controls the type I error");
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        (error_at(candidates[mid]) <= alpha ? hi : lo) = mid;
    }
    return candidates[hi];
}

}  // namespace detail

// Threshold calibrated at a single null success rate.
inline double calibrate_ost(const gs_design_spec& design, double theta_null, double alpha,
                            ppcs_memo* shared_memo = nullptr) {
    design.validate();
    BRAR_REQUIRE_ARG(theta_null >= 0.0 && theta_null <= 1.0,
                     "calibrate_ost: null success rate must lie in [0,1]");
    BRAR_REQUIRE_ARG(alpha > 0.0 && alpha <= 1.0, "calibrate_ost: level must lie in (0,1]");
    ppcs_memo local(design.prior, design.stat_tol);
    ppcs_memo& memo = shared_memo ? *shared_memo : local;
    const std::vector<double> candidates = gs_threshold_candidates(design, memo);
    return detail::smallest_controlling_threshold(candidates, alpha, [&](double ost) {
        gs_design_spec d = design;
        d.ost = ost;
        return gs_rejection(build_gs_kernel(d, memo), theta_null, theta_null);
    });
}

// Threshold controlling the worst type I error over a null grid.
inline double ux_ost(const gs_design_spec& design, const std::vector<double>& null_grid, double alpha,
                     ppcs_memo* shared_memo = nullptr) {
    design.validate();
    BRAR_REQUIRE_ARG(!null_grid.empty(), "ux_ost: null grid must be nonempty");
    for (double th : null_grid)
        BRAR_REQUIRE_ARG(th >= 0.0 && th <= 1.0, "ux_ost: null grid values must lie in [0,1]");
    BRAR_REQUIRE_ARG(alpha > 0.0 && alpha <= 1.0, "ux_ost: level must lie in (0,1]");
    ppcs_memo local(design.prior, design.stat_tol);
    ppcs_memo& memo = shared_memo ? *shared_memo : local;
    const std::vector<double> candidates = gs_threshold_candidates(design, memo);
    return detail::smallest_controlling_threshold(candidates, alpha, [&](double ost) {
        gs_design_spec d = design;
        d.ost = ost;
        const gs_kernel kernel = build_gs_kernel(d, memo);
        double worst = 0.0;
        for (double th : null_grid) worst = std::max(worst, gs_rejection(kernel, th, th));
        return worst;
    });
}

inline std::vector<double> arrest_null_grid() {
    std::vector<double> grid;
    for (int k = 2; k <= 22; ++k) grid.push_back(k / 100.0);
    return grid;
}

}  // namespace brar
