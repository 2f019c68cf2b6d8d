#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "brar/common.hpp"
#include "brar/design.hpp"
#include "brar/group_sequential.hpp"
#include "brar/operating_characteristics.hpp"
#include "brar/policy.hpp"
#include "brar/special.hpp"
#include "brar/state_space.hpp"

namespace brar {

namespace detail {

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

// splitmix64 step; used to expand one seed word into a full generator state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += golden_gamma;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// xoshiro256++ with splitmix64 seeding.  Integer-only state transitions keep
// streams bit-identical across platforms for a fixed seed.
class xoshiro256pp {
  public:
    explicit xoshiro256pp(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Unbiased integer in [0, bound) by rejection on the top bits.
    std::uint64_t below(std::uint64_t bound) {
        BRAR_REQUIRE_ARG(bound > 0, "below: bound must be positive");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t draw = next();
        while (draw >= limit) draw = next();
        return draw % bound;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
};

enum class burn_in_rule : std::uint8_t {
    alternating,
    random_order,
};

inline std::string to_string(burn_in_rule rule) {
    switch (rule) {
        case burn_in_rule::alternating: return "alternating";
        case burn_in_rule::random_order: return "random";
    }
    throw contract_error("unknown burn_in_rule");
}

struct sim_config {
    double theta_c = 0.5;
    double theta_d = 0.5;
    std::int64_t replications = 100000;
    std::uint64_t seed = 1;
    burn_in_rule rule = burn_in_rule::alternating;

    void validate() const {
        if (!(theta_c >= 0.0 && theta_c <= 1.0) || !(theta_d >= 0.0 && theta_d <= 1.0))
            throw config_error("sim_config: success rates must lie in [0,1]");
        if (replications < 1) throw config_error("sim_config: replications must be at least 1");
    }

    // Replication r draws from its own generator, so estimates do not depend
    // on evaluation order and any single trajectory can be replayed alone.
    xoshiro256pp stream(std::int64_t replication) const {
        return xoshiro256pp{seed + static_cast<std::uint64_t>(replication + 1) * detail::golden_gamma};
    }
};

struct mc_result {
    double estimate = 0.0;
    double se = 0.0;
    std::int64_t replications = 0;
};

namespace detail {

inline double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 32) {
        double total = 0.0;
        for (const double v : values) total += v;
        return total;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

inline mc_result summarize(const std::vector<double>& values) {
    const auto n = static_cast<std::int64_t>(values.size());
    BRAR_REQUIRE_ARG(n >= 1, "summarize: need at least one value");
    mc_result out;
    out.replications = n;
    out.estimate = pairwise_sum(values) / static_cast<double>(n);
    if (n == 1) {
        out.se = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - out.estimate;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
    out.se = std::sqrt(var / static_cast<double>(n));
    return out;
}

// Uniform arrangement of b control slots among the 2b burn-in slots: the
// first b steps of a Fisher-Yates pass over the slot markers.
inline void shuffle_burn_in(std::span<std::uint8_t> arms, int burn_in, xoshiro256pp& rng) {
    const auto total = static_cast<std::size_t>(2 * burn_in);
    for (std::size_t i = 0; i < static_cast<std::size_t>(burn_in); ++i)
        arms[i] = 1;
    for (std::size_t i = static_cast<std::size_t>(burn_in); i < total; ++i)
        arms[i] = 0;
    for (std::size_t i = 0; i + 1 < total && i < static_cast<std::size_t>(burn_in); ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
        std::swap(arms[i], arms[j]);
    }
}

}  // namespace detail

// Simulates single trajectories of the fixed-horizon adaptive design.
class trial_simulator {
  public:
    trial_simulator(const design_spec& design, const policy_table& policy)
        : design_(design), policy_(&policy) {
        design_.validate();
        const int start = design_.adaptive_start();
        BRAR_REQUIRE_ARG(start >= design_.horizon ||
                             (policy.covers(start) && policy.covers(design_.horizon - 1)),
                         "trial_simulator: policy table must cover the adaptive stages");
        layouts_.reserve(static_cast<std::size_t>(std::max(0, design_.horizon - start)));
        for (int stage = start; stage < design_.horizon; ++stage) layouts_.emplace_back(stage);
    }

    const design_spec& design() const { return design_; }

    trial_state run(xoshiro256pp& rng, double theta_c, double theta_d,
                    burn_in_rule rule = burn_in_rule::alternating) const {
        trial_state x{};
        if (design_.burn_in > 0) {
            std::array<std::uint8_t, 254> arms{};
            const auto slots = static_cast<std::size_t>(2 * design_.burn_in);
            if (rule == burn_in_rule::random_order) {
                detail::shuffle_burn_in(std::span{arms.data(), slots}, design_.burn_in, rng);
            } else {
                for (std::size_t slot = 0; slot < slots; slot += 2) arms[slot] = 1;
            }
            for (std::size_t slot = 0; slot < slots; ++slot)
                enroll(x, arms[slot] != 0, rng, theta_c, theta_d);
        }
        for (int stage = design_.adaptive_start(); stage < design_.horizon; ++stage) {
            const auto& layout = layouts_[static_cast<std::size_t>(stage - design_.adaptive_start())];
            const double p = policy_->at(stage, layout.index_of(x));
            enroll(x, rng.bernoulli(p), rng, theta_c, theta_d);
        }
        return x;
    }

  private:
    static void enroll(trial_state& x, bool to_control, xoshiro256pp& rng, double theta_c,
                       double theta_d) {
        const bool success = rng.bernoulli(to_control ? theta_c : theta_d);
        if (to_control) {
            ++x.n_c;
            x.s_c += success ? 1 : 0;
        } else {
            ++x.n_d;
            x.s_d += success ? 1 : 0;
        }
    }

    design_spec design_;
    const policy_table* policy_;
    std::vector<stage_layout> layouts_;
};

// Monte Carlo estimate of one operating characteristic of the fixed-horizon
// design; the payload per final state is shared with the exact engine, so
// only the trajectory law is independent.
inline mc_result mc_estimate(const design_spec& design, const policy_table& policy,
                             const oc_spec& spec, const sim_config& config) {
    config.validate();
    const trial_simulator sim(design, policy);
    const stage_layout layout(design.horizon);
    const int direction = detail::slice_direction(config.theta_d - config.theta_c);
    const std::vector<double> payload = detail::payload_for(spec, design.horizon, direction);
    const double effect = spec.kind == oc_kind::bias ? config.theta_d - config.theta_c : 0.0;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(config.replications));
    for (std::int64_t r = 0; r < config.replications; ++r) {
        xoshiro256pp rng = config.stream(r);
        const trial_state x = sim.run(rng, config.theta_c, config.theta_d, config.rule);
        values.push_back(payload[layout.index_of(x)] - effect);
    }
    return detail::summarize(values);
}

// Counts of final states over all replications, indexed by the final-stage
// layout; the common input to the burn-in-rule homogeneity check.
inline std::vector<std::int64_t> final_state_counts(const design_spec& design,
                                                    const policy_table& policy,
                                                    const sim_config& config) {
    config.validate();
    const trial_simulator sim(design, policy);
    const stage_layout layout(design.horizon);
    std::vector<std::int64_t> counts(layout.size(), 0);
    for (std::int64_t r = 0; r < config.replications; ++r) {
        xoshiro256pp rng = config.stream(r);
        const trial_state x = sim.run(rng, config.theta_c, config.theta_d, config.rule);
        ++counts[layout.index_of(x)];
    }
    return counts;
}

// Two-sample chi-square homogeneity p-value.  Bins are pooled left to right
// until each group's expected count reaches min_expected in both samples;
// a trailing underfull group merges backward.
inline double chi_square_homogeneity(const std::vector<std::int64_t>& a,
                                     const std::vector<std::int64_t>& b,
                                     double min_expected = 5.0) {
    BRAR_REQUIRE_ARG(a.size() == b.size() && !a.empty(),
                     "chi_square_homogeneity: samples need matching nonempty bins");
    double n_a = 0.0;
    double n_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        BRAR_REQUIRE_ARG(a[i] >= 0 && b[i] >= 0, "chi_square_homogeneity: negative count");
        n_a += static_cast<double>(a[i]);
        n_b += static_cast<double>(b[i]);
    }
    BRAR_REQUIRE_ARG(n_a > 0.0 && n_b > 0.0, "chi_square_homogeneity: empty sample");
    const double total = n_a + n_b;
    const double share_a = n_a / total;
    const double share_b = n_b / total;
    // Pooled column total that keeps both expected counts >= min_expected.
    const double needed = min_expected / std::min(share_a, share_b);
    std::vector<std::pair<double, double>> groups;
    double g_a = 0.0;
    double g_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        g_a += static_cast<double>(a[i]);
        g_b += static_cast<double>(b[i]);
        if (g_a + g_b >= needed) {
            groups.emplace_back(g_a, g_b);
            g_a = 0.0;
            g_b = 0.0;
        }
    }
    if (g_a + g_b > 0.0) {
        if (groups.empty()) {
            groups.emplace_back(g_a, g_b);
        } else {
            groups.back().first += g_a;
            groups.back().second += g_b;
        }
    }
    if (groups.size() < 2) throw numeric_error("chi_square_homogeneity: all mass pooled into one bin");
    double stat = 0.0;
    for (const auto& [c_a, c_b] : groups) {
        const double col = c_a + c_b;
        const double e_a = col * share_a;
        const double e_b = col * share_b;
        stat += (c_a - e_a) * (c_a - e_a) / e_a + (c_b - e_b) * (c_b - e_b) / e_b;
    }
    return chi_square_sf(stat, static_cast<double>(groups.size() - 1));
}

// Simulates single trajectories of the group-sequential design.
class gs_simulator {
  public:
    gs_simulator(const gs_design_spec& design, ppcs_memo& memo) : design_(design), memo_(&memo) {
        design_.validate();
        BRAR_REQUIRE_ARG(memo.prior() == design.prior, "gs_simulator: memo prior mismatch");
    }

    const gs_design_spec& design() const { return design_; }

    gs_outcome run(xoshiro256pp& rng, double theta_c, double theta_d) {
        trial_state x{};
        int stage = 0;
        while (stage < design_.burn_in_stage()) {
            sample_block(x, design_.block / 2, rng, theta_c, theta_d);
            stage += design_.block;
        }
        while (true) {
            const double t = (*memo_)(x);
            if (stage == design_.horizon) {
                gs_cause cause = gs_cause::final_no_stop;
                if (1.0 - t >= design_.ost)
                    cause = gs_cause::efficacy;
                else if (t >= design_.ost)
                    cause = gs_cause::futility;
                return {stage, cause, x, 1.0};
            }
            if (t >= design_.ost) return {stage, gs_cause::futility, x, 1.0};
            if (1.0 - t >= design_.ost) return {stage, gs_cause::efficacy, x, 1.0};
            const double q = std::clamp(t, design_.clip_lo, design_.clip_hi);
            int m = 0;
            if (design_.rule == block_rule::deterministic) {
                m = block_control_count(q, design_.block);
            } else {
                for (int i = 0; i < design_.block; ++i) m += rng.bernoulli(q) ? 1 : 0;
            }
            sample_block(x, m, rng, theta_c, theta_d);
            stage += design_.block;
        }
    }

  private:
    void sample_block(trial_state& x, int m_control, xoshiro256pp& rng, double theta_c,
                      double theta_d) const {
        for (int i = 0; i < m_control; ++i) x.s_c += rng.bernoulli(theta_c) ? 1 : 0;
        x.n_c += m_control;
        const int m_draft = design_.block - m_control;
        for (int i = 0; i < m_draft; ++i) x.s_d += rng.bernoulli(theta_d) ? 1 : 0;
        x.n_d += m_draft;
    }

    gs_design_spec design_;
    ppcs_memo* memo_;
};

struct mc_gs_report {
    mc_result rejection;
    mc_result epasa;
    mc_result pniwd;
    mc_result expected_size;
};

// Monte Carlo estimates of the four group-sequential summaries from one
// simulated sample.
inline mc_gs_report mc_gs_ocs(const gs_design_spec& design, ppcs_memo& memo,
                              const sim_config& config, double phi = 0.1,
                              pniwd_scope scope = pniwd_scope::full) {
    config.validate();
    BRAR_REQUIRE_ARG(config.theta_d >= config.theta_c,
                     "mc_gs_ocs: draft arm must be the (weakly) superior arm");
    BRAR_REQUIRE_ARG(phi >= 0.0 && phi <= 1.0, "mc_gs_ocs: phi must lie in [0,1]");
    gs_simulator sim(design, memo);
    const double horizon = static_cast<double>(design.horizon);
    std::vector<double> rejection;
    std::vector<double> epasa;
    std::vector<double> pniwd;
    std::vector<double> size;
    const auto reps = static_cast<std::size_t>(config.replications);
    rejection.reserve(reps);
    epasa.reserve(reps);
    pniwd.reserve(reps);
    size.reserve(reps);
    for (std::int64_t r = 0; r < config.replications; ++r) {
        xoshiro256pp rng = config.stream(r);
        const gs_outcome o = sim.run(rng, config.theta_c, config.theta_d);
        const bool efficacy = o.cause == gs_cause::efficacy;
        const double remaining = horizon - static_cast<double>(o.stop_stage);
        rejection.push_back(efficacy ? 1.0 : 0.0);
        epasa.push_back((static_cast<double>(o.state.n_d) + (efficacy ? remaining : 0.0)) / horizon);
        bool wrong = false;
        if (scope == pniwd_scope::full) {
            const double n_c_full = static_cast<double>(o.state.n_c) + (efficacy ? 0.0 : remaining);
            wrong = 2.0 * n_c_full - horizon > phi * horizon;
        } else {
            const double at_stop = static_cast<double>(o.stop_stage);
            wrong = 2.0 * static_cast<double>(o.state.n_c) - at_stop > phi * at_stop;
        }
        pniwd.push_back(wrong ? 0.0 : 1.0);
        size.push_back(static_cast<double>(o.stop_stage));
    }
    mc_gs_report out;
    out.rejection = detail::summarize(rejection);
    out.epasa = detail::summarize(epasa);
    out.pniwd = detail::summarize(pniwd);
    out.expected_size = detail::summarize(size);
    return out;
}

}  // namespace brar
