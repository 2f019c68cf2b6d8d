#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <unordered_map>

#include "brar/coefficients.hpp"

using namespace brar;

namespace {

const beta_prior uniform{1.0, 1.0};

design_spec make_design(int horizon, int burn_in) {
    design_spec d;
    d.horizon = horizon;
    d.burn_in = burn_in;
    return d;
}

// Exhaustive walk over every allocation/outcome path: burn-in alternates
// C, D, C, D, ...; adaptive steps branch over both arms with the table's
// allocation probability. Independent of the frontier recursion.
void enumerate_paths(const design_spec& design, const policy_table& policy, const trial_state& x,
                     int step, double weight, std::unordered_map<std::uint32_t, double>& out) {
    if (step == design.horizon) {
        out[x.pack()] += weight;
        return;
    }
    if (step < design.adaptive_start()) {
        const bool arm_c = (step % 2 == 0);
        trial_state s = x, f = x;
        if (arm_c) {
            s.n_c++; s.s_c++; f.n_c++;
        } else {
            s.n_d++; s.s_d++; f.n_d++;
        }
        enumerate_paths(design, policy, s, step + 1, weight, out);
        enumerate_paths(design, policy, f, step + 1, weight, out);
        return;
    }
    const double pi = policy.at(step, stage_layout(step).index_of(x));
    trial_state cs = x, cf = x, ds = x, df = x;
    cs.n_c++; cs.s_c++; cf.n_c++;
    ds.n_d++; ds.s_d++; df.n_d++;
    enumerate_paths(design, policy, cs, step + 1, weight * pi, out);
    enumerate_paths(design, policy, cf, step + 1, weight * pi, out);
    enumerate_paths(design, policy, ds, step + 1, weight * (1.0 - pi), out);
    enumerate_paths(design, policy, df, step + 1, weight * (1.0 - pi), out);
}

// Stage-by-stage burn-in build under strict alternation with unit factors.
coefficient_frontier alternating_burn_in(int b) {
    std::unordered_map<std::uint32_t, double> cur;
    cur[trial_state{}.pack()] = 1.0;
    for (int step = 0; step < 2 * b; ++step) {
        std::unordered_map<std::uint32_t, double> next;
        const bool arm_c = (step % 2 == 0);
        for (const auto& [key, g] : cur) {
            trial_state x{static_cast<int>(key >> 24), static_cast<int>((key >> 16) & 0xff),
                          static_cast<int>((key >> 8) & 0xff), static_cast<int>(key & 0xff)};
            trial_state s = x, f = x;
            if (arm_c) {
                s.n_c++; s.s_c++; f.n_c++;
            } else {
                s.n_d++; s.s_d++; f.n_d++;
            }
            next[s.pack()] += g;
            next[f.pack()] += g;
        }
        cur = std::move(next);
    }
    const stage_layout layout(2 * b);
    coefficient_frontier out{2 * b, std::vector<double>(layout.size(), 0.0)};
    for (const auto& [key, g] : cur) {
        const trial_state x{static_cast<int>(key >> 24), static_cast<int>((key >> 16) & 0xff),
                            static_cast<int>((key >> 8) & 0xff), static_cast<int>(key & 0xff)};
        out.g[layout.index_of(x)] = g;
    }
    return out;
}

}  // namespace

TEST_CASE("burn-in frontier closed form") {
    const auto f1 = burn_in_frontier(make_design(8, 1));
    const stage_layout l2(2);
    CHECK(f1.stage == 2);
    for (int s_c = 0; s_c <= 1; ++s_c)
        for (int s_d = 0; s_d <= 1; ++s_d) CHECK(f1.g[l2.index_of({1, s_c, 1, s_d})] == 1.0);
    CHECK(f1.g[l2.index_of({0, 0, 2, 1})] == 0.0);
    CHECK(f1.g[l2.index_of({2, 1, 0, 0})] == 0.0);

    const auto f2 = burn_in_frontier(make_design(8, 2));
    CHECK(f2.g[stage_layout(4).index_of({2, 1, 2, 1})] == 4.0);

    const auto f30 = burn_in_frontier(make_design(60, 30));
    // C(30,12)^2 = 86493225^2, still an exact binary64 integer.
    CHECK(f30.g[stage_layout(60).index_of({30, 12, 30, 12})] == 7481077970900625.0);

    // Total coefficient mass after a burn-in of b per arm is 4^b.
    double total = 0.0;
    for (double v : f2.g) total += v;
    CHECK(total == 16.0);
}

TEST_CASE("first adaptive transition from an empty history") {
    const auto design = make_design(1, 0);
    const auto policy = build_policy_table(design);
    const auto f = propagate(burn_in_frontier(design), policy);
    REQUIRE(f.stage == 1);
    for (double v : f.g) CHECK(v == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("frontier matches exhaustive path enumeration") {
    for (int horizon = 1; horizon <= 6; ++horizon) {
        for (int b = 0; 2 * b <= horizon; ++b) {
            const auto design = make_design(horizon, b);
            const auto policy = build_policy_table(design);
            const auto frontier = final_frontier(design, policy);
            std::unordered_map<std::uint32_t, double> oracle;
            enumerate_paths(design, policy, trial_state{}, 0, 1.0, oracle);
            const stage_layout layout(horizon);
            for (std::int64_t idx = 0; idx < layout.size(); ++idx) {
                const auto x = layout.state_at(idx);
                const auto it = oracle.find(x.pack());
                const double expect = (it == oracle.end()) ? 0.0 : it->second;
                if (expect == 0.0) {
                    CHECK(frontier.g[idx] == 0.0);
                } else {
                    CHECK(frontier.g[idx] == Catch::Approx(expect).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("stagewise alternating burn-in reproduces the closed form") {
    for (int b : {1, 2, 5, 13}) {
        const auto direct = burn_in_frontier(make_design(2 * b, b));
        const auto stepped = alternating_burn_in(b);
        REQUIRE(direct.g.size() == stepped.g.size());
        for (std::size_t i = 0; i < direct.g.size(); ++i) CHECK(direct.g[i] == stepped.g[i]);
    }
    // Above ~2^53 the products are no longer exact integers; the two builds
    // may round differently by a few ulp.
    const auto direct = burn_in_frontier(make_design(60, 30));
    const auto stepped = alternating_burn_in(30);
    for (std::size_t i = 0; i < direct.g.size(); ++i) {
        if (direct.g[i] == 0.0) {
            CHECK(stepped.g[i] == 0.0);
        } else {
            CHECK(stepped.g[i] == Catch::Approx(direct.g[i]).epsilon(1e-14));
        }
    }
}

TEST_CASE("full burn-in design needs no propagation") {
    const auto design = make_design(8, 4);
    const auto frontier = burn_in_frontier(design);
    CHECK(frontier.stage == design.horizon);
}

TEST_CASE("conservation of probability mass") {
    for (int b : {0, 3, 10}) {
        const auto design = make_design(20, b);
        const auto policy = build_policy_table(design);
        const auto frontier = final_frontier(design, policy);
        for (double theta_c : {0.0, 0.1, 0.5, 0.62, 1.0}) {
            for (double theta_d : {0.0, 0.37, 0.5, 0.9, 1.0}) {
                const auto p = final_distribution(frontier, theta_c, theta_d);
                CHECK(mass_sum(p) == Catch::Approx(1.0).margin(1e-9));
            }
        }
    }
}

TEST_CASE("degenerate success rates concentrate the distribution") {
    const auto design = make_design(10, 2);
    const auto policy = build_policy_table(design);
    const auto frontier = final_frontier(design, policy);
    const auto p = final_distribution(frontier, 0.0, 0.0);
    const stage_layout layout(10);
    for (std::int64_t idx = 0; idx < layout.size(); ++idx) {
        const auto x = layout.state_at(idx);
        if (x.successes() > 0) CHECK(p[idx] == 0.0);
    }
    CHECK(mass_sum(p) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("full burn-in final distribution is product-binomial") {
    const auto design = make_design(4, 2);
    const auto frontier = burn_in_frontier(design);
    const double tc = 0.3, td = 0.7;
    const auto p = final_distribution(frontier, tc, td);
    const stage_layout layout(4);
    for (int s_c = 0; s_c <= 2; ++s_c) {
        for (int s_d = 0; s_d <= 2; ++s_d) {
            const double expect = binom_double(2, s_c) * std::pow(tc, s_c) * std::pow(1 - tc, 2 - s_c) *
                                  binom_double(2, s_d) * std::pow(td, s_d) * std::pow(1 - td, 2 - s_d);
            CHECK(p[layout.index_of({2, s_c, 2, s_d})] == Catch::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("coefficient support is exactly the reachable set") {
    for (int b : {0, 2}) {
        const auto design = make_design(12, b);
        const auto policy = build_policy_table(design);
        const auto frontier = final_frontier(design, policy);
        const stage_layout layout(12);
        for (std::int64_t idx = 0; idx < layout.size(); ++idx) {
            const auto x = layout.state_at(idx);
            const bool reachable = x.n_c >= b && x.n_d >= b;
            CHECK((frontier.g[idx] > 0.0) == reachable);
        }
    }
}

TEST_CASE("propagate validates its inputs") {
    const auto design = make_design(6, 1);
    const auto policy = build_policy_table(design);  // covers stages 2..5
    coefficient_frontier f{1, std::vector<double>(4, 0.25)};
    CHECK_THROWS_AS(propagate(f, policy), contract_error);  // stage 1 not covered
    coefficient_frontier bad{2, std::vector<double>(3, 0.0)};
    CHECK_THROWS_AS(propagate(bad, policy), contract_error);  // wrong size
}
