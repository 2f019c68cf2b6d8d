#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "brar/group_sequential.hpp"
#include "test_fixtures.hpp"

using namespace brar;

namespace {

gs_design_spec make_gs(int horizon, int block, int burn_in, double ost) {
    gs_design_spec d;
    d.horizon = horizon;
    d.block = block;
    d.burn_in = burn_in;
    d.clip_lo = 0.25;
    d.clip_hi = 0.75;
    d.ost = ost;
    return d;
}

double outcome_mass(const std::vector<gs_outcome>& dist) {
    double sum = 0.0, comp = 0.0;
    for (const gs_outcome& o : dist) {
        const double y = o.weight - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

double early_stop_mass(const gs_kernel& kernel, double theta_c, double theta_d) {
    double sum = 0.0;
    for (const gs_outcome& o : gs_distribution(kernel, theta_c, theta_d)) {
        if (o.stop_stage < kernel.design.horizon) sum += o.weight;
    }
    return sum;
}

}  // namespace

TEST_CASE("design validation enforces block alignment") {
    CHECK_NOTHROW(make_gs(12, 4, 2, 0.9).validate());
    CHECK_NOTHROW(make_gs(12, 4, 6, 0.9).validate());
    CHECK_NOTHROW(make_gs(12, 4, 0, 0.9).validate());
    CHECK_THROWS_AS(make_gs(12, 4, 3, 0.9).validate(), config_error);   // 2b off the block grid
    CHECK_THROWS_AS(make_gs(12, 4, 7, 0.9).validate(), config_error);   // burn-in past the horizon
    CHECK_THROWS_AS(make_gs(12, 5, 2, 0.9).validate(), config_error);   // odd block
    CHECK_THROWS_AS(make_gs(14, 4, 2, 0.9).validate(), config_error);   // fractional block count
    CHECK_THROWS_AS(make_gs(12, 4, 2, 0.5).validate(), config_error);   // threshold not above 1/2
    gs_design_spec bad = make_gs(12, 4, 2, 0.9);
    bad.clip_lo = 0.8;
    bad.clip_hi = 0.2;
    CHECK_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("block control counts round half away from zero") {
    CHECK(block_control_count(0.5, 30) == 15);
    CHECK(block_control_count(0.75, 30) == 23);  // 22.5 rounds up
    CHECK(block_control_count(0.25, 30) == 8);   // 7.5 rounds up
    CHECK(block_control_count(0.26, 30) == 8);
    CHECK(block_control_count(0.0, 30) == 0);
    CHECK(block_control_count(1.0, 30) == 30);
    CHECK(block_control_count(0.375, 4) == 2);
    CHECK(block_control_count(0.1, 4) == 0);
    CHECK_THROWS_AS(block_control_count(1.5, 30), contract_error);
}

TEST_CASE("memoized posterior statistic agrees with direct evaluation") {
    ppcs_memo uniform(beta_prior{});
    const trial_state x{7, 3, 5, 4};
    CHECK(uniform(x) == ppcs_exact_integer(4, 5, 5, 2));
    CHECK(uniform(x) == uniform(x));  // cache hit returns the identical value

    beta_prior half{0.5, 0.5};
    ppcs_memo fractional(half, 1e-8);
    quad_options opt;
    opt.abs_tol = 1e-8;
    CHECK(fractional(x) == Catch::Approx(ppcs(x, half, opt)).margin(1e-12));
}

TEST_CASE("full burn-in collapses to a single balanced analysis") {
    const gs_design_spec d = make_gs(12, 4, 6, 0.9);
    ppcs_memo memo(d.prior);
    const gs_kernel kernel = build_gs_kernel(d, memo);
    CHECK(kernel.paths.size() == 49);  // (6+1)^2 success-count pairs
    for (const gs_path& p : kernel.paths) {
        CHECK(p.stop_stage == 12);
        CHECK(p.state.n_c == 6);
        CHECK(p.state.n_d == 6);
    }

    // classification at the one analysis follows the threshold rule
    double manual_rejection = 0.0;
    const double theta_c = 0.3, theta_d = 0.55;
    for (int s_c = 0; s_c <= 6; ++s_c) {
        for (int s_d = 0; s_d <= 6; ++s_d) {
            const double t = ppcs_exact_integer(s_c + 1, 7 - s_c, s_d + 1, 7 - s_d);
            if (1.0 - t >= 0.9) {
                manual_rejection += binom_double(6, s_c) * binom_double(6, s_d) *
                                    std::pow(theta_c, s_c) * std::pow(1.0 - theta_c, 6 - s_c) *
                                    std::pow(theta_d, s_d) * std::pow(1.0 - theta_d, 6 - s_d);
            }
        }
    }
    CHECK(gs_rejection(kernel, theta_c, theta_d) == Catch::Approx(manual_rejection).margin(1e-12));

    const gs_report r = gs_ocs(kernel, theta_c, theta_d);
    CHECK(r.expected_size == Catch::Approx(12.0).margin(1e-12));
}

TEST_CASE("no stopping and full burn-in reduce to the sequential law") {
    gs_design_spec d = make_gs(8, 2, 4, 1.5);
    d.clip_lo = 0.0;
    d.clip_hi = 1.0;
    const std::vector<gs_outcome> dist = gs_distribution(d, 0.3, 0.7);
    const coefficient_frontier frontier = fixtures::frontier_for(8, 4);
    const std::vector<double> seq = final_distribution(frontier, 0.3, 0.7);
    const stage_layout layout(8);
    for (const gs_outcome& o : dist) {
        CHECK(o.cause == gs_cause::final_no_stop);
        CHECK(o.stop_stage == 8);
        CHECK(o.weight == Catch::Approx(seq[layout.index_of(o.state)]).margin(1e-9));
    }
    ppcs_memo memo(d.prior);
    CHECK(gs_rejection(build_gs_kernel(d, memo), 0.3, 0.7) == 0.0);
}

TEST_CASE("outcome weights conserve mass at random success rates") {
    ppcs_memo memo(beta_prior{});
    const gs_kernel det = build_gs_kernel(make_gs(12, 4, 2, 0.9), memo);
    gs_design_spec bin = make_gs(8, 2, 2, 0.85);
    bin.rule = block_rule::binomial;
    const gs_kernel thin = build_gs_kernel(bin, memo);
    std::mt19937 gen(171);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 25; ++rep) {
        const double tc = unif(gen), td = unif(gen);
        CHECK(outcome_mass(gs_distribution(det, tc, td)) == Catch::Approx(1.0).margin(1e-9));
        CHECK(outcome_mass(gs_distribution(thin, tc, td)) == Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("raising the threshold cannot raise the early-stop probability") {
    ppcs_memo memo(beta_prior{});
    for (auto [tc, td] : {std::pair{0.3, 0.55}, std::pair{0.4, 0.4}}) {
        double prev = 1.0;
        for (double ost : {0.8, 0.9, 0.95, 1.01}) {
            const gs_kernel k = build_gs_kernel(make_gs(12, 4, 2, ost), memo);
            const double stop = early_stop_mass(k, tc, td);
            CHECK(stop <= prev + 1e-12);
            prev = stop;
        }
        CHECK(prev == 0.0);  // threshold above 1 stops nothing
    }
}

TEST_CASE("stopping causes match the threshold rule path by path") {
    const gs_design_spec d = make_gs(12, 4, 2, 0.82);
    ppcs_memo memo(d.prior);
    const gs_kernel kernel = build_gs_kernel(d, memo);
    bool saw_efficacy = false, saw_futility = false, saw_final = false;
    for (const gs_path& p : kernel.paths) {
        const double t = memo(p.state);
        switch (p.cause) {
            case gs_cause::efficacy:
                saw_efficacy = true;
                CHECK(1.0 - t >= d.ost);
                break;
            case gs_cause::futility:
                saw_futility = true;
                CHECK(t >= d.ost);
                break;
            case gs_cause::final_no_stop:
                saw_final = true;
                CHECK(p.stop_stage == d.horizon);
                CHECK(t < d.ost);
                CHECK(1.0 - t < d.ost);
                break;
        }
        CHECK(p.stop_stage >= d.burn_in_stage());
        CHECK((p.stop_stage - d.burn_in_stage()) % d.block == 0);
    }
    CHECK(saw_efficacy);
    CHECK(saw_futility);
    CHECK(saw_final);
}

TEST_CASE("summary characteristics follow from the outcome distribution") {
    const gs_design_spec d = make_gs(12, 4, 2, 0.82);
    ppcs_memo memo(d.prior);
    const gs_kernel kernel = build_gs_kernel(d, memo);
    const double tc = 0.25, td = 0.6, phi = 0.1;
    const gs_report r = gs_ocs(kernel, tc, td, phi);
    const gs_report rr = gs_ocs(kernel, tc, td, phi, pniwd_scope::realized);

    double rejection = 0.0, epasa = 0.0, size = 0.0, wrong_full = 0.0, wrong_realized = 0.0;
    for (const gs_outcome& o : gs_distribution(kernel, tc, td)) {
        const bool eff = o.cause == gs_cause::efficacy;
        if (eff) rejection += o.weight;
        const int remaining = d.horizon - o.stop_stage;
        epasa += o.weight * (o.state.n_d + (eff ? remaining : 0)) / d.horizon;
        size += o.weight * o.stop_stage;
        const int n_c_full = o.state.n_c + (o.cause == gs_cause::futility ? remaining : 0);
        if (n_c_full - (d.horizon - n_c_full) > phi * d.horizon) wrong_full += o.weight;
        if (o.state.n_c - o.state.n_d > phi * o.stop_stage) wrong_realized += o.weight;
    }
    CHECK(r.rejection == Catch::Approx(rejection).margin(1e-12));
    CHECK(r.epasa == Catch::Approx(epasa).margin(1e-12));
    CHECK(r.expected_size == Catch::Approx(size).margin(1e-12));
    CHECK(r.pniwd == Catch::Approx(1.0 - wrong_full).margin(1e-12));
    CHECK(rr.pniwd == Catch::Approx(1.0 - wrong_realized).margin(1e-12));

    CHECK(r.expected_size >= d.burn_in_stage());
    CHECK(r.expected_size <= d.horizon);
    CHECK(gs_ocs(kernel, tc, td, 1.0).pniwd == 1.0);  // imbalance beyond the whole trial is impossible
    CHECK_THROWS_AS(gs_ocs(kernel, 0.6, 0.25), contract_error);
}

TEST_CASE("adaptation favors the superior arm") {
    ppcs_memo memo(beta_prior{});
    const gs_kernel adaptive = build_gs_kernel(make_gs(12, 4, 2, 0.9), memo);
    CHECK(gs_ocs(adaptive, 0.2, 0.8).epasa > 0.5);

    const gs_kernel balanced = build_gs_kernel(make_gs(12, 4, 6, 1.5), memo);
    CHECK(gs_ocs(balanced, 0.2, 0.8).epasa == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("easier stopping shortens the expected trial") {
    ppcs_memo memo(beta_prior{});
    const gs_kernel easy = build_gs_kernel(make_gs(12, 4, 2, 0.55), memo);
    const gs_kernel hard = build_gs_kernel(make_gs(12, 4, 2, 0.99), memo);
    CHECK(gs_ocs(easy, 0.2, 0.7).expected_size < gs_ocs(hard, 0.2, 0.7).expected_size);
}

TEST_CASE("binomial thinning spreads the block allocation") {
    ppcs_memo memo(beta_prior{});
    gs_design_spec d = make_gs(8, 4, 2, 1.5);
    const gs_kernel det = build_gs_kernel(d, memo);
    d.rule = block_rule::binomial;
    const gs_kernel thin = build_gs_kernel(d, memo);
    const auto control_sizes = [](const gs_kernel& k) {
        std::vector<int> out;
        for (const gs_path& p : k.paths)
            if (p.coeff > 0.0) out.push_back(p.state.n_c);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };
    const std::vector<int> det_sizes = control_sizes(det);
    const std::vector<int> thin_sizes = control_sizes(thin);
    CHECK(thin_sizes.size() > det_sizes.size());
    CHECK(std::includes(thin_sizes.begin(), thin_sizes.end(), det_sizes.begin(), det_sizes.end()));
}

TEST_CASE("calibration returns the smallest controlling threshold") {
    const gs_design_spec d = make_gs(12, 4, 2, 0.9);
    ppcs_memo memo(d.prior);
    const double theta_null = 0.35, alpha = 0.05;
    const double found = calibrate_ost(d, theta_null, alpha, &memo);

    const std::vector<double> candidates = gs_threshold_candidates(d, memo);
    const auto tie_at = [&](double ost) {
        gs_design_spec probe = d;
        probe.ost = ost;
        return gs_rejection(build_gs_kernel(probe, memo), theta_null, theta_null);
    };
    double brute = std::numeric_limits<double>::quiet_NaN();
    for (double v : candidates) {
        if (tie_at(v) <= alpha) {
            brute = v;
            break;
        }
    }
    CHECK(found == brute);
    CHECK(tie_at(found) <= alpha);

    CHECK(calibrate_ost(d, theta_null, 1.0, &memo) == candidates.front());
    const double strict = calibrate_ost(d, theta_null, 0.01, &memo);
    const double loose = calibrate_ost(d, theta_null, 0.3, &memo);
    CHECK(strict >= found);
    CHECK(found >= loose);
}

TEST_CASE("grid calibration dominates the single-point version") {
    const gs_design_spec d = make_gs(12, 4, 2, 0.9);
    ppcs_memo memo(d.prior);
    const std::vector<double> grid{0.2, 0.35, 0.5};
    const double ux = ux_ost(d, grid, 0.05, &memo);
    CHECK(ux >= calibrate_ost(d, 0.35, 0.05, &memo));

    gs_design_spec probe = d;
    probe.ost = ux;
    const gs_kernel kernel = build_gs_kernel(probe, memo);
    for (double th : grid) CHECK(gs_rejection(kernel, th, th) <= 0.05);
    CHECK(gs_mtnr(kernel, grid) >= 0.95);
}

TEST_CASE("trial-scale design stops as published") {
    gs_design_spec d;  // 150 participants, blocks of 30, burn-in 15, threshold 0.986
    ppcs_memo memo(d.prior);
    const gs_kernel kernel = build_gs_kernel(d, memo);

    const std::vector<gs_outcome> null_dist = gs_distribution(kernel, 0.12, 0.12);
    CHECK(outcome_mass(null_dist) == Catch::Approx(1.0).margin(1e-9));
    double efficacy_mass = 0.0;
    for (const gs_outcome& o : null_dist)
        if (o.cause == gs_cause::efficacy) efficacy_mass += o.weight;
    const gs_report null_report = gs_ocs(kernel, 0.12, 0.12);
    CHECK(null_report.rejection == Catch::Approx(efficacy_mass).margin(1e-12));

    const gs_report alt = gs_ocs(kernel, 0.12, 0.37, 0.1);
    CHECK(alt.rejection > 0.87);
    CHECK(alt.rejection < 0.93);
    CHECK(alt.epasa > 0.5);
    CHECK(alt.pniwd > 0.99);
}

TEST_CASE("full-burn-in trial calibrates through its single analysis") {
    gs_design_spec d;
    d.burn_in = 75;  // 2b equals the horizon: the final analysis is the only one
    ppcs_memo memo(d.prior);
    const double ost = calibrate_ost(d, 0.12, 0.05, &memo);
    CHECK(ost > 0.5);
    CHECK(ost <= 1.0);
    d.ost = ost;
    const gs_kernel kernel = build_gs_kernel(d, memo);
    for (const gs_path& p : kernel.paths) CHECK(p.stop_stage == 150);
    CHECK(gs_rejection(kernel, 0.12, 0.12) <= 0.05);
    CHECK(gs_rejection(kernel, 0.12, 0.37) > 0.9);
}
