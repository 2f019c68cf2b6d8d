#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "brar/policy.hpp"

using namespace brar;

namespace {
const beta_prior uniform{1.0, 1.0};
}

TEST_CASE("design validation") {
    design_spec d;
    d.horizon = 60;
    d.burn_in = 30;
    CHECK_NOTHROW(d.validate());
    d.burn_in = 31;
    CHECK_THROWS_AS(d.validate(), config_error);
    d.burn_in = -1;
    CHECK_THROWS_AS(d.validate(), config_error);
    d = design_spec{};
    d.clip_lo = 0.8;
    d.clip_hi = 0.2;
    CHECK_THROWS_AS(d.validate(), config_error);
    d = design_spec{};
    d.prior = {0.0, 1.0};
    CHECK_THROWS_AS(d.validate(), config_error);
    d = design_spec{};
    CHECK(d.hash() == design_spec{}.hash());
    d.burn_in = 3;
    CHECK(d.hash() != design_spec{}.hash());
}

TEST_CASE("allocation probability matches the posterior statistic") {
    CHECK(allocation_prob_free({1, 1, 1, 0}, uniform, 0.0, 1.0, 1e-6) ==
          Catch::Approx(5.0 / 6.0).margin(1e-9));
    // Clipping binds.
    CHECK(allocation_prob_free({2, 2, 2, 0}, uniform, 0.25, 0.75, 1e-6) == 0.75);
    CHECK(allocation_prob_free({2, 0, 2, 2}, uniform, 0.25, 0.75, 1e-6) == 0.25);
    // Arm-swap complement within quadrature slack.
    const double a = allocation_prob_free({5, 3, 7, 2}, uniform, 0.0, 1.0, 1e-6);
    const double b = allocation_prob_free({7, 2, 5, 3}, uniform, 0.0, 1.0, 1e-6);
    CHECK(a + b == Catch::Approx(1.0).margin(2e-6));
}

TEST_CASE("policy tables agree bitwise on shared stages regardless of burn-in") {
    const auto full = build_policy_table(0, 7, uniform, 0.0, 1.0, 1e-3);
    const auto late = build_policy_table(4, 7, uniform, 0.0, 1.0, 1e-3);
    for (int stage = 4; stage <= 7; ++stage) {
        const auto& a = full.stage_values(stage);
        const auto& b = late.stage_values(stage);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
    CHECK(static_cast<std::int64_t>(full.stage_values(0).size()) == 1);
    CHECK(full.at(0, 0) == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("table size bookkeeping") {
    design_spec d;
    d.horizon = 4;
    d.burn_in = 0;
    const auto table = build_policy_table(d);
    std::int64_t total = 0;
    for (int stage = 0; stage <= 3; ++stage) total += table.stage_values(stage).size();
    CHECK(total == 1 + 4 + 10 + 20);
}

TEST_CASE("allocation_prob enforces the phase contract") {
    design_spec d;
    d.horizon = 8;
    d.burn_in = 2;
    const auto table = build_policy_table(d);
    CHECK_THROWS_AS(allocation_prob(d, table, {1, 0, 1, 1}), contract_error);  // burn-in stage
    CHECK_THROWS_AS(allocation_prob(d, table, {4, 0, 4, 0}), contract_error);  // at horizon
    CHECK_NOTHROW(allocation_prob(d, table, {2, 1, 2, 1}));
}

TEST_CASE("policy cache round-trip, corruption, and key mismatch") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "brar_policy_cache_test";
    fs::create_directories(dir);
    const auto path = (dir / policy_cache_name(0, 5, uniform, 0.0, 1.0, 1e-3)).string();

    const auto table = build_policy_table(0, 5, uniform, 0.0, 1.0, 1e-3);
    save_policy_cache(table, path);

    auto loaded = load_policy_cache(path, 0, 5, uniform, 0.0, 1.0, 1e-3);
    REQUIRE(loaded.has_value());
    for (int stage = 0; stage <= 5; ++stage) {
        const auto& a = table.stage_values(stage);
        const auto& b = loaded->stage_values(stage);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }

    // Key mismatch is a miss.
    CHECK_FALSE(load_policy_cache(path, 0, 5, uniform, 0.0, 1.0, 1e-4).has_value());
    CHECK_FALSE(load_policy_cache(path, 0, 4, uniform, 0.0, 1.0, 1e-3).has_value());
    CHECK_FALSE(load_policy_cache(path, 0, 5, beta_prior{0.5, 0.5}, 0.0, 1.0, 1e-3).has_value());

    // Flip one payload byte: checksum must reject the file.
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(64);
        char c;
        f.seekg(64);
        f.get(c);
        f.seekp(64);
        f.put(static_cast<char>(c ^ 0x40));
    }
    CHECK_FALSE(load_policy_cache(path, 0, 5, uniform, 0.0, 1.0, 1e-3).has_value());

    // Missing file is a miss, not an error.
    CHECK_FALSE(load_policy_cache((dir / "absent.bin").string(), 0, 5, uniform, 0.0, 1.0, 1e-3)
                    .has_value());
    fs::remove_all(dir);
}
