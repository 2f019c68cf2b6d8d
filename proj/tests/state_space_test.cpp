#include <catch2/catch_amalgamated.hpp>

#include "brar/state_space.hpp"

using namespace brar;

TEST_CASE("stage state counts") {
    CHECK(stage_state_count(0) == 1);
    CHECK(stage_state_count(1) == 4);
    CHECK(stage_state_count(3) == 20);
    CHECK(stage_state_count(60) == 39711);
    CHECK(stage_state_count(240) == 2362041);
    for (int i = 0; i <= 10; ++i) {
        CHECK(static_cast<std::int64_t>(enumerate_states(i).size()) == stage_state_count(i));
        CHECK(stage_layout(i).size() == stage_state_count(i));
    }
}

TEST_CASE("canonical enumeration order at stage 1") {
    const auto states = enumerate_states(1);
    REQUIRE(states.size() == 4);
    CHECK(states[0] == trial_state{0, 0, 1, 0});
    CHECK(states[1] == trial_state{0, 0, 1, 1});
    CHECK(states[2] == trial_state{1, 0, 0, 0});
    CHECK(states[3] == trial_state{1, 1, 0, 0});
}

TEST_CASE("index round-trip and ordering") {
    for (int stage : {0, 1, 2, 5, 9}) {
        const stage_layout layout(stage);
        const auto states = enumerate_states(stage);
        for (std::int64_t idx = 0; idx < layout.size(); ++idx) {
            const auto x = layout.state_at(idx);
            CHECK(x == states[idx]);
            CHECK(layout.index_of(x) == idx);
            CHECK(x.valid());
            CHECK(x.stage() == stage);
        }
    }
}

TEST_CASE("layout rejects foreign states and bad indices") {
    const stage_layout layout(4);
    CHECK_THROWS_AS(layout.index_of(trial_state{1, 0, 1, 0}), contract_error);     // stage 2
    CHECK_THROWS_AS(layout.index_of(trial_state{3, 4, 1, 0}), contract_error);     // s_c > n_c
    CHECK_THROWS_AS(layout.state_at(-1), contract_error);
    CHECK_THROWS_AS(layout.state_at(layout.size()), contract_error);
}

TEST_CASE("pack gives distinct keys") {
    const auto a = trial_state{2, 1, 3, 0};
    const auto b = trial_state{2, 1, 0, 3};
    CHECK(a.pack() != b.pack());
    CHECK(trial_state{240, 120, 0, 0}.pack() == ((240u << 24) | (120u << 16)));
}
