#include <catch2/catch_amalgamated.hpp>

#include "brar/common.hpp"

using namespace brar;

TEST_CASE("format_double round-trips and trims") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(0.978233355395697) == "0.978233355395697");
    CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
    CHECK(format_double(-0.0) == "-0");
}

TEST_CASE("round_sig groups values that differ below the kept digits") {
    CHECK(round_sig(0.5, 12) == 0.5);
    CHECK(round_sig(0.123456789012349, 12) == round_sig(0.123456789012351, 12));
    CHECK(round_sig(0.1234567890126, 12) != round_sig(0.1234567890124, 12));
    // Monotone: rounding preserves order up to ties.
    CHECK(round_sig(1.0 - 1e-15, 12) <= round_sig(1.0, 12));
    // Scale invariance of significant digits.
    CHECK(round_sig(1234.56789012349e6, 12) == round_sig(1234.56789012351e6, 12));
}

TEST_CASE("fnv1a64 is stable") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("brar") != fnv1a64("rarb"));
}
