#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "brar/csv.hpp"

TEST_CASE("field quoting follows the comma-quote-newline rule") {
    REQUIRE(brar::csv_escape("plain") == "plain");
    REQUIRE(brar::csv_escape("") == "");
    REQUIRE(brar::csv_escape("a,b") == "\"a,b\"");
    REQUIRE(brar::csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    REQUIRE(brar::csv_escape("two\nlines") == "\"two\nlines\"");
    REQUIRE(brar::csv_escape("cr\rhere") == "\"cr\rhere\"");
    REQUIRE(brar::csv_escape(" spaced ") == " spaced ");
}

TEST_CASE("rows join fields with commas and end in a bare line feed") {
    std::ostringstream os;
    brar::csv_writer w(os);
    w.row("b", "value", "note");
    w.row(3, 0.5, std::string("x,y"));
    w.row(std::vector<std::string>{"7", "0.25", "plain"});
    REQUIRE(os.str() == "b,value,note\n3,0.5,\"x,y\"\n7,0.25,plain\n");
}

TEST_CASE("floats print with seventeen significant digits") {
    std::ostringstream os;
    brar::csv_writer w(os);
    w.row(0.1, 1.0 / 3.0, 1e-6);
    REQUIRE(os.str() == "0.10000000000000001,0.33333333333333331,9.9999999999999995e-07\n");
}

TEST_CASE("the provenance line names the engine, config, and tolerances") {
    std::ostringstream os;
    brar::csv_writer w(os);
    brar::report_meta meta;
    meta.config_hash = "00ff00ff00ff00ff";
    meta.tolerances = {{"policy_tol", 1e-3}, {"stat_tol", 1e-6}};
    brar::write_report_header(w, meta);
    const std::string line = os.str();
    REQUIRE(line.substr(0, 2) == "# ");
    REQUIRE(line.find("engine=") != std::string::npos);
    REQUIRE(line.find(brar::engine_version) != std::string::npos);
    REQUIRE(line.find("config=00ff00ff00ff00ff") != std::string::npos);
    REQUIRE(line.find("policy_tol=0.001") != std::string::npos);
    REQUIRE(line.find("stat_tol=9.9999999999999995e-07") != std::string::npos);
    REQUIRE(line.back() == '\n');
    REQUIRE(line.find('\r') == std::string::npos);
}

TEST_CASE("write failures surface as io errors") {
    std::ostringstream os;
    brar::csv_writer w(os);
    os.setstate(std::ios::badbit);
    REQUIRE_THROWS_AS(w.row(1, 2), brar::io_error);
}
