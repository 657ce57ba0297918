#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "bessopt/case_io.hpp"
#include "bessopt/cases.hpp"
#include "bessopt/errors.hpp"

using namespace bessopt;

TEST_SUITE("case_io") {

TEST_CASE("bundled cases round-trip through JSON") {
    for (const auto& name : cases::bundled_case_names()) {
        CAPTURE(name);
        const auto c = cases::load_bundled_case(name);
        const auto back = grid::case_from_json(grid::case_to_json(c));
        CHECK(back.buses.size() == c.buses.size());
        CHECK(back.branches.size() == c.branches.size());
        CHECK(back.scenarios.size() == c.scenarios.size());
        CHECK(grid::case_to_json(back) == grid::case_to_json(c));
        const auto a = grid::solve_power_flow(c);
        const auto b = grid::solve_power_flow(back);
        CHECK((a.v - b.v).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("case files round-trip on disk") {
    const auto dir = std::filesystem::temp_directory_path() / "bessopt_case_io";
    std::filesystem::create_directories(dir);
    const auto c = cases::load_bundled_case("two_area");
    grid::save_case_file(c, dir / "two_area.json");
    const auto back = grid::load_case_file(dir / "two_area.json");
    CHECK(grid::case_to_json(back) == grid::case_to_json(c));
}

TEST_CASE("malformed case files name the line or field") {
    const auto dir = std::filesystem::temp_directory_path() / "bessopt_case_io";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "broken.json");
        out << "{\n  \"base_mva\": 100,\n  \"freq_hz\": 60,\n  \"buses\": [ oops ]\n}\n";
    }
    try {
        grid::load_case_file(dir / "broken.json");
        FAIL("expected a parse error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":4:") != std::string::npos);
    }

    auto doc = grid::case_to_json(cases::load_bundled_case("smib"));
    doc["branches"][0].erase("x");
    try {
        grid::case_from_json(doc);
        FAIL("expected a missing-field error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("branches[0].x") != std::string::npos);
    }
}

TEST_CASE("branch status accepts in/out strings") {
    auto doc = grid::case_to_json(cases::load_bundled_case("smib"));
    doc["branches"][0]["status"] = "out";
    CHECK_FALSE(grid::case_from_json(doc).branches[0].in_service);
    doc["branches"][0]["status"] = "in";
    CHECK(grid::case_from_json(doc).branches[0].in_service);
}

}
