#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "subcurv/scenario.hpp"

using namespace subcurv;

namespace {

Json base_curvature_scenario() {
    Json j;
    j["kind"] = "curvature";
    j["chart"] = {{"fixture", "injective_curvature"}};
    j["points"] = 10;
    j["seed"] = 5;
    j["expect_class"] = "Injective";
    j["expect_rank"] = 1;
    return j;
}

std::string report_body_without_timing(const Report& r) {
    Json j = r.to_json();
    j.erase("wall_time_ms");
    return j.dump(2);
}

}  // namespace

TEST_CASE("scenario: curvature kind with expectations") {
    ScenarioRunner runner(base_curvature_scenario());
    Report r = runner.run();
    REQUIRE(r.all_pass());
    REQUIRE(r.checks.size() == 2);
    REQUIRE(r.checks[1].detail == "Injective");
}

TEST_CASE("scenario: expectation mismatches fail the run") {
    Json j = base_curvature_scenario();
    j["expect_class"] = "Surjective";
    ScenarioRunner runner(j);
    Report r = runner.run();
    REQUIRE_FALSE(r.all_pass());
}

TEST_CASE("scenario: reports are deterministic apart from timing") {
    Json j;
    j["kind"] = "invariants";
    j["chart"] = {{"fixture", "contact"}};
    j["draws"] = 20;
    j["seed"] = 9;
    Report a = ScenarioRunner(j).run();
    Report b = ScenarioRunner(j).run();
    REQUIRE(report_body_without_timing(a) == report_body_without_timing(b));
    REQUIRE(a.all_pass());
}

TEST_CASE("scenario: unknown kinds and missing fields are schema errors") {
    Json j;
    j["kind"] = "nonsense";
    REQUIRE_THROWS_AS(ScenarioRunner(j).run(), schema_error);
    Json k;
    k["kind"] = "curvature";
    REQUIRE_THROWS_AS(ScenarioRunner(k).run(), schema_error);
}

TEST_CASE("scenario: seed override changes samples, steps override is echoed") {
    Json j = base_curvature_scenario();
    ScenarioRunner runner(j);
    runner.override_seed(123);
    runner.override_steps(64);
    Report r = runner.run();
    REQUIRE(r.scenario_echo.at("seed").get<uint64_t>() == 123);
    REQUIRE(r.scenario_echo.at("steps").get<int>() == 64);
}

TEST_CASE("scenario file runner: exit codes") {
    const char* good_path = "scenario_runner_good.json";
    {
        std::ofstream f(good_path);
        f << base_curvature_scenario().dump();
    }
    std::ostringstream sink;
    REQUIRE(run_scenario_file(good_path, std::nullopt, std::nullopt,
                              std::optional<std::string>("scenario_runner_report.json"),
                              std::nullopt, sink) == 0);
    // report written and machine readable
    std::ifstream rep("scenario_runner_report.json");
    REQUIRE(rep.good());
    Json parsed;
    rep >> parsed;
    REQUIRE(parsed.at("all_pass").get<bool>());
    REQUIRE(parsed.at("checks").size() == 2);

    // numerical failure -> 1
    Json bad = base_curvature_scenario();
    bad["expect_rank"] = 3;
    const char* bad_path = "scenario_runner_bad.json";
    {
        std::ofstream f(bad_path);
        f << bad.dump();
    }
    REQUIRE(run_scenario_file(bad_path, std::nullopt, std::nullopt, std::nullopt,
                              std::nullopt, sink) == 1);

    // malformed json -> 2
    const char* broken_path = "scenario_runner_broken.json";
    {
        std::ofstream f(broken_path);
        f << "{ this is not json";
    }
    REQUIRE(run_scenario_file(broken_path, std::nullopt, std::nullopt,
                              std::nullopt, std::nullopt, sink) == 2);

    // missing file -> 3
    REQUIRE(run_scenario_file("no_such_scenario.json", std::nullopt,
                              std::nullopt, std::nullopt, std::nullopt,
                              sink) == 3);

    for (const char* f : {good_path, bad_path, broken_path,
                          "scenario_runner_report.json"})
        std::remove(f);
}

TEST_CASE("scenario: tolerance override flips a passing run to failing") {
    Json j;
    j["kind"] = "transport";
    j["chart"] = {{"fixture", "injective_curvature"}};
    j["supplements"] = Json::array(
        {Json{{"constant", Json::array({Json::array({0.25, -0.1}),
                                        Json::array({0.15, 0.2})})}}});
    j["path"] = {{"x", Json{{"cos", Json::array({0.5, 0.0})},
                            {"sin", Json::array({0.0, 0.5})}}},
                 {"t0", 0.0},
                 {"t1", 1.0},
                 {"y0", Json::array({0.1, -0.2})}};
    j["steps"] = 64;
    const char* path = "scenario_tol_override.json";
    {
        std::ofstream f(path);
        f << j.dump();
    }
    std::ostringstream sink;
    REQUIRE(run_scenario_file(path, std::nullopt, std::nullopt, std::nullopt,
                              std::nullopt, sink) == 0);
    REQUIRE(run_scenario_file(path, std::nullopt, std::optional<double>(1e-30),
                              std::nullopt, std::nullopt, sink) == 1);
    std::remove(path);
}

TEST_CASE("scenario: reconstruct kind writes the csv surface on request") {
    Json j;
    j["kind"] = "reconstruct";
    j["chart"] = {{"fixture", "contact"}};
    j["path"] = {{"x", Json{{"cos", Json::array({0.6, 0.0})},
                            {"sin", Json::array({0.0, 0.6})}}},
                 {"t0", 0.0},
                 {"t1", 1.0},
                 {"y0", Json::array({0.2})}};
    j["variation"] = {{"a", Json{{"sin", Json::array({1.0, 0.0})},
                                 {"cos", Json::array({0.0, 1.0})}}},
                      {"b0", Json::array({0.4})}};
    j["epsilon"] = 0.1;
    j["s_steps"] = 4;
    j["t_steps"] = 8;
    j["steps"] = 512;
    j["csv_out"] = "scenario_surface.csv";
    Report r = ScenarioRunner(j).run();
    REQUIRE(r.all_pass());
    std::ifstream csv("scenario_surface.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    REQUIRE(header == "s,t,c0,c1,c2");
    int rows = 0;
    std::string line_text;
    while (std::getline(csv, line_text)) ++rows;
    REQUIRE(rows == 5 * 9);  // (s_steps+1) x (t_steps+1)
    csv.close();
    std::remove("scenario_surface.csv");
}

TEST_CASE("scenario: transport kind runs the full residual set") {
    Json j;
    j["kind"] = "transport";
    j["chart"] = {{"fixture", "injective_curvature"}};
    j["supplements"] = Json::array(
        {Json{{"constant", Json::array({Json::array({0.25, -0.1}),
                                        Json::array({0.15, 0.2})})}}});
    j["path"] = {{"x", Json{{"cos", Json::array({0.5, 0.0})},
                            {"sin", Json::array({0.0, 0.5})}}},
                 {"t0", 0.0},
                 {"t1", 1.0},
                 {"y0", Json::array({0.1, -0.2})}};
    j["steps"] = 128;
    Report r = ScenarioRunner(j).run();
    REQUIRE(r.all_pass());
    REQUIRE(r.checks.size() == 3);
}

TEST_CASE("fixture catalog covers the built-in charts and connections") {
    const auto cat = fixtures::catalog();
    REQUIRE(cat.size() >= 7);
    bool has_constant_curvature = false, has_injective = false;
    for (const auto& f : cat) {
        if (f.name == "constant_curvature") has_constant_curvature = true;
        if (f.name == "injective_curvature") has_injective = true;
        // every catalogued name resolves through one of the factories
        bool resolvable = true;
        try {
            fixtures::chart_by_name(f.name);
        } catch (const schema_error&) {
            try {
                fixtures::connection_by_name(f.name);
            } catch (const schema_error&) {
                resolvable = false;
            }
        }
        REQUIRE(resolvable);
    }
    REQUIRE(has_constant_curvature);
    REQUIRE(has_injective);
}

TEST_CASE("scenario: polynomial chart parsing round trip") {
    Json j;
    j["kind"] = "curvature";
    Json term1, term2;
    term1["exponents"] = Json::array({1, 0, 0});
    term1["coeff"] = Json::array({Json::array({0.0, 1.0})});
    j["chart"] = {{"poly", Json{{"m", 2},
                                {"k", 1},
                                {"radius", 3.0},
                                {"terms", Json::array({term1})}}}};
    j["points"] = 5;
    j["seed"] = 2;
    // gamma(x,y) = [0, x1]: the contact-type field, curvature rank 1
    j["expect_class"] = "Both";
    j["expect_rank"] = 1;
    Report r = ScenarioRunner(j).run();
    REQUIRE(r.all_pass());
}
