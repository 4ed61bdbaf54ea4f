#include <CLI11.hpp>

#include "subcurv/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"curvature, transport and variation checks for tangent "
                 "subbundles in adapted charts"};
    app.require_subcommand(1);

    std::string scenario_file;
    std::optional<int> steps;
    std::optional<double> tol;
    std::optional<std::string> out;
    std::optional<uint64_t> seed;

    CLI::App* run = app.add_subcommand("run", "run a scenario file");
    run->add_option("scenario-file", scenario_file, "scenario JSON file")
        ->required();
    run->add_option("--steps", steps, "override integrator step count");
    run->add_option("--tol", tol, "override the scenario's main tolerance");
    run->add_option("--out", out, "override the report output path");
    run->add_option("--seed", seed, "override the sampling seed");

    CLI::App* list =
        app.add_subcommand("list-fixtures", "list the built-in fixtures");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (list->parsed()) {
        for (const auto& f : subcurv::fixtures::catalog()) {
            std::printf("%-24s %-10s %s\n", f.name.c_str(), f.dims.c_str(),
                        f.summary.c_str());
        }
        return 0;
    }

    return subcurv::run_scenario_file(scenario_file, steps, tol, out, seed);
}
