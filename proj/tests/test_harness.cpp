#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "spdelab/experiment.hpp"
#include "spdelab/format.hpp"

using namespace spdelab;
using nlohmann::json;

namespace {

json minimal_simulate() {
    return json::parse(R"({
        "experiment": "simulate",
        "model": {"family": "explicit", "eigenvalues": [-1.0]},
        "coefficients": {"preset": "additive", "scale": 1.0},
        "noise": {"rate": 2.0,
                  "mark_family": {"family": "atoms",
                                  "points": [[1.0], [-1.0]],
                                  "weights": [1.0, 1.0]}},
        "grid": {"T": 0.5, "steps": 50},
        "mc": {"paths": 200, "seed": 3},
        "initial": [1.0]
    })");
}

/// Field path of the ConfigError raised by parse_config, or "<none>" if it
/// unexpectedly succeeds.
std::string rejected_field(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<none>";
}

}  // namespace

TEST_SUITE("harness") {

// === parsing and defaults ===

TEST_CASE("minimal config fills documented defaults") {
    auto j = minimal_simulate();
    j.erase("mc");
    const auto cfg = parse_config(j);
    CHECK(cfg.experiment == "simulate");
    CHECK(cfg.paths == 10000);
    CHECK(cfg.seed == 1);
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.generator.dimension() == 1);
    CHECK(cfg.measure.total_rate() == 2.0);
    CHECK(cfg.grid.horizon == 0.5);
    CHECK(cfg.grid.steps == 50);
    REQUIRE(cfg.initial.size() == 1);
    CHECK(cfg.initial[0] == 1.0);
    // echo carries the normalized form, defaults materialized
    CHECK(cfg.echo["mc"]["paths"] == 10000);
    CHECK(cfg.echo["output"]["dir"] == "out");
}

TEST_CASE("laplacian model builds the advertised modes") {
    auto j = minimal_simulate();
    j["model"] = {{"family", "laplacian_dirichlet"}, {"modes", 4}};
    j["coefficients"] = {{"preset", "zero"}};
    j.erase("noise");
    j["initial"] = {1.0, 0.0, 0.0, 0.0};
    const auto cfg = parse_config(j);
    CHECK(cfg.generator.dimension() == 4);
    CHECK(cfg.generator.growth_bound() < -9.8);
}

TEST_CASE("field paths locate the offending key") {
    CHECK(rejected_field(json::array()) == "config");
    CHECK(rejected_field(json::object()) == "experiment");

    auto j = minimal_simulate();
    j["noise"]["rate"] = -1.0;
    CHECK(rejected_field(j) == "noise.rate");

    j = minimal_simulate();
    j["grid"]["T"] = 0.0;
    CHECK(rejected_field(j) == "grid.T");

    j = minimal_simulate();
    j["grid"]["steps"] = 0;
    CHECK(rejected_field(j) == "grid.steps");

    j = minimal_simulate();
    j["mc"]["paths"] = 1;
    CHECK(rejected_field(j) == "mc.paths");

    j = minimal_simulate();
    j["model"].erase("eigenvalues");
    CHECK(rejected_field(j) == "model.eigenvalues");

    j = minimal_simulate();
    j["noise"]["mark_family"]["weights"] = {1.0};
    CHECK(rejected_field(j) == "noise.mark_family.weights");

    j = minimal_simulate();
    j["initial"] = {1.0, 2.0};
    CHECK(rejected_field(j) == "initial");
}

TEST_CASE("unknown keys and names are spelled out") {
    auto j = minimal_simulate();
    j["grids"] = 1;
    CHECK(rejected_field(j) == "grids");

    j = minimal_simulate();
    j["experiment"] = "simulte";
    try {
        parse_config(j);
        FAIL("expected rejection");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("valid values") != std::string::npos);
    }

    j = minimal_simulate();
    j["coefficients"]["preset"] = "cubic";
    try {
        parse_config(j);
        FAIL("expected rejection");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("unknown preset 'cubic'") != std::string::npos);
        CHECK(msg.find("zero, linear, additive, saturating") != std::string::npos);
    }
}

TEST_CASE("noise is required only when the rate is positive") {
    auto j = minimal_simulate();
    j["noise"].erase("mark_family");
    CHECK(rejected_field(j) != "<none>");
    j["noise"]["rate"] = 0.0;
    CHECK(rejected_field(j) == "<none>");
    // no noise section at all is a noiseless run
    j = minimal_simulate();
    j.erase("noise");
    j["coefficients"] = {{"preset", "zero"}};
    CHECK(rejected_field(j) == "<none>");
}

TEST_CASE("pair experiments demand distinct starting states") {
    auto j = minimal_simulate();
    j["experiment"] = "stability";
    j["initial"] = {1.0};
    j["initial_second"] = {1.0};
    CHECK(rejected_field(j) == "initial_second");
    j["initial_second"] = {0.0};
    CHECK(rejected_field(j) == "<none>");
}

TEST_CASE("unit time experiments need whole steps per unit") {
    auto j = minimal_simulate();
    j["experiment"] = "contraction";
    j["initial_second"] = {0.0};
    j["grid"] = {{"T", 2.0}, {"steps", 3}};
    CHECK(rejected_field(j) == "grid.steps");
    j["grid"] = {{"T", 2.0}, {"steps", 4}};
    CHECK(rejected_field(j) == "<none>");
}

TEST_CASE("additive preset must fit the mark into the state") {
    auto j = minimal_simulate();
    j["noise"]["mark_family"]["points"] = {{1.0, 1.0}, {-1.0, -1.0}};
    CHECK(rejected_field(j) == "coefficients");
}

TEST_CASE("lambdas must clear the growth bound in ascending order") {
    auto j = minimal_simulate();
    j["experiment"] = "yosida_gap";
    j["lambdas"] = {4.0, 2.0};
    CHECK(rejected_field(j) == "lambdas");
    j["lambdas"] = {-2.0, 4.0};
    CHECK(rejected_field(j) == "lambdas");
    j["lambdas"] = {2.0, 4.0};
    CHECK(rejected_field(j) == "<none>");
}

TEST_CASE("config files are loaded or refused with context") {
    CHECK_THROWS_AS(load_config("/nonexistent/path.json"), ConfigError);
    const std::string path = "harness_bad_config.json";
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_config(path), ConfigError);
    std::remove(path.c_str());
}

// === number formatting and CSV ===

TEST_CASE("doubles render with 17 digits and no negative zero") {
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(-0.0) == "0");
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(-2.5e-3) == "-0.0025000000000000001");
}

TEST_CASE("result tables serialize byte for byte") {
    ResultTable t;
    t.add("demo", "alpha", 1.0, true);
    t.add("demo", "beta", 0.5, false).with_param(0.25).with_band(0.125).with_bound(2.0);
    const std::string expected =
        "experiment,quantity,param,value,band,bound,pass\n"
        "demo,alpha,,1,,,1\n"
        "demo,beta,0.25,0.5,0.125,2,0\n";
    CHECK(t.to_csv() == expected);
    CHECK(!t.all_pass());
    CHECK_THROWS(t.add("demo", "two,words", 1.0, true));
}

TEST_CASE("plot data is sorted by parameter") {
    ResultTable t;
    t.add("demo", "curve", 4.0, true).with_param(2.0).with_bound(5.0);
    t.add("demo", "curve", 1.0, true).with_param(0.5).with_bound(2.0);
    t.add("demo", "other", 9.0, true);
    std::ostringstream out;
    emit_plot_data(t, "curve", out);
    CHECK(out.str() == "0.5 1 2\n2 4 5\n");
    std::ostringstream missing;
    CHECK_THROWS_AS(emit_plot_data(t, "nope", missing), ConfigError);
}

// === determinism ===

TEST_CASE("reruns and thread counts do not move a byte") {
    const auto cfg = parse_config(minimal_simulate());
    const std::string once = run_experiment(cfg, 1).to_csv();
    const std::string again = run_experiment(cfg, 1).to_csv();
    const std::string threaded = run_experiment(cfg, 3).to_csv();
    CHECK(once == again);
    CHECK(once == threaded);
    CHECK(!once.empty());
}

TEST_CASE("the seed moves the estimates") {
    auto j = minimal_simulate();
    const auto base = run_experiment(parse_config(j), 1).to_csv();
    j["mc"]["seed"] = 4;
    const auto moved = run_experiment(parse_config(j), 1).to_csv();
    CHECK(base != moved);
}

}  // TEST_SUITE
