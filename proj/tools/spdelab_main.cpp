#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spdelab/experiment.hpp"
#include "spdelab/format.hpp"
#include "spdelab/integrator.hpp"

namespace {

/// Reads back a results file written by the run subcommand.
spdelab::ResultTable read_results(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw spdelab::ConfigError("results", "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "experiment,quantity,param,value,band,bound,pass")
        throw spdelab::ConfigError("results", "'" + path + "' is not a results file");

    spdelab::ResultTable table;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::array<std::string, 7> field;
        std::size_t start = 0, slot = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                if (slot >= field.size())
                    throw spdelab::ConfigError(
                        "results", "line " + std::to_string(lineno) + ": too many columns");
                field[slot++] = line.substr(start, i - start);
                start = i + 1;
            }
        }
        if (slot != field.size())
            throw spdelab::ConfigError("results",
                                       "line " + std::to_string(lineno) + ": expected 7 columns");

        const auto number = [&](const std::string& s) {
            try {
                std::size_t used = 0;
                const double v = std::stod(s, &used);
                if (used != s.size()) throw std::invalid_argument(s);
                return v;
            } catch (const std::exception&) {
                throw spdelab::ConfigError(
                    "results", "line " + std::to_string(lineno) + ": bad number '" + s + "'");
            }
        };

        spdelab::ResultRow row;
        row.experiment = field[0];
        row.quantity = field[1];
        if (!field[2].empty()) row.with_param(number(field[2]));
        row.value = number(field[3]);
        if (!field[4].empty()) row.with_band(number(field[4]));
        if (!field[5].empty()) row.with_bound(number(field[5]));
        row.pass = field[6] == "1";
        table.rows.push_back(std::move(row));
    }
    return table;
}

int run_command(const std::string& config_path, const std::string& out_override, bool seed_given,
                std::uint64_t seed, int threads) {
    spdelab::ExperimentConfig cfg = spdelab::load_config(config_path);
    if (!out_override.empty()) {
        cfg.output_dir = out_override;
        cfg.echo["output"]["dir"] = out_override;
    }
    if (seed_given) {
        cfg.seed = seed;
        cfg.echo["mc"]["seed"] = seed;
    }

    std::filesystem::create_directories(cfg.output_dir);
    const spdelab::ResultTable table = spdelab::run_experiment(cfg, threads);

    {
        std::ofstream f(cfg.output_dir + "/results.csv", std::ios::binary);
        if (!f)
            throw spdelab::ConfigError("output.dir",
                                       "cannot write results in '" + cfg.output_dir + "'");
        f << table.to_csv();
    }
    {
        std::ofstream f(cfg.output_dir + "/config.json", std::ios::binary);
        if (!f)
            throw spdelab::ConfigError("output.dir",
                                       "cannot write config echo in '" + cfg.output_dir + "'");
        f << cfg.echo.dump(2) << "\n";
    }

    std::size_t failures = 0;
    for (const auto& r : table.rows)
        if (!r.pass) ++failures;
    std::cout << cfg.experiment << ": " << table.rows.size() << " rows, " << failures
              << " failing\n";
    for (const auto& r : table.rows) {
        if (r.pass) continue;
        std::cout << "  FAIL " << r.quantity;
        if (r.has_param) std::cout << " @ " << spdelab::format_double(r.param);
        std::cout << " value " << spdelab::format_double(r.value);
        if (r.has_bound) std::cout << " bound " << spdelab::format_double(r.bound);
        std::cout << "\n";
    }
    std::cout << "results: " << cfg.output_dir << "/results.csv\n";
    return table.all_pass() ? 0 : 1;
}

int plot_command(const std::string& csv_path, const std::string& quantity,
                 const std::string& out_file) {
    const spdelab::ResultTable table = read_results(csv_path);
    if (out_file.empty()) {
        spdelab::emit_plot_data(table, quantity, std::cout);
    } else {
        std::ofstream f(out_file, std::ios::binary);
        if (!f) throw spdelab::ConfigError("out", "cannot write '" + out_file + "'");
        spdelab::emit_plot_data(table, quantity, f);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"configuration-driven experiments for jump-driven stochastic evolution"};
    app.require_subcommand(1);

    std::string config_path, out_dir, csv_path, quantity, plot_out;
    std::uint64_t seed = 0;
    int threads = 1;

    CLI::App* run = app.add_subcommand("run", "run one configured experiment");
    run->add_option("config", config_path, "JSON configuration file")->required();
    run->add_option("--out", out_dir, "override the output directory");
    CLI::Option* seed_opt = run->add_option("--seed", seed, "override the Monte Carlo seed");
    run->add_option("--threads", threads, "worker thread count")->envname("SPDELAB_THREADS");

    CLI::App* plot = app.add_subcommand("plot", "extract plot columns from a results file");
    plot->add_option("results", csv_path, "results file written by run")->required();
    plot->add_option("quantity", quantity, "quantity to extract")->required();
    plot->add_option("--out", plot_out, "output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return run_command(config_path, out_dir, seed_opt->count() > 0, seed,
                                              threads);
        return plot_command(csv_path, quantity, plot_out);
    } catch (const spdelab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const spdelab::DivergenceError& e) {
        std::cerr << "diverged at step " << e.step() << " (t = " << e.time()
                  << ", state norm " << e.state_norm() << ")\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
