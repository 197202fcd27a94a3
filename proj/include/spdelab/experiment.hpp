#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdelab/coefficients.hpp"
#include "spdelab/integrator.hpp"
#include "spdelab/mark_measure.hpp"
#include "spdelab/operator_core.hpp"

namespace spdelab {

/// Configuration rejected: carries the dotted field path of the offender so
/// the CLI can point at the exact key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// One row of the result table. Empty band/bound/param render as empty CSV
/// fields.
struct ResultRow {
    std::string experiment;
    std::string quantity;
    bool has_param = false;
    double param = 0.0;
    double value = 0.0;
    bool has_band = false;
    double band = 0.0;
    bool has_bound = false;
    double bound = 0.0;
    bool pass = true;

    ResultRow& with_param(double p) {
        has_param = true;
        param = p;
        return *this;
    }
    ResultRow& with_band(double b) {
        has_band = true;
        band = b;
        return *this;
    }
    ResultRow& with_bound(double b) {
        has_bound = true;
        bound = b;
        return *this;
    }
};

struct ResultTable {
    std::vector<ResultRow> rows;

    ResultRow& add(const std::string& experiment, const std::string& quantity, double value,
                   bool pass);
    bool all_pass() const;

    /// Header + rows, LF line endings, 17 significant digits; insertion order
    /// is preserved so identical runs produce identical bytes.
    std::string to_csv() const;
};

/// Writes "param value [bound]" lines for the rows of one quantity, sorted by
/// ascending param: the hand-off format for external plotting. Rows of the
/// quantity must carry params; an unknown quantity is a usage error.
void emit_plot_data(const ResultTable& table, const std::string& quantity, std::ostream& out);

/// Fully parsed experiment description. All heavy objects are constructed up
/// front so an invalid configuration fails before any simulation starts.
struct ExperimentConfig {
    std::string experiment;
    DiagonalGenerator generator;
    CoefficientSet coefficients = zero_coefficients(1);
    MarkMeasure measure = MarkMeasure::atoms(0.0, {{0.0}}, {1.0});
    SimulationGrid grid;
    std::size_t paths = 10000;
    std::uint64_t seed = 1;
    StateVector initial;
    StateVector initial_second;
    std::vector<double> times;      // checkpoints for contraction/invariant
    std::vector<double> lambdas;    // resolvent parameters for the gap scans
    std::vector<double> epsilons;   // thresholds for the tail-bound check
    std::size_t sup_grid_points = 64;
    std::size_t cloud_size = 256;
    std::size_t replicates = 4;
    std::size_t invariant_samples = 2000;
    double burn_in = 0.0;  // 0 = derived from the certified exponent
    double gap = 0.0;      // 0 = derived from the certified exponent
    std::string output_dir = "out";
    nlohmann::json echo;  // normalized configuration for the output directory
};

/// Parses and validates a configuration object. Unknown keys, wrong types,
/// and out-of-range values raise ConfigError with the dotted field path.
ExperimentConfig parse_config(const nlohmann::json& j);

/// Reads the file and parses it. Missing or unreadable files and JSON syntax
/// errors raise ConfigError.
ExperimentConfig load_config(const std::string& path);

/// Runs the configured experiment and returns its result table.
ResultTable run_experiment(const ExperimentConfig& config, int threads = 1);

}  // namespace spdelab
