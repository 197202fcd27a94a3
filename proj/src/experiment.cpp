#include "spdelab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "spdelab/format.hpp"
#include "spdelab/jump_train.hpp"
#include "spdelab/lyapunov.hpp"
#include "spdelab/measure_lab.hpp"
#include "spdelab/parallel.hpp"
#include "spdelab/stability.hpp"
#include "spdelab/stochastic_integral.hpp"
#include "spdelab/wasserstein.hpp"

namespace spdelab {

// ============================================================
// result table
// ============================================================

namespace {

void require_csv_safe(const std::string& s) {
    if (s.find(',') != std::string::npos || s.find('\n') != std::string::npos)
        throw std::invalid_argument("result table: labels must not contain ',' or newlines");
}

}  // namespace

ResultRow& ResultTable::add(const std::string& experiment, const std::string& quantity,
                            double value, bool pass) {
    require_csv_safe(experiment);
    require_csv_safe(quantity);
    ResultRow row;
    row.experiment = experiment;
    row.quantity = quantity;
    row.value = value;
    row.pass = pass;
    rows.push_back(std::move(row));
    return rows.back();
}

bool ResultTable::all_pass() const {
    for (const ResultRow& r : rows)
        if (!r.pass) return false;
    return true;
}

std::string ResultTable::to_csv() const {
    std::string out = "experiment,quantity,param,value,band,bound,pass\n";
    for (const ResultRow& r : rows) {
        out += r.experiment;
        out += ',';
        out += r.quantity;
        out += ',';
        if (r.has_param) out += format_double(r.param);
        out += ',';
        out += format_double(r.value);
        out += ',';
        if (r.has_band) out += format_double(r.band);
        out += ',';
        if (r.has_bound) out += format_double(r.bound);
        out += ',';
        out += r.pass ? '1' : '0';
        out += '\n';
    }
    return out;
}

void emit_plot_data(const ResultTable& table, const std::string& quantity, std::ostream& out) {
    std::vector<const ResultRow*> sel;
    for (const ResultRow& r : table.rows)
        if (r.quantity == quantity) sel.push_back(&r);
    if (sel.empty()) throw ConfigError("quantity", "no rows named '" + quantity + "' in the table");

    bool with_bound = true;
    for (const ResultRow* r : sel) with_bound = with_bound && r->has_bound;

    std::stable_sort(sel.begin(), sel.end(), [](const ResultRow* a, const ResultRow* b) {
        const double pa = a->has_param ? a->param : 0.0;
        const double pb = b->has_param ? b->param : 0.0;
        return pa < pb;
    });

    for (const ResultRow* r : sel) {
        out << format_double(r->has_param ? r->param : 0.0) << ' ' << format_double(r->value);
        if (with_bound) out << ' ' << format_double(r->bound);
        out << '\n';
    }
}

// ============================================================
// configuration parsing
// ============================================================

namespace {

using nlohmann::json;

std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

const json* find_member(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void require_object(const json& v, const std::string& path) {
    if (!v.is_object()) throw ConfigError(path, "expected an object");
}

void reject_unknown(const json& obj, const std::string& base,
                    std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                known = true;
                break;
            }
        if (!known) {
            std::string msg = "unknown field; expected one of:";
            for (const char* a : allowed) {
                msg += ' ';
                msg += a;
            }
            throw ConfigError(join_path(base, it.key()), msg);
        }
    }
}

double as_finite_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path, "must be finite");
    return d;
}

double require_number(const json& obj, const std::string& base, const char* key) {
    const json* v = find_member(obj, key);
    if (!v) throw ConfigError(join_path(base, key), "required field is missing");
    return as_finite_number(*v, join_path(base, key));
}

double optional_number(const json& obj, const std::string& base, const char* key, double def) {
    const json* v = find_member(obj, key);
    return v ? as_finite_number(*v, join_path(base, key)) : def;
}

std::uint64_t as_uint(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        const std::int64_t s = v.get<std::int64_t>();
        if (s < 0) throw ConfigError(path, "must be a nonnegative integer");
        return static_cast<std::uint64_t>(s);
    }
    throw ConfigError(path, "expected a nonnegative integer");
}

std::uint64_t optional_uint(const json& obj, const std::string& base, const char* key,
                            std::uint64_t def) {
    const json* v = find_member(obj, key);
    return v ? as_uint(*v, join_path(base, key)) : def;
}

std::string require_string(const json& obj, const std::string& base, const char* key) {
    const json* v = find_member(obj, key);
    if (!v) throw ConfigError(join_path(base, key), "required field is missing");
    if (!v->is_string()) throw ConfigError(join_path(base, key), "expected a string");
    return v->get<std::string>();
}

std::vector<double> as_number_array(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& e : v) out.push_back(as_finite_number(e, path));
    return out;
}

/// Mark family subsection; returns the measure plus its normalized echo.
std::pair<MarkMeasure, json> parse_mark_family(const json& v, const std::string& base,
                                               double rate) {
    require_object(v, base);
    const std::string family = require_string(v, base, "family");
    json echo;
    echo["family"] = family;

    if (family == "atoms") {
        reject_unknown(v, base, {"family", "points", "weights"});
        const json* pts = find_member(v, "points");
        if (!pts) throw ConfigError(base + ".points", "required field is missing");
        if (!pts->is_array() || pts->empty())
            throw ConfigError(base + ".points", "expected a nonempty array of mark vectors");
        std::vector<Mark> points;
        std::size_t dim = 0;
        for (const json& e : *pts) {
            Mark m = as_number_array(e, base + ".points");
            if (m.empty()) throw ConfigError(base + ".points", "marks must be nonempty vectors");
            if (points.empty())
                dim = m.size();
            else if (m.size() != dim)
                throw ConfigError(base + ".points", "marks must share one dimension");
            points.push_back(std::move(m));
        }
        std::vector<double> weights(points.size(), 1.0);
        if (const json* w = find_member(v, "weights")) {
            weights = as_number_array(*w, base + ".weights");
            if (weights.size() != points.size())
                throw ConfigError(base + ".weights", "needs one weight per mark point");
            for (double x : weights)
                if (!(x > 0.0)) throw ConfigError(base + ".weights", "weights must be positive");
        }
        echo["points"] = points;
        echo["weights"] = weights;
        return {MarkMeasure::atoms(rate, std::move(points), std::move(weights)), echo};
    }

    if (family == "gaussian") {
        reject_unknown(v, base, {"family", "mean", "sigma"});
        const json* mv = find_member(v, "mean");
        const json* sv = find_member(v, "sigma");
        if (!mv) throw ConfigError(base + ".mean", "required field is missing");
        if (!sv) throw ConfigError(base + ".sigma", "required field is missing");
        std::vector<double> mean = as_number_array(*mv, base + ".mean");
        std::vector<double> sigma = as_number_array(*sv, base + ".sigma");
        if (mean.empty() || mean.size() != sigma.size())
            throw ConfigError(base + ".sigma", "mean and sigma need the same nonzero length");
        for (double s : sigma)
            if (!(s > 0.0)) throw ConfigError(base + ".sigma", "entries must be positive");
        if (mean.size() > 3)
            throw ConfigError(base, "continuous mark families support dimension at most 3");
        echo["mean"] = mean;
        echo["sigma"] = sigma;
        return {MarkMeasure::gaussian(rate, std::move(mean), std::move(sigma)), echo};
    }

    if (family == "uniform_box") {
        reject_unknown(v, base, {"family", "lo", "hi"});
        const json* lv = find_member(v, "lo");
        const json* hv = find_member(v, "hi");
        if (!lv) throw ConfigError(base + ".lo", "required field is missing");
        if (!hv) throw ConfigError(base + ".hi", "required field is missing");
        std::vector<double> lo = as_number_array(*lv, base + ".lo");
        std::vector<double> hi = as_number_array(*hv, base + ".hi");
        if (lo.empty() || lo.size() != hi.size())
            throw ConfigError(base + ".hi", "lo and hi need the same nonzero length");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] <= hi[i])) throw ConfigError(base + ".hi", "needs lo <= hi per axis");
        if (lo.size() > 3)
            throw ConfigError(base, "continuous mark families support dimension at most 3");
        echo["lo"] = lo;
        echo["hi"] = hi;
        return {MarkMeasure::uniform_box(rate, std::move(lo), std::move(hi)), echo};
    }

    throw ConfigError(base + ".family", "unknown mark family '" + family +
                                            "'; valid families: atoms, gaussian, uniform_box");
}

std::vector<double> ascending_or_throw(std::vector<double> v, const std::string& path,
                                       bool strictly) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        const bool ok = strictly ? v[i] > v[i - 1] : v[i] >= v[i - 1];
        if (!ok) throw ConfigError(path, "values must be in ascending order");
    }
    return v;
}

bool is_pair_experiment(const std::string& e) { return e == "stability" || e == "contraction"; }

bool needs_unit_grid(const std::string& e) { return e == "contraction" || e == "invariant"; }

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config", "top level must be a JSON object");
    reject_unknown(j, "",
                   {"experiment", "model", "coefficients", "noise", "grid", "mc", "initial",
                    "initial_second", "times", "lambdas", "epsilons", "noise_checks",
                    "contraction", "invariant", "output"});

    ExperimentConfig cfg;

    // --- experiment ---
    cfg.experiment = require_string(j, "", "experiment");
    static const char* kExperiments[] = {"certify_operator", "noise_checks", "simulate",
                                         "yosida_gap",       "stability",    "contraction",
                                         "invariant"};
    bool known = false;
    for (const char* e : kExperiments) known = known || cfg.experiment == e;
    if (!known)
        throw ConfigError("experiment",
                          "unknown experiment '" + cfg.experiment +
                              "'; valid values: certify_operator, noise_checks, simulate, "
                              "yosida_gap, stability, contraction, invariant");

    // --- model ---
    const json* model = find_member(j, "model");
    if (!model) throw ConfigError("model", "required field is missing");
    require_object(*model, "model");
    const std::string family = require_string(*model, "model", "family");
    json model_echo;
    model_echo["family"] = family;
    if (family == "laplacian_dirichlet") {
        reject_unknown(*model, "model", {"family", "modes"});
        if (!find_member(*model, "modes"))
            throw ConfigError("model.modes", "required field is missing");
        const std::uint64_t modes = optional_uint(*model, "model", "modes", 0);
        if (modes < 1 || modes > 4096)
            throw ConfigError("model.modes", "needs an integer between 1 and 4096");
        cfg.generator = DiagonalGenerator::laplacian_dirichlet(modes);
        model_echo["modes"] = modes;
    } else if (family == "explicit") {
        reject_unknown(*model, "model", {"family", "eigenvalues"});
        const json* ev = find_member(*model, "eigenvalues");
        if (!ev) throw ConfigError("model.eigenvalues", "required field is missing");
        std::vector<double> eigs = as_number_array(*ev, "model.eigenvalues");
        if (eigs.empty()) throw ConfigError("model.eigenvalues", "needs at least one eigenvalue");
        cfg.generator = DiagonalGenerator::from_eigenvalues(std::move(eigs));
        model_echo["eigenvalues"] = cfg.generator.eigenvalues;
    } else {
        throw ConfigError("model.family", "unknown family '" + family +
                                              "'; valid families: laplacian_dirichlet, explicit");
    }
    const std::size_t dim = cfg.generator.dimension();
    const double growth = cfg.generator.growth_bound();

    // --- noise ---
    double rate = 0.0;
    json mark_echo;
    if (const json* noise = find_member(j, "noise")) {
        require_object(*noise, "noise");
        reject_unknown(*noise, "noise", {"rate", "mark_family"});
        rate = require_number(*noise, "noise", "rate");
        if (rate < 0.0) throw ConfigError("noise.rate", "must be nonnegative");
        if (const json* mf = find_member(*noise, "mark_family")) {
            auto parsed = parse_mark_family(*mf, "noise.mark_family", rate);
            cfg.measure = std::move(parsed.first);
            mark_echo = std::move(parsed.second);
        } else if (rate > 0.0) {
            throw ConfigError("noise.mark_family", "required when the jump rate is positive");
        }
    }
    if (mark_echo.is_null()) {
        cfg.measure = MarkMeasure::atoms(0.0, {{0.0}}, {1.0});
        mark_echo = {{"family", "atoms"},
                     {"points", json::array({json::array({0.0})})},
                     {"weights", json::array({1.0})}};
    }

    // --- coefficients ---
    std::string preset = "zero";
    json coeff_echo;
    {
        double drift_scale = 0.0, jump_scale = 0.0, scale = 0.0;
        if (const json* co = find_member(j, "coefficients")) {
            require_object(*co, "coefficients");
            preset = require_string(*co, "coefficients", "preset");
            if (preset == "zero") {
                reject_unknown(*co, "coefficients", {"preset"});
            } else if (preset == "linear") {
                reject_unknown(*co, "coefficients", {"preset", "drift_scale", "jump_scale"});
                drift_scale = require_number(*co, "coefficients", "drift_scale");
                jump_scale = require_number(*co, "coefficients", "jump_scale");
            } else if (preset == "additive") {
                reject_unknown(*co, "coefficients", {"preset", "scale"});
                scale = require_number(*co, "coefficients", "scale");
            } else if (preset == "saturating") {
                reject_unknown(*co, "coefficients", {"preset", "drift_scale", "jump_scale"});
                drift_scale = require_number(*co, "coefficients", "drift_scale");
                jump_scale = optional_number(*co, "coefficients", "jump_scale", 0.0);
            } else {
                throw ConfigError("coefficients.preset",
                                  "unknown preset '" + preset +
                                      "'; valid presets: zero, linear, additive, saturating");
            }
        }
        coeff_echo["preset"] = preset;
        if (preset == "zero") {
            cfg.coefficients = zero_coefficients(dim);
        } else if (preset == "linear") {
            cfg.coefficients = linear_coefficients(dim, drift_scale, jump_scale, cfg.measure);
            coeff_echo["drift_scale"] = drift_scale;
            coeff_echo["jump_scale"] = jump_scale;
        } else if (preset == "additive") {
            if (cfg.measure.mark_dimension() > dim)
                throw ConfigError("coefficients",
                                  "additive preset needs mark dimension <= model dimension");
            cfg.coefficients = additive_coefficients(dim, scale, cfg.measure);
            coeff_echo["scale"] = scale;
        } else {
            cfg.coefficients = saturating_coefficients(dim, drift_scale, jump_scale, cfg.measure);
            coeff_echo["drift_scale"] = drift_scale;
            coeff_echo["jump_scale"] = jump_scale;
        }
    }

    // --- grid ---
    double horizon = 1.0;
    std::uint64_t steps = 1000;
    if (const json* g = find_member(j, "grid")) {
        require_object(*g, "grid");
        reject_unknown(*g, "grid", {"T", "steps"});
        horizon = optional_number(*g, "grid", "T", 1.0);
        steps = optional_uint(*g, "grid", "steps", 1000);
    }
    if (!(horizon > 0.0)) throw ConfigError("grid.T", "must be positive");
    if (steps < 1 || steps > 10000000)
        throw ConfigError("grid.steps", "needs an integer between 1 and 10000000");
    cfg.grid.horizon = horizon;
    cfg.grid.steps = static_cast<std::size_t>(steps);
    if (needs_unit_grid(cfg.experiment)) {
        const double per_unit = static_cast<double>(steps) / horizon;
        if (std::abs(per_unit - std::round(per_unit)) > 1e-9 || per_unit < 1.0)
            throw ConfigError("grid.steps",
                              "this experiment advances in whole steps per unit time; steps must "
                              "be a positive multiple of T");
    }

    // --- mc ---
    if (const json* mc = find_member(j, "mc")) {
        require_object(*mc, "mc");
        reject_unknown(*mc, "mc", {"paths", "seed"});
        cfg.paths = static_cast<std::size_t>(optional_uint(*mc, "mc", "paths", 10000));
        cfg.seed = optional_uint(*mc, "mc", "seed", 1);
    }
    if (cfg.paths < 2 || cfg.paths > 100000000)
        throw ConfigError("mc.paths", "needs an integer between 2 and 100000000");

    // --- starting states ---
    const bool pair_run = is_pair_experiment(cfg.experiment);
    if (const json* v = find_member(j, "initial")) {
        cfg.initial = as_number_array(*v, "initial");
        if (cfg.initial.size() != dim)
            throw ConfigError("initial", "needs exactly one entry per model dimension (" +
                                             std::to_string(dim) + ")");
    } else {
        cfg.initial = StateVector(dim, pair_run ? 1.0 : 0.0);
    }
    if (const json* v = find_member(j, "initial_second")) {
        cfg.initial_second = as_number_array(*v, "initial_second");
        if (cfg.initial_second.size() != dim)
            throw ConfigError("initial_second", "needs exactly one entry per model dimension (" +
                                                    std::to_string(dim) + ")");
    } else {
        cfg.initial_second = StateVector(dim, 0.0);
    }
    if (pair_run && cfg.initial == cfg.initial_second)
        throw ConfigError("initial_second", "the two starting states must differ in coupled runs");

    // --- schedules ---
    if (const json* v = find_member(j, "lambdas")) {
        cfg.lambdas = ascending_or_throw(as_number_array(*v, "lambdas"), "lambdas", true);
        if (cfg.lambdas.empty()) throw ConfigError("lambdas", "needs at least one value");
    } else {
        const double base = std::max(growth, 0.0);
        if (cfg.experiment == "yosida_gap")
            cfg.lambdas = {base + 4.0, base + 16.0, base + 64.0, base + 256.0};
        else
            cfg.lambdas = {base + 1.0, base + 10.0, base + 100.0};
    }
    for (double lam : cfg.lambdas)
        if (!(lam > growth))
            throw ConfigError("lambdas", "every value must exceed the semigroup growth bound (" +
                                             format_double(growth) + ")");

    if (const json* v = find_member(j, "epsilons")) {
        cfg.epsilons = ascending_or_throw(as_number_array(*v, "epsilons"), "epsilons", true);
        if (cfg.epsilons.empty()) throw ConfigError("epsilons", "needs at least one value");
        for (double e : cfg.epsilons)
            if (!(e > 0.0)) throw ConfigError("epsilons", "thresholds must be positive");
    } else {
        cfg.epsilons = {0.25, 0.5, 1.0, 2.0};
    }

    if (const json* v = find_member(j, "times")) {
        cfg.times = ascending_or_throw(as_number_array(*v, "times"), "times", true);
        if (cfg.times.empty()) throw ConfigError("times", "needs at least one value");
        const double dt = cfg.grid.dt();
        for (double t : cfg.times) {
            const double k = std::round(t / dt);
            if (!(t > 0.0) || t > horizon + 1e-9 || std::abs(t - k * dt) > 1e-9)
                throw ConfigError(
                    "times", "entries must be positive grid times (multiples of T/steps up to T)");
        }
    } else {
        for (int q = 1; q <= 4; ++q) {
            const std::size_t k = std::max<std::size_t>(1, cfg.grid.steps * q / 4);
            const double t = cfg.grid.time(k);
            if (cfg.times.empty() || t > cfg.times.back()) cfg.times.push_back(t);
        }
    }

    // --- experiment sections ---
    if (const json* v = find_member(j, "noise_checks")) {
        require_object(*v, "noise_checks");
        reject_unknown(*v, "noise_checks", {"grid_points"});
        cfg.sup_grid_points =
            static_cast<std::size_t>(optional_uint(*v, "noise_checks", "grid_points", 64));
    }
    if (cfg.sup_grid_points < 2 || cfg.sup_grid_points > 100000)
        throw ConfigError("noise_checks.grid_points", "needs an integer between 2 and 100000");

    if (const json* v = find_member(j, "contraction")) {
        require_object(*v, "contraction");
        reject_unknown(*v, "contraction", {"cloud_size", "replicates"});
        cfg.cloud_size =
            static_cast<std::size_t>(optional_uint(*v, "contraction", "cloud_size", 256));
        cfg.replicates =
            static_cast<std::size_t>(optional_uint(*v, "contraction", "replicates", 4));
    }
    if (cfg.cloud_size < 2 || cfg.cloud_size > 1024)
        throw ConfigError("contraction.cloud_size", "needs an integer between 2 and 1024");
    if (cfg.replicates < 2 || cfg.replicates > 64)
        throw ConfigError("contraction.replicates", "needs an integer between 2 and 64");

    if (const json* v = find_member(j, "invariant")) {
        require_object(*v, "invariant");
        reject_unknown(*v, "invariant", {"samples", "burn_in", "gap"});
        cfg.invariant_samples =
            static_cast<std::size_t>(optional_uint(*v, "invariant", "samples", 2000));
        cfg.burn_in = optional_number(*v, "invariant", "burn_in", 0.0);
        cfg.gap = optional_number(*v, "invariant", "gap", 0.0);
    }
    if (cfg.invariant_samples < 4 || cfg.invariant_samples > 1000000)
        throw ConfigError("invariant.samples", "needs an integer between 4 and 1000000");
    if (cfg.burn_in < 0.0) throw ConfigError("invariant.burn_in", "must be nonnegative");
    if (cfg.gap < 0.0) throw ConfigError("invariant.gap", "must be nonnegative");

    // --- output ---
    if (const json* v = find_member(j, "output")) {
        require_object(*v, "output");
        reject_unknown(*v, "output", {"dir"});
        cfg.output_dir = require_string(*v, "output", "dir");
        if (cfg.output_dir.empty()) throw ConfigError("output.dir", "must not be empty");
    }

    // --- normalized echo, defaults included ---
    json echo;
    echo["experiment"] = cfg.experiment;
    echo["model"] = model_echo;
    echo["coefficients"] = coeff_echo;
    echo["noise"] = {{"rate", rate}, {"mark_family", mark_echo}};
    echo["grid"] = {{"T", cfg.grid.horizon}, {"steps", cfg.grid.steps}};
    echo["mc"] = {{"paths", cfg.paths}, {"seed", cfg.seed}};
    echo["initial"] = cfg.initial;
    echo["initial_second"] = cfg.initial_second;
    echo["times"] = cfg.times;
    echo["lambdas"] = cfg.lambdas;
    echo["epsilons"] = cfg.epsilons;
    echo["noise_checks"] = {{"grid_points", cfg.sup_grid_points}};
    echo["contraction"] = {{"cloud_size", cfg.cloud_size}, {"replicates", cfg.replicates}};
    echo["invariant"] = {{"samples", cfg.invariant_samples},
                         {"burn_in", cfg.burn_in},
                         {"gap", cfg.gap}};
    echo["output"] = {{"dir", cfg.output_dir}};
    cfg.echo = std::move(echo);

    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

// ============================================================
// experiment runners
// ============================================================

namespace {

/// Up to segments+1 distinct grid indices including 0 and steps.
std::vector<std::size_t> checkpoint_indices(const SimulationGrid& grid, std::size_t segments) {
    std::vector<std::size_t> idx;
    for (std::size_t q = 0; q <= segments; ++q) {
        const std::size_t k = grid.steps * q / segments;
        if (idx.empty() || k > idx.back()) idx.push_back(k);
    }
    return idx;
}

bool nonincreasing(const std::vector<double>& v, double slack) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1] + slack) return false;
    return true;
}

StateVector mark_first_moment(const CoefficientSet& coeffs, const MarkMeasure& measure,
                              const StateVector& x) {
    if (coeffs.compensator_mean) return coeffs.compensator_mean(x);
    const auto quad = measure.quadrature();
    StateVector acc(x.size(), 0.0);
    for (std::size_t q = 0; q < quad.nodes.size(); ++q)
        add_scaled_in_place(acc, coeffs.jump(quad.nodes[q], x), quad.weights[q]);
    return acc;
}

double mark_second_moment(const CoefficientSet& coeffs, const MarkMeasure& measure,
                          const StateVector& x) {
    if (coeffs.jump_sq_mean) return coeffs.jump_sq_mean(x);
    const auto quad = measure.quadrature();
    double acc = 0.0;
    for (std::size_t q = 0; q < quad.nodes.size(); ++q)
        acc += quad.weights[q] * norm_sq(coeffs.jump(quad.nodes[q], x));
    return acc;
}

// === certify_operator ===

void run_certify_operator(const ExperimentConfig& cfg, int, ResultTable& t) {
    const auto& gen = cfg.generator;
    const std::string& E = cfg.experiment;
    const StateVector x(gen.dimension(), 1.0);

    {
        const double r = norm(subtracted(semigroup_apply(gen, 0.0, x), x));
        t.add(E, "semigroup_identity_residual", r, r <= 1e-12).with_bound(1e-12);
    }
    {
        const double pairs[][2] = {{0.1, 0.2}, {0.25, 0.5}, {0.3, 0.4}, {0.05, 0.85}};
        double worst = 0.0;
        for (const auto& p : pairs) {
            const StateVector lhs = semigroup_apply(gen, p[0] + p[1], x);
            const StateVector rhs = semigroup_apply(gen, p[1], semigroup_apply(gen, p[0], x));
            worst = std::max(worst, norm(subtracted(lhs, rhs)) / (1.0 + norm(lhs)));
        }
        t.add(E, "semigroup_composition_residual", worst, worst <= 1e-12).with_bound(1e-12);
    }

    const auto hy = hille_yosida_verify(gen, cfg.lambdas, 5);
    for (const auto& s : hy.samples)
        t.add(E, "resolvent_norm_pow" + std::to_string(s.power), s.norm, s.slack >= 0.0)
            .with_param(s.lambda)
            .with_bound(s.bound);
    t.add(E, "resolvent_bound_worst_slack", hy.worst_slack, hy.pass).with_bound(0.0);

    const auto ids = generator_identity_suite(gen, x, 0.25, cfg.lambdas.front(), 32768);
    t.add(E, "flow_integral_residual", ids.integral_residual, ids.integral_residual <= 1e-9)
        .with_bound(1e-9);
    t.add(E, "flow_derivative_order_ratio", ids.derivative_order_ratio,
          ids.derivative_order_ratio >= 3.0 && ids.derivative_order_ratio <= 5.0)
        .with_bound(5.0);
    t.add(E, "resolvent_laplace_residual", ids.laplace_residual, ids.laplace_residual <= 1e-6)
        .with_bound(1e-6);

    // Bounded-approximation limits along the lambda schedule.
    const StateVector ax = generator_apply_linear(gen, x);
    std::vector<double> rdist, gdist, sgap;
    for (const double lam : cfg.lambdas) {
        rdist.push_back(norm(subtracted(scaled_resolvent_apply(gen, lam, x), x)));
        const DiagonalGenerator bounded = yosida_generator(gen, lam);
        gdist.push_back(norm(subtracted(generator_apply_linear(bounded, x), ax)));
        double worst = 0.0;
        for (int i = 0; i <= 20; ++i) {
            const double tt = static_cast<double>(i) / 20.0;
            worst = std::max(worst, norm(subtracted(semigroup_apply(bounded, tt, x),
                                                    semigroup_apply(gen, tt, x))));
        }
        sgap.push_back(worst);
    }
    const auto emit_limit_curve = [&](const std::string& q, const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i)
            t.add(E, q, v[i], true).with_param(cfg.lambdas[i]);
        const bool mono = nonincreasing(v, 1e-15);
        t.add(E, q + "_monotone", mono ? 1.0 : 0.0, mono);
        if (v.front() > 0.0) t.add(E, q + "_reduction", v.back() / v.front(), true);
    };
    emit_limit_curve("resolvent_limit_distance", rdist);
    emit_limit_curve("generator_limit_distance", gdist);
    emit_limit_curve("semigroup_limit_gap", sgap);
}

// === noise_checks ===

void run_noise_checks(const ExperimentConfig& cfg, int threads, ResultTable& t) {
    const auto& gen = cfg.generator;
    const auto& coeffs = cfg.coefficients;
    const std::string& E = cfg.experiment;
    const std::size_t dim = gen.dimension();
    const double T = cfg.grid.horizon;
    const double rate = cfg.measure.total_rate();
    const StateVector& xref = cfg.initial;

    const StateVector cm = mark_first_moment(coeffs, cfg.measure, xref);
    const double jsm = mark_second_moment(coeffs, cfg.measure, xref);

    // Ensemble of compensated integrals on 20 checkpoints, reduced in fixed
    // block order so the result is thread-count independent.
    const std::size_t C = 20;
    const std::size_t slots = C * dim + 2;
    const auto stats = blocked_mean_var(
        cfg.paths, slots, threads, [&](std::size_t p, std::vector<double>& v) {
            RngStream rng(cfg.seed, p);
            const JumpTrain train = sample_jump_train(cfg.measure, T, rng);
            StateVector running(dim, 0.0);
            std::size_t next = 0;
            for (std::size_t k = 0; k < C; ++k) {
                const double tk = (k + 1 == C) ? T : T * static_cast<double>(k + 1) /
                                                          static_cast<double>(C);
                while (next < train.size() && train.times[next] <= tk) {
                    add_scaled_in_place(running, coeffs.jump(train.marks[next], xref), 1.0);
                    ++next;
                }
                double nsq = 0.0;
                for (std::size_t i = 0; i < dim; ++i) {
                    const double z = running[i] - tk * cm[i];
                    v[k * dim + i] = z;
                    nsq += z * z;
                }
                if (k + 1 == C) {
                    v[C * dim] = static_cast<double>(train.size());
                    v[C * dim + 1] = nsq;
                }
            }
        });
    const double n = static_cast<double>(cfg.paths);
    const auto se_of = [&](std::size_t s) { return std::sqrt(stats.sample_var[s] / n); };

    {
        const double mean_count = stats.mean[C * dim];
        const double target = rate * T;
        const double band = 3.0 * std::sqrt(target / n);
        const bool pass = std::abs(mean_count - target) <= std::max({band, 0.05 * target, 1e-12});
        t.add(E, "jump_count_mean", mean_count, pass).with_band(band).with_bound(target);
    }
    {
        const double value = stats.mean[C * dim + 1];
        const double target = jsm * T;
        const double band = 3.0 * se_of(C * dim + 1);
        const bool pass = std::abs(value - target) <= std::max({band, 0.05 * target, 1e-12});
        t.add(E, "isometry_second_moment", value, pass).with_band(band).with_bound(target);
    }
    for (std::size_t k = 0; k < C; ++k) {
        const double tk = (k + 1 == C) ? T : T * static_cast<double>(k + 1) / C;
        double worst = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double mean = stats.mean[k * dim + i];
            const double se = se_of(k * dim + i);
            if (se > 0.0)
                worst = std::max(worst, std::abs(mean) / se);
            else if (std::abs(mean) > 0.0)
                worst = std::numeric_limits<double>::infinity();
        }
        t.add(E, "compensated_mean_sigma", worst, worst <= 4.0).with_param(tk).with_bound(4.0);
    }

    // Pathwise tail bound of the smoothed integral.
    TimeMarkIntegrand f;
    f.eval = [&coeffs, &xref](double, const Mark& u) { return coeffs.jump(u, xref); };
    f.time_independent = true;
    f.mark_mean = [cm](double) { return cm; };
    f.mark_sq_mean = [jsm](double) { return jsm; };
    const auto tails =
        maximal_inequality_check(gen, f, cfg.measure, T, cfg.epsilons, cfg.paths,
                                 cfg.sup_grid_points, cfg.seed, std::uint64_t(1) << 32);
    t.add(E, "tail_second_moment_integral", tails.second_moment_integral, true);
    t.add(E, "tail_growth_factor", tails.growth_factor, true);
    for (const auto& s : tails.samples)
        t.add(E, "tail_probability", s.empirical_probability, s.pass)
            .with_param(s.epsilon)
            .with_band(s.mc_band)
            .with_bound(s.bound);
}

// === simulate ===

void run_simulate(const ExperimentConfig& cfg, int threads, ResultTable& t) {
    const std::string& E = cfg.experiment;
    const auto idx = checkpoint_indices(cfg.grid, 20);
    const std::size_t C = idx.size();
    const std::size_t slots = 2 * C + 1;

    const auto stats = blocked_mean_var(
        cfg.paths, slots, threads, [&](std::size_t p, std::vector<double>& v) {
            RngStream rng(cfg.seed, p);
            const MildPath path = simulate_mild_path(cfg.generator, cfg.coefficients, cfg.measure,
                                                     cfg.grid, cfg.initial, rng);
            double sup = 0.0;
            for (const StateVector& s : path.states) sup = std::max(sup, norm_sq(s));
            for (std::size_t c = 0; c < C; ++c) {
                const StateVector& s = path.states[idx[c]];
                v[2 * c] = s[0];
                v[2 * c + 1] = norm_sq(s);
            }
            v[2 * C] = sup;
        });
    const double n = static_cast<double>(cfg.paths);
    const auto se_of = [&](std::size_t s) { return std::sqrt(stats.sample_var[s] / n); };

    for (std::size_t c = 0; c < C; ++c) {
        const double tc = cfg.grid.time(idx[c]);
        t.add(E, "mean_first_coordinate", stats.mean[2 * c], true)
            .with_param(tc)
            .with_band(3.0 * se_of(2 * c));
        t.add(E, "second_moment", stats.mean[2 * c + 1], true)
            .with_param(tc)
            .with_band(3.0 * se_of(2 * c + 1));
    }
    const double sup_mean = stats.mean[2 * C];
    t.add(E, "path_sup_second_moment", sup_mean, true).with_band(3.0 * se_of(2 * C));
    t.add(E, "st2_norm", std::sqrt(sup_mean), true);
}

// === yosida_gap ===

void run_yosida_gap(const ExperimentConfig& cfg, int threads, ResultTable& t) {
    const std::string& E = cfg.experiment;
    const auto rep =
        yosida_gap_estimate(cfg.generator, cfg.coefficients, cfg.measure, cfg.grid, cfg.initial,
                            cfg.lambdas, cfg.paths, cfg.seed, 0, threads);

    bool positive = true;
    bool decreasing = true;
    for (std::size_t i = 0; i < rep.points.size(); ++i) {
        const auto& p = rep.points[i];
        t.add(E, "scheme_gap", p.gap, true).with_param(p.lambda).with_band(p.band);
        positive = positive && p.gap > 0.0;
        if (i > 0) {
            const auto& q = rep.points[i - 1];
            decreasing = decreasing && (p.gap + p.band < q.gap - q.band + 1e-15);
        }
    }
    t.add(E, "scheme_gap_decreasing", decreasing ? 1.0 : 0.0, decreasing);
    if (positive) t.add(E, "scheme_gap_log_slope", rep.fitted_log_slope, true);

    // Generator-side gap along one shared train, largest lambda last.
    const LyapunovFunction H = quadratic_lyapunov();
    RngStream train_rng(cfg.seed, std::uint64_t(1) << 33);
    const JumpTrain train = sample_jump_train(cfg.measure, cfg.grid.horizon, train_rng);

    std::vector<double> gaps;
    for (const double lam : cfg.lambdas) {
        const MildPath path =
            simulate_yosida_path(cfg.generator, cfg.coefficients, train, cfg.grid, cfg.initial,
                                 lam);
        gaps.push_back(
            lyapunov_generator_path_gap(cfg.generator, cfg.coefficients, cfg.measure, H, path,
                                        lam));
        t.add(E, "generator_gap", gaps.back(), true).with_param(lam);
    }
    const bool gap_mono = nonincreasing(gaps, 1e-12);
    t.add(E, "generator_gap_decreasing", gap_mono ? 1.0 : 0.0, gap_mono);

    const double wb = cfg.generator.growth_bound();
    const double lam_star = (wb <= 0.0 ? 1e6 : wb + 1e6);
    const MildPath limit_path = simulate_yosida_path(cfg.generator, cfg.coefficients, train,
                                                     cfg.grid, cfg.initial, lam_star);
    const double limit_gap = lyapunov_generator_path_gap(cfg.generator, cfg.coefficients,
                                                         cfg.measure, H, limit_path, lam_star);
    if (cfg.measure.total_rate() > 0.0) {
        const double bound = 1e-5 * cfg.measure.moment(2);
        t.add(E, "generator_gap_limit", limit_gap, limit_gap <= bound)
            .with_param(lam_star)
            .with_bound(bound);
    } else {
        t.add(E, "generator_gap_limit", limit_gap, true).with_param(lam_star);
    }
}

// === stability ===

void run_stability(const ExperimentConfig& cfg, int threads, ResultTable& t) {
    const std::string& E = cfg.experiment;
    const auto diss = dissipativity_estimate(cfg.generator, cfg.coefficients, 256, cfg.seed);
    t.add(E, "dissipativity_margin_empirical", diss.empirical_margin, true);
    t.add(E, "dissipativity_margin_analytic", diss.analytic_margin, true);
    t.add(E, "contraction_exponent", diss.epsilon, true);
    if (!diss.certified) t.add(E, "certification_refused", diss.epsilon, false).with_bound(0.0);

    const auto rep =
        mean_square_decay(cfg.generator, cfg.coefficients, cfg.measure, cfg.grid, cfg.initial,
                          cfg.initial_second, diss.epsilon, cfg.paths, cfg.seed, 0, threads, 21);
    for (const auto& pt : rep.curve) {
        auto& row = t.add(E, "coupled_distance_sq", pt.value, rep.certified ? pt.pass : true)
                        .with_param(pt.t)
                        .with_band(3.0 * pt.se);
        if (rep.certified) row.with_bound(pt.bound);
    }
    t.add(E, "fitted_decay_rate", rep.fitted_rate, true);
    if (rep.certified && diss.epsilon > 0.0)
        t.add(E, "decay_rate_relative_gap",
              std::abs(-rep.fitted_rate - diss.epsilon) / diss.epsilon, true);
    t.add(E, "continuous_dependence_constant", rep.growth_constant, true);

    // Equilibrium certificates only apply when the origin is a fixed point.
    const StateVector origin(cfg.generator.dimension(), 0.0);
    const bool equilibrium = norm(cfg.coefficients.drift(origin)) <= 1e-12 &&
                             cfg.coefficients.jump_at_zero_sq <= 1e-12;
    t.add(E, "origin_equilibrium", equilibrium ? 1.0 : 0.0, true);
    if (!equilibrium) return;

    const LyapunovFunction H = quadratic_lyapunov();
    const auto ck =
        lyapunov_check(cfg.generator, cfg.coefficients, cfg.measure, H, 64, cfg.seed + 1);
    t.add(E, "lyapunov_certificate", ck.pass ? 1.0 : 0.0, ck.pass);
    t.add(E, "lyapunov_decay_constant", ck.largest_c3, ck.drift_pass);
    t.add(E, "lyapunov_envelope_constant", ck.envelope_constant, true);
    if (!(ck.pass && ck.largest_c3 > 0.0)) return;

    const auto es = exp_stability_check(cfg.generator, cfg.coefficients, cfg.measure, H,
                                        ck.largest_c3, cfg.grid, cfg.initial, cfg.paths, cfg.seed,
                                        std::uint64_t(1) << 34, threads, 21);
    for (const auto& pt : es.curve)
        t.add(E, "moment_decay", pt.value, pt.pass)
            .with_param(pt.t)
            .with_band(3.0 * pt.se)
            .with_bound(pt.bound);
    t.add(E, "moment_decay_rate", es.fitted_rate, true);
}

// === contraction ===

void run_contraction(const ExperimentConfig& cfg, int threads, ResultTable& t) {
    const std::string& E = cfg.experiment;
    const auto diss = dissipativity_estimate(cfg.generator, cfg.coefficients, 256, cfg.seed);
    t.add(E, "dissipativity_margin_analytic", diss.analytic_margin, true);
    t.add(E, "contraction_exponent", diss.epsilon, true);
    if (!diss.certified) {
        t.add(E, "certification_refused", diss.epsilon, false).with_bound(0.0);
        return;
    }

    const auto spu = static_cast<std::size_t>(
        std::llround(static_cast<double>(cfg.grid.steps) / cfg.grid.horizon));
    const auto rep = contraction_estimate(cfg.generator, cfg.coefficients, cfg.measure,
                                          cfg.initial, cfg.initial_second, cfg.times, spu,
                                          cfg.cloud_size, cfg.replicates, diss.epsilon, cfg.seed,
                                          threads);
    t.add(E, "initial_distance", rep.initial_distance, true);
    bool coupled_positive = true;
    for (const auto& pt : rep.points) {
        t.add(E, "independent_distance", pt.independent, pt.independent <= pt.bound + 1e-15)
            .with_param(pt.t)
            .with_band(3.0 * pt.independent_se)
            .with_bound(pt.bound);
        t.add(E, "coupled_distance", pt.coupled, pt.coupled <= pt.coupled_bound + 1e-15)
            .with_param(pt.t)
            .with_band(3.0 * pt.coupled_se)
            .with_bound(pt.coupled_bound);
        t.add(E, "cloud_self_distance", pt.self_distance, true).with_param(pt.t);
        coupled_positive = coupled_positive && pt.coupled > 0.0;
    }
    if (coupled_positive && rep.points.size() >= 2) {
        const double slope_bound = -diss.epsilon / 2.0 + 0.1;
        t.add(E, "coupled_contraction_log_slope", rep.coupled_log_slope,
              rep.coupled_log_slope <= slope_bound)
            .with_bound(slope_bound);
    }
}

// === invariant ===

void run_invariant(const ExperimentConfig& cfg, int threads, ResultTable& t) {
    const std::string& E = cfg.experiment;
    const auto diss = dissipativity_estimate(cfg.generator, cfg.coefficients, 256, cfg.seed);
    t.add(E, "dissipativity_margin_analytic", diss.analytic_margin, true);
    t.add(E, "contraction_exponent", diss.epsilon, true);
    if (!diss.certified) {
        t.add(E, "certification_refused", diss.epsilon, false).with_bound(0.0);
        return;
    }

    const auto spu = static_cast<std::size_t>(
        std::llround(static_cast<double>(cfg.grid.steps) / cfg.grid.horizon));
    const auto inv = invariant_measure_sampler(cfg.generator, cfg.coefficients, cfg.measure,
                                               diss.epsilon, cfg.invariant_samples, spu, cfg.seed,
                                               cfg.burn_in, cfg.gap, threads);
    t.add(E, "burn_in", inv.burn_in, true);
    t.add(E, "thinning_gap", inv.gap, true);
    t.add(E, "invariant_second_moment", inv.second_moment, true);
    t.add(E, "stationarity_pushforward", inv.pushforward_distance, inv.stationary)
        .with_bound(1.5 * inv.self_distance + 1e-9);
    t.add(E, "stationarity_self_distance", inv.self_distance, true);
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& cfg, int threads) {
    if (threads < 1) threads = 1;
    ResultTable t;
    if (cfg.experiment == "certify_operator")
        run_certify_operator(cfg, threads, t);
    else if (cfg.experiment == "noise_checks")
        run_noise_checks(cfg, threads, t);
    else if (cfg.experiment == "simulate")
        run_simulate(cfg, threads, t);
    else if (cfg.experiment == "yosida_gap")
        run_yosida_gap(cfg, threads, t);
    else if (cfg.experiment == "stability")
        run_stability(cfg, threads, t);
    else if (cfg.experiment == "contraction")
        run_contraction(cfg, threads, t);
    else if (cfg.experiment == "invariant")
        run_invariant(cfg, threads, t);
    else
        throw ConfigError("experiment", "unknown experiment '" + cfg.experiment + "'");
    return t;
}

}  // namespace spdelab
