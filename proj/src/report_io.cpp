#include "volterra/report_io.hpp"

#include "volterra/rng.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace volterra {

using nlohmann::json;

json kernel_to_json(const KernelSpec& k) {
    struct Visitor {
        json operator()(const ExponentialSum& e) const {
            std::vector<double> w(e.weights.begin(), e.weights.end());
            std::vector<double> x(e.rates.begin(), e.rates.end());
            return json{{"type", "exponential_sum"}, {"weights", w}, {"rates", x}};
        }
        json operator()(const ShiftedFractional& f) const {
            return json{{"type", "shifted_fractional"},
                        {"scale", f.scale},
                        {"exponent", f.exponent},
                        {"shift", f.shift}};
        }
        json operator()(const ConstantKernel& c) const {
            return json{{"type", "constant"}, {"level", c.level}};
        }
    };
    return std::visit(Visitor{}, k);
}

KernelSpec kernel_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "exponential_sum") {
        const auto w = j.at("weights").get<std::vector<double>>();
        const auto x = j.at("rates").get<std::vector<double>>();
        ExponentialSum e;
        e.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
        e.rates = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
        e.validate();
        return e;
    }
    if (type == "shifted_fractional") {
        ShiftedFractional f;
        f.scale = j.at("scale").get<double>();
        f.exponent = j.at("exponent").get<double>();
        f.shift = j.at("shift").get<double>();
        f.validate();
        return f;
    }
    if (type == "constant") {
        ConstantKernel c{j.at("level").get<double>()};
        c.validate();
        return c;
    }
    throw std::invalid_argument("unknown kernel type: " + type);
}

json impact_to_json(const ImpactParams& p) {
    if (std::holds_alternative<IdentityImpact>(p)) return json{{"type", "identity"}};
    const auto& pp = std::get<PiecewisePower>(p);
    return json{{"type", "piecewise_power"}, {"x0", pp.x0}, {"c", pp.c}};
}

ImpactParams impact_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "identity") return IdentityImpact{};
    if (type == "piecewise_power") {
        PiecewisePower pp;
        pp.x0 = j.at("x0").get<double>();
        pp.c = j.at("c").get<double>();
        pp.validate();
        return pp;
    }
    throw std::invalid_argument("unknown impact type: " + type);
}

json regression_to_json(const RegressionConfig& r) {
    json vars = json::array();
    for (const auto& v : r.variables) {
        json entry{{"name", v.name()}};
        if (v.kappa > 0.0) entry["kappa"] = v.kappa;
        vars.push_back(entry);
    }
    return json{{"variables", vars},
                {"family", poly_family_name(r.family)},
                {"degree", r.degree},
                {"ridge", r.ridge},
                {"standardize", r.standardize}};
}

RegressionConfig regression_from_json(const json& j) {
    RegressionConfig r;
    r.variables.clear();
    for (const auto& v : j.at("variables")) {
        const double kappa = v.value("kappa", 0.0);
        r.variables.push_back(FeatureSpec::parse(v.at("name").get<std::string>(), kappa));
    }
    r.family = poly_family_from_name(j.value("family", "laguerre"));
    r.degree = j.value("degree", 2);
    r.ridge = j.value("ridge", 1e-6);
    r.standardize = j.value("standardize", true);
    return r;
}

json experiment_to_json(const ExperimentConfig& c) {
    return json{
        {"problem",
         {{"gamma", c.gamma},
          {"phi", c.phi},
          {"varrho", c.varrho},
          {"initial_inventory", c.initial_inventory},
          {"horizon", c.horizon},
          {"kernel", kernel_to_json(c.kernel)},
          {"impact", impact_to_json(c.impact)}}},
        {"signal",
         {{"theta", c.signal.theta},
          {"kappa", c.signal.kappa},
          {"xi", c.signal.xi},
          {"i0", c.signal.i0}}},
        {"regression", regression_to_json(c.solve_regression)},
        {"residual_regression", regression_to_json(c.residual_regression)},
        {"scheme",
         {{"iterations", c.iterations},
          {"seed", c.seed},
          {"paths", c.paths},
          {"steps", c.steps},
          {"deterministic", c.deterministic},
          {"antithetic", c.antithetic},
          {"stop_tolerance", c.stop_tolerance}}},
        {"output", {{"directory", c.output_directory}, {"write_trajectories", c.write_trajectories}}}};
}

namespace {

RegressionConfig default_residual_regression(double kappa) {
    RegressionConfig r;
    r.variables = {FeatureSpec::parse("alpha", 0.0), FeatureSpec::parse("alpha_integral", 0.0),
                   FeatureSpec::parse("alpha_exp_avg", kappa)};
    r.family = PolyFamily::Laguerre;
    r.degree = 3;
    r.ridge = 1e-6;
    r.standardize = true;
    return r;
}

}  // namespace

ExperimentConfig experiment_from_json(const json& j) {
    ExperimentConfig c;
    const json& p = j.at("problem");
    c.gamma = p.at("gamma").get<double>();
    c.phi = p.value("phi", 0.0);
    c.varrho = p.value("varrho", 0.0);
    c.initial_inventory = p.value("initial_inventory", 0.0);
    c.horizon = p.value("horizon", 1.0);
    c.kernel = kernel_from_json(p.at("kernel"));
    c.impact = impact_from_json(p.at("impact"));

    const json& s = j.at("signal");
    c.signal.theta = s.at("theta").get<double>();
    c.signal.kappa = s.at("kappa").get<double>();
    c.signal.xi = s.at("xi").get<double>();
    c.signal.i0 = s.at("i0").get<double>();
    c.signal.validate();

    if (j.contains("regression")) c.solve_regression = regression_from_json(j.at("regression"));
    c.residual_regression = j.contains("residual_regression")
                                ? regression_from_json(j.at("residual_regression"))
                                : default_residual_regression(c.signal.kappa);

    const json& sch = j.at("scheme");
    c.iterations = sch.at("iterations").get<int>();
    c.seed = sch.value("seed", std::uint64_t{42});
    c.paths = sch.value("paths", Eigen::Index{1000});
    c.steps = sch.at("steps").get<Eigen::Index>();
    c.deterministic = sch.value("deterministic", false);
    c.antithetic = sch.value("antithetic", true);
    c.stop_tolerance = sch.value("stop_tolerance", 0.0);

    if (j.contains("output")) {
        c.output_directory = j.at("output").value("directory", std::string{"out"});
        c.write_trajectories = j.at("output").value("write_trajectories", true);
    }
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& file) {
    return experiment_from_json(read_json(file));
}

AssembledProblem assemble_problem(const ExperimentConfig& config, int threads) {
    TimeGrid grid(config.horizon, config.steps);
    const bool deterministic = config.deterministic || config.signal.xi == 0.0;
    const Eigen::Index paths = deterministic ? 1 : config.paths;
    PathEnsemble drift = simulate_ou(config.signal, grid, paths, config.seed,
                                     !deterministic && config.antithetic, threads);
    PathEnsemble alpha = alpha_from_drift(drift, config.signal);

    ProblemSpec spec;
    spec.gamma = config.gamma;
    spec.phi = config.phi;
    spec.varrho = config.varrho;
    spec.initial_inventory = config.initial_inventory;
    spec.kernel = config.kernel;
    spec.impact = config.impact;
    spec.grid = grid;
    spec.alpha = std::move(alpha);
    spec.validate();
    return AssembledProblem{std::move(spec), std::move(drift)};
}

json scheme_report_to_json(const SchemeReport& report, const ExperimentConfig& config) {
    json iters = json::array();
    for (const auto& s : report.iterations)
        iters.push_back(json{{"iteration", s.iteration},
                             {"residual", s.residual},
                             {"pnl", s.pnl},
                             {"update_norm", s.update_norm}});
    const auto& d = report.diagnostics;
    return json{{"config", experiment_to_json(config)},
                {"iterations", iters},
                {"iterations_run", report.iterations_run},
                {"aborted", report.aborted},
                {"definiteness_margin", report.definiteness_margin},
                {"diagnostics",
                 {{"kernel_constant", d.kernel_constant},
                  {"sup_h_prime", d.sup_h_prime},
                  {"lipschitz_h_prime", d.lipschitz_h_prime},
                  {"m_gamma", d.m_gamma},
                  {"c_tilde", d.c_tilde},
                  {"ratio", d.ratio},
                  {"certified", d.certified}}}};
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void CsvWriter::add_row(const std::vector<double>& row) {
    if (row.size() != columns_.size()) throw std::invalid_argument("CsvWriter: row width mismatch");
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) line += ',';
        line += format_double(row[i]);
    }
    rows_.push_back(std::move(line));
}

void CsvWriter::add_row_mixed(const std::vector<std::string>& row) {
    if (row.size() != columns_.size()) throw std::invalid_argument("CsvWriter: row width mismatch");
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) line += ',';
        line += row[i];
    }
    rows_.push_back(std::move(line));
}

void CsvWriter::write(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open " + file.string());
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i) out << ',';
        out << columns_[i];
    }
    out << '\n';
    for (const auto& row : rows_) out << row << '\n';
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_manifest(const std::filesystem::path& directory, const json& config,
                    std::uint64_t seed, const std::string& command) {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const std::int64_t created =
        std::chrono::duration_cast<std::chrono::seconds>(now).count();
    json manifest;
    manifest["version"] = kArtifactVersion;
    manifest["rng"] = kRngAlgorithm;
    manifest["seed"] = seed;
    manifest["command"] = command;
    manifest["config_hash"] = fnv1a(config.dump());
    manifest["created_utc"] = created;
    write_json(directory / "manifest.json", manifest);
}

namespace {

bool type_matches(const json& value, const std::string& type) {
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    if (type == "string") return value.is_string();
    if (type == "number") return value.is_number();
    if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
    if (type == "boolean") return value.is_boolean();
    if (type == "null") return value.is_null();
    return false;
}

}  // namespace

bool validate_against_schema(const json& value, const json& schema, std::string* error) {
    auto fail = [&](const std::string& msg) {
        if (error) *error = msg;
        return false;
    };
    if (schema.contains("type") && !type_matches(value, schema.at("type").get<std::string>()))
        return fail("expected type " + schema.at("type").get<std::string>() + " at " + value.dump().substr(0, 60));
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& e : schema.at("enum"))
            if (e == value) ok = true;
        if (!ok) return fail("value not in enum: " + value.dump());
    }
    if (value.is_object()) {
        if (schema.contains("required"))
            for (const auto& key : schema.at("required"))
                if (!value.contains(key.get<std::string>()))
                    return fail("missing required key: " + key.get<std::string>());
        if (schema.contains("properties"))
            for (auto it = schema.at("properties").begin(); it != schema.at("properties").end(); ++it)
                if (value.contains(it.key()) &&
                    !validate_against_schema(value.at(it.key()), it.value(), error))
                    return false;
    }
    if (value.is_array() && schema.contains("items"))
        for (const auto& item : value)
            if (!validate_against_schema(item, schema.at("items"), error)) return false;
    if (error) error->clear();
    return true;
}

void write_json(const std::filesystem::path& file, const json& j) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open " + file.string());
    out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    json j;
    in >> j;
    return j;
}

}  // namespace volterra
