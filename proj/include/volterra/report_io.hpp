#pragma once

#include "volterra/benchmark.hpp"
#include "volterra/condexp.hpp"
#include "volterra/fredholm.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace volterra {

inline constexpr char kArtifactVersion[] = "0.1.0";

/// Full experiment description; round-trips losslessly through JSON.
struct ExperimentConfig {
    double gamma = 1.0;
    double phi = 0.0;
    double varrho = 0.0;
    double initial_inventory = 0.0;
    double horizon = 1.0;
    KernelSpec kernel = ExponentialSum{Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)};
    ImpactParams impact = IdentityImpact{};
    OUSignalParams signal;
    RegressionConfig solve_regression;
    RegressionConfig residual_regression;
    int iterations = 30;
    std::uint64_t seed = 42;
    Eigen::Index paths = 1000;
    Eigen::Index steps = 100;
    bool deterministic = false;
    bool antithetic = true;
    double stop_tolerance = 0.0;
    std::string output_directory = "out";
    bool write_trajectories = true;
};

nlohmann::json kernel_to_json(const KernelSpec& k);
KernelSpec kernel_from_json(const nlohmann::json& j);
nlohmann::json impact_to_json(const ImpactParams& p);
ImpactParams impact_from_json(const nlohmann::json& j);
nlohmann::json regression_to_json(const RegressionConfig& r);
RegressionConfig regression_from_json(const nlohmann::json& j);

nlohmann::json experiment_to_json(const ExperimentConfig& c);
ExperimentConfig experiment_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& file);

/// Assemble the runnable problem from a config (simulates the signal).
struct AssembledProblem {
    ProblemSpec spec;
    PathEnsemble drift;
};
AssembledProblem assemble_problem(const ExperimentConfig& config, int threads);

nlohmann::json scheme_report_to_json(const SchemeReport& report, const ExperimentConfig& config);

/// CSV with a header row; every numeric cell is printed with %.17g so reruns
/// are byte-identical.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns);
    void add_row(const std::vector<double>& row);
    void add_row_mixed(const std::vector<std::string>& row);
    void write(const std::filesystem::path& file) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::string> rows_;
};

std::string format_double(double v);

/// FNV-1a, used to fingerprint configs in run manifests.
std::uint64_t fnv1a(const std::string& text);

/// Manifest (config hash, seed, RNG id, version, timestamp) written next to
/// every artifact set; byte-identity checks must ignore `created_utc`.
void write_manifest(const std::filesystem::path& directory, const nlohmann::json& config,
                    std::uint64_t seed, const std::string& command);

/// Tiny JSON-schema subset: type / properties / required / items / enum.
/// Enough to pin the shapes of every JSON artifact this project emits.
bool validate_against_schema(const nlohmann::json& value, const nlohmann::json& schema,
                             std::string* error);

void write_json(const std::filesystem::path& file, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& file);

}  // namespace volterra
