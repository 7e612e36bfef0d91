#include "volterra/benchmark.hpp"
#include "volterra/expsum_fit.hpp"
#include "volterra/fredholm.hpp"
#include "volterra/report_io.hpp"
#include "volterra/validation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace volterra;
using nlohmann::json;

namespace {

std::string short_tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

fs::path resolve_out_dir(const std::string& flag_value, const std::string& config_value) {
    if (!flag_value.empty()) return flag_value;
    if (!config_value.empty()) return config_value;
    if (const char* env = std::getenv("VOLTERRA_OUT_DIR")) return env;
    return "out";
}

void write_iteration_csv(const SchemeReport& report, const fs::path& file) {
    CsvWriter csv({"iteration", "residual", "pnl", "update_norm"});
    for (const auto& s : report.iterations)
        csv.add_row({static_cast<double>(s.iteration), s.residual, s.pnl, s.update_norm});
    csv.write(file);
}

void write_trajectory_csv(const SchemeReport& report, const PathEnsemble& alpha,
                          const fs::path& file) {
    CsvWriter csv({"time", "alpha_mean", "rate_mean", "inventory_mean", "distortion_mean",
                   "impact_cost_mean", "rate_path0", "inventory_path0", "distortion_path0"});
    const TimeGrid& grid = report.rate.grid;
    for (Eigen::Index j = 0; j < grid.size(); ++j)
        csv.add_row({grid.point(j), alpha.values.col(j).mean(), report.rate.values.col(j).mean(),
                     report.inventory.values.col(j).mean(),
                     report.distortion.values.col(j).mean(),
                     report.impact_cost.values.col(j).mean(), report.rate.values(0, j),
                     report.inventory.values(0, j), report.distortion.values(0, j)});
    csv.write(file);
}

void write_error_histogram_csv(const SchemeReport& report, const fs::path& file) {
    CsvWriter csv({"path", "squared_residual"});
    for (Eigen::Index m = 0; m < report.per_path_error.size(); ++m)
        csv.add_row({static_cast<double>(m), report.per_path_error[m]});
    csv.write(file);
}

SchemeReport run_scheme(const ExperimentConfig& config, int threads) {
    const AssembledProblem assembled = assemble_problem(config, threads);
    SchemeSettings settings;
    settings.iterations = config.iterations;
    settings.deterministic = config.deterministic || config.signal.xi == 0.0;
    settings.stop_tolerance = config.stop_tolerance;
    settings.threads = threads;
    return iterate_scheme(assembled.spec, config.solve_regression, config.residual_regression,
                          settings);
}

int cmd_fit_kernel(double nu, double shift, double scale, int pmax, double horizon,
                   int multistart, std::uint64_t seed, const fs::path& out, int threads) {
    const ShiftedFractional frac{scale, nu, shift};
    FitOptions options;
    options.multistart = multistart;
    options.seed = seed;
    options.threads = threads;
    const auto fits = fit_exponential_sum_table(frac, pmax, horizon, options);

    fs::create_directories(out);
    CsvWriter csv({"terms", "index", "weight", "rate", "loss"});
    json jfits = json::array();
    for (const auto& fit : fits) {
        std::vector<double> w(fit.kernel.weights.begin(), fit.kernel.weights.end());
        std::vector<double> x(fit.kernel.rates.begin(), fit.kernel.rates.end());
        for (Eigen::Index i = 0; i < fit.kernel.count(); ++i)
            csv.add_row({static_cast<double>(fit.kernel.count()), static_cast<double>(i),
                         fit.kernel.weights[i], fit.kernel.rates[i], fit.loss});
        jfits.push_back(json{{"terms", fit.kernel.count()},
                             {"weights", w},
                             {"rates", x},
                             {"loss", fit.loss},
                             {"converged", fit.converged}});
        std::cout << "p=" << fit.kernel.count() << "  loss=" << fit.loss << '\n';
    }
    csv.write(out / "kernel_fits.csv");
    json summary{{"exponent", nu},
                 {"shift", shift},
                 {"scale", scale},
                 {"horizon", horizon},
                 {"fits", jfits}};
    write_json(out / "kernel_fits.json", summary);
    write_manifest(out, summary, seed, "fit-kernel");
    return 0;
}

int cmd_solve(const ExperimentConfig& config, const fs::path& out, int threads) {
    const AssembledProblem assembled = assemble_problem(config, threads);
    SchemeSettings settings;
    settings.iterations = config.iterations;
    settings.deterministic = config.deterministic || config.signal.xi == 0.0;
    settings.stop_tolerance = config.stop_tolerance;
    settings.threads = threads;
    const SchemeReport report = iterate_scheme(assembled.spec, config.solve_regression,
                                               config.residual_regression, settings);

    fs::create_directories(out);
    write_json(out / "scheme_report.json", scheme_report_to_json(report, config));
    write_iteration_csv(report, out / "iterations.csv");
    if (config.write_trajectories) {
        write_trajectory_csv(report, assembled.spec.alpha, out / "trajectories.csv");
        write_error_histogram_csv(report, out / "error_histogram.csv");
    }
    write_manifest(out, experiment_to_json(config), config.seed, "solve");

    std::cout << "iterations=" << report.iterations_run
              << "  residual=" << report.iterations.back().residual
              << "  pnl=" << report.iterations.back().pnl << '\n';
    if (report.aborted) {
        std::cerr << "solve aborted: non-finite metric; diagnostics in scheme_report.json\n";
        return 1;
    }
    return 0;
}

int cmd_benchmark(const ExperimentConfig& base, double tau, double c, std::vector<double> gammas,
                  const fs::path& out, int threads) {
    fs::create_directories(out);
    json summary;
    summary["tau"] = tau;
    summary["c"] = c;
    json runs = json::array();
    for (double gamma : gammas) {
        ExperimentConfig config = base;
        config.gamma = gamma;
        const AssembledProblem assembled = assemble_problem(config, threads);
        SchemeSettings settings;
        settings.iterations = config.iterations;
        settings.threads = threads;
        settings.deterministic = config.deterministic || config.signal.xi == 0.0;
        const SchemeReport report = iterate_scheme(assembled.spec, config.solve_regression,
                                                   config.residual_regression, settings);
        const BenchmarkSolution bench =
            explicit_benchmark({tau, c}, assembled.drift, assembled.spec.alpha);
        const double distance = interior_mean_distance(report.inventory, bench.traded_volume);

        CsvWriter csv({"time", "inventory_mean", "benchmark_volume_mean", "inventory_path0",
                       "benchmark_volume_path0", "bulk_open_path0", "bulk_close_path0"});
        const TimeGrid& grid = report.rate.grid;
        for (Eigen::Index j = 0; j < grid.size(); ++j)
            csv.add_row({grid.point(j), report.inventory.values.col(j).mean(),
                         bench.traded_volume.values.col(j).mean(),
                         report.inventory.values(0, j), bench.traded_volume.values(0, j),
                         bench.bulk_open[0], bench.bulk_close[0]});
        csv.write(out / ("benchmark_overlay_gamma_" + short_tag(gamma) + ".csv"));
        runs.push_back(json{{"gamma", gamma},
                            {"distance", distance},
                            {"residual", report.iterations.back().residual}});
        std::cout << "gamma=" << gamma << "  interior distance=" << distance << '\n';
    }
    summary["runs"] = runs;
    write_json(out / "benchmark_summary.json", summary);
    write_manifest(out, experiment_to_json(base), base.seed, "benchmark");
    return 0;
}

int cmd_compare_kernels(const ExperimentConfig& base, int pmax, int multistart,
                        const fs::path& out, int threads) {
    const auto* frac = std::get_if<ShiftedFractional>(&base.kernel);
    if (!frac) {
        std::cerr << "compare-kernels expects a shifted_fractional kernel in the config\n";
        return 2;
    }
    FitOptions options;
    options.multistart = multistart;
    options.threads = threads;
    options.seed = base.seed;
    const auto fits = fit_exponential_sum_table(*frac, pmax, base.horizon, options);

    fs::create_directories(out);
    std::vector<SchemeReport> reports;
    std::vector<std::string> labels;
    for (int p = 0; p <= pmax; ++p) {
        ExperimentConfig config = base;
        if (p > 0) config.kernel = fits[p - 1].kernel;
        labels.push_back(p == 0 ? "fractional" : "p" + std::to_string(p));
        reports.push_back(run_scheme(config, threads));
        write_error_histogram_csv(reports.back(),
                                  out / ("error_histogram_" + labels.back() + ".csv"));
        std::cout << labels.back() << "  pnl=" << reports.back().iterations.back().pnl << '\n';
    }

    std::vector<std::string> columns{"iteration"};
    for (const auto& l : labels) columns.push_back("pnl_" + l);
    CsvWriter csv(columns);
    for (int it = 0; it < base.iterations; ++it) {
        std::vector<double> row{static_cast<double>(it + 1)};
        for (const auto& rep : reports)
            row.push_back(static_cast<std::size_t>(it) < rep.iterations.size()
                              ? rep.iterations[it].pnl
                              : rep.iterations.back().pnl);
        csv.add_row(row);
    }
    csv.write(out / "pnl_iterations.csv");

    json summary = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i)
        summary.push_back(json{{"kernel", labels[i]},
                               {"pnl", reports[i].iterations.back().pnl},
                               {"residual", reports[i].iterations.back().residual}});
    write_json(out / "compare_summary.json", json{{"runs", summary}});
    write_manifest(out, experiment_to_json(base), base.seed, "compare-kernels");
    return 0;
}

int cmd_concavity(const ExperimentConfig& base, std::vector<double> c_values, const fs::path& out,
                  int threads) {
    fs::create_directories(out);
    json summary = json::array();
    for (double c : c_values) {
        ExperimentConfig config = base;
        const auto* pp = std::get_if<PiecewisePower>(&base.impact);
        const double x0 = pp ? pp->x0 : 0.01;
        config.impact = PiecewisePower{x0, c};
        const SchemeReport report = run_scheme(config, threads);

        CsvWriter csv({"time", "rate_mean", "inventory_mean", "kernel_convolution_mean",
                       "price_displacement_mean"});
        const TimeGrid& grid = report.rate.grid;
        const Eigen::MatrixXd displacement = impact_h(config.impact, report.distortion.values);
        for (Eigen::Index j = 0; j < grid.size(); ++j)
            csv.add_row({grid.point(j), report.rate.values.col(j).mean(),
                         report.inventory.values.col(j).mean(),
                         report.distortion.values.col(j).mean(),
                         displacement.col(j).mean()});
        const std::string tag = short_tag(c);
        csv.write(out / ("concavity_c" + tag + ".csv"));
        summary.push_back(json{
            {"c", c},
            {"residual", report.iterations.back().residual},
            {"terminal_inventory",
             report.inventory.values.col(grid.size() - 1).cwiseAbs().maxCoeff()},
            {"peak_displacement", displacement.cwiseAbs().maxCoeff()}});
        std::cout << "c=" << c << "  residual=" << report.iterations.back().residual << '\n';
    }
    write_json(out / "concavity_summary.json", json{{"runs", summary}});
    write_manifest(out, experiment_to_json(base), base.seed, "concavity");
    return 0;
}

int cmd_validate(int threads) {
    const auto results = run_validation_suite(threads);
    for (const auto& r : results)
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << "  (" << r.detail << ")\n";
    return all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal trading under nonlinear transient impact with Volterra propagators"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "thread cap for inner modules");

    auto* fit = app.add_subcommand("fit-kernel",
                                   "approximate a fractional kernel by sums of exponentials");
    fit->fallthrough();
    double nu = 0.6, shift = 0.0, scale = 1.0, horizon = 1.0;
    int pmax = 5, multistart = 48;
    std::uint64_t fit_seed = 2024;
    std::string fit_out;
    fit->add_option("--exponent", nu, "fractional exponent in (1/2, 1)");
    fit->add_option("--shift", shift, "lag shift epsilon >= 0");
    fit->add_option("--scale", scale, "kernel scale");
    fit->add_option("--horizon", horizon, "fit horizon T");
    fit->add_option("--pmax", pmax, "largest number of exponential terms");
    fit->add_option("--multistart", multistart, "random starts per term count");
    fit->add_option("--seed", fit_seed, "multistart seed");
    fit->add_option("--out", fit_out, "output directory");

    std::string config_path, out_flag;
    std::uint64_t seed_override = 0;
    bool has_seed_override = false, force_deterministic = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config (json)")->required();
        sub->add_option("--out", out_flag, "output directory (overrides config)");
        sub->add_flag_callback(
            "--deterministic", [&] { force_deterministic = true; },
            "force the no-regression deterministic mode");
        sub->add_option_function<std::uint64_t>(
            "--seed",
            [&](std::uint64_t s) {
                seed_override = s;
                has_seed_override = true;
            },
            "seed override");
    };

    auto* solve = app.add_subcommand("solve", "run the iterative scheme");
    solve->fallthrough();
    add_common(solve);

    auto* bench = app.add_subcommand(
        "benchmark", "overlay the scheme against the vanishing-slippage closed form");
    bench->fallthrough();
    add_common(bench);
    double tau = 1.0, bench_c = 0.8;
    std::vector<double> gammas{1.0, 0.1, 0.01};
    bench->add_option("--tau", tau, "exponential impact time decay");
    bench->add_option("--c", bench_c, "power exponent in [1/2, 1]");
    bench->add_option("--gammas", gammas, "slippage values to sweep");

    auto* compare = app.add_subcommand(
        "compare-kernels", "PnL stability across exponential approximations of the kernel");
    compare->fallthrough();
    add_common(compare);
    int compare_pmax = 5, compare_multistart = 48;
    compare->add_option("--pmax", compare_pmax, "largest number of exponential terms");
    compare->add_option("--multistart", compare_multistart, "fit multistart count");

    auto* concavity =
        app.add_subcommand("concavity", "inventory/distortion across impact concavities");
    concavity->fallthrough();
    add_common(concavity);
    std::vector<double> c_values{0.5, 0.8, 1.0};
    concavity->add_option("--c-list", c_values, "concavity exponents to run");

    auto* validate = app.add_subcommand("validate", "run the invariant suite");
    validate->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors exit 2, --help exits 0
    }

    try {
        if (fit->parsed())
            return cmd_fit_kernel(nu, shift, scale, pmax, horizon, multistart, fit_seed,
                                  resolve_out_dir(fit_out, ""), threads);
        if (validate->parsed()) return cmd_validate(threads);

        ExperimentConfig config = load_experiment_config(config_path);
        if (has_seed_override) config.seed = seed_override;
        if (force_deterministic) config.deterministic = true;
        const fs::path out = resolve_out_dir(out_flag, config.output_directory);

        if (solve->parsed()) return cmd_solve(config, out, threads);
        if (bench->parsed()) return cmd_benchmark(config, tau, bench_c, gammas, out, threads);
        if (compare->parsed())
            return cmd_compare_kernels(config, compare_pmax, compare_multistart, out, threads);
        if (concavity->parsed()) return cmd_concavity(config, c_values, out, threads);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
