// simulate: runs link-activation experiments and writes CSV/JSON outputs.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mlo/mlo.hpp"

namespace {

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        std::size_t used = 0;
        const int v = std::stoi(item, &used);
        if (used != item.size()) throw mlo::ConfigError("not an integer: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw mlo::ConfigError("empty AP count list");
    return out;
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw mlo::IoError("cannot read " + path.string());
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw mlo::ConfigError(path.string() + ": " + e.what());
    }
}

void write_traces(const mlo::RunResult& run, const std::filesystem::path& dir, const std::string& stem) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / (stem + ".json"));
        os << nlohmann::json(run).dump() << '\n';
        if (!os) throw mlo::IoError("failed writing " + (dir / (stem + ".json")).string());
    }
    std::ofstream os(dir / (stem + ".csv"));
    mlo::write_trace_csv(os, run);
    if (!os) throw mlo::IoError("failed writing " + (dir / (stem + ".csv")).string());
}

int replay(const mlo::ExperimentConfig& cfg, const std::filesystem::path& scenario_file) {
    const auto world = read_json(scenario_file).get<mlo::Scenario>();
    const std::filesystem::path out = cfg.output_dir;
    std::printf("%-8s %14s %8s\n", "strategy", "min_rate_mbps", "min_ap");
    for (auto strategy : cfg.strategies) {
        const auto run = mlo::run_scenario(world, strategy, cfg.iterations, cfg.master_seed, cfg.engine);
        const auto series = mlo::min_rate_timeseries(run);
        std::printf("%-8s %14.3f %8zu\n", std::string(mlo::to_string(strategy)).c_str(),
                    series.back() / 1e6, mlo::min_rate_ap(run));
        write_traces(run, out, "trace_" + std::string(mlo::to_string(strategy)));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-link Wi-Fi link-activation simulator"};

    std::optional<std::string> config_file;
    std::optional<std::string> strategy;
    std::optional<int> scenarios;
    std::optional<int> iterations;
    std::optional<std::string> aps;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
    std::optional<std::string> scenario_file;
    bool traces = false;

    app.add_option("--config", config_file, "JSON experiment config (fields as in ExperimentConfig)")
        ->check(CLI::ExistingFile);
    app.add_option("--strategy", strategy, "fixed|random|rl|frl|all");
    app.add_option("--scenarios", scenarios, "number of random scenarios per density");
    app.add_option("--iterations", iterations, "iterations per scenario");
    app.add_option("--aps", aps, "comma-separated AP counts, e.g. 2,4,8,12,16");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--workers", workers, "worker threads");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--scenario", scenario_file, "replay one scenario JSON instead of sampling")
        ->check(CLI::ExistingFile);
    app.add_flag("--traces", traces, "also write per-iteration traces of scenario 0");

    CLI11_PARSE(app, argc, argv);

    try {
        mlo::ExperimentConfig cfg;
        if (config_file) cfg = read_json(*config_file).get<mlo::ExperimentConfig>();
        if (strategy) {
            if (*strategy == "all")
                cfg.strategies.assign(std::begin(mlo::kAllStrategies), std::end(mlo::kAllStrategies));
            else
                cfg.strategies = {mlo::parse_strategy(*strategy)};
        }
        if (scenarios) cfg.num_scenarios = *scenarios;
        if (iterations) cfg.iterations = *iterations;
        if (aps) cfg.n_values = parse_int_list(*aps);
        if (seed) cfg.master_seed = *seed;
        if (workers) cfg.workers = *workers;
        if (out_dir) cfg.output_dir = *out_dir;
        cfg.validate();

        if (scenario_file) return replay(cfg, *scenario_file);

        const auto report = mlo::run_experiment(cfg);
        mlo::write_report(report, cfg.output_dir);

        if (traces) {
            for (int n : cfg.n_values) {
                auto rng = mlo::child_stream(cfg.master_seed, {mlo::kScenarioStream, std::uint64_t(n), 0});
                const auto world = mlo::sample_scenario(rng, n, cfg.k, cfg.area_side_m, cfg.d_m, cfg.physical);
                const auto run_seed = mlo::child_seed(cfg.master_seed, {mlo::kRunStream, std::uint64_t(n), 0});
                for (auto s : cfg.strategies)
                    write_traces(mlo::run_scenario(world, s, cfg.iterations, run_seed, cfg.engine),
                                 cfg.output_dir,
                                 "trace_n" + std::to_string(n) + "_" + std::string(mlo::to_string(s)));
            }
        }

        std::printf("%4s %-8s %16s %10s\n", "n", "strategy", "mean_min_mbps", "p90_mbps");
        for (const auto& b : report.densities)
            for (const auto& s : b.strategies)
                std::printf("%4d %-8s %16.3f %10.3f\n", b.n, std::string(mlo::to_string(s.strategy)).c_str(),
                            s.mean_min_rate_bps / 1e6, s.p90_bps / 1e6);
        std::printf("outputs written to %s\n", cfg.output_dir.c_str());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "simulate: error: %s\n", e.what());
        return 1;
    }
}
