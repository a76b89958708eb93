#pragma once

// Monte Carlo experiment driver: paired-geometry batches over all strategies,
// density sweeps, min-rate statistics and CSV/JSON outputs.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlo/agents.hpp"
#include "mlo/engine.hpp"
#include "mlo/errors.hpp"
#include "mlo/random.hpp"
#include "mlo/scenario.hpp"

namespace mlo {

struct ExperimentConfig {
    std::vector<Strategy> strategies{std::begin(kAllStrategies), std::end(kAllStrategies)};
    int num_scenarios = 500;
    int iterations = 2000;
    std::vector<int> n_values{8};
    int k = 4;
    double area_side_m = 100.0;
    double d_m = 10.0;
    PhysicalConfig physical;
    std::uint64_t master_seed = 1;
    std::string output_dir = "out";
    /// Execution only; results do not depend on it.
    int workers = 1;
    EngineOptions engine;

    void validate() const {
        if (strategies.empty()) throw ConfigError("at least one strategy is required");
        if (num_scenarios < 1) throw ConfigError("num_scenarios must be >= 1");
        if (iterations < 1) throw ConfigError("iterations must be >= 1");
        if (n_values.empty()) throw ConfigError("n_values must not be empty");
        for (int n : n_values)
            if (n < 1) throw ConfigError("every n must be >= 1");
        if (k < 1 || k > kMaxLinks) throw ConfigError("k must be in [1, 16]");
        if (!(area_side_m > 0.0)) throw ConfigError("area_side_m must be positive");
        if (!(d_m > 0.0) || !(d_m < area_side_m)) throw ConfigError("d_m must be in (0, area_side_m)");
        if (workers < 1) throw ConfigError("workers must be >= 1");
        if (engine.share_period < 1) throw ConfigError("share_period must be >= 1");
        physical.validate();
    }
};

/// Field names mirror ExperimentConfig; absent fields keep their defaults.
inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    auto opt = [&j](const char* name, auto& out) {
        if (auto it = j.find(name); it != j.end()) it->get_to(out);
    };
    opt("strategies", c.strategies);
    opt("num_scenarios", c.num_scenarios);
    opt("iterations", c.iterations);
    opt("n_values", c.n_values);
    opt("k", c.k);
    opt("area_side_m", c.area_side_m);
    opt("d_m", c.d_m);
    opt("physical", c.physical);
    opt("master_seed", c.master_seed);
    opt("output_dir", c.output_dir);
    opt("workers", c.workers);
    opt("share_period", c.engine.share_period);
    opt("min_includes_self", c.engine.reward.include_self);
    opt("share_averaged_reward", c.engine.reward.share_averaged);
}

/// Everything that determines results; `workers` and `output_dir` are left out.
inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = nlohmann::json{{"strategies", c.strategies},
                       {"num_scenarios", c.num_scenarios},
                       {"iterations", c.iterations},
                       {"n_values", c.n_values},
                       {"k", c.k},
                       {"area_side_m", c.area_side_m},
                       {"d_m", c.d_m},
                       {"physical", c.physical},
                       {"master_seed", c.master_seed},
                       {"share_period", c.engine.share_period},
                       {"min_includes_self", c.engine.reward.include_self},
                       {"share_averaged_reward", c.engine.reward.share_averaged}};
}

struct EcdfPoint {
    double value = 0.0;
    double fraction = 0.0;
    friend bool operator==(const EcdfPoint&, const EcdfPoint&) = default;
};

/// Sorted values paired with i / len for i = 1..len.
inline std::vector<EcdfPoint> compute_ecdf(std::span<const double> values) {
    if (values.empty()) throw EmptyInput("compute_ecdf: no values");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<EcdfPoint> out;
    out.reserve(sorted.size());
    const auto len = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        out.push_back({sorted[i], static_cast<double>(i + 1) / len});
    return out;
}

/// q-quantile (q in [0, 1]) by linear interpolation between order statistics at
/// rank (len - 1) * q.
inline double percentile(std::span<const double> values, double q) {
    if (values.empty()) throw EmptyInput("percentile: no values");
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("percentile: q must be in [0, 1]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double rank = static_cast<double>(sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (rank - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double percentile(std::span<const EcdfPoint> ecdf, double q) {
    std::vector<double> v;
    v.reserve(ecdf.size());
    for (const auto& p : ecdf) v.push_back(p.value);
    return percentile(v, q);
}

struct StrategySummary {
    Strategy strategy = Strategy::Fixed;
    double mean_min_rate_bps = 0.0;
    double p90_bps = 0.0;
    std::vector<EcdfPoint> ecdf;
    /// Min over APs of each AP's time-averaged rate, by scenario index.
    std::vector<double> per_scenario_min_rate_bps;
    std::vector<std::uint64_t> scenario_fingerprints;
    /// Scenario 0: running average of the min-rate AP, and every AP's mean rate.
    std::vector<double> reference_convergence_bps;
    std::size_t reference_min_ap = 0;
    std::vector<double> reference_per_ap_bps;
};

/// Results of every strategy at one network density.
struct BatchSummary {
    int n = 0;
    std::vector<StrategySummary> strategies;

    const StrategySummary& at(Strategy s) const {
        for (const auto& st : strategies)
            if (st.strategy == s) return st;
        throw ConfigError("strategy " + std::string(to_string(s)) + " was not part of the batch");
    }
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<BatchSummary> densities;
};

// Stream identifiers below the master seed.
inline constexpr std::uint64_t kScenarioStream = 1;
inline constexpr std::uint64_t kRunStream = 2;

/// Runs `task(index)` for index in [0, count) on up to `workers` threads. Results
/// must be written to per-index slots; the lowest-index exception is rethrown.
template <class Task>
void parallel_for(std::size_t count, int workers, Task&& task) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Samples `num_scenarios` worlds with n APs and runs every configured strategy on
/// each same world. Deterministic in the config, independent of `workers`.
inline BatchSummary run_batch(const ExperimentConfig& config, int n) {
    config.validate();
    if (n < 1) throw ConfigError("run_batch: n must be >= 1");

    const auto scenarios = static_cast<std::size_t>(config.num_scenarios);
    const auto num_strategies = config.strategies.size();

    struct Cell {
        double min_rate = 0.0;
        std::uint64_t fingerprint = 0;
    };
    std::vector<Cell> cells(scenarios * num_strategies);
    std::vector<RunResult> reference(num_strategies);

    parallel_for(scenarios, config.workers, [&](std::size_t s) {
        const auto un = static_cast<std::uint64_t>(n);
        Rng world_rng = child_stream(config.master_seed, {kScenarioStream, un, s});
        const Scenario world =
            sample_scenario(world_rng, n, config.k, config.area_side_m, config.d_m, config.physical);
        const std::uint64_t run_seed = child_seed(config.master_seed, {kRunStream, un, s});
        for (std::size_t k = 0; k < num_strategies; ++k) {
            RunResult run = run_scenario(world, config.strategies[k], config.iterations, run_seed,
                                         config.engine);
            const auto avg = time_averaged_rates(run);
            cells[s * num_strategies + k] = {*std::min_element(avg.begin(), avg.end()),
                                             fingerprint(run.scenario)};
            if (s == 0) reference[k] = std::move(run);
        }
    });

    BatchSummary summary;
    summary.n = n;
    for (std::size_t k = 0; k < num_strategies; ++k) {
        StrategySummary st;
        st.strategy = config.strategies[k];
        st.per_scenario_min_rate_bps.reserve(scenarios);
        for (std::size_t s = 0; s < scenarios; ++s) {
            st.per_scenario_min_rate_bps.push_back(cells[s * num_strategies + k].min_rate);
            st.scenario_fingerprints.push_back(cells[s * num_strategies + k].fingerprint);
        }
        double total = 0.0;
        for (double v : st.per_scenario_min_rate_bps) total += v;
        st.mean_min_rate_bps = total / static_cast<double>(scenarios);
        st.ecdf = compute_ecdf(st.per_scenario_min_rate_bps);
        st.p90_bps = percentile(st.per_scenario_min_rate_bps, 0.9);
        st.reference_convergence_bps = min_rate_timeseries(reference[k]);
        st.reference_min_ap = min_rate_ap(reference[k]);
        st.reference_per_ap_bps = time_averaged_rates(reference[k]);
        summary.strategies.push_back(std::move(st));
    }
    return summary;
}

/// One batch per entry of config.n_values, in order.
inline std::vector<BatchSummary> density_sweep(const ExperimentConfig& config) {
    config.validate();
    std::vector<BatchSummary> out;
    out.reserve(config.n_values.size());
    for (int n : config.n_values) out.push_back(run_batch(config, n));
    return out;
}

inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    return {config, density_sweep(config)};
}

inline void to_json(nlohmann::json& j, const EcdfPoint& p) { j = nlohmann::json::array({p.value, p.fraction}); }

inline void to_json(nlohmann::json& j, const StrategySummary& s) {
    j = nlohmann::json{{"strategy", s.strategy},
                       {"mean_min_rate_bps", s.mean_min_rate_bps},
                       {"p90_bps", s.p90_bps},
                       {"ecdf", s.ecdf},
                       {"per_scenario_min_rate_bps", s.per_scenario_min_rate_bps},
                       {"scenario_fingerprints", s.scenario_fingerprints},
                       {"reference_min_ap", s.reference_min_ap},
                       {"reference_per_ap_bps", s.reference_per_ap_bps}};
}

inline void to_json(nlohmann::json& j, const BatchSummary& b) {
    j = nlohmann::json{{"n", b.n}, {"strategies", b.strategies}};
}

inline void to_json(nlohmann::json& j, const ExperimentReport& r) {
    j = nlohmann::json{{"config", r.config}, {"densities", r.densities}};
}

namespace detail {

inline std::string mbps(double bps) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", bps / 1e6);
    return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    return os;
}

inline void close_output(std::ofstream& os, const std::filesystem::path& path) {
    os.close();
    if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace detail

/// Writes summary.json and the per-figure CSVs (rates in Mbps, 3 decimals) into `dir`.
inline void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

    using detail::mbps;
    auto write = [&dir](const char* name, auto&& body) {
        const auto path = dir / name;
        auto os = detail::open_output(path);
        body(os);
        detail::close_output(os, path);
    };

    write("summary.json", [&](std::ostream& os) { os << nlohmann::json(report).dump(2) << '\n'; });

    write("fig3_convergence.csv", [&](std::ostream& os) {
        os << "n,strategy,min_ap,t,running_avg_mbps\n";
        for (const auto& b : report.densities)
            for (const auto& s : b.strategies)
                for (std::size_t t = 0; t < s.reference_convergence_bps.size(); ++t)
                    os << b.n << ',' << to_string(s.strategy) << ',' << s.reference_min_ap << ','
                       << t + 1 << ',' << mbps(s.reference_convergence_bps[t]) << '\n';
    });

    write("fig4_per_ap.csv", [&](std::ostream& os) {
        os << "n,strategy,ap,avg_rate_mbps\n";
        for (const auto& b : report.densities)
            for (const auto& s : b.strategies)
                for (std::size_t i = 0; i < s.reference_per_ap_bps.size(); ++i)
                    os << b.n << ',' << to_string(s.strategy) << ',' << i << ','
                       << mbps(s.reference_per_ap_bps[i]) << '\n';
    });

    write("fig5_means.csv", [&](std::ostream& os) {
        os << "n,strategy,reference_min_rate_mbps,mean_min_rate_mbps,p90_mbps\n";
        for (const auto& b : report.densities)
            for (const auto& s : b.strategies)
                os << b.n << ',' << to_string(s.strategy) << ','
                   << mbps(s.per_scenario_min_rate_bps.front()) << ',' << mbps(s.mean_min_rate_bps)
                   << ',' << mbps(s.p90_bps) << '\n';
    });

    write("fig6_ecdf.csv", [&](std::ostream& os) {
        os << "n,strategy,min_rate_mbps,fraction\n";
        char frac[32];
        for (const auto& b : report.densities)
            for (const auto& s : b.strategies)
                for (const auto& p : s.ecdf) {
                    std::snprintf(frac, sizeof frac, "%.6f", p.fraction);
                    os << b.n << ',' << to_string(s.strategy) << ',' << mbps(p.value) << ',' << frac
                       << '\n';
                }
    });

    write("fig7_density.csv", [&](std::ostream& os) {
        os << "n,strategy,mean_min_rate_mbps\n";
        for (const auto& b : report.densities)
            for (const auto& s : b.strategies)
                os << b.n << ',' << to_string(s.strategy) << ',' << mbps(s.mean_min_rate_bps) << '\n';
    });
}

}  // namespace mlo
