#pragma once

// Synchronous iteration loop: all agents act, rates are evaluated on the joint
// action, rewards are exchanged among neighbors, and every agent learns.

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlo/agents.hpp"
#include "mlo/errors.hpp"
#include "mlo/radio.hpp"
#include "mlo/random.hpp"
#include "mlo/scenario.hpp"

namespace mlo {

struct EngineOptions {
    GlobalRewardOptions reward;
    /// Neighbors' rewards are refreshed on iterations 1, 1 + P, 1 + 2P, ...; in
    /// between, the last received values are reused.
    int share_period = 1;

    friend bool operator==(const EngineOptions&, const EngineOptions&) = default;
};

struct IterationRecord {
    std::uint64_t t = 0;
    ActivationProfile actions;
    std::vector<double> rates_bps;
    std::vector<double> local_rewards;
    std::optional<std::vector<double>> global_rewards;  // FederatedRL only

    friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct RunResult {
    Scenario scenario;
    Strategy strategy = Strategy::Fixed;
    std::uint64_t seed = 0;
    std::vector<IterationRecord> trace;
    std::vector<std::vector<std::size_t>> neighbor_sets;

    friend bool operator==(const RunResult&, const RunResult&) = default;
};

// Stream identifiers below a run seed.
inline constexpr std::uint64_t kAgentStream = 1;

inline RunResult run_scenario(const Scenario& scenario, Strategy strategy, int iterations,
                              std::uint64_t seed, const EngineOptions& options = {}) {
    if (iterations < 1) throw ConfigError("run_scenario: need at least one iteration");
    if (options.share_period < 1) throw ConfigError("run_scenario: share_period must be >= 1");
    scenario.validate();

    const std::size_t n = scenario.size();
    const ActionSpace space = enumerate_actions(scenario.num_links);
    const LinkBudget budget(scenario);

    RunResult result;
    result.scenario = scenario;
    result.strategy = strategy;
    result.seed = seed;
    result.neighbor_sets = neighbor_sets(scenario);
    result.trace.reserve(static_cast<std::size_t>(iterations));

    std::vector<Agent> agents;
    agents.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        agents.emplace_back(i, strategy, space, child_stream(seed, {kAgentStream, i}));

    const bool federated = strategy == Strategy::FederatedRL;
    std::vector<double> beacon(n, 0.0);  // last value received from each AP
    std::vector<double> shared(n, 0.0);
    std::vector<double> inbox;

    for (std::uint64_t t = 1; t <= static_cast<std::uint64_t>(iterations); ++t) {
        IterationRecord rec;
        rec.t = t;
        rec.actions.resize(n);
        for (std::size_t i = 0; i < n; ++i) rec.actions[i] = agents[i].select_action(space, t);

        rec.rates_bps = budget.rates_bps(rec.actions);
        rec.local_rewards.resize(n);
        for (std::size_t i = 0; i < n; ++i) rec.local_rewards[i] = local_reward(rec.rates_bps[i]);

        if (federated) {
            for (std::size_t i = 0; i < n; ++i) {
                shared[i] = rec.local_rewards[i];
                if (options.reward.share_averaged) {
                    const auto a = space.index_of(rec.actions[i]);
                    shared[i] = agents[i].local_table().mean_with(a, rec.local_rewards[i]);
                }
            }
            if ((t - 1) % static_cast<std::uint64_t>(options.share_period) == 0) beacon = shared;

            auto& global = rec.global_rewards.emplace(n);
            for (std::size_t i = 0; i < n; ++i) {
                inbox.clear();
                for (auto j : result.neighbor_sets[i]) inbox.push_back(beacon[j]);
                global[i] = global_reward(shared[i], inbox, options.reward.include_self);
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            std::optional<double> g;
            if (rec.global_rewards) g = (*rec.global_rewards)[i];
            agents[i].update(rec.actions[i], rec.local_rewards[i], g);
        }
        result.trace.push_back(std::move(rec));
    }
    return result;
}

/// Mean rate of every AP over the whole trace.
inline std::vector<double> time_averaged_rates(const RunResult& result) {
    if (result.trace.empty()) throw EmptyInput("time_averaged_rates: empty trace");
    std::vector<double> sum(result.trace.front().rates_bps.size(), 0.0);
    for (const auto& rec : result.trace)
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += rec.rates_bps[i];
    for (double& s : sum) s /= static_cast<double>(result.trace.size());
    return sum;
}

/// AP with the lowest time-averaged rate (lowest index on ties).
inline std::size_t min_rate_ap(const RunResult& result) {
    const auto avg = time_averaged_rates(result);
    std::size_t best = 0;
    for (std::size_t i = 1; i < avg.size(); ++i)
        if (avg[i] < avg[best]) best = i;
    return best;
}

/// Running-average rate of the AP whose time-averaged rate is the lowest.
inline std::vector<double> min_rate_timeseries(const RunResult& result) {
    const std::size_t ap = min_rate_ap(result);
    std::vector<double> series;
    series.reserve(result.trace.size());
    double sum = 0.0;
    for (const auto& rec : result.trace) {
        sum += rec.rates_bps[ap];
        series.push_back(sum / static_cast<double>(series.size() + 1));
    }
    return series;
}

inline void to_json(nlohmann::json& j, const IterationRecord& r) {
    std::vector<unsigned> masks;
    masks.reserve(r.actions.size());
    for (auto a : r.actions) masks.push_back(a.mask());
    j = nlohmann::json{{"t", r.t},
                       {"actions", masks},
                       {"rates_bps", r.rates_bps},
                       {"local_rewards", r.local_rewards},
                       {"global_rewards", nullptr}};
    if (r.global_rewards) j["global_rewards"] = *r.global_rewards;
}

inline void from_json(const nlohmann::json& j, IterationRecord& r) {
    j.at("t").get_to(r.t);
    r.actions.clear();
    for (unsigned m : j.at("actions").get<std::vector<unsigned>>())
        r.actions.emplace_back(static_cast<LinkSet::mask_type>(m));
    j.at("rates_bps").get_to(r.rates_bps);
    j.at("local_rewards").get_to(r.local_rewards);
    r.global_rewards.reset();
    if (const auto& g = j.at("global_rewards"); !g.is_null()) r.global_rewards = g.get<std::vector<double>>();
}

inline void to_json(nlohmann::json& j, const RunResult& r) {
    j = nlohmann::json{{"strategy", r.strategy},         {"seed", r.seed},
                       {"iterations", r.trace.size()},   {"scenario", r.scenario},
                       {"neighbor_sets", r.neighbor_sets}, {"trace", r.trace}};
}

inline void from_json(const nlohmann::json& j, RunResult& r) {
    j.at("strategy").get_to(r.strategy);
    j.at("seed").get_to(r.seed);
    j.at("scenario").get_to(r.scenario);
    j.at("neighbor_sets").get_to(r.neighbor_sets);
    j.at("trace").get_to(r.trace);
}

/// One row per (iteration, AP): t,ap,action_mask,rate_bps,local_reward,global_reward.
/// global_reward is empty for non-federated runs.
inline void write_trace_csv(std::ostream& os, const RunResult& r) {
    os << "t,ap,action_mask,rate_bps,local_reward,global_reward\n";
    char buf[160];
    for (const auto& rec : r.trace) {
        for (std::size_t i = 0; i < rec.actions.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%llu,%zu,%u,%.3f,%.3f,",
                          static_cast<unsigned long long>(rec.t), i, unsigned{rec.actions[i].mask()},
                          rec.rates_bps[i], rec.local_rewards[i]);
            os << buf;
            if (rec.global_rewards) {
                std::snprintf(buf, sizeof buf, "%.3f", (*rec.global_rewards)[i]);
                os << buf;
            }
            os << '\n';
        }
    }
}

}  // namespace mlo
