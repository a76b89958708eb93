#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <sstream>

#include "mlo/engine.hpp"
#include "test_support.hpp"

using namespace mlo;

namespace {

RunResult hand_trace(const std::vector<std::vector<double>>& rates) {
    RunResult r;
    for (std::size_t t = 0; t < rates.size(); ++t) {
        IterationRecord rec;
        rec.t = t + 1;
        rec.actions.assign(rates[t].size(), LinkSet(1));
        rec.rates_bps = rates[t];
        rec.local_rewards = rates[t];
        r.trace.push_back(rec);
    }
    return r;
}

Scenario clique(int n) {
    // All APs within a few meters of each other.
    std::vector<Point> aps;
    std::vector<double> angles;
    for (int i = 0; i < n; ++i) {
        aps.push_back({48.0 + i, 50.0});
        angles.push_back(2.0 * std::numbers::pi * i / n);
    }
    return test::make_world(aps, angles);
}

}  // namespace

TEST(RunScenario, TraceShape) {
    Rng rng(1);
    const Scenario s = sample_scenario(rng, 5, 4, 100.0, 10.0);
    for (Strategy strategy : kAllStrategies) {
        const auto r = run_scenario(s, strategy, 50, 9);
        ASSERT_EQ(r.trace.size(), 50u);
        EXPECT_EQ(r.neighbor_sets, neighbor_sets(s));
        for (std::size_t t = 0; t < r.trace.size(); ++t) {
            const auto& rec = r.trace[t];
            EXPECT_EQ(rec.t, t + 1);
            ASSERT_EQ(rec.actions.size(), 5u);
            ASSERT_EQ(rec.rates_bps.size(), 5u);
            EXPECT_EQ(rec.local_rewards, rec.rates_bps);
            EXPECT_EQ(rec.global_rewards.has_value(), strategy == Strategy::FederatedRL);
            for (std::size_t i = 0; i < 5; ++i) {
                EXPECT_FALSE(rec.actions[i].empty());
                EXPECT_GE(rec.rates_bps[i], 0.0);
                EXPECT_DOUBLE_EQ(rec.rates_bps[i], achieved_rate_bps(s, rec.actions, i));
            }
        }
    }
}

TEST(RunScenario, RejectsBadArguments) {
    const Scenario s = test::overlapping_pair();
    EXPECT_THROW(run_scenario(s, Strategy::LocalRL, 0, 1), ConfigError);
    EngineOptions opt;
    opt.share_period = 0;
    EXPECT_THROW(run_scenario(s, Strategy::FederatedRL, 10, 1, opt), ConfigError);
}

TEST(RunScenario, IsolatedLearnerConvergesToFullMask) {
    const Scenario s = test::make_world({{50.0, 50.0}}, {0.0});
    const auto r = run_scenario(s, Strategy::LocalRL, 2000, 3);
    int full = 0;
    for (std::size_t t = 1800; t < 2000; ++t) full += r.trace[t].actions[0] == LinkSet::full(4);
    EXPECT_GE(full, 190);
}

TEST(RunScenario, FixedIsStatic) {
    Rng rng(4);
    const Scenario s = sample_scenario(rng, 8, 4, 100.0, 10.0);
    const auto r = run_scenario(s, Strategy::Fixed, 100, 1);
    for (const auto& rec : r.trace) {
        for (auto a : rec.actions) EXPECT_EQ(a, LinkSet::full(4));
        EXPECT_EQ(rec.rates_bps, r.trace.front().rates_bps);
    }
}

TEST(RunScenario, Deterministic) {
    Rng rng(5);
    const Scenario s = sample_scenario(rng, 8, 4, 100.0, 10.0);
    for (Strategy strategy : kAllStrategies) {
        const auto a = run_scenario(s, strategy, 300, 77);
        const auto b = run_scenario(s, strategy, 300, 77);
        EXPECT_EQ(a, b);
        EXPECT_EQ(nlohmann::json(a).dump(), nlohmann::json(b).dump());
    }
    EXPECT_NE(run_scenario(s, Strategy::Random, 50, 1).trace, run_scenario(s, Strategy::Random, 50, 2).trace);
}

TEST(RunScenario, AgentStreamsIndependentOfOtherAgents) {
    // Random actions depend only on the agent's own stream, so adding an AP
    // leaves the first two agents' action sequences unchanged.
    const Scenario two = test::make_world({{20.0, 20.0}, {60.0, 60.0}}, {0.0, 0.0});
    const Scenario three = test::make_world({{20.0, 20.0}, {60.0, 60.0}, {40.0, 80.0}}, {0.0, 0.0, 0.0});
    const auto a = run_scenario(two, Strategy::Random, 200, 42);
    const auto b = run_scenario(three, Strategy::Random, 200, 42);
    for (std::size_t t = 0; t < 200; ++t) {
        EXPECT_EQ(a.trace[t].actions[0], b.trace[t].actions[0]);
        EXPECT_EQ(a.trace[t].actions[1], b.trace[t].actions[1]);
    }
}

TEST(RunScenario, FederatedGlobalNeverExceedsLocal) {
    Rng rng(6);
    for (int c = 0; c < 1000; ++c) {
        const int n = 2 + static_cast<int>(uniform_index(rng, 10));
        const Scenario s = sample_scenario(rng, n, 4, 100.0, 10.0);
        const auto r = run_scenario(s, Strategy::FederatedRL, 20, rng());
        for (const auto& rec : r.trace)
            for (std::size_t i = 0; i < s.size(); ++i)
                ASSERT_LE((*rec.global_rewards)[i], rec.local_rewards[i]);
    }
}

TEST(RunScenario, GlobalRewardIsMinOverNeighborhood) {
    Rng rng(61);
    const Scenario s = sample_scenario(rng, 10, 4, 100.0, 10.0);
    const auto r = run_scenario(s, Strategy::FederatedRL, 50, 8);
    for (const auto& rec : r.trace)
        for (std::size_t i = 0; i < s.size(); ++i) {
            double m = rec.local_rewards[i];
            for (auto j : r.neighbor_sets[i]) m = std::min(m, rec.local_rewards[j]);
            ASSERT_EQ((*rec.global_rewards)[i], m);
        }
}

TEST(RunScenario, CliqueSharesOneGlobalReward) {
    const Scenario s = clique(8);
    for (std::size_t i = 0; i < 8; ++i) ASSERT_EQ(neighbors_of(s, i).size(), 7u);
    const auto r = run_scenario(s, Strategy::FederatedRL, 100, 5);
    for (const auto& rec : r.trace) {
        const auto& g = *rec.global_rewards;
        EXPECT_TRUE(std::all_of(g.begin(), g.end(), [&](double v) { return v == g.front(); }));
        EXPECT_EQ(g.front(), *std::min_element(rec.local_rewards.begin(), rec.local_rewards.end()));
    }
}

TEST(RunScenario, ExcludingSelfUsesNeighborsOnly) {
    EngineOptions opt;
    opt.reward.include_self = false;
    const Scenario s = test::overlapping_pair();
    const auto r = run_scenario(s, Strategy::FederatedRL, 50, 5, opt);
    for (const auto& rec : r.trace) {
        EXPECT_EQ((*rec.global_rewards)[0], rec.local_rewards[1]);
        EXPECT_EQ((*rec.global_rewards)[1], rec.local_rewards[0]);
    }
    const Scenario alone = test::make_world({{50.0, 50.0}}, {0.0});
    const auto solo = run_scenario(alone, Strategy::FederatedRL, 10, 5, opt);
    for (const auto& rec : solo.trace) EXPECT_EQ((*rec.global_rewards)[0], rec.local_rewards[0]);
}

TEST(RunScenario, SharePeriodReusesLastBeacon) {
    EngineOptions opt;
    opt.share_period = 3;
    const Scenario s = test::overlapping_pair();
    const auto r = run_scenario(s, Strategy::FederatedRL, 30, 11, opt);
    for (std::size_t t = 0; t < r.trace.size(); ++t) {
        const std::size_t last_share = t - t % 3;  // 0-based index of iteration 1 + 3m
        for (std::size_t i = 0; i < 2; ++i) {
            const double expected =
                std::min(r.trace[t].local_rewards[i], r.trace[last_share].local_rewards[1 - i]);
            ASSERT_EQ((*r.trace[t].global_rewards)[i], expected) << "t=" << t + 1;
        }
    }
}

TEST(RunScenario, AveragedSharingSharesRunningMeans) {
    EngineOptions opt;
    opt.reward.share_averaged = true;
    const Scenario s = test::overlapping_pair();
    const auto r = run_scenario(s, Strategy::FederatedRL, 40, 13, opt);
    // Recompute every AP's running mean per action from the trace.
    std::vector<std::vector<double>> sum(2, std::vector<double>(3, 0.0)), cnt(2, std::vector<double>(3, 0.0));
    for (const auto& rec : r.trace) {
        double shared[2];
        for (std::size_t i = 0; i < 2; ++i) {
            const auto a = rec.actions[i].mask() - 1u;
            sum[i][a] += rec.local_rewards[i];
            cnt[i][a] += 1.0;
            shared[i] = sum[i][a] / cnt[i][a];
        }
        for (std::size_t i = 0; i < 2; ++i)
            ASSERT_NEAR((*rec.global_rewards)[i], std::min(shared[0], shared[1]), 1e-6);
    }
}

TEST(RunScenario, TwoOverlappingFederatedApsSplitTheLinks) {
    const Scenario s = test::overlapping_pair(2);
    const LinkSet l1(0b01), l2(0b10);
    int good = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto r = run_scenario(s, Strategy::FederatedRL, 2000, seed);
        for (std::size_t t = 1800; t < 2000; ++t) {
            const auto& a = r.trace[t].actions;
            good += (a[0] == l1 && a[1] == l2) || (a[0] == l2 && a[1] == l1);
            ++total;
        }
    }
    EXPECT_GE(good, 0.8 * total);
}

TEST(MinRateTimeseries, HandBuiltTrace) {
    const auto r = hand_trace({{1, 5}, {3, 5}, {2, 5}});
    EXPECT_EQ(min_rate_ap(r), 0u);
    EXPECT_EQ(min_rate_timeseries(r), (std::vector<double>{1, 2, 2}));
    EXPECT_EQ(time_averaged_rates(r), (std::vector<double>{2, 5}));
}

TEST(MinRateTimeseries, SingleApIsCumulativeMean) {
    const auto r = hand_trace({{4}, {2}, {6}, {0}});
    EXPECT_EQ(min_rate_timeseries(r), (std::vector<double>{4, 3, 4, 3}));
}

TEST(MinRateTimeseries, FixedIsConstant) {
    Rng rng(8);
    const auto r = run_scenario(sample_scenario(rng, 6, 4, 100.0, 10.0), Strategy::Fixed, 20, 1);
    const auto series = min_rate_timeseries(r);
    for (double v : series) EXPECT_NEAR(v, series.front(), 1e-9 * series.front());
}

TEST(MinRateTimeseries, EmptyTraceThrows) {
    EXPECT_THROW(min_rate_timeseries(RunResult{}), EmptyInput);
}

TEST(RunResultJson, RoundTrip) {
    Rng rng(9);
    const Scenario s = sample_scenario(rng, 4, 3, 100.0, 10.0);
    for (Strategy strategy : {Strategy::LocalRL, Strategy::FederatedRL}) {
        const auto r = run_scenario(s, strategy, 25, 3);
        const auto text = nlohmann::json(r).dump();
        const auto back = nlohmann::json::parse(text).get<RunResult>();
        EXPECT_EQ(back, r);
        EXPECT_EQ(nlohmann::json(back).dump(), text);
    }
}

TEST(TraceCsv, OneRowPerApAndIteration) {
    const auto r = run_scenario(test::overlapping_pair(), Strategy::LocalRL, 5, 3);
    std::ostringstream os;
    write_trace_csv(os, r);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "t,ap,action_mask,rate_bps,local_reward,global_reward");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        EXPECT_EQ(line.back(), ',');  // no global reward outside FRL
    }
    EXPECT_EQ(rows, 10);

    std::ostringstream fed;
    write_trace_csv(fed, run_scenario(test::overlapping_pair(), Strategy::FederatedRL, 1, 3));
    const auto text = fed.str();
    ASSERT_GE(text.size(), 2u);
    EXPECT_NE(text[text.size() - 2], ',');
}
