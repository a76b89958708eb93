#pragma once

// Link-activation strategies: fixed, random, and epsilon-greedy bandits driven
// either by the AP's own rate (local model) or by the minimum rate shared among
// neighboring APs (federated/global model).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlo/errors.hpp"
#include "mlo/radio.hpp"
#include "mlo/random.hpp"
#include "mlo/scenario.hpp"

namespace mlo {

enum class Strategy { Fixed, Random, LocalRL, FederatedRL };

inline constexpr Strategy kAllStrategies[] = {Strategy::Fixed, Strategy::Random, Strategy::LocalRL,
                                              Strategy::FederatedRL};

inline std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Fixed: return "fixed";
        case Strategy::Random: return "random";
        case Strategy::LocalRL: return "rl";
        case Strategy::FederatedRL: return "frl";
    }
    return "?";
}

inline Strategy parse_strategy(std::string_view name) {
    for (Strategy s : kAllStrategies)
        if (to_string(s) == name) return s;
    throw ConfigError("unknown strategy '" + std::string(name) + "' (expected fixed|random|rl|frl)");
}

inline void to_json(nlohmann::json& j, Strategy s) { j = std::string(to_string(s)); }
inline void from_json(const nlohmann::json& j, Strategy& s) { s = parse_strategy(j.get<std::string>()); }

/// All nonempty link subsets in ascending mask order, so action index == mask - 1.
class ActionSpace {
public:
    int num_links() const { return k_; }
    std::size_t size() const { return actions_.size(); }
    LinkSet operator[](std::size_t index) const { return actions_[index]; }
    const std::vector<LinkSet>& actions() const { return actions_; }

    std::size_t index_of(LinkSet action) const {
        if (action.empty() || !action.fits(k_))
            throw ContractError("link set " + std::to_string(action.mask()) + " is not an action for k=" +
                                std::to_string(k_));
        return static_cast<std::size_t>(action.mask()) - 1;
    }

    friend ActionSpace enumerate_actions(int k);

private:
    int k_ = 0;
    std::vector<LinkSet> actions_;
};

inline ActionSpace enumerate_actions(int k) {
    if (k < 1 || k > kMaxLinks) throw ConfigError("enumerate_actions: k must be in [1, 16]");
    ActionSpace space;
    space.k_ = k;
    const std::uint32_t p = (1u << k) - 1u;
    space.actions_.reserve(p);
    for (std::uint32_t mask = 1; mask <= p; ++mask)
        space.actions_.emplace_back(static_cast<LinkSet::mask_type>(mask));
    return space;
}

/// Per-action selection counts and running mean rewards.
class RewardTable {
public:
    RewardTable() = default;
    explicit RewardTable(std::size_t num_actions) : count_(num_actions, 0), mean_(num_actions, 0.0) {}

    std::size_t size() const { return mean_.size(); }
    std::uint64_t count(std::size_t a) const { return count_.at(a); }
    double mean(std::size_t a) const { return mean_.at(a); }
    std::span<const double> means() const { return mean_; }
    std::uint64_t total_updates() const { return updates_; }

    void record(std::size_t a, double reward) {
        const auto c = ++count_.at(a);
        mean_[a] += (reward - mean_[a]) / static_cast<double>(c);
        ++updates_;
    }

    /// Mean of action a if `reward` were recorded next, without recording it.
    double mean_with(std::size_t a, double reward) const {
        return mean_.at(a) + (reward - mean_[a]) / static_cast<double>(count_[a] + 1);
    }

    friend bool operator==(const RewardTable&, const RewardTable&) = default;

private:
    std::vector<std::uint64_t> count_;
    std::vector<double> mean_;
    std::uint64_t updates_ = 0;
};

/// {"0101": {"count": c, "mean": m}, ...} keyed by the action's bit string (L1 rightmost).
inline nlohmann::json reward_table_json(const RewardTable& table, const ActionSpace& space) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t a = 0; a < table.size(); ++a)
        j[space[a].to_string(space.num_links())] = {{"count", table.count(a)}, {"mean", table.mean(a)}};
    return j;
}

/// Index of the largest value; ties are broken uniformly at random.
/// Consumes one draw from `rng` only when there is more than one maximum.
inline std::size_t argmax_random_tie(std::span<const double> values, Rng& rng) {
    std::size_t best = 0;
    std::size_t ties = 1;
    for (std::size_t a = 1; a < values.size(); ++a) {
        if (values[a] > values[best]) {
            best = a;
            ties = 1;
        } else if (values[a] == values[best]) {
            ++ties;
        }
    }
    if (ties == 1) return best;
    auto pick = uniform_index(rng, ties);
    for (std::size_t a = best; a < values.size(); ++a) {
        if (values[a] == values[best] && pick-- == 0) return a;
    }
    return best;
}

inline double exploration_rate(std::uint64_t t) { return 1.0 / std::sqrt(static_cast<double>(t)); }

/// Instant local reward: the achieved rate itself, in bit/s.
inline double local_reward(double rate_bps) { return rate_bps; }

/// How the global (federated) reward is aggregated.
struct GlobalRewardOptions {
    /// Take the minimum over the AP's own reward as well as its neighbors'.
    bool include_self = true;
    /// Share each AP's running-average reward of its played action instead of the instant reward.
    bool share_averaged = false;

    friend bool operator==(const GlobalRewardOptions&, const GlobalRewardOptions&) = default;
};

/// Minimum reward among the AP and its neighbors. Without neighbors the AP's
/// own reward is returned, whether or not it is part of the minimum otherwise.
inline double global_reward(double own, std::span<const double> neighbors, bool include_self = true) {
    if (neighbors.empty()) return own;
    double m = include_self ? own : neighbors.front();
    for (double r : neighbors) m = std::min(m, r);
    return m;
}

/// One learning (or non-learning) AP.
class Agent {
public:
    Agent(std::size_t ap_index, Strategy strategy, const ActionSpace& space, Rng rng)
        : ap_index_(ap_index),
          strategy_(strategy),
          num_links_(space.num_links()),
          local_(space.size()),
          global_(strategy == Strategy::FederatedRL ? RewardTable(space.size()) : RewardTable()),
          rng_(std::move(rng)) {}

    std::size_t ap_index() const { return ap_index_; }
    Strategy strategy() const { return strategy_; }
    LinkSet last_action() const { return last_action_; }
    /// Whether the last selection was an exploration step (always false for Fixed/Random).
    bool last_explored() const { return last_explored_; }
    const RewardTable& local_table() const { return local_; }
    /// Empty unless the strategy is FederatedRL.
    const RewardTable& global_table() const { return global_; }

    LinkSet select_action(const ActionSpace& space, std::uint64_t t) {
        if (t < 1) throw ContractError("select_action: iterations start at t = 1");
        if (space.num_links() != num_links_ || space.size() != local_.size())
            throw ContractError("select_action: action space does not match the agent");
        last_explored_ = false;
        switch (strategy_) {
            case Strategy::Fixed:
                last_action_ = LinkSet::full(num_links_);
                break;
            case Strategy::Random:
                last_action_ = space[uniform_index(rng_, space.size())];
                break;
            case Strategy::LocalRL:
            case Strategy::FederatedRL: {
                if (bernoulli(rng_, exploration_rate(t))) {
                    last_explored_ = true;
                    last_action_ = space[uniform_index(rng_, space.size())];
                } else {
                    const auto& table = strategy_ == Strategy::LocalRL ? local_ : global_;
                    last_action_ = space[argmax_random_tie(table.means(), rng_)];
                }
                break;
            }
        }
        return last_action_;
    }

    /// Credits the rewards of the last selected action. FederatedRL requires a global reward.
    void update(LinkSet action, double local_r, std::optional<double> global_r = std::nullopt) {
        if (last_action_.empty() || action != last_action_)
            throw ContractError("update: action " + action.to_string(num_links_) +
                                " is not the agent's last selected action");
        const auto a = static_cast<std::size_t>(action.mask()) - 1;
        local_.record(a, local_r);
        if (strategy_ == Strategy::FederatedRL) {
            if (!global_r) throw ContractError("update: federated agent needs a global reward");
            global_.record(a, *global_r);
        }
    }

private:
    std::size_t ap_index_;
    Strategy strategy_;
    int num_links_;
    RewardTable local_;
    RewardTable global_;
    LinkSet last_action_{};
    bool last_explored_ = false;
    Rng rng_;
};

}  // namespace mlo
