#pragma once

// Link activation sets, per-link interference and the interference-aware Shannon rate.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mlo/errors.hpp"
#include "mlo/propagation.hpp"
#include "mlo/scenario.hpp"

namespace mlo {

/// Subset of the k links of a BSS. Bit j set means link L_{j+1} is active.
class LinkSet {
public:
    using mask_type = std::uint16_t;

    constexpr LinkSet() = default;
    constexpr explicit LinkSet(mask_type mask) : mask_(mask) {}

    static constexpr LinkSet full(int k) {
        return LinkSet(static_cast<mask_type>((1u << k) - 1u));
    }

    constexpr mask_type mask() const { return mask_; }
    constexpr bool empty() const { return mask_ == 0; }
    constexpr bool contains(int link) const { return (mask_ >> link) & 1u; }
    constexpr int count() const { return std::popcount(mask_); }
    constexpr bool fits(int k) const { return (static_cast<unsigned>(mask_) >> k) == 0; }

    constexpr LinkSet with(int link) const {
        return LinkSet(static_cast<mask_type>(mask_ | (1u << link)));
    }

    /// Bit string with L1 as the rightmost character, e.g. "0011" for {L1, L2} when k = 4.
    std::string to_string(int k) const {
        std::string s(static_cast<std::size_t>(k), '0');
        for (int j = 0; j < k; ++j)
            if (contains(j)) s[static_cast<std::size_t>(k - 1 - j)] = '1';
        return s;
    }

    friend constexpr bool operator==(LinkSet, LinkSet) = default;

private:
    mask_type mask_ = 0;
};

/// Joint action of all APs at one iteration, indexed by AP.
using ActivationProfile = std::vector<LinkSet>;

inline void check_profile(const Scenario& s, const ActivationProfile& profile) {
    if (profile.size() != s.size())
        throw ContractError("activation profile has " + std::to_string(profile.size()) +
                            " entries for " + std::to_string(s.size()) + " APs");
}

/// Aggregate power (mW) at STA i from every other AP transmitting on `link`.
inline double interference_mw(const Scenario& s, const ActivationProfile& profile, std::size_t i,
                              int link) {
    check_profile(s, profile);
    if (i >= s.size()) throw ConfigError("interference_mw: AP index out of range");
    if (link < 0 || link >= s.num_links) throw ConfigError("interference_mw: link index out of range");
    double total = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (j == i || !profile[j].contains(link)) continue;
        const double d = distance(s.ap_positions[j], s.sta_positions[i]);
        total += dbm_to_mw(received_power_dbm(s.physical.tx_power_dbm, d, s.physical));
    }
    return total;
}

/// Sum over AP i's active links of B * log2(1 + P / (I + N)), in bit/s.
inline double achieved_rate_bps(const Scenario& s, const ActivationProfile& profile, std::size_t i) {
    check_profile(s, profile);
    if (i >= s.size()) throw ConfigError("achieved_rate_bps: AP index out of range");
    const auto& phy = s.physical;
    const double signal =
        dbm_to_mw(received_power_dbm(phy.tx_power_dbm, s.ap_sta_distance_m, phy));
    const double noise = dbm_to_mw(phy.noise_floor_dbm);
    double rate = 0.0;
    for (int link = 0; link < s.num_links; ++link) {
        if (!profile[i].contains(link)) continue;
        rate += phy.bandwidth_hz_per_link *
                std::log2(1.0 + signal / (interference_mw(s, profile, i, link) + noise));
    }
    return rate;
}

/// Linear-power gains of a scenario, computed once so that evaluating a joint
/// action costs O(n^2 k) multiply-adds and no pathloss evaluations.
class LinkBudget {
public:
    explicit LinkBudget(const Scenario& s)
        : n_(s.size()),
          k_(s.num_links),
          bandwidth_hz_(s.physical.bandwidth_hz_per_link),
          noise_mw_(dbm_to_mw(s.physical.noise_floor_dbm)),
          signal_mw_(dbm_to_mw(
              received_power_dbm(s.physical.tx_power_dbm, s.ap_sta_distance_m, s.physical))),
          cross_mw_(n_ * n_, 0.0) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                if (i != j)
                    cross_mw_[i * n_ + j] = dbm_to_mw(received_power_dbm(
                        s.physical.tx_power_dbm, distance(s.ap_positions[j], s.sta_positions[i]),
                        s.physical));
    }

    std::size_t size() const { return n_; }
    double signal_mw() const { return signal_mw_; }
    double noise_mw() const { return noise_mw_; }
    /// Power received at STA `sta` from AP `ap` (0 on the diagonal).
    double cross_mw(std::size_t sta, std::size_t ap) const { return cross_mw_[sta * n_ + ap]; }

    double interference_mw(const ActivationProfile& profile, std::size_t i, int link) const {
        double total = 0.0;
        const double* row = &cross_mw_[i * n_];
        for (std::size_t j = 0; j < n_; ++j)
            if (j != i && profile[j].contains(link)) total += row[j];
        return total;
    }

    double rate_bps(const ActivationProfile& profile, std::size_t i) const {
        double rate = 0.0;
        for (int link = 0; link < k_; ++link) {
            if (!profile[i].contains(link)) continue;
            rate += bandwidth_hz_ *
                    std::log2(1.0 + signal_mw_ / (interference_mw(profile, i, link) + noise_mw_));
        }
        return rate;
    }

    std::vector<double> rates_bps(const ActivationProfile& profile) const {
        std::vector<double> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = rate_bps(profile, i);
        return out;
    }

private:
    std::size_t n_;
    int k_;
    double bandwidth_hz_;
    double noise_mw_;
    double signal_mw_;
    std::vector<double> cross_mw_;
};

}  // namespace mlo
