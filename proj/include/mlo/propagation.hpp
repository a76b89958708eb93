#pragma once

// Pathloss and power-unit arithmetic for the residential 5 GHz (TMB) channel.

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "mlo/errors.hpp"

namespace mlo {

/// Physical-layer constants shared by every link in a scenario.
/// Defaults are the 802.11ax residential TMB constants with 20 dBm and 80 MHz per link.
struct PhysicalConfig {
    double pathloss_intercept_db = 54.12;
    double attenuation_factor = 2.06067;
    double wall_attenuation_db_per_wall = 5.25;
    double walls_per_meter = 0.1467;
    double tx_power_dbm = 20.0;
    double bandwidth_hz_per_link = 80e6;
    double noise_floor_dbm = -95.0;
    double sensitivity_dbm = -82.0;

    void validate() const {
        if (!(bandwidth_hz_per_link > 0.0))
            throw ConfigError("bandwidth_hz_per_link must be positive");
        if (!(sensitivity_dbm > noise_floor_dbm))
            throw ConfigError("sensitivity_dbm must exceed noise_floor_dbm");
    }

    friend bool operator==(const PhysicalConfig&, const PhysicalConfig&) = default;
};

inline void to_json(nlohmann::json& j, const PhysicalConfig& p) {
    j = nlohmann::json{{"pathloss_intercept_db", p.pathloss_intercept_db},
                       {"attenuation_factor", p.attenuation_factor},
                       {"wall_attenuation_db_per_wall", p.wall_attenuation_db_per_wall},
                       {"walls_per_meter", p.walls_per_meter},
                       {"tx_power_dbm", p.tx_power_dbm},
                       {"bandwidth_hz_per_link", p.bandwidth_hz_per_link},
                       {"noise_floor_dbm", p.noise_floor_dbm},
                       {"sensitivity_dbm", p.sensitivity_dbm}};
}

/// Missing fields keep their defaults so config files may override a subset.
inline void from_json(const nlohmann::json& j, PhysicalConfig& p) {
    auto field = [&j](const char* name, double& out) {
        if (auto it = j.find(name); it != j.end()) it->get_to(out);
    };
    field("pathloss_intercept_db", p.pathloss_intercept_db);
    field("attenuation_factor", p.attenuation_factor);
    field("wall_attenuation_db_per_wall", p.wall_attenuation_db_per_wall);
    field("walls_per_meter", p.walls_per_meter);
    field("tx_power_dbm", p.tx_power_dbm);
    field("bandwidth_hz_per_link", p.bandwidth_hz_per_link);
    field("noise_floor_dbm", p.noise_floor_dbm);
    field("sensitivity_dbm", p.sensitivity_dbm);
}

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

/// PL(d) = L0 + 10 * gamma * log10(d) + c * W * d, in dB. Throws DomainError for d <= 0.
inline double pathloss_db(double distance_m, const PhysicalConfig& phy) {
    if (!(distance_m > 0.0))
        throw DomainError("pathloss_db: distance must be positive, got " + std::to_string(distance_m));
    return phy.pathloss_intercept_db + 10.0 * phy.attenuation_factor * std::log10(distance_m) +
           phy.wall_attenuation_db_per_wall * phy.walls_per_meter * distance_m;
}

inline double received_power_dbm(double tx_dbm, double distance_m, const PhysicalConfig& phy) {
    return tx_dbm - pathloss_db(distance_m, phy);
}

}  // namespace mlo
