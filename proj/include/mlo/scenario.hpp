#pragma once

// Simulation worlds: one AP and one associated STA per BSS, placed in a square area.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlo/errors.hpp"
#include "mlo/propagation.hpp"
#include "mlo/random.hpp"

namespace mlo {

inline constexpr int kMaxLinks = 16;

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline void to_json(nlohmann::json& j, const Point& p) { j = nlohmann::json::array({p.x, p.y}); }
inline void from_json(const nlohmann::json& j, Point& p) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("position must be an [x, y] array");
    p.x = j[0].get<double>();
    p.y = j[1].get<double>();
}

struct Scenario {
    double area_side_m = 100.0;
    std::vector<Point> ap_positions;
    std::vector<Point> sta_positions;  // STA i is associated with AP i
    double ap_sta_distance_m = 10.0;
    int num_links = 4;
    PhysicalConfig physical;

    std::size_t size() const { return ap_positions.size(); }

    void validate() const {
        physical.validate();
        if (ap_positions.empty()) throw ConfigError("scenario needs at least one AP");
        if (ap_positions.size() != sta_positions.size())
            throw ConfigError("every AP needs exactly one STA");
        if (num_links < 1 || num_links > kMaxLinks)
            throw ConfigError("num_links must be in [1, " + std::to_string(kMaxLinks) + "]");
        if (!(area_side_m > 0.0)) throw ConfigError("area_side_m must be positive");
        auto inside = [this](Point p) {
            return p.x >= 0.0 && p.x <= area_side_m && p.y >= 0.0 && p.y <= area_side_m;
        };
        for (std::size_t i = 0; i < size(); ++i) {
            if (!inside(ap_positions[i]) || !inside(sta_positions[i]))
                throw ConfigError("position of pair " + std::to_string(i) + " lies outside the area");
            const double d = distance(ap_positions[i], sta_positions[i]);
            if (std::abs(d - ap_sta_distance_m) > 1e-9 * ap_sta_distance_m)
                throw ConfigError("STA " + std::to_string(i) + " is not at ap_sta_distance_m from its AP");
        }
    }

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline void to_json(nlohmann::json& j, const Scenario& s) {
    j = nlohmann::json{{"area_side_m", s.area_side_m},
                       {"ap_sta_distance_m", s.ap_sta_distance_m},
                       {"num_links", s.num_links},
                       {"ap_positions", s.ap_positions},
                       {"sta_positions", s.sta_positions},
                       {"physical", s.physical}};
}

/// Parses and validates; a replayed world must satisfy the same invariants as a sampled one.
inline void from_json(const nlohmann::json& j, Scenario& s) {
    j.at("area_side_m").get_to(s.area_side_m);
    j.at("ap_sta_distance_m").get_to(s.ap_sta_distance_m);
    j.at("num_links").get_to(s.num_links);
    j.at("ap_positions").get_to(s.ap_positions);
    j.at("sta_positions").get_to(s.sta_positions);
    s.physical = PhysicalConfig{};
    if (auto it = j.find("physical"); it != j.end()) it->get_to(s.physical);
    s.validate();
}

/// Order-sensitive hash over the bit patterns of every field.
inline std::uint64_t fingerprint(const Scenario& s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto mix = [&h](double v) { h = splitmix64(h ^ std::bit_cast<std::uint64_t>(v)); };
    mix(s.area_side_m);
    mix(s.ap_sta_distance_m);
    mix(static_cast<double>(s.num_links));
    for (std::size_t i = 0; i < s.size(); ++i) {
        mix(s.ap_positions[i].x);
        mix(s.ap_positions[i].y);
        mix(s.sta_positions[i].x);
        mix(s.sta_positions[i].y);
    }
    const auto& p = s.physical;
    for (double v : {p.pathloss_intercept_db, p.attenuation_factor, p.wall_attenuation_db_per_wall,
                     p.walls_per_meter, p.tx_power_dbm, p.bandwidth_hz_per_link, p.noise_floor_dbm,
                     p.sensitivity_dbm})
        mix(v);
    return h;
}

inline constexpr int kMaxStaAngleDraws = 1000;

/// Draws n APs uniformly over the square, then places each STA at exactly
/// distance d from its AP at a uniform angle, redrawing angles that land outside.
inline Scenario sample_scenario(Rng& rng, int n, int k, double area_side_m, double d,
                                const PhysicalConfig& physical = {}) {
    if (n < 1) throw ConfigError("sample_scenario: n must be >= 1");
    if (k < 1 || k > kMaxLinks) throw ConfigError("sample_scenario: k must be in [1, 16]");
    if (!(area_side_m > 0.0)) throw ConfigError("sample_scenario: area side must be positive");
    if (!(d > 0.0) || !(d < area_side_m))
        throw ConfigError("sample_scenario: AP-STA distance must be in (0, area side)");
    physical.validate();

    Scenario s;
    s.area_side_m = area_side_m;
    s.ap_sta_distance_m = d;
    s.num_links = k;
    s.physical = physical;
    s.ap_positions.reserve(static_cast<std::size_t>(n));
    s.sta_positions.reserve(static_cast<std::size_t>(n));

    for (int i = 0; i < n; ++i) {
        const double x = uniform_real(rng, 0.0, area_side_m);
        const double y = uniform_real(rng, 0.0, area_side_m);
        s.ap_positions.push_back({x, y});
    }
    for (int i = 0; i < n; ++i) {
        const Point ap = s.ap_positions[static_cast<std::size_t>(i)];
        bool placed = false;
        for (int draw = 0; draw < kMaxStaAngleDraws && !placed; ++draw) {
            const double theta = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
            const Point sta{ap.x + d * std::cos(theta), ap.y + d * std::sin(theta)};
            if (sta.x >= 0.0 && sta.x <= area_side_m && sta.y >= 0.0 && sta.y <= area_side_m) {
                s.sta_positions.push_back(sta);
                placed = true;
            }
        }
        if (!placed)
            throw GeometryError("no in-bounds STA position for AP " + std::to_string(i) + " after " +
                                std::to_string(kMaxStaAngleDraws) + " angle draws");
    }
    return s;
}

/// APs whose full-power signal reaches AP i at or above the sensitivity threshold.
/// Uses AP-to-AP distance; co-located APs are always neighbors.
inline std::vector<std::size_t> neighbors_of(const Scenario& s, std::size_t i) {
    if (i >= s.size()) throw ConfigError("neighbors_of: AP index out of range");
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (j == i) continue;
        const double dist = distance(s.ap_positions[j], s.ap_positions[i]);
        if (dist <= 0.0 ||
            received_power_dbm(s.physical.tx_power_dbm, dist, s.physical) >= s.physical.sensitivity_dbm)
            out.push_back(j);
    }
    return out;
}

inline std::vector<std::vector<std::size_t>> neighbor_sets(const Scenario& s) {
    std::vector<std::vector<std::size_t>> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = neighbors_of(s, i);
    return out;
}

}  // namespace mlo
