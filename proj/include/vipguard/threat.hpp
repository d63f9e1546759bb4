#pragma once

#include <span>
#include <vector>

#include "vipguard/config.hpp"
#include "vipguard/geometry.hpp"
#include "vipguard/world.hpp"

namespace vipguard {

struct ThreatParams {
    double decay_a = 3.0;  // threat = exp(-decay_a * dist / decay_b)
    double decay_b = 1.0;
    double safe_distance = 1.0;

    static ThreatParams from_config(const WorldConfig& cfg) {
        return {cfg.threat_A, cfg.threat_B, cfg.safe_distance};
    }
};

struct ThreatReport {
    std::vector<double> per_bystander;  // each in [0, 1]
    double instantaneous = 0.0;         // 1 - prod(1 - per_bystander[i])
};

// 1 iff the open segment (a, b) intersects no obstacle disc, else 0.
// Blocked when the distance from a disc center to the closest point on the
// segment is strictly below its radius. Degenerate a == b returns 1.
double line_of_sight(Vec2 a, Vec2 b, std::span<const Disc> obstacles);

// exp(-a * dist / b) while in sight and strictly inside the safe distance;
// 0 otherwise.
double threat_level(double dist, double los, const ThreatParams& params);

// Per-bystander threat to the VIP and their combined instantaneous value.
// Landmarks and bodyguard bodies occlude line of sight; bystanders do not.
ThreatReport instantaneous_threat(const WorldState& world, const ThreatParams& params);

// Left-Riemann time integral of the instantaneous threat over a trajectory.
double total_threat(std::span<const WorldState> trajectory, const ThreatParams& params,
                    double dt);

}  // namespace vipguard
