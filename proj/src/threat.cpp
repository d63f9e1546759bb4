#include "vipguard/threat.hpp"

#include <cmath>

#include "vipguard/errors.hpp"

namespace vipguard {

double line_of_sight(Vec2 a, Vec2 b, std::span<const Disc> obstacles) {
    if (a.x == b.x && a.y == b.y) return 1.0;
    for (const Disc& d : obstacles) {
        Vec2 closest = closest_point_on_segment(a, b, d.center);
        if (distance(closest, d.center) < d.radius) return 0.0;
    }
    return 1.0;
}

double threat_level(double dist, double los, const ThreatParams& params) {
    if (los == 0.0 || dist >= params.safe_distance) return 0.0;
    return std::exp(-params.decay_a * dist / params.decay_b);
}

ThreatReport instantaneous_threat(const WorldState& world, const ThreatParams& params) {
    const Vec2 vip = world.vip().position;

    std::vector<Disc> occluders;
    for (const auto& e : world.entities)
        if (e.kind == EntityKind::Landmark || e.kind == EntityKind::Bodyguard)
            occluders.push_back(e.disc());

    ThreatReport report;
    double survive = 1.0;  // prod(1 - TL_i)
    for (const auto& e : world.entities) {
        if (e.kind != EntityKind::Bystander) continue;
        double los = line_of_sight(vip, e.position, occluders);
        double tl = threat_level(distance(vip, e.position), los, params);
        report.per_bystander.push_back(tl);
        survive *= 1.0 - tl;
    }
    report.instantaneous = 1.0 - survive;
    return report;
}

double total_threat(std::span<const WorldState> trajectory, const ThreatParams& params,
                    double dt) {
    if (trajectory.empty()) throw EmptyTrajectory();
    double sum = 0.0;
    for (const WorldState& w : trajectory)
        sum += instantaneous_threat(w, params).instantaneous * dt;
    return sum;
}

}  // namespace vipguard
