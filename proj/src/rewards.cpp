#include "vipguard/rewards.hpp"

#include "vipguard/errors.hpp"

namespace vipguard {

namespace {

double bodyguard_vip_distance(const WorldState& world, int agent_index) {
    std::size_t idx = 1 + static_cast<std::size_t>(agent_index);
    if (agent_index < 0 || idx >= world.entities.size() ||
        world.entities[idx].kind != EntityKind::Bodyguard)
        throw IndexOutOfRange("bodyguard index " + std::to_string(agent_index));
    return distance(world.entities[idx].position, world.vip().position);
}

}  // namespace

double threat_only(const WorldState& world, const ThreatParams& params) {
    return -instantaneous_threat(world, params).instantaneous;
}

double distance_band(const WorldState& world, int agent_index, double min_dist,
                     double band_dist) {
    double d = bodyguard_vip_distance(world, agent_index);
    return (d >= min_dist && d <= band_dist) ? 0.0 : -1.0;
}

double binary_threat(const WorldState& world, int agent_index, const ThreatParams& params,
                     double min_dist, double band_dist, double zero_eps) {
    double threatened = instantaneous_threat(world, params).instantaneous > zero_eps ? -1.0 : 0.0;
    return threatened + distance_band(world, agent_index, min_dist, band_dist);
}

double composite(const WorldState& world, int agent_index, const ThreatParams& params,
                 double min_dist, double band_dist) {
    return threat_only(world, params) + distance_band(world, agent_index, min_dist, band_dist);
}

double comm_penalty(const WorldState& world, int agent_index, const AgentAction& action,
                    const ThreatParams& params, double min_dist, double band_dist,
                    double penalty) {
    double spoke = action.is_silent() ? 0.0 : 1.0;
    return composite(world, agent_index, params, min_dist, band_dist) - penalty * spoke;
}

RewardBreakdown reward_breakdown(const WorldState& world, int agent_index,
                                 const AgentAction& action, const WorldConfig& cfg) {
    const ThreatParams params = ThreatParams::from_config(cfg);
    RewardBreakdown b;
    switch (cfg.reward_kind) {
        case RewardKind::ThreatOnly:
            b.threat_term = threat_only(world, params);
            break;
        case RewardKind::BinaryThreat:
            b.threat_term =
                instantaneous_threat(world, params).instantaneous > kThreatZeroEps ? -1.0 : 0.0;
            b.distance_term = distance_band(world, agent_index, cfg.min_distance, cfg.band_distance);
            break;
        case RewardKind::CommPenalty:
            b.comm_term = action.is_silent() ? 0.0 : -cfg.comm_penalty;
            [[fallthrough]];
        case RewardKind::Composite:
            b.threat_term = threat_only(world, params);
            b.distance_term = distance_band(world, agent_index, cfg.min_distance, cfg.band_distance);
            break;
    }
    b.total = b.threat_term + b.distance_term + b.comm_term;
    return b;
}

}  // namespace vipguard
