#pragma once

#include "vipguard/config.hpp"
#include "vipguard/threat.hpp"
#include "vipguard/world.hpp"

namespace vipguard {

// A real-valued product is never exactly zero in floating point; "any threat"
// means instantaneous threat above this.
inline constexpr double kThreatZeroEps = 1e-9;

struct RewardBreakdown {
    double threat_term = 0.0;    // <= 0
    double distance_term = 0.0;  // -1 or 0
    double comm_term = 0.0;      // <= 0
    double total = 0.0;          // sum of the active terms
};

// -instantaneous threat; identical for every agent.
double threat_only(const WorldState& world, const ThreatParams& params);

// 0 iff the bodyguard's distance to the VIP lies in [min_dist, band_dist]
// (closed band), else -1. agent_index counts bodyguards.
double distance_band(const WorldState& world, int agent_index, double min_dist,
                     double band_dist);

// -1 when any threat is present plus the distance band term; in {-2, -1, 0}.
double binary_threat(const WorldState& world, int agent_index, const ThreatParams& params,
                     double min_dist, double band_dist, double zero_eps = kThreatZeroEps);

// threat_only + distance_band.
double composite(const WorldState& world, int agent_index, const ThreatParams& params,
                 double min_dist, double band_dist);

// composite minus a penalty each time the agent utters anything but silence.
double comm_penalty(const WorldState& world, int agent_index, const AgentAction& action,
                    const ThreatParams& params, double min_dist, double band_dist,
                    double penalty);

// The configured reward with its per-term diagnostics; inactive terms are 0.
RewardBreakdown reward_breakdown(const WorldState& world, int agent_index,
                                 const AgentAction& action, const WorldConfig& cfg);

}  // namespace vipguard
