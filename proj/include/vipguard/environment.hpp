#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "vipguard/config.hpp"
#include "vipguard/rng.hpp"
#include "vipguard/threat.hpp"
#include "vipguard/world.hpp"

namespace vipguard {

// One step of physics over assembled per-entity forces (entity order):
// integrate with damping and speed clipping, resolve disc overlaps with a
// soft elastic impulse, then push entities back inside the arena. Landmarks
// never move. Exposed separately from Environment::step so the update rule
// is testable on hand-built states.
void apply_physics(WorldState& world, std::span<const Vec2> forces, const WorldConfig& cfg);

// The 2D discrete-time, continuous-space particle world. Owns the scripted
// VIP and bystander behaviors; learned agents act only through step().
// Single-owner mutable state; run many instances on distinct seeds for
// parallelism.
class Environment {
public:
    Environment(const WorldConfig& cfg, RngStream rng);

    // Spawns a fresh episode: VIP uniform over the arena, bodyguards within
    // 3 * safe_distance of the VIP, bystanders uniform, no two entities
    // overlapping (rejection sampled, <= 1000 tries each). All agents start
    // silent. Throws SpawnFailure if the arena is too crowded.
    void reset();

    // Advances one step given one action per bodyguard; returns done.
    // The VIP steers toward its goal landmark, bystanders follow a
    // random-waypoint walk, utterances become visible next step.
    bool step(std::span<const AgentAction> actions);

    // Flat observation for bodyguard agent_index:
    //   [ own velocity (2),
    //     for every other entity in fixed order: relative position (2),
    //                                            velocity (2),
    //     previous-step utterance of every bodyguard (comm_vocab each) ]
    // Positions are relative to the observer, so observations are invariant
    // under global translation.
    Observation observe(int agent_index) const;

    static int observation_length(const WorldConfig& cfg);
    static int entity_count(const WorldConfig& cfg);

    const WorldState& world() const { return world_; }
    const WorldConfig& config() const { return cfg_; }

private:
    Vec2 sample_arena_point(double radius);
    Vec2 sample_near(Vec2 center, double max_dist, double radius);
    bool overlaps_any(Vec2 pos, double radius, std::size_t upto) const;

    WorldConfig cfg_;
    RngStream rng_;
    WorldState world_;
    std::vector<Vec2> waypoints_;  // one per bystander
    int vip_goal_ = -1;            // landmark index, or -1 for free waypoint
    Vec2 vip_waypoint_;            // used when there are no landmarks
};

// One row per step: step_index, per-entity (kind, x, y, vx, vy), per-agent
// utterance index, instantaneous threat. Header row mandatory.
void write_trajectory_csv(std::ostream& out, std::span<const WorldState> trajectory,
                          const WorldConfig& cfg, const ThreatParams& params);

}  // namespace vipguard
