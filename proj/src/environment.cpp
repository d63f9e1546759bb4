#include "vipguard/environment.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "vipguard/errors.hpp"
#include "vipguard/format.hpp"

namespace vipguard {

namespace {

constexpr double kVipGain = 2.0;
constexpr double kBystanderGain = 1.0;
constexpr double kBystanderForceScale = 0.5;  // crowd moves slower than agents
constexpr double kWaypointRedrawProb = 0.05;
constexpr double kArriveDistance = 0.1;
constexpr double kRestitution = 0.5;
constexpr double kWallStiffness = 10.0;
constexpr int kMaxSpawnTries = 1000;

bool movable(const EntityState& e) { return e.kind != EntityKind::Landmark; }

const char* kind_name(EntityKind k) {
    switch (k) {
        case EntityKind::Vip: return "vip";
        case EntityKind::Bodyguard: return "bodyguard";
        case EntityKind::Bystander: return "bystander";
        case EntityKind::Landmark: return "landmark";
    }
    return "?";
}

}  // namespace

void apply_physics(WorldState& world, std::span<const Vec2> forces, const WorldConfig& cfg) {
    if (forces.size() != world.entities.size())
        throw ShapeMismatch("one force per entity required");

    // integrate (unit mass)
    for (std::size_t i = 0; i < world.entities.size(); ++i) {
        EntityState& e = world.entities[i];
        if (!movable(e)) continue;
        e.velocity = (1.0 - cfg.damping) * e.velocity + forces[i] * cfg.dt;
        e.velocity = e.velocity.clipped(cfg.max_speed);
        e.position += e.velocity * cfg.dt;
    }

    // pairwise soft elastic collision, fixed iteration order
    for (std::size_t i = 0; i < world.entities.size(); ++i) {
        for (std::size_t j = i + 1; j < world.entities.size(); ++j) {
            EntityState& a = world.entities[i];
            EntityState& b = world.entities[j];
            if (!movable(a) && !movable(b)) continue;
            Vec2 delta = a.position - b.position;
            double dist = delta.norm();
            double overlap = a.radius + b.radius - dist;
            if (overlap <= 0.0) continue;
            Vec2 n = dist > 0.0 ? delta * (1.0 / dist) : Vec2{1.0, 0.0};

            if (movable(a) && movable(b)) {
                a.position += n * (0.5 * overlap);
                b.position -= n * (0.5 * overlap);
                double rel = (a.velocity - b.velocity).dot(n);
                if (rel < 0.0) {
                    double impulse = -(1.0 + kRestitution) * 0.5 * rel;
                    a.velocity += n * impulse;
                    b.velocity -= n * impulse;
                }
            } else {
                EntityState& m = movable(a) ? a : b;
                Vec2 nm = movable(a) ? n : n * -1.0;  // points away from the fixed disc
                m.position += nm * overlap;
                double rel = m.velocity.dot(nm);
                if (rel < 0.0) m.velocity -= nm * ((1.0 + kRestitution) * rel);
            }
        }
    }

    // soft wall spring plus a hard clamp so no entity ever leaves
    // [-w - r, w + r] on either axis
    const double w = cfg.world_halfwidth;
    for (EntityState& e : world.entities) {
        if (!movable(e)) continue;
        double* pos[2] = {&e.position.x, &e.position.y};
        double* vel[2] = {&e.velocity.x, &e.velocity.y};
        for (int axis = 0; axis < 2; ++axis) {
            double inner = w - e.radius;
            double pen = std::abs(*pos[axis]) - inner;
            if (pen > 0.0) {
                double sign = *pos[axis] > 0.0 ? 1.0 : -1.0;
                *vel[axis] -= sign * kWallStiffness * pen * cfg.dt;
                if (std::abs(*pos[axis]) > w + e.radius) {
                    *pos[axis] = sign * (w + e.radius);
                    if (*vel[axis] * sign > 0.0) *vel[axis] = 0.0;
                }
            }
        }
        e.velocity = e.velocity.clipped(cfg.max_speed);
    }
}

Environment::Environment(const WorldConfig& cfg, RngStream rng)
    : cfg_(validate_config(cfg)), rng_(rng) {}

int Environment::entity_count(const WorldConfig& cfg) {
    return 1 + cfg.n_bodyguards + cfg.n_bystanders + cfg.n_landmarks;
}

int Environment::observation_length(const WorldConfig& cfg) {
    return 2 + 4 * (entity_count(cfg) - 1) + cfg.n_bodyguards * cfg.comm_vocab;
}

Vec2 Environment::sample_arena_point(double radius) {
    double inner = cfg_.world_halfwidth - radius;
    return {rng_.uniform(-inner, inner), rng_.uniform(-inner, inner)};
}

bool Environment::overlaps_any(Vec2 pos, double radius, std::size_t upto) const {
    for (std::size_t k = 0; k < upto; ++k) {
        const EntityState& e = world_.entities[k];
        if (distance(pos, e.position) <= radius + e.radius) return true;
    }
    return false;
}

Vec2 Environment::sample_near(Vec2 center, double max_dist, double radius) {
    double inner = cfg_.world_halfwidth - radius;
    for (int t = 0; t < kMaxSpawnTries; ++t) {
        double r = max_dist * std::sqrt(rng_.uniform());
        double theta = rng_.uniform(0.0, 2.0 * std::numbers::pi);
        Vec2 p = center + Vec2{r * std::cos(theta), r * std::sin(theta)};
        if (std::abs(p.x) <= inner && std::abs(p.y) <= inner) return p;
    }
    throw SpawnFailure("no in-arena point near the VIP");
}

void Environment::reset() {
    world_ = WorldState{};
    world_.entities.reserve(static_cast<std::size_t>(entity_count(cfg_)));

    auto place = [&](EntityKind kind, double radius, auto propose) {
        for (int t = 0; t < kMaxSpawnTries; ++t) {
            Vec2 p = propose();
            if (!overlaps_any(p, radius, world_.entities.size())) {
                world_.entities.push_back({kind, p, Vec2{}, radius});
                return;
            }
        }
        throw SpawnFailure(std::string("could not place ") + kind_name(kind));
    };

    place(EntityKind::Vip, cfg_.agent_radius,
          [&] { return sample_arena_point(cfg_.agent_radius); });
    const Vec2 vip_pos = world_.entities[0].position;
    for (int i = 0; i < cfg_.n_bodyguards; ++i)
        place(EntityKind::Bodyguard, cfg_.agent_radius,
              [&] { return sample_near(vip_pos, 3.0 * cfg_.safe_distance, cfg_.agent_radius); });
    for (int i = 0; i < cfg_.n_bystanders; ++i)
        place(EntityKind::Bystander, cfg_.agent_radius,
              [&] { return sample_arena_point(cfg_.agent_radius); });
    for (int i = 0; i < cfg_.n_landmarks; ++i)
        place(EntityKind::Landmark, cfg_.landmark_radius,
              [&] { return sample_arena_point(cfg_.landmark_radius); });

    if (cfg_.n_landmarks > 0) {
        vip_goal_ = static_cast<int>(rng_.uniform_int(static_cast<std::uint64_t>(cfg_.n_landmarks)));
    } else {
        vip_goal_ = -1;
        vip_waypoint_ = sample_arena_point(cfg_.agent_radius);
    }

    waypoints_.clear();
    for (int i = 0; i < cfg_.n_bystanders; ++i)
        waypoints_.push_back(sample_arena_point(cfg_.agent_radius));

    world_.utterances.assign(static_cast<std::size_t>(cfg_.n_bodyguards),
                             one_hot(cfg_.comm_vocab, 0));
    world_.step_index = 0;
}

bool Environment::step(std::span<const AgentAction> actions) {
    if (actions.size() != static_cast<std::size_t>(cfg_.n_bodyguards))
        throw ActionCountMismatch(actions.size(), static_cast<std::size_t>(cfg_.n_bodyguards));
    if (world_.step_index >= cfg_.episode_length)
        throw IndexOutOfRange("step past episode end");
    for (const AgentAction& a : actions) {
        if (!a.force.finite()) throw NonFiniteAction("force");
        if (a.utterance.size() != static_cast<std::size_t>(cfg_.comm_vocab))
            throw ShapeMismatch("utterance length");
        for (double u : a.utterance)
            if (!std::isfinite(u)) throw NonFiniteAction("utterance");
    }

    std::vector<Vec2> forces(world_.entities.size());

    // scripted VIP: proportional pursuit of the goal landmark (or a free
    // waypoint when the world has none), redrawn on arrival
    {
        Vec2 goal;
        if (vip_goal_ >= 0) {
            std::size_t lm = world_.entities.size() - static_cast<std::size_t>(cfg_.n_landmarks) +
                             static_cast<std::size_t>(vip_goal_);
            goal = world_.entities[lm].position;
            if (distance(goal, world_.entities[0].position) < kArriveDistance) {
                vip_goal_ = static_cast<int>(
                    rng_.uniform_int(static_cast<std::uint64_t>(cfg_.n_landmarks)));
                lm = world_.entities.size() - static_cast<std::size_t>(cfg_.n_landmarks) +
                     static_cast<std::size_t>(vip_goal_);
                goal = world_.entities[lm].position;
            }
        } else {
            if (distance(vip_waypoint_, world_.entities[0].position) < kArriveDistance)
                vip_waypoint_ = sample_arena_point(cfg_.agent_radius);
            goal = vip_waypoint_;
        }
        forces[0] = ((goal - world_.entities[0].position) * kVipGain).clipped(cfg_.max_force);
    }

    // bodyguards act through their policies
    for (int i = 0; i < cfg_.n_bodyguards; ++i)
        forces[1 + static_cast<std::size_t>(i)] = actions[static_cast<std::size_t>(i)].force.clipped(cfg_.max_force);

    // scripted bystanders: random-waypoint walk
    std::size_t first_bystander = 1 + static_cast<std::size_t>(cfg_.n_bodyguards);
    for (int i = 0; i < cfg_.n_bystanders; ++i) {
        std::size_t e = first_bystander + static_cast<std::size_t>(i);
        Vec2 pos = world_.entities[e].position;
        bool redraw = rng_.uniform() < kWaypointRedrawProb;
        if (redraw || distance(waypoints_[static_cast<std::size_t>(i)], pos) < kArriveDistance)
            waypoints_[static_cast<std::size_t>(i)] = sample_arena_point(cfg_.agent_radius);
        forces[e] = ((waypoints_[static_cast<std::size_t>(i)] - pos) * kBystanderGain)
                        .clipped(kBystanderForceScale * cfg_.max_force);
    }

    apply_physics(world_, forces, cfg_);

    for (int i = 0; i < cfg_.n_bodyguards; ++i)
        world_.utterances[static_cast<std::size_t>(i)] = actions[static_cast<std::size_t>(i)].utterance;

    world_.step_index += 1;
    return world_.step_index == cfg_.episode_length;
}

Observation Environment::observe(int agent_index) const {
    if (agent_index < 0 || agent_index >= cfg_.n_bodyguards)
        throw IndexOutOfRange("agent index " + std::to_string(agent_index));
    const std::size_t self = 1 + static_cast<std::size_t>(agent_index);
    const EntityState& me = world_.entities[self];

    Observation obs;
    obs.reserve(static_cast<std::size_t>(observation_length(cfg_)));
    obs.push_back(me.velocity.x);
    obs.push_back(me.velocity.y);
    for (std::size_t j = 0; j < world_.entities.size(); ++j) {
        if (j == self) continue;
        const EntityState& e = world_.entities[j];
        obs.push_back(e.position.x - me.position.x);
        obs.push_back(e.position.y - me.position.y);
        obs.push_back(e.velocity.x);
        obs.push_back(e.velocity.y);
    }
    for (const auto& utter : world_.utterances)
        obs.insert(obs.end(), utter.begin(), utter.end());
    return obs;
}

void write_trajectory_csv(std::ostream& out, std::span<const WorldState> trajectory,
                          const WorldConfig& cfg, const ThreatParams& params) {
    out << "step_index";
    int n_entities = Environment::entity_count(cfg);
    for (int e = 0; e < n_entities; ++e)
        out << ",e" << e << "_kind,e" << e << "_x,e" << e << "_y,e" << e << "_vx,e" << e << "_vy";
    for (int i = 0; i < cfg.n_bodyguards; ++i) out << ",utterance_" << i;
    out << ",instantaneous_threat\n";

    for (const WorldState& w : trajectory) {
        out << w.step_index;
        for (const EntityState& e : w.entities)
            out << ',' << kind_name(e.kind) << ',' << g9(e.position.x) << ',' << g9(e.position.y)
                << ',' << g9(e.velocity.x) << ',' << g9(e.velocity.y);
        for (const auto& utter : w.utterances) {
            int best = 0;
            for (std::size_t k = 1; k < utter.size(); ++k)
                if (utter[k] > utter[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
            out << ',' << best;
        }
        out << ',' << g9(instantaneous_threat(w, params).instantaneous) << '\n';
    }
}

}  // namespace vipguard
