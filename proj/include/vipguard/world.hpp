#pragma once

#include <cstddef>
#include <vector>

#include "vipguard/config.hpp"
#include "vipguard/geometry.hpp"

namespace vipguard {

enum class EntityKind { Vip, Bodyguard, Bystander, Landmark };

struct EntityState {
    EntityKind kind = EntityKind::Bystander;
    Vec2 position;
    Vec2 velocity;  // world units per unit time; landmarks always zero
    double radius = 0.05;

    Disc disc() const { return {position, radius}; }
};

// Full Markov state. Entity order is fixed for an episode:
// [VIP, bodyguards..., bystanders..., landmarks...].
// utterances[i] is bodyguard i's symbol from the previous step, one-hot of
// length comm_vocab with index 0 reserved for silence.
struct WorldState {
    std::vector<EntityState> entities;
    std::vector<std::vector<double>> utterances;
    int step_index = 0;

    const EntityState& vip() const { return entities.front(); }

    std::size_t count(EntityKind kind) const {
        std::size_t n = 0;
        for (const auto& e : entities)
            if (e.kind == kind) ++n;
        return n;
    }
};

struct AgentAction {
    Vec2 force;                     // |force| <= max_force
    std::vector<double> utterance;  // one-hot, length comm_vocab

    int utterance_index() const {
        int best = 0;
        for (std::size_t i = 1; i < utterance.size(); ++i)
            if (utterance[i] > utterance[best]) best = static_cast<int>(i);
        return best;
    }
    bool is_silent() const { return utterance_index() == 0; }
};

inline std::vector<double> one_hot(int length, int index) {
    std::vector<double> v(static_cast<std::size_t>(length), 0.0);
    v[static_cast<std::size_t>(index)] = 1.0;
    return v;
}

inline AgentAction silent_action(int comm_vocab) {
    return {Vec2{}, one_hot(comm_vocab, 0)};
}

// Flat observation vector; layout documented at Environment::observe.
using Observation = std::vector<double>;

}  // namespace vipguard
