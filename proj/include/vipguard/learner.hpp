#pragma once

#include <Eigen/Dense>
#include <deque>
#include <span>
#include <vector>

#include "vipguard/config.hpp"
#include "vipguard/mlp.hpp"
#include "vipguard/rng.hpp"
#include "vipguard/world.hpp"

namespace vipguard {

// One environment step as stored in the replay buffer. All per-agent lists
// have length n_bodyguards; action vectors are [force (2), utterance one-hot].
struct Transition {
    std::vector<Eigen::VectorXd> observations;
    std::vector<Eigen::VectorXd> actions;
    std::vector<double> rewards;
    std::vector<Eigen::VectorXd> next_observations;
    bool done = false;
};

// Bounded FIFO; eviction is strictly oldest-first.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    // Uniform with replacement; deterministic given the stream state.
    std::vector<const Transition*> sample(int batch_size, RngStream& rng) const;

    std::size_t size() const { return items_.size(); }
    std::uint64_t inserted() const { return inserted_; }
    const Transition& at(std::size_t i) const { return items_[i]; }

private:
    std::size_t capacity_;
    std::deque<Transition> items_;
    std::uint64_t inserted_ = 0;
};

// Actor-critic pair with slowly tracking target copies, one per agent.
struct AgentLearner {
    Mlp actor;
    Mlp critic;
    Mlp target_actor;
    Mlp target_critic;
    Adam actor_opt;
    Adam critic_opt;
    int obs_dim = 0;
    int comm_vocab = 0;
    double max_force = 1.0;

    int action_dim() const { return 2 + comm_vocab; }

    // critic_action_dim is the agent's own action width for DDPG and the
    // concatenated width of all agents' actions for MADDPG.
    static AgentLearner make(int obs_dim, int critic_action_dim, const WorldConfig& cfg,
                             RngStream& rng);
};

Eigen::VectorXd flat_action(const AgentAction& a);

// Greedy actor output plus exploration: Gaussian noise (sigma) on the force,
// clipped back to max_force, and with probability epsilon a uniformly random
// utterance symbol. sigma = epsilon = 0 gives the deterministic policy.
AgentAction select_action(const AgentLearner& learner, const Observation& obs, double sigma,
                          double epsilon, RngStream& rng);

struct UpdateStats {
    double critic_loss = 0.0;
    double actor_objective = 0.0;
};

// Decentralized update: the critic sees only this agent's observation and
// action. Soft-updates both targets afterwards.
UpdateStats ddpg_update(AgentLearner& learner, std::span<const Transition* const> batch,
                        int agent_index, double gamma, double tau);

// Centralized-critic update: each agent's critic sees its own observation and
// the actions of every agent; the actor differentiates only through its own
// action slot, others held at their buffered values. learners[i] may alias
// a single shared learner.
std::vector<UpdateStats> maddpg_update(std::span<AgentLearner* const> learners,
                                       std::span<const Transition* const> batch, double gamma,
                                       double tau);

}  // namespace vipguard
