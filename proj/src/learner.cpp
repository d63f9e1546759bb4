#include "vipguard/learner.hpp"

#include <cmath>

#include "vipguard/errors.hpp"

namespace vipguard {

namespace {

constexpr double kGradClipNorm = 0.5;

int argmax_col(const Eigen::Ref<const Eigen::MatrixXd>& m, Eigen::Index col) {
    Eigen::Index best = 0;
    m.col(col).maxCoeff(&best);
    return static_cast<int>(best);
}

// Raw actor head [tanh force; softmax probs] -> executed greedy action
// [max_force * force; one-hot argmax].
Eigen::MatrixXd greedy_action_from_head(const Eigen::MatrixXd& raw, int comm_vocab,
                                        double max_force) {
    Eigen::MatrixXd act = Eigen::MatrixXd::Zero(raw.rows(), raw.cols());
    act.topRows(2) = max_force * raw.topRows(2);
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
        int idx = argmax_col(raw.bottomRows(comm_vocab), c);
        act(2 + idx, c) = 1.0;
    }
    return act;
}

// Shared kernel for both algorithms. `slots` lists the transition action
// slots fed to the critic (all agents for MADDPG, just the own slot for
// DDPG); `slot_nets[k]` provides the target actor for slot k.
UpdateStats update_agent(AgentLearner& L, std::span<const Transition* const> batch,
                         int agent_index, std::span<const int> slots,
                         std::span<AgentLearner* const> slot_nets, double gamma, double tau) {
    if (batch.empty()) throw InsufficientData("empty batch");
    const int B = static_cast<int>(batch.size());
    const int obs_dim = L.obs_dim;
    const int act_dim = L.action_dim();
    const int n_slots = static_cast<int>(slots.size());
    const int critic_in_dim = obs_dim + n_slots * act_dim;
    if (L.critic.input_size() != critic_in_dim) throw ShapeMismatch("critic input width");

    int own_pos = -1;  // position of the own action slot in the critic input
    for (int k = 0; k < n_slots; ++k)
        if (slots[k] == agent_index) own_pos = k;
    if (own_pos < 0) throw ShapeMismatch("own action slot missing");

    Eigen::MatrixXd own_obs(obs_dim, B);
    Eigen::MatrixXd own_next_obs(obs_dim, B);
    Eigen::MatrixXd critic_in(critic_in_dim, B);
    Eigen::MatrixXd target_in(critic_in_dim, B);
    Eigen::VectorXd rewards(B);
    Eigen::VectorXd not_done(B);

    for (int b = 0; b < B; ++b) {
        const Transition& t = *batch[b];
        if (t.observations[agent_index].size() != obs_dim) throw ShapeMismatch("observation width");
        own_obs.col(b) = t.observations[agent_index];
        own_next_obs.col(b) = t.next_observations[agent_index];
        critic_in.col(b).head(obs_dim) = t.observations[agent_index];
        for (int k = 0; k < n_slots; ++k)
            critic_in.col(b).segment(obs_dim + k * act_dim, act_dim) = t.actions[slots[k]];
        rewards(b) = t.rewards[agent_index];
        not_done(b) = t.done ? 0.0 : 1.0;
    }

    // bootstrap target: y = r + gamma * (1 - done) * Q'(s', pi'(s'))
    target_in.topRows(obs_dim) = own_next_obs;
    for (int k = 0; k < n_slots; ++k) {
        AgentLearner& src = *slot_nets[k];
        Eigen::MatrixXd next_obs_k(src.obs_dim, B);
        for (int b = 0; b < B; ++b) next_obs_k.col(b) = batch[b]->next_observations[slots[k]];
        Eigen::MatrixXd head = forward_batch(src.target_actor, next_obs_k);
        target_in.middleRows(obs_dim + k * act_dim, act_dim) =
            greedy_action_from_head(head, src.comm_vocab, src.max_force);
    }
    Eigen::VectorXd target_q = forward_batch(L.target_critic, target_in).transpose();
    Eigen::VectorXd y = rewards.array() + gamma * not_done.array() * target_q.array();

    // critic regression
    ForwardCache critic_cache;
    Eigen::VectorXd q = forward_batch(L.critic, critic_in, &critic_cache).transpose();
    Eigen::VectorXd diff = q - y;
    double critic_loss = diff.squaredNorm() / B;
    if (!std::isfinite(critic_loss)) throw NonFiniteLoss("critic");
    Eigen::MatrixXd dq = (2.0 / B) * diff.transpose();
    Gradients critic_grads = backward_batch(L.critic, critic_cache, dq);
    critic_grads.clip_global_norm(kGradClipNorm);
    apply_update(L.critic, critic_grads, L.critic_opt);

    // actor ascent on mean Q(s, pi(s)); own slot replaced by the actor's
    // output, other slots stay at their buffered values
    ForwardCache actor_cache;
    Eigen::MatrixXd head = forward_batch(L.actor, own_obs, &actor_cache);
    Eigen::MatrixXd actor_critic_in = critic_in;
    actor_critic_in.middleRows(obs_dim + own_pos * act_dim, act_dim) =
        greedy_action_from_head(head, L.comm_vocab, L.max_force);

    ForwardCache q_cache;
    Eigen::MatrixXd q2 = forward_batch(L.critic, actor_critic_in, &q_cache);
    double actor_objective = q2.mean();
    if (!std::isfinite(actor_objective)) throw NonFiniteLoss("actor");

    Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(1, B, 1.0 / B);
    Eigen::MatrixXd critic_input_grad;
    backward_batch(L.critic, q_cache, ones, &critic_input_grad);

    // straight-through utterance: the critic saw a one-hot, the gradient
    // flows back through the softmax probabilities
    Eigen::MatrixXd head_grad(act_dim, B);
    head_grad.topRows(2) =
        L.max_force * critic_input_grad.middleRows(obs_dim + own_pos * act_dim, 2);
    head_grad.bottomRows(L.comm_vocab) =
        critic_input_grad.middleRows(obs_dim + own_pos * act_dim + 2, L.comm_vocab);

    Gradients actor_grads = backward_batch(L.actor, actor_cache, head_grad);
    for (std::size_t l = 0; l < actor_grads.weights.size(); ++l) {
        actor_grads.weights[l] *= -1.0;  // ascend
        actor_grads.biases[l] *= -1.0;
    }
    actor_grads.clip_global_norm(kGradClipNorm);
    apply_update(L.actor, actor_grads, L.actor_opt);

    soft_update(L.target_critic, L.critic, tau);
    soft_update(L.target_actor, L.actor, tau);
    return {critic_loss, actor_objective};
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ShapeMismatch("replay capacity must be > 0");
}

void ReplayBuffer::push(Transition t) {
    if (!items_.empty()) {
        const Transition& head = items_.front();
        if (t.observations.size() != head.observations.size() ||
            t.actions.size() != head.actions.size() || t.rewards.size() != head.rewards.size())
            throw ShapeMismatch("transition agent count");
        if (t.observations[0].size() != head.observations[0].size() ||
            t.actions[0].size() != head.actions[0].size())
            throw ShapeMismatch("transition vector widths");
    }
    items_.push_back(std::move(t));
    inserted_ += 1;
    if (items_.size() > capacity_) items_.pop_front();
}

std::vector<const Transition*> ReplayBuffer::sample(int batch_size, RngStream& rng) const {
    // with replacement, so a small buffer can still fill a batch
    if (items_.empty() || batch_size < 1) throw InsufficientData("empty buffer");
    std::vector<const Transition*> out;
    out.reserve(static_cast<std::size_t>(batch_size));
    for (int i = 0; i < batch_size; ++i)
        out.push_back(&items_[rng.uniform_int(items_.size())]);
    return out;
}

AgentLearner AgentLearner::make(int obs_dim, int critic_action_dim, const WorldConfig& cfg,
                                RngStream& rng) {
    std::vector<int> actor_sizes{obs_dim};
    std::vector<int> critic_sizes{obs_dim + critic_action_dim};
    for (int h : cfg.hidden_sizes) {
        actor_sizes.push_back(h);
        critic_sizes.push_back(h);
    }
    actor_sizes.push_back(2 + cfg.comm_vocab);
    critic_sizes.push_back(1);

    AgentLearner L;
    L.actor = Mlp::make(actor_sizes,
                        {{Activation::Tanh, 2}, {Activation::Softmax, cfg.comm_vocab}}, rng);
    L.critic = Mlp::make(critic_sizes, {{Activation::Identity, 1}}, rng);
    L.target_actor = L.actor;
    L.target_critic = L.critic;
    L.actor_opt = Adam::make(L.actor, cfg.actor_lr);
    L.critic_opt = Adam::make(L.critic, cfg.critic_lr);
    L.obs_dim = obs_dim;
    L.comm_vocab = cfg.comm_vocab;
    L.max_force = cfg.max_force;
    return L;
}

Eigen::VectorXd flat_action(const AgentAction& a) {
    Eigen::VectorXd v(2 + a.utterance.size());
    v(0) = a.force.x;
    v(1) = a.force.y;
    for (std::size_t i = 0; i < a.utterance.size(); ++i) v(2 + i) = a.utterance[i];
    return v;
}

AgentAction select_action(const AgentLearner& learner, const Observation& obs, double sigma,
                          double epsilon, RngStream& rng) {
    if (obs.size() != static_cast<std::size_t>(learner.obs_dim))
        throw ShapeMismatch("observation length " + std::to_string(obs.size()));
    Eigen::VectorXd x =
        Eigen::Map<const Eigen::VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
    Eigen::VectorXd head = forward(learner.actor, x);

    Vec2 force{learner.max_force * head(0), learner.max_force * head(1)};
    if (sigma > 0.0) {
        force.x += rng.normal(0.0, sigma);
        force.y += rng.normal(0.0, sigma);
    }
    force = force.clipped(learner.max_force);

    int idx = 0;
    head.segment(2, learner.comm_vocab).maxCoeff(&idx);
    if (epsilon > 0.0 && rng.uniform() < epsilon)
        idx = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(learner.comm_vocab)));

    return {force, one_hot(learner.comm_vocab, idx)};
}

UpdateStats ddpg_update(AgentLearner& learner, std::span<const Transition* const> batch,
                        int agent_index, double gamma, double tau) {
    const int slots[] = {agent_index};
    AgentLearner* nets[] = {&learner};
    return update_agent(learner, batch, agent_index, slots, nets, gamma, tau);
}

std::vector<UpdateStats> maddpg_update(std::span<AgentLearner* const> learners,
                                       std::span<const Transition* const> batch, double gamma,
                                       double tau) {
    if (batch.empty()) throw InsufficientData("empty batch");
    const int n = static_cast<int>(batch.front()->observations.size());
    if (static_cast<int>(learners.size()) != n) throw ShapeMismatch("one learner per agent");

    std::vector<int> slots(n);
    for (int k = 0; k < n; ++k) slots[k] = k;

    std::vector<UpdateStats> stats;
    stats.reserve(learners.size());
    for (int i = 0; i < n; ++i)
        stats.push_back(update_agent(*learners[i], batch, i, slots, learners, gamma, tau));
    return stats;
}

}  // namespace vipguard
