#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vipguard/errors.hpp"

namespace vipguard {

enum class RewardKind { ThreatOnly, BinaryThreat, Composite, CommPenalty };
enum class LearnerKind { Ddpg, Maddpg };

std::string to_string(RewardKind k);
std::string to_string(LearnerKind k);
RewardKind reward_kind_from_string(const std::string& s);
LearnerKind learner_kind_from_string(const std::string& s);

// Every scenario, physics, threat, reward and training knob in one record.
// Defaults are the documented desk-scale scenario: 2 bodyguards protecting a
// VIP among 10 bystanders in a [-1,1]^2 arena, 25 steps per episode.
struct WorldConfig {
    int n_bodyguards = 2;   // [1, 8]
    int n_bystanders = 10;  // >= 0
    int n_landmarks = 3;    // >= 0

    double world_halfwidth = 1.0;  // arena is [-w, w]^2
    double dt = 0.1;
    double damping = 0.25;  // [0, 1)
    double max_speed = 1.0;
    double max_force = 1.0;
    double agent_radius = 0.05;
    double landmark_radius = 0.10;
    int episode_length = 25;

    double threat_A = 3.0;  // decay gain; threat = exp(-A * dist / B)
    double threat_B = 1.0;  // decay length scale
    double safe_distance = 1.0;

    double min_distance = 0.1;   // inner edge of the bodyguard distance band
    double band_distance = 1.0;  // outer edge; reward is 0 inside [min, band]

    double comm_penalty = 0.05;
    int comm_vocab = 10;  // utterance vector length, index 0 = silence

    RewardKind reward_kind = RewardKind::Composite;
    LearnerKind learner_kind = LearnerKind::Maddpg;

    double gamma = 0.95;  // [0, 1]
    double tau = 0.01;    // (0, 1]
    long long replay_capacity = 1000000;
    int batch_size = 128;
    double actor_lr = 1e-3;
    double critic_lr = 1e-3;
    double exploration_sigma = 0.1;
    std::vector<int> hidden_sizes = {64, 64};

    long long train_episodes = 10000;
    int eval_episodes = 5;
    std::uint64_t seed = 1;

    bool operator==(const WorldConfig&) const = default;
};

// Returns cfg unchanged iff every invariant holds; otherwise throws a
// ConfigError naming the first violated field (fields checked in declaration
// order).
WorldConfig validate_config(const WorldConfig& cfg);

// Flat JSON, keys mirroring the field names exactly. Unknown keys are an
// error (catches typos); missing keys keep their defaults.
WorldConfig config_from_json(const std::string& text);
std::string config_to_json(const WorldConfig& cfg);

WorldConfig load_config_file(const std::string& path);
void save_config_file(const WorldConfig& cfg, const std::string& path);

// FNV-1a over the canonical serialization; used to tie checkpoints to the
// config that produced them.
std::string config_hash(const WorldConfig& cfg);

}  // namespace vipguard
