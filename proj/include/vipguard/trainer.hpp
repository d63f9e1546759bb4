#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vipguard/config.hpp"
#include "vipguard/learner.hpp"

namespace vipguard {

struct RunIdentity {
    int n_bodyguards = 0;
    RewardKind reward_kind = RewardKind::Composite;
    LearnerKind learner_kind = LearnerKind::Maddpg;
    bool communication = true;
    std::uint64_t seed = 0;
};

struct EvalRecord {
    RunIdentity id;
    long episode_index = 0;  // training episodes completed when evaluated
    int eval_episode = 0;    // index within the evaluation batch
    double total_threat = 0.0;
    double mean_agent_reward = 0.0;  // episode return averaged over agents
    double utterance_rate = 0.0;     // fraction of (agent, step) pairs speaking
};

// Harness-level knobs that are not part of the world/learning config.
struct TrainOptions {
    bool communication_enabled = true;
    bool shared_policy = false;     // tie all agents to one parameter set
    int eval_interval = 100;        // greedy evaluation every N episodes
    int checkpoint_interval = 1000;
    double utterance_epsilon = 0.1;  // utterance exploration while training
    std::string out_dir;             // empty -> keep everything in memory
};

struct TrainResult {
    std::vector<AgentLearner> learners;  // one per agent, or one if shared
    std::vector<EvalRecord> eval_records;
    long episodes_run = 0;
};

// Full training loop: reset -> act/step/learn until done, greedy evaluation
// at episode 0 and every eval_interval thereafter plus once at the end,
// checkpoints every checkpoint_interval episodes and at the end. Single
// threaded and bit-reproducible from (cfg, opt, seed).
TrainResult run_training(const WorldConfig& cfg, const TrainOptions& opt, std::uint64_t seed);

// Noise-free rollouts of the given policies on fresh evaluation streams
// (labels disjoint from every training stream).
std::vector<EvalRecord> evaluate(const std::vector<AgentLearner>& learners,
                                 const WorldConfig& cfg, bool communication_enabled,
                                 int episodes, std::uint64_t seed, long episode_label);

// Checkpoint directory: per-agent actor/critic/target/optimizer dumps plus a
// manifest tying them to the config hash and episode count.
void save_checkpoint(const std::filesystem::path& dir,
                     const std::vector<AgentLearner>& learners, const WorldConfig& cfg,
                     const TrainOptions& opt, long episode);

struct Checkpoint {
    std::vector<AgentLearner> learners;
    WorldConfig cfg;
    TrainOptions opt;
    long episode = 0;
};

Checkpoint load_checkpoint(const std::filesystem::path& dir);

void write_eval_records_csv(std::ostream& out, const std::vector<EvalRecord>& records);
std::vector<EvalRecord> read_eval_records_csv(std::istream& in);

}  // namespace vipguard
