#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vipguard/config.hpp"
#include "vipguard/trainer.hpp"

namespace vipguard {

// A sweep over (agent count x reward function x learner x communication),
// several seeds per combination.
struct ExperimentSpec {
    WorldConfig base;
    std::vector<int> n_bodyguards;
    std::vector<RewardKind> reward_kinds;
    std::vector<LearnerKind> learner_kinds;
    std::vector<bool> communication;
    std::vector<std::uint64_t> seeds;
    int eval_interval = 100;
    std::string out_dir = "sweep_out";
};

ExperimentSpec experiment_from_json(const std::string& text);
ExperimentSpec load_experiment_file(const std::string& path);

// Runs every axis combination x seed (jobs in parallel, each run single
// threaded and self-contained), writes per-run outputs under
// out_dir/runs/<name>/ and a report under out_dir/report/. Returns all
// evaluation records.
std::vector<EvalRecord> run_sweep(const ExperimentSpec& spec, int jobs);

}  // namespace vipguard
