#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vipguard/trainer.hpp"

namespace vipguard {

struct SummaryRow {
    int n_bodyguards = 0;
    RewardKind reward_kind = RewardKind::Composite;
    LearnerKind learner_kind = LearnerKind::Maddpg;
    bool communication = true;
    int n_seeds = 0;
    double mean_total_threat = 0.0;
    double std_total_threat = 0.0;  // population std over seeds
    std::vector<double> per_seed;   // one final-eval mean per seed
};

// Aggregates each run's final evaluation (its largest episode_index): the
// per-seed value is the mean total threat over that evaluation's episodes,
// then rows report mean +- std across seeds.
std::vector<SummaryRow> summarize(const std::vector<EvalRecord>& records);

struct OrderingCheck {
    bool comparable = false;  // both reward kinds present
    double comm_penalty_mean = 0.0;
    double threat_only_mean = 0.0;
    bool ordering_held = false;  // comm_penalty <= threat_only
};

// Compares mean final total threat of the comm-penalty and threat-only
// rewards across everything else held equal.
OrderingCheck check_reward_ordering(const std::vector<SummaryRow>& summary);

// Writes raw_records.csv, summary.csv, plot_data.csv (evaluation total
// threat vs episode per axis combination) and, when both reward kinds are
// present, ordering_check.csv.
void emit_report(const std::vector<EvalRecord>& records, const std::string& out_dir);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace vipguard
