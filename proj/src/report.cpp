#include "vipguard/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <tuple>

#include "vipguard/errors.hpp"
#include "vipguard/format.hpp"

namespace vipguard {

namespace fs = std::filesystem;

namespace {

using AxisKey = std::tuple<int, int, int, bool>;  // bodyguards, reward, learner, comm

AxisKey axis_of(const RunIdentity& id) {
    return {id.n_bodyguards, static_cast<int>(id.reward_kind), static_cast<int>(id.learner_kind),
            id.communication};
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<EvalRecord>& records) {
    if (records.empty()) throw InsufficientData("no eval records");

    // final evaluation per (axis, seed) = records at the largest episode_index
    std::map<std::pair<AxisKey, std::uint64_t>, long> final_episode;
    for (const auto& r : records) {
        auto key = std::make_pair(axis_of(r.id), r.id.seed);
        auto it = final_episode.find(key);
        if (it == final_episode.end() || r.episode_index > it->second)
            final_episode[key] = r.episode_index;
    }

    std::map<std::pair<AxisKey, std::uint64_t>, std::vector<double>> final_threats;
    for (const auto& r : records) {
        auto key = std::make_pair(axis_of(r.id), r.id.seed);
        if (r.episode_index == final_episode[key]) final_threats[key].push_back(r.total_threat);
    }

    std::map<AxisKey, SummaryRow> rows;
    for (const auto& [key, threats] : final_threats) {
        const auto& [axis, seed] = key;
        SummaryRow& row = rows[axis];
        row.n_bodyguards = std::get<0>(axis);
        row.reward_kind = static_cast<RewardKind>(std::get<1>(axis));
        row.learner_kind = static_cast<LearnerKind>(std::get<2>(axis));
        row.communication = std::get<3>(axis);
        row.per_seed.push_back(mean_of(threats));
    }

    std::vector<SummaryRow> out;
    for (auto& [axis, row] : rows) {
        row.n_seeds = static_cast<int>(row.per_seed.size());
        row.mean_total_threat = mean_of(row.per_seed);
        row.std_total_threat = std_of(row.per_seed, row.mean_total_threat);
        out.push_back(row);
    }
    return out;
}

OrderingCheck check_reward_ordering(const std::vector<SummaryRow>& summary) {
    OrderingCheck check;
    std::vector<double> comm, threat;
    for (const auto& row : summary) {
        if (row.reward_kind == RewardKind::CommPenalty) comm.push_back(row.mean_total_threat);
        if (row.reward_kind == RewardKind::ThreatOnly) threat.push_back(row.mean_total_threat);
    }
    if (comm.empty() || threat.empty()) return check;
    check.comparable = true;
    check.comm_penalty_mean = mean_of(comm);
    check.threat_only_mean = mean_of(threat);
    check.ordering_held = check.comm_penalty_mean <= check.threat_only_mean;
    return check;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "n_bodyguards,reward_kind,learner_kind,communication,n_seeds,"
           "mean_total_threat,std_total_threat,per_seed_values\n";
    for (const auto& r : rows) {
        out << r.n_bodyguards << ',' << to_string(r.reward_kind) << ','
            << to_string(r.learner_kind) << ',' << (r.communication ? 1 : 0) << ',' << r.n_seeds
            << ',' << g9(r.mean_total_threat) << ',' << g9(r.std_total_threat) << ',';
        for (std::size_t i = 0; i < r.per_seed.size(); ++i)
            out << (i ? ";" : "") << g9(r.per_seed[i]);
        out << '\n';
    }
}

void emit_report(const std::vector<EvalRecord>& records, const std::string& out_dir) {
    if (records.empty()) throw InsufficientData("no eval records to report");
    fs::create_directories(out_dir);
    fs::path dir(out_dir);

    auto open = [](const fs::path& p) {
        std::ofstream out(p);
        if (!out) throw IoError("cannot write '" + p.string() + "'");
        return out;
    };

    {
        auto out = open(dir / "raw_records.csv");
        write_eval_records_csv(out, records);
    }

    auto summary = summarize(records);
    {
        auto out = open(dir / "summary.csv");
        write_summary_csv(out, summary);
    }

    // evaluation total threat vs training episode, averaged over seeds and
    // eval episodes per axis combination
    {
        std::map<std::pair<AxisKey, long>, std::vector<double>> series;
        for (const auto& r : records)
            series[{axis_of(r.id), r.episode_index}].push_back(r.total_threat);
        auto out = open(dir / "plot_data.csv");
        out << "n_bodyguards,reward_kind,learner_kind,communication,episode,"
               "mean_total_threat,std_total_threat\n";
        for (const auto& [key, values] : series) {
            const auto& [axis, episode] = key;
            double m = mean_of(values);
            out << std::get<0>(axis) << ','
                << to_string(static_cast<RewardKind>(std::get<1>(axis))) << ','
                << to_string(static_cast<LearnerKind>(std::get<2>(axis))) << ','
                << (std::get<3>(axis) ? 1 : 0) << ',' << episode << ',' << g9(m) << ','
                << g9(std_of(values, m)) << '\n';
        }
    }

    OrderingCheck check = check_reward_ordering(summary);
    if (check.comparable) {
        auto out = open(dir / "ordering_check.csv");
        out << "comm_penalty_mean,threat_only_mean,ordering_held\n";
        out << g9(check.comm_penalty_mean) << ',' << g9(check.threat_only_mean) << ','
            << (check.ordering_held ? 1 : 0) << '\n';
    }
}

}  // namespace vipguard
