// vipguard command line: train a team, evaluate a checkpoint, run a sweep,
// or rebuild reports from raw records.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vipguard/environment.hpp"
#include "vipguard/errors.hpp"
#include "vipguard/experiment.hpp"
#include "vipguard/format.hpp"
#include "vipguard/report.hpp"
#include "vipguard/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vipguard;

namespace {

// --override key=value, applied on top of the config file; values are parsed
// as JSON literals so numbers, booleans and arrays all work.
WorldConfig apply_overrides(const WorldConfig& cfg, const std::vector<std::string>& overrides,
                            TrainOptions& opt) {
    json patch = json::parse(config_to_json(cfg));
    for (const std::string& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError(kv, "override must look like key=value");
        std::string key = kv.substr(0, eq);
        std::string value = kv.substr(eq + 1);
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::exception&) {
            parsed = value;  // bare strings like reward_kind=composite
        }
        if (key == "communication_enabled") {
            opt.communication_enabled = parsed.get<bool>();
        } else if (key == "eval_interval") {
            opt.eval_interval = parsed.get<int>();
        } else if (key == "shared_policy") {
            opt.shared_policy = parsed.get<bool>();
        } else {
            patch[key] = parsed;
        }
    }
    return config_from_json(patch.dump());
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& out_dir) {
    TrainOptions opt;
    WorldConfig cfg = apply_overrides(load_config_file(config_path), overrides, opt);
    opt.out_dir = out_dir;
    TrainResult result = run_training(cfg, opt, cfg.seed);

    // dump one greedy trajectory alongside the run for plotting
    {
        Environment env(cfg, derive_stream(cfg.seed, "trajectory-dump"));
        env.reset();
        std::vector<WorldState> traj;
        RngStream unused(0, "greedy");
        bool done = false;
        while (!done) {
            std::vector<AgentAction> actions;
            for (int i = 0; i < cfg.n_bodyguards; ++i) {
                const AgentLearner& L =
                    result.learners.size() == 1 ? result.learners[0]
                                                : result.learners[static_cast<std::size_t>(i)];
                actions.push_back(select_action(L, env.observe(i), 0.0, 0.0, unused));
                if (!opt.communication_enabled) actions.back().utterance = one_hot(cfg.comm_vocab, 0);
            }
            done = env.step(actions);
            traj.push_back(env.world());
        }
        std::ofstream out(fs::path(out_dir) / "trajectory.csv");
        if (!out) throw IoError("cannot write trajectory.csv");
        write_trajectory_csv(out, traj, cfg, ThreatParams::from_config(cfg));
    }

    auto summary = summarize(result.eval_records);
    for (const auto& row : summary)
        std::cout << "final mean total threat: " << g9(row.mean_total_threat) << " (over "
                  << row.n_seeds << " seed)\n";
    std::cout << "run written to " << out_dir << "\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint_dir, int episodes, std::uint64_t seed) {
    Checkpoint ck = load_checkpoint(checkpoint_dir);
    auto records = evaluate(ck.learners, ck.cfg, ck.opt.communication_enabled, episodes, seed,
                            ck.episode);
    double mean = 0.0;
    for (const auto& r : records) mean += r.total_threat;
    mean /= static_cast<double>(records.size());
    double var = 0.0;
    for (const auto& r : records) var += (r.total_threat - mean) * (r.total_threat - mean);
    double stddev = records.size() > 1 ? std::sqrt(var / static_cast<double>(records.size())) : 0.0;

    write_eval_records_csv(std::cout, records);
    std::cout << "mean_total_threat," << g9(mean) << "\nstd_total_threat," << g9(stddev) << "\n";
    return 0;
}

int cmd_sweep(const std::string& spec_path, int jobs) {
    ExperimentSpec spec = load_experiment_file(spec_path);
    auto records = run_sweep(spec, jobs);
    std::cout << records.size() << " eval records; report under "
              << (fs::path(spec.out_dir) / "report").string() << "\n";
    return 0;
}

int cmd_report(const std::string& in_dir, const std::string& out_dir) {
    std::vector<EvalRecord> records;
    for (const auto& entry : fs::recursive_directory_iterator(in_dir)) {
        if (!entry.is_regular_file()) continue;
        auto name = entry.path().filename().string();
        if (name != "eval_records.csv" && name != "raw_records.csv") continue;
        std::ifstream in(entry.path());
        if (!in) throw IoError("cannot open '" + entry.path().string() + "'");
        auto part = read_eval_records_csv(in);
        records.insert(records.end(), part.begin(), part.end());
    }
    if (records.empty()) throw InsufficientData("no eval_records.csv under '" + in_dir + "'");
    emit_report(records, out_dir);
    std::cout << "report written to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"VIP bodyguard team simulation and training"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = "run_out";
    auto* train = app.add_subcommand("train", "train a bodyguard team");
    train->add_option("--config", config_path, "world/learning config (JSON)")->required();
    train->add_option("--override", overrides, "key=value config overrides");
    train->add_option("--out", out_dir, "output directory");

    std::string checkpoint_dir;
    int episodes = 10;
    std::uint64_t eval_seed = 9000;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint greedily");
    eval->add_option("--checkpoint", checkpoint_dir, "checkpoint directory")->required();
    eval->add_option("--episodes", episodes, "number of evaluation episodes");
    eval->add_option("--seed", eval_seed, "evaluation seed");

    std::string spec_path;
    int jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "run an experiment sweep");
    sweep->add_option("--spec", spec_path, "sweep spec (JSON)")->required();
    sweep->add_option("--jobs", jobs, "parallel runs");

    std::string report_in, report_out = "report_out";
    auto* report = app.add_subcommand("report", "rebuild reports from eval records");
    report->add_option("--in", report_in, "directory holding eval_records.csv files")->required();
    report->add_option("--out", report_out, "report output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(config_path, overrides, out_dir);
        if (eval->parsed()) return cmd_eval(checkpoint_dir, episodes, eval_seed);
        if (sweep->parsed()) return cmd_sweep(spec_path, jobs);
        if (report->parsed()) return cmd_report(report_in, report_out);
    } catch (const std::exception& e) {
        json err;
        err["error"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
