#include "vipguard/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "vipguard/errors.hpp"
#include "vipguard/report.hpp"

namespace vipguard {

namespace fs = std::filesystem;
using nlohmann::json;

ExperimentSpec experiment_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("<sweep>", e.what());
    }

    ExperimentSpec spec;
    if (j.contains("base_config")) {
        spec.base = config_from_json(j.at("base_config").dump());
        j.erase("base_config");
    }
    if (j.contains("n_bodyguards")) {
        spec.n_bodyguards = j.at("n_bodyguards").get<std::vector<int>>();
        j.erase("n_bodyguards");
    } else {
        spec.n_bodyguards = {spec.base.n_bodyguards};
    }
    if (j.contains("reward_kind")) {
        for (const auto& s : j.at("reward_kind"))
            spec.reward_kinds.push_back(reward_kind_from_string(s.get<std::string>()));
        j.erase("reward_kind");
    } else {
        spec.reward_kinds = {spec.base.reward_kind};
    }
    if (j.contains("learner_kind")) {
        for (const auto& s : j.at("learner_kind"))
            spec.learner_kinds.push_back(learner_kind_from_string(s.get<std::string>()));
        j.erase("learner_kind");
    } else {
        spec.learner_kinds = {spec.base.learner_kind};
    }
    if (j.contains("communication_enabled")) {
        spec.communication = j.at("communication_enabled").get<std::vector<bool>>();
        j.erase("communication_enabled");
    } else {
        spec.communication = {true};
    }
    if (j.contains("seeds")) {
        spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        j.erase("seeds");
    } else {
        spec.seeds = {spec.base.seed};
    }
    if (j.contains("eval_interval")) {
        spec.eval_interval = j.at("eval_interval").get<int>();
        j.erase("eval_interval");
    }
    if (j.contains("out_dir")) {
        spec.out_dir = j.at("out_dir").get<std::string>();
        j.erase("out_dir");
    }
    if (!j.empty()) throw ConfigError(j.begin().key(), "unknown sweep key");

    if (spec.n_bodyguards.empty() || spec.reward_kinds.empty() || spec.learner_kinds.empty() ||
        spec.communication.empty() || spec.seeds.empty())
        throw ConfigError("<sweep>", "every axis needs at least one value");
    std::set<std::uint64_t> unique(spec.seeds.begin(), spec.seeds.end());
    if (unique.size() != spec.seeds.size()) throw ConfigError("seeds", "must be distinct");
    return spec;
}

ExperimentSpec load_experiment_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sweep spec '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return experiment_from_json(ss.str());
}

std::vector<EvalRecord> run_sweep(const ExperimentSpec& spec, int jobs) {
    struct Job {
        WorldConfig cfg;
        TrainOptions opt;
        std::uint64_t seed = 0;
    };

    std::vector<Job> todo;
    for (int n : spec.n_bodyguards)
        for (RewardKind rk : spec.reward_kinds)
            for (LearnerKind lk : spec.learner_kinds)
                for (bool comm : spec.communication)
                    for (std::uint64_t seed : spec.seeds) {
                        Job job;
                        job.cfg = spec.base;
                        job.cfg.n_bodyguards = n;
                        job.cfg.reward_kind = rk;
                        job.cfg.learner_kind = lk;
                        job.cfg.seed = seed;
                        job.seed = seed;
                        job.opt.communication_enabled = comm;
                        job.opt.eval_interval = spec.eval_interval;
                        std::ostringstream name;
                        name << "bg" << n << "_" << to_string(rk) << "_" << to_string(lk)
                             << (comm ? "_comm" : "_nocomm") << "_seed" << seed;
                        job.opt.out_dir = (fs::path(spec.out_dir) / "runs" / name.str()).string();
                        validate_config(job.cfg);
                        todo.push_back(std::move(job));
                    }

    std::vector<EvalRecord> all_records;
    std::mutex records_mutex;
    std::exception_ptr first_error;
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= todo.size()) return;
            try {
                TrainResult r = run_training(todo[i].cfg, todo[i].opt, todo[i].seed);
                std::lock_guard<std::mutex> lock(records_mutex);
                all_records.insert(all_records.end(), r.eval_records.begin(),
                                   r.eval_records.end());
            } catch (...) {
                std::lock_guard<std::mutex> lock(records_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(todo.size())));
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    // stable report order independent of thread scheduling
    std::sort(all_records.begin(), all_records.end(), [](const EvalRecord& a, const EvalRecord& b) {
        auto key = [](const EvalRecord& r) {
            return std::tuple(r.id.n_bodyguards, static_cast<int>(r.id.reward_kind),
                              static_cast<int>(r.id.learner_kind), r.id.communication, r.id.seed,
                              r.episode_index, r.eval_episode);
        };
        return key(a) < key(b);
    });

    emit_report(all_records, (fs::path(spec.out_dir) / "report").string());
    return all_records;
}

}  // namespace vipguard
