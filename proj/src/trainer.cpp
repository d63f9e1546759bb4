#include "vipguard/trainer.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vipguard/environment.hpp"
#include "vipguard/errors.hpp"
#include "vipguard/format.hpp"
#include "vipguard/rewards.hpp"
#include "vipguard/threat.hpp"

namespace vipguard {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kWarmupBatches = 10;  // learning starts after 10 * batch_size transitions

const AgentLearner& agent_learner(const std::vector<AgentLearner>& learners, int i) {
    return learners.size() == 1 ? learners.front() : learners[static_cast<std::size_t>(i)];
}

Eigen::VectorXd to_eigen(const Observation& obs) {
    return Eigen::Map<const Eigen::VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

struct EpisodeOutcome {
    double mean_agent_return = 0.0;
    double utterance_rate = 0.0;
    std::vector<WorldState> trajectory;  // post-step states
};

// One greedy episode; shared by evaluation and by training with learning
// hooks layered on top in run_training itself.
EpisodeOutcome rollout_greedy(const std::vector<AgentLearner>& learners, const WorldConfig& cfg,
                              bool communication_enabled, RngStream env_rng) {
    Environment env(cfg, env_rng);
    env.reset();

    const int n = cfg.n_bodyguards;
    EpisodeOutcome out;
    double reward_sum = 0.0;
    long speak_count = 0;

    // greedy selection never draws from the stream, so any stream works here
    RngStream unused(0, "greedy");
    std::vector<AgentAction> actions(static_cast<std::size_t>(n));
    bool done = false;
    while (!done) {
        for (int i = 0; i < n; ++i) {
            actions[static_cast<std::size_t>(i)] =
                select_action(agent_learner(learners, i), env.observe(i), 0.0, 0.0, unused);
            if (!communication_enabled)
                actions[static_cast<std::size_t>(i)].utterance = one_hot(cfg.comm_vocab, 0);
            if (!actions[static_cast<std::size_t>(i)].is_silent()) ++speak_count;
        }
        done = env.step(actions);
        out.trajectory.push_back(env.world());
        for (int i = 0; i < n; ++i)
            reward_sum += reward_breakdown(env.world(), i, actions[static_cast<std::size_t>(i)], cfg).total;
    }
    out.mean_agent_return = reward_sum / n;
    out.utterance_rate =
        static_cast<double>(speak_count) / (static_cast<double>(n) * cfg.episode_length);
    return out;
}

}  // namespace

std::vector<EvalRecord> evaluate(const std::vector<AgentLearner>& learners,
                                 const WorldConfig& cfg, bool communication_enabled,
                                 int episodes, std::uint64_t seed, long episode_label) {
    const ThreatParams params = ThreatParams::from_config(cfg);
    RunIdentity id{cfg.n_bodyguards, cfg.reward_kind, cfg.learner_kind, communication_enabled,
                   seed};
    std::vector<EvalRecord> records;
    for (int e = 0; e < episodes; ++e) {
        std::string label =
            "eval/" + std::to_string(episode_label) + "/" + std::to_string(e);
        EpisodeOutcome out =
            rollout_greedy(learners, cfg, communication_enabled, derive_stream(seed, label));
        EvalRecord rec;
        rec.id = id;
        rec.episode_index = episode_label;
        rec.eval_episode = e;
        rec.total_threat = total_threat(out.trajectory, params, cfg.dt);
        rec.mean_agent_reward = out.mean_agent_return;
        rec.utterance_rate = communication_enabled ? out.utterance_rate : 0.0;
        records.push_back(rec);
    }
    return records;
}

TrainResult run_training(const WorldConfig& cfg_in, const TrainOptions& opt, std::uint64_t seed) {
    const WorldConfig cfg = validate_config(cfg_in);
    const int n = cfg.n_bodyguards;
    const bool maddpg = cfg.learner_kind == LearnerKind::Maddpg;
    const int act_dim = 2 + cfg.comm_vocab;
    const int obs_dim = Environment::observation_length(cfg);
    const int critic_act_dim = maddpg ? n * act_dim : act_dim;
    const std::size_t warmup =
        static_cast<std::size_t>(kWarmupBatches) * static_cast<std::size_t>(cfg.batch_size);

    Environment env(cfg, derive_stream(seed, "env"));
    RngStream noise = derive_stream(seed, "explore");
    RngStream replay_rng = derive_stream(seed, "replay");

    TrainResult result;
    const int n_learners = opt.shared_policy ? 1 : n;
    for (int k = 0; k < n_learners; ++k) {
        RngStream init = derive_stream(seed, "init/agent" + std::to_string(k));
        result.learners.push_back(AgentLearner::make(obs_dim, critic_act_dim, cfg, init));
    }

    ReplayBuffer buffer(static_cast<std::size_t>(cfg.replay_capacity));

    const bool writing = !opt.out_dir.empty();
    fs::path out_dir(opt.out_dir);
    std::ostringstream log;
    log << "episode,mean_agent_return,mean_critic_loss,mean_actor_objective,buffer_size\n";

    auto run_eval = [&](long label) {
        auto recs = evaluate(result.learners, cfg, opt.communication_enabled, cfg.eval_episodes,
                             seed, label);
        result.eval_records.insert(result.eval_records.end(), recs.begin(), recs.end());
    };

    if (cfg.train_episodes == 0) {
        run_eval(0);
    } else {
        std::vector<Observation> obs(static_cast<std::size_t>(n));
        std::vector<AgentAction> actions(static_cast<std::size_t>(n));
        for (long ep = 0; ep < cfg.train_episodes; ++ep) {
            if (opt.eval_interval > 0 && ep % opt.eval_interval == 0) run_eval(ep);

            env.reset();
            for (int i = 0; i < n; ++i) obs[static_cast<std::size_t>(i)] = env.observe(i);

            double reward_sum = 0.0;
            double loss_sum = 0.0;
            double objective_sum = 0.0;
            long update_count = 0;
            bool done = false;
            while (!done) {
                for (int i = 0; i < n; ++i) {
                    auto& a = actions[static_cast<std::size_t>(i)];
                    a = select_action(agent_learner(result.learners, i),
                                      obs[static_cast<std::size_t>(i)], cfg.exploration_sigma,
                                      opt.communication_enabled ? opt.utterance_epsilon : 0.0,
                                      noise);
                    if (!opt.communication_enabled) a.utterance = one_hot(cfg.comm_vocab, 0);
                }
                done = env.step(actions);

                Transition t;
                t.done = done;
                for (int i = 0; i < n; ++i) {
                    const auto& a = actions[static_cast<std::size_t>(i)];
                    double r = reward_breakdown(env.world(), i, a, cfg).total;
                    reward_sum += r;
                    t.observations.push_back(to_eigen(obs[static_cast<std::size_t>(i)]));
                    t.actions.push_back(flat_action(a));
                    t.rewards.push_back(r);
                    obs[static_cast<std::size_t>(i)] = env.observe(i);
                    t.next_observations.push_back(to_eigen(obs[static_cast<std::size_t>(i)]));
                }
                buffer.push(std::move(t));

                if (buffer.size() >= warmup &&
                    buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
                    auto batch = buffer.sample(cfg.batch_size, replay_rng);
                    try {
                        if (maddpg) {
                            std::vector<AgentLearner*> views;
                            for (int i = 0; i < n; ++i)
                                views.push_back(
                                    &result.learners[opt.shared_policy
                                                         ? 0
                                                         : static_cast<std::size_t>(i)]);
                            auto stats = maddpg_update(views, batch, cfg.gamma, cfg.tau);
                            for (const auto& s : stats) {
                                loss_sum += s.critic_loss;
                                objective_sum += s.actor_objective;
                                ++update_count;
                            }
                        } else {
                            for (int i = 0; i < n; ++i) {
                                auto& L = result.learners[opt.shared_policy
                                                              ? 0
                                                              : static_cast<std::size_t>(i)];
                                auto s = ddpg_update(L, batch, i, cfg.gamma, cfg.tau);
                                loss_sum += s.critic_loss;
                                objective_sum += s.actor_objective;
                                ++update_count;
                            }
                        }
                    } catch (const NonFiniteLoss& e) {
                        throw NonFiniteLoss("episode " + std::to_string(ep) + ": " + e.what());
                    }
                }
            }

            log << ep << ',' << g9(reward_sum / n) << ','
                << g9(update_count ? loss_sum / update_count : 0.0) << ','
                << g9(update_count ? objective_sum / update_count : 0.0) << ','
                << buffer.size() << '\n';

            if (writing && opt.checkpoint_interval > 0 &&
                (ep + 1) % opt.checkpoint_interval == 0 && ep + 1 < cfg.train_episodes)
                save_checkpoint(out_dir / "checkpoints" / ("ep_" + std::to_string(ep + 1)),
                                result.learners, cfg, opt, ep + 1);

            result.episodes_run = ep + 1;
        }
        run_eval(cfg.train_episodes);
    }

    if (writing) {
        fs::create_directories(out_dir);
        open_out(out_dir / "config.json") << config_to_json(cfg);
        open_out(out_dir / "training_log.csv") << log.str();
        auto records = open_out(out_dir / "eval_records.csv");
        write_eval_records_csv(records, result.eval_records);
        save_checkpoint(out_dir / "checkpoints" / "final", result.learners, cfg, opt,
                        result.episodes_run);
    }
    return result;
}

void save_checkpoint(const fs::path& dir, const std::vector<AgentLearner>& learners,
                     const WorldConfig& cfg, const TrainOptions& opt, long episode) {
    fs::create_directories(dir);
    json manifest;
    manifest["version"] = 1;
    manifest["config"] = json::parse(config_to_json(cfg));
    manifest["config_hash"] = config_hash(cfg);
    manifest["episode"] = episode;
    manifest["n_learners"] = learners.size();
    manifest["communication_enabled"] = opt.communication_enabled;
    manifest["shared_policy"] = opt.shared_policy;
    open_out(dir / "manifest.json") << manifest.dump(2) << '\n';

    for (std::size_t k = 0; k < learners.size(); ++k) {
        const auto& L = learners[k];
        std::string stem = "agent" + std::to_string(k);
        auto dump_mlp = [&](const std::string& name, const Mlp& net) {
            auto out = open_out(dir / (stem + name));
            save_mlp(out, net);
        };
        auto dump_adam = [&](const std::string& name, const Adam& opt_state) {
            auto out = open_out(dir / (stem + name));
            save_adam(out, opt_state);
        };
        dump_mlp("_actor.mlp", L.actor);
        dump_mlp("_critic.mlp", L.critic);
        dump_mlp("_target_actor.mlp", L.target_actor);
        dump_mlp("_target_critic.mlp", L.target_critic);
        dump_adam("_actor_opt.adam", L.actor_opt);
        dump_adam("_critic_opt.adam", L.critic_opt);
    }
}

Checkpoint load_checkpoint(const fs::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw IoError("cannot open '" + (dir / "manifest.json").string() + "'");
    json manifest = json::parse(mf);

    Checkpoint ck;
    ck.cfg = config_from_json(manifest.at("config").dump());
    if (manifest.at("config_hash").get<std::string>() != config_hash(ck.cfg))
        throw IoError("checkpoint config hash mismatch");
    ck.episode = manifest.at("episode").get<long>();
    ck.opt.communication_enabled = manifest.at("communication_enabled").get<bool>();
    ck.opt.shared_policy = manifest.at("shared_policy").get<bool>();

    const auto n_learners = manifest.at("n_learners").get<std::size_t>();
    for (std::size_t k = 0; k < n_learners; ++k) {
        std::string stem = "agent" + std::to_string(k);
        auto open_in = [&](const std::string& name) {
            std::ifstream in(dir / name);
            if (!in) throw IoError("cannot open '" + (dir / name).string() + "'");
            return in;
        };
        AgentLearner L;
        {
            auto in = open_in(stem + "_actor.mlp");
            L.actor = load_mlp(in);
        }
        {
            auto in = open_in(stem + "_critic.mlp");
            L.critic = load_mlp(in);
        }
        {
            auto in = open_in(stem + "_target_actor.mlp");
            L.target_actor = load_mlp(in);
        }
        {
            auto in = open_in(stem + "_target_critic.mlp");
            L.target_critic = load_mlp(in);
        }
        {
            auto in = open_in(stem + "_actor_opt.adam");
            L.actor_opt = load_adam(in, L.actor);
        }
        {
            auto in = open_in(stem + "_critic_opt.adam");
            L.critic_opt = load_adam(in, L.critic);
        }
        L.obs_dim = L.actor.input_size();
        L.comm_vocab = ck.cfg.comm_vocab;
        L.max_force = ck.cfg.max_force;
        ck.learners.push_back(std::move(L));
    }
    return ck;
}

void write_eval_records_csv(std::ostream& out, const std::vector<EvalRecord>& records) {
    out << "n_bodyguards,reward_kind,learner_kind,communication,seed,episode_index,"
           "eval_episode,total_threat,mean_agent_reward,utterance_rate\n";
    for (const EvalRecord& r : records) {
        out << r.id.n_bodyguards << ',' << to_string(r.id.reward_kind) << ','
            << to_string(r.id.learner_kind) << ',' << (r.id.communication ? 1 : 0) << ','
            << r.id.seed << ',' << r.episode_index << ',' << r.eval_episode << ','
            << g9(r.total_threat) << ',' << g9(r.mean_agent_reward) << ','
            << g9(r.utterance_rate) << '\n';
    }
}

std::vector<EvalRecord> read_eval_records_csv(std::istream& in) {
    std::vector<EvalRecord> records;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty eval records csv");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        auto next = [&] {
            if (!std::getline(ss, field, ',')) throw IoError("short eval record row");
            return field;
        };
        EvalRecord r;
        r.id.n_bodyguards = std::stoi(next());
        r.id.reward_kind = reward_kind_from_string(next());
        r.id.learner_kind = learner_kind_from_string(next());
        r.id.communication = next() == "1";
        r.id.seed = std::stoull(next());
        r.episode_index = std::stol(next());
        r.eval_episode = std::stoi(next());
        r.total_threat = std::stod(next());
        r.mean_agent_reward = std::stod(next());
        r.utterance_rate = std::stod(next());
        records.push_back(r);
    }
    return records;
}

}  // namespace vipguard
