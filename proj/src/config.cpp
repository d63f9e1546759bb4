#include "vipguard/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vipguard {

using nlohmann::json;

std::string to_string(RewardKind k) {
    switch (k) {
        case RewardKind::ThreatOnly: return "threat_only";
        case RewardKind::BinaryThreat: return "binary_threat";
        case RewardKind::Composite: return "composite";
        case RewardKind::CommPenalty: return "comm_penalty";
    }
    return "?";
}

std::string to_string(LearnerKind k) {
    return k == LearnerKind::Ddpg ? "ddpg" : "maddpg";
}

RewardKind reward_kind_from_string(const std::string& s) {
    if (s == "threat_only") return RewardKind::ThreatOnly;
    if (s == "binary_threat") return RewardKind::BinaryThreat;
    if (s == "composite") return RewardKind::Composite;
    if (s == "comm_penalty") return RewardKind::CommPenalty;
    throw ConfigError("reward_kind", "unknown value '" + s + "'");
}

LearnerKind learner_kind_from_string(const std::string& s) {
    if (s == "ddpg") return LearnerKind::Ddpg;
    if (s == "maddpg") return LearnerKind::Maddpg;
    throw ConfigError("learner_kind", "unknown value '" + s + "'");
}

WorldConfig validate_config(const WorldConfig& cfg) {
    auto fail = [](const char* field, const std::string& reason) {
        throw ConfigError(field, reason);
    };
    auto finite_pos = [&](const char* field, double v) {
        if (!(std::isfinite(v) && v > 0.0)) fail(field, "must be finite and > 0");
    };

    if (cfg.n_bodyguards < 1 || cfg.n_bodyguards > 8) fail("n_bodyguards", "must be in [1, 8]");
    if (cfg.n_bystanders < 0) fail("n_bystanders", "must be >= 0");
    if (cfg.n_landmarks < 0) fail("n_landmarks", "must be >= 0");
    finite_pos("world_halfwidth", cfg.world_halfwidth);
    finite_pos("dt", cfg.dt);
    if (!(std::isfinite(cfg.damping) && cfg.damping >= 0.0 && cfg.damping < 1.0))
        fail("damping", "must be in [0, 1)");
    finite_pos("max_speed", cfg.max_speed);
    finite_pos("max_force", cfg.max_force);
    finite_pos("agent_radius", cfg.agent_radius);
    finite_pos("landmark_radius", cfg.landmark_radius);
    if (cfg.episode_length <= 0) fail("episode_length", "must be > 0");
    finite_pos("threat_A", cfg.threat_A);
    finite_pos("threat_B", cfg.threat_B);
    finite_pos("safe_distance", cfg.safe_distance);
    if (!(std::isfinite(cfg.min_distance) && cfg.min_distance >= 0.0))
        fail("min_distance", "must be >= 0");
    if (!(std::isfinite(cfg.band_distance) && cfg.band_distance > cfg.min_distance))
        fail("band_distance", "must be > min_distance");
    if (cfg.band_distance > cfg.safe_distance)
        fail("band_distance", "must be <= safe_distance");
    if (cfg.safe_distance > 2.0 * cfg.world_halfwidth)
        fail("safe_distance", "must be <= 2 * world_halfwidth");
    if (!(std::isfinite(cfg.comm_penalty) && cfg.comm_penalty >= 0.0))
        fail("comm_penalty", "must be >= 0");
    if (cfg.comm_vocab < 1) fail("comm_vocab", "must be >= 1");
    if (!(std::isfinite(cfg.gamma) && cfg.gamma >= 0.0 && cfg.gamma <= 1.0))
        fail("gamma", "must be in [0, 1]");
    if (!(std::isfinite(cfg.tau) && cfg.tau > 0.0 && cfg.tau <= 1.0))
        fail("tau", "must be in (0, 1]");
    if (cfg.replay_capacity < 1) fail("replay_capacity", "must be >= 1");
    if (cfg.batch_size < 1) fail("batch_size", "must be >= 1");
    finite_pos("actor_lr", cfg.actor_lr);
    finite_pos("critic_lr", cfg.critic_lr);
    if (!(std::isfinite(cfg.exploration_sigma) && cfg.exploration_sigma >= 0.0))
        fail("exploration_sigma", "must be >= 0");
    for (int h : cfg.hidden_sizes)
        if (h < 1) fail("hidden_sizes", "entries must be >= 1");
    if (cfg.train_episodes < 0) fail("train_episodes", "must be >= 0");
    if (cfg.eval_episodes < 1) fail("eval_episodes", "must be >= 1");
    return cfg;
}

namespace {

json config_json(const WorldConfig& c) {
    // json object keys are sorted, so serialization is canonical
    json j;
    j["n_bodyguards"] = c.n_bodyguards;
    j["n_bystanders"] = c.n_bystanders;
    j["n_landmarks"] = c.n_landmarks;
    j["world_halfwidth"] = c.world_halfwidth;
    j["dt"] = c.dt;
    j["damping"] = c.damping;
    j["max_speed"] = c.max_speed;
    j["max_force"] = c.max_force;
    j["agent_radius"] = c.agent_radius;
    j["landmark_radius"] = c.landmark_radius;
    j["episode_length"] = c.episode_length;
    j["threat_A"] = c.threat_A;
    j["threat_B"] = c.threat_B;
    j["safe_distance"] = c.safe_distance;
    j["min_distance"] = c.min_distance;
    j["band_distance"] = c.band_distance;
    j["comm_penalty"] = c.comm_penalty;
    j["comm_vocab"] = c.comm_vocab;
    j["reward_kind"] = to_string(c.reward_kind);
    j["learner_kind"] = to_string(c.learner_kind);
    j["gamma"] = c.gamma;
    j["tau"] = c.tau;
    j["replay_capacity"] = c.replay_capacity;
    j["batch_size"] = c.batch_size;
    j["actor_lr"] = c.actor_lr;
    j["critic_lr"] = c.critic_lr;
    j["exploration_sigma"] = c.exploration_sigma;
    j["hidden_sizes"] = c.hidden_sizes;
    j["train_episodes"] = c.train_episodes;
    j["eval_episodes"] = c.eval_episodes;
    j["seed"] = c.seed;
    return j;
}

template <typename T>
void take(json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            throw ConfigError(key, "wrong type");
        }
        j.erase(it);
    }
}

}  // namespace

WorldConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("<json>", e.what());
    }
    if (!j.is_object()) throw ConfigError("<json>", "top level must be an object");

    WorldConfig c;
    take(j, "n_bodyguards", c.n_bodyguards);
    take(j, "n_bystanders", c.n_bystanders);
    take(j, "n_landmarks", c.n_landmarks);
    take(j, "world_halfwidth", c.world_halfwidth);
    take(j, "dt", c.dt);
    take(j, "damping", c.damping);
    take(j, "max_speed", c.max_speed);
    take(j, "max_force", c.max_force);
    take(j, "agent_radius", c.agent_radius);
    take(j, "landmark_radius", c.landmark_radius);
    take(j, "episode_length", c.episode_length);
    take(j, "threat_A", c.threat_A);
    take(j, "threat_B", c.threat_B);
    take(j, "safe_distance", c.safe_distance);
    take(j, "min_distance", c.min_distance);
    take(j, "band_distance", c.band_distance);
    take(j, "comm_penalty", c.comm_penalty);
    take(j, "comm_vocab", c.comm_vocab);
    if (auto it = j.find("reward_kind"); it != j.end()) {
        c.reward_kind = reward_kind_from_string(it->get<std::string>());
        j.erase(it);
    }
    if (auto it = j.find("learner_kind"); it != j.end()) {
        c.learner_kind = learner_kind_from_string(it->get<std::string>());
        j.erase(it);
    }
    take(j, "gamma", c.gamma);
    take(j, "tau", c.tau);
    take(j, "replay_capacity", c.replay_capacity);
    take(j, "batch_size", c.batch_size);
    take(j, "actor_lr", c.actor_lr);
    take(j, "critic_lr", c.critic_lr);
    take(j, "exploration_sigma", c.exploration_sigma);
    take(j, "hidden_sizes", c.hidden_sizes);
    take(j, "train_episodes", c.train_episodes);
    take(j, "eval_episodes", c.eval_episodes);
    take(j, "seed", c.seed);

    if (!j.empty()) throw ConfigError(j.begin().key(), "unknown key");
    return validate_config(c);
}

std::string config_to_json(const WorldConfig& cfg) {
    return config_json(cfg).dump(2) + "\n";
}

WorldConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

void save_config_file(const WorldConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config file '" + path + "'");
    out << config_to_json(cfg);
}

std::string config_hash(const WorldConfig& cfg) {
    std::string s = config_to_json(cfg);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace vipguard
