#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vipguard/rewards.hpp"
#include "vipguard/rng.hpp"

using namespace vipguard;

namespace {

// VIP at the origin, one bodyguard at (guard_dist, 0), bystanders on a ring
// at threat-level tl each (A=B=1, generous safe distance).
const ThreatParams kParams{1.0, 1.0, 10.0};

WorldState make_world(double guard_dist, std::vector<double> bystander_tls) {
    WorldState w;
    w.entities.push_back({EntityKind::Vip, {0, 0}, {}, 0.05});
    w.entities.push_back({EntityKind::Bodyguard, {guard_dist, 0}, {}, 0.05});
    int k = 0;
    for (double tl : bystander_tls) {
        double d = -std::log(tl);
        double angle = 0.4 + 0.9 * k++;
        w.entities.push_back(
            {EntityKind::Bystander, {d * std::cos(angle), d * std::sin(angle)}, {}, 0.05});
    }
    return w;
}

WorldState random_world(RngStream& rng) {
    WorldState w;
    auto pos = [&] { return Vec2{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}; };
    w.entities.push_back({EntityKind::Vip, pos(), {}, 0.05});
    w.entities.push_back({EntityKind::Bodyguard, pos(), {}, 0.05});
    w.entities.push_back({EntityKind::Bodyguard, pos(), {}, 0.05});
    int n_by = static_cast<int>(rng.uniform_int(8));
    for (int i = 0; i < n_by; ++i) w.entities.push_back({EntityKind::Bystander, pos(), {}, 0.05});
    return w;
}

}  // namespace

TEST_CASE("threat-only reward is zero without nearby bystanders") {
    ThreatParams params{3.0, 1.0, 1.0};
    WorldState w = make_world(0.5, {});
    CHECK(threat_only(w, params) == 0.0);
}

TEST_CASE("threat-only reward is minus the single threat level") {
    for (double tl : {0.1, 0.37, 0.9}) {
        WorldState w = make_world(0.5, {tl});
        CHECK(threat_only(w, kParams) == doctest::Approx(-tl).epsilon(1e-12));
    }
}

TEST_CASE("threat-only reward follows the product for two bystanders") {
    WorldState w = make_world(0.5, {0.5, 0.5});
    // product oracle: -(1 - 0.5 * 0.5)
    CHECK(std::abs(threat_only(w, kParams) - (-0.75)) < 1e-12);
}

TEST_CASE("distance band is a closed interval") {
    double m = 0.1, d = 1.0;
    CHECK(distance_band(make_world((m + d) / 2, {}), 0, m, d) == 0.0);
    CHECK(distance_band(make_world(0.0, {}), 0, m, d) == -1.0);
    CHECK(distance_band(make_world(d, {}), 0, m, d) == 0.0);  // boundary included
    CHECK(distance_band(make_world(m, {}), 0, m, d) == 0.0);
    CHECK(distance_band(make_world(d + 1e-9, {}), 0, m, d) == -1.0);
}

TEST_CASE("binary threat covers its three cases") {
    double m = 0.1, d = 1.0;
    CHECK(binary_threat(make_world(0.5, {}), 0, kParams, m, d) == 0.0);
    CHECK(binary_threat(make_world(0.5, {0.3}), 0, kParams, m, d) == -1.0);
    CHECK(binary_threat(make_world(2.0, {0.3}), 0, kParams, m, d) == -2.0);
    CHECK(binary_threat(make_world(2.0, {}), 0, kParams, m, d) == -1.0);
}

TEST_CASE("composite adds the band penalty to the threat term") {
    double m = 0.1, d = 1.0;
    WorldState out_of_band = make_world(2.0, {0.2});
    CHECK(composite(out_of_band, 0, kParams, m, d) == doctest::Approx(-1.2).epsilon(1e-12));
    CHECK(composite(make_world(0.5, {}), 0, kParams, m, d) == 0.0);
    CHECK(std::abs(composite(make_world(0.5, {0.5, 0.5}), 0, kParams, m, d) - (-0.75)) < 1e-12);
}

TEST_CASE("communication penalty only fires on non-silence") {
    double m = 0.1, d = 1.0;
    WorldState w = make_world(0.5, {0.5, 0.5});
    AgentAction silent = silent_action(10);
    AgentAction speaking{{0, 0}, one_hot(10, 3)};

    CHECK(comm_penalty(w, 0, silent, kParams, m, d, 0.05) ==
          composite(w, 0, kParams, m, d));
    CHECK(comm_penalty(w, 0, speaking, kParams, m, d, 0.05) ==
          doctest::Approx(-0.80).epsilon(1e-12));
    CHECK(comm_penalty(w, 0, speaking, kParams, m, d, 0.0) ==
          composite(w, 0, kParams, m, d));
}

TEST_CASE("threat-only ignores the agent index") {
    RngStream rng(5, "rewards");
    for (int t = 0; t < 100; ++t) {
        WorldState w = random_world(rng);
        ThreatParams params{3.0, 1.0, 1.0};
        CHECK(composite(w, 0, params, 0.1, 1.0) - distance_band(w, 0, 0.1, 1.0) ==
              doctest::Approx(composite(w, 1, params, 0.1, 1.0) -
                              distance_band(w, 1, 0.1, 1.0))
                  .epsilon(1e-12));
    }
}

TEST_CASE("rewards are never positive and sit in their ranges") {
    RngStream rng(6, "reward-ranges");
    ThreatParams params{3.0, 1.0, 1.0};
    for (int t = 0; t < 500; ++t) {
        WorldState w = random_world(rng);
        int agent = static_cast<int>(rng.uniform_int(2));
        double to = threat_only(w, params);
        double bt = binary_threat(w, agent, params, 0.1, 1.0);
        double co = composite(w, agent, params, 0.1, 1.0);
        CHECK(to <= 0.0);
        CHECK(to >= -1.0);
        CHECK((bt == 0.0 || bt == -1.0 || bt == -2.0));
        CHECK(co <= 0.0);
        CHECK(co >= -2.0);
    }
}

TEST_CASE("silent communication reward equals composite pointwise") {
    RngStream rng(7, "comm-silent");
    ThreatParams params{3.0, 1.0, 1.0};
    AgentAction silent = silent_action(10);
    for (int t = 0; t < 1000; ++t) {
        WorldState w = random_world(rng);
        int agent = static_cast<int>(rng.uniform_int(2));
        CHECK(comm_penalty(w, agent, silent, params, 0.1, 1.0, 0.05) ==
              composite(w, agent, params, 0.1, 1.0));
    }
}

TEST_CASE("breakdown totals equal the sum of their terms") {
    RngStream rng(8, "breakdown");
    WorldConfig cfg;
    cfg.n_bodyguards = 2;
    AgentAction speaking{{0, 0}, one_hot(cfg.comm_vocab, 2)};
    for (RewardKind kind : {RewardKind::ThreatOnly, RewardKind::BinaryThreat,
                            RewardKind::Composite, RewardKind::CommPenalty}) {
        cfg.reward_kind = kind;
        for (int t = 0; t < 200; ++t) {
            WorldState w = random_world(rng);
            RewardBreakdown b = reward_breakdown(w, 0, speaking, cfg);
            CHECK(std::abs(b.total - (b.threat_term + b.distance_term + b.comm_term)) < 1e-12);
            CHECK(b.threat_term <= 0.0);
            CHECK((b.distance_term == 0.0 || b.distance_term == -1.0));
            CHECK(b.comm_term <= 0.0);
        }
    }
}

TEST_CASE("breakdown selects the configured reward") {
    WorldConfig cfg;
    WorldState w = make_world(0.5, {0.5, 0.5});
    // nudge params to the test values
    cfg.threat_A = 1.0;
    cfg.threat_B = 1.0;
    cfg.safe_distance = 2.0;  // <= 2 * world_halfwidth
    cfg.band_distance = 1.0;
    AgentAction speaking{{0, 0}, one_hot(cfg.comm_vocab, 1)};

    cfg.reward_kind = RewardKind::ThreatOnly;
    double threat_term = reward_breakdown(w, 0, speaking, cfg).total;
    CHECK(threat_term == threat_only(w, ThreatParams::from_config(cfg)));

    cfg.reward_kind = RewardKind::CommPenalty;
    CHECK(reward_breakdown(w, 0, speaking, cfg).total ==
          doctest::Approx(threat_term - 0.05).epsilon(1e-12));
}
