#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "vipguard/config.hpp"
#include "vipguard/rng.hpp"

using namespace vipguard;

TEST_CASE("default config is valid") {
    WorldConfig cfg;
    CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("band ordering accepted when m < d <= safe_distance") {
    WorldConfig cfg;
    cfg.min_distance = 0.1;
    cfg.band_distance = 0.5;
    cfg.safe_distance = 1.0;
    cfg.threat_B = 1.0;
    CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("band inversion rejected on band_distance") {
    WorldConfig cfg;
    cfg.band_distance = 0.1;
    cfg.min_distance = 0.5;
    try {
        validate_config(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field == "band_distance");
    }
}

TEST_CASE("gamma outside [0,1] rejected on gamma") {
    WorldConfig cfg;
    cfg.gamma = 1.2;
    try {
        validate_config(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field == "gamma");
    }
}

TEST_CASE("more validation rejects") {
    WorldConfig cfg;
    cfg.n_bodyguards = 9;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);

    cfg = WorldConfig{};
    cfg.damping = 1.0;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);

    cfg = WorldConfig{};
    cfg.tau = 0.0;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);

    cfg = WorldConfig{};
    cfg.safe_distance = 5.0;  // > 2 * world_halfwidth
    cfg.band_distance = 5.0;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("config serialize -> parse -> serialize is byte identical") {
    WorldConfig cfg;
    cfg.n_bodyguards = 4;
    cfg.exploration_sigma = 0.3;
    cfg.hidden_sizes = {32, 16};
    cfg.seed = 0xdeadbeefcafef00dull;
    std::string once = config_to_json(cfg);
    WorldConfig parsed = config_from_json(once);
    CHECK(config_to_json(parsed) == once);
    CHECK(parsed == cfg);
}

TEST_CASE("unknown config key is an error") {
    CHECK_THROWS_AS(config_from_json(R"({"n_bodygaurds": 2})"), ConfigError);
}

TEST_CASE("wrong-typed config value is an error") {
    CHECK_THROWS_AS(config_from_json(R"({"n_bodyguards": "two"})"), ConfigError);
}

TEST_CASE("config hash changes with content") {
    WorldConfig a, b;
    b.n_bystanders = 11;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a) == config_hash(WorldConfig{}));
}

TEST_CASE("same (seed, label) gives an identical stream") {
    RngStream a(42, "env");
    RngStream b(42, "env");
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct labels give distinct streams") {
    RngStream a(42, "env");
    RngStream b(42, "noise");
    CHECK(a.next_u64() != b.next_u64());
}

TEST_CASE("distinct seeds give distinct streams") {
    RngStream a(42, "env");
    RngStream b(43, "env");
    bool any_diff = false;
    for (int i = 0; i < 10; ++i) any_diff |= (a.next_u64() != b.next_u64());
    CHECK(any_diff);
}

TEST_CASE("uniform stays in range and covers it") {
    RngStream rng(7, "uniform");
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("uniform_int hits every value in a small range") {
    RngStream rng(7, "uniform_int");
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        auto v = rng.uniform_int(5);
        CHECK(v < 5);
        seen.insert(v);
    }
    CHECK(seen.size() == 5);
}

TEST_CASE("normal has roughly the requested moments") {
    RngStream rng(11, "normal");
    const int n = 20000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal(2.0, 3.0);
        sum += x;
        sum_sq += x * x;
    }
    double mean = sum / n;
    double var = sum_sq / n - mean * mean;
    CHECK(mean == doctest::Approx(2.0).epsilon(0.05));
    CHECK(std::sqrt(var) == doctest::Approx(3.0).epsilon(0.05));
}
