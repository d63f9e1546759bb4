#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "vipguard/errors.hpp"
#include "vipguard/mlp.hpp"

using namespace vipguard;

namespace {

Mlp random_net(const std::vector<int>& sizes, std::vector<OutputBlock> blocks,
               std::uint64_t seed) {
    RngStream rng(seed, "net-init");
    return Mlp::make(sizes, std::move(blocks), rng);
}

Eigen::VectorXd random_vec(int n, RngStream& rng) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.normal();
    return v;
}

// scale-aware relative error, the usual gradient-check metric
double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

double scalar_objective(const Mlp& net, const Eigen::VectorXd& x, const Eigen::VectorXd& gy) {
    return forward(net, x).dot(gy);
}

bool nets_identical(const Mlp& a, const Mlp& b) {
    for (std::size_t l = 0; l < a.weights.size(); ++l)
        if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) return false;
    return true;
}

}  // namespace

TEST_CASE("identity single-layer net reproduces its input") {
    Mlp net = random_net({3, 3}, {{Activation::Identity, 3}}, 1);
    net.weights[0] = Eigen::MatrixXd::Identity(3, 3);
    net.biases[0].setZero();
    Eigen::VectorXd x(3);
    x << 0.5, -1.25, 2.0;
    CHECK(forward(net, x) == x);
}

TEST_CASE("tanh head stays inside (-1, 1)") {
    Mlp net = random_net({4, 8, 2}, {{Activation::Tanh, 2}}, 2);
    RngStream rng(3, "inputs");
    for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd y = forward(net, 10.0 * random_vec(4, rng));
        for (int i = 0; i < 2; ++i) {
            CHECK(y(i) > -1.0);
            CHECK(y(i) < 1.0);
        }
    }
}

TEST_CASE("softmax head is a probability vector") {
    Mlp net = random_net({4, 8, 5}, {{Activation::Softmax, 5}}, 4);
    RngStream rng(5, "inputs");
    Eigen::VectorXd y = forward(net, random_vec(4, rng));
    CHECK(y.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(y.minCoeff() > 0.0);
}

TEST_CASE("hand-computed 1-2-1 forward pass") {
    Mlp net = random_net({1, 2, 1}, {{Activation::Identity, 1}}, 6);
    net.weights[0] << 0.5, -0.3;
    net.biases[0] << 0.1, 0.2;
    net.weights[1] << 0.7, -0.4;
    net.biases[1] << 0.05;
    Eigen::VectorXd x(1);
    x << 1.0;
    // z0 = [0.6, -0.1] -> relu -> [0.6, 0]; out = 0.7*0.6 + 0.05 = 0.47
    CHECK(forward(net, x)(0) == doctest::Approx(0.47).epsilon(1e-15));
}

TEST_CASE("zero output gradient gives zero parameter gradients") {
    Mlp net = random_net({3, 8, 4}, {{Activation::Tanh, 2}, {Activation::Softmax, 2}}, 7);
    RngStream rng(8, "inputs");
    auto [grads, input_grad] = backward(net, random_vec(3, rng), Eigen::VectorXd::Zero(4));
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        CHECK(grads.weights[l].isZero(0.0));
        CHECK(grads.biases[l].isZero(0.0));
    }
    CHECK(input_grad.isZero(0.0));
}

TEST_CASE("linear layer gradient has the closed form input * output_grad") {
    Mlp net = random_net({3, 2}, {{Activation::Identity, 2}}, 9);
    RngStream rng(10, "inputs");
    Eigen::VectorXd x = random_vec(3, rng);
    Eigen::VectorXd gy = random_vec(2, rng);
    auto [grads, input_grad] = backward(net, x, gy);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 3; ++j)
            CHECK(grads.weights[0](i, j) == doctest::Approx(x(j) * gy(i)).epsilon(1e-15));
        CHECK(grads.biases[0](i) == gy(i));
    }
    Eigen::VectorXd expect_in = net.weights[0].transpose() * gy;
    for (int j = 0; j < 3; ++j)
        CHECK(input_grad(j) == doctest::Approx(expect_in(j)).epsilon(1e-15));
}

TEST_CASE("analytic gradients match central finite differences") {
    RngStream meta(1234, "fd-meta");
    const double h = 1e-5;
    for (int trial = 0; trial < 30; ++trial) {
        int in = 2 + static_cast<int>(meta.uniform_int(6));
        int hid = 4 + static_cast<int>(meta.uniform_int(29));
        int out = 3 + static_cast<int>(meta.uniform_int(4));
        std::vector<OutputBlock> blocks{{Activation::Tanh, 2},
                                        {Activation::Softmax, out - 2}};
        std::vector<int> sizes = meta.uniform() < 0.5 ? std::vector<int>{in, hid, out}
                                                      : std::vector<int>{in, hid, hid, out};
        Mlp net = random_net(sizes, blocks, 5000 + static_cast<std::uint64_t>(trial));

        RngStream rng(600 + static_cast<std::uint64_t>(trial), "fd-io");
        Eigen::VectorXd x = random_vec(in, rng);
        Eigen::VectorXd gy = random_vec(out, rng);
        auto [grads, input_grad] = backward(net, x, gy);

        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            for (Eigen::Index r = 0; r < net.weights[l].rows(); ++r)
                for (Eigen::Index c = 0; c < net.weights[l].cols(); ++c) {
                    Mlp plus = net, minus = net;
                    plus.weights[l](r, c) += h;
                    minus.weights[l](r, c) -= h;
                    double fd = (scalar_objective(plus, x, gy) -
                                 scalar_objective(minus, x, gy)) /
                                (2 * h);
                    CHECK(rel_err(grads.weights[l](r, c), fd) < 1e-5);
                }
            for (Eigen::Index r = 0; r < net.biases[l].size(); ++r) {
                Mlp plus = net, minus = net;
                plus.biases[l](r) += h;
                minus.biases[l](r) -= h;
                double fd =
                    (scalar_objective(plus, x, gy) - scalar_objective(minus, x, gy)) / (2 * h);
                CHECK(rel_err(grads.biases[l](r), fd) < 1e-5);
            }
        }
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            Eigen::VectorXd xp = x, xm = x;
            xp(i) += h;
            xm(i) -= h;
            double fd = (scalar_objective(net, xp, gy) - scalar_objective(net, xm, gy)) / (2 * h);
            CHECK(rel_err(input_grad(i), fd) < 1e-5);
        }
    }
}

TEST_CASE("zero gradient leaves parameters untouched") {
    Mlp net = random_net({3, 8, 2}, {{Activation::Identity, 2}}, 11);
    Mlp before = net;
    Adam opt = Adam::make(net, 0.1);
    apply_update(net, Gradients::zeros_like(net), opt);
    CHECK(nets_identical(net, before));
}

TEST_CASE("adam descends the quadratic and matches the hand recurrence") {
    // single weight, f(w) = w^2 from w = 1
    Mlp net = random_net({1, 1}, {{Activation::Identity, 1}}, 12);
    net.weights[0](0, 0) = 1.0;
    net.biases[0](0) = 0.0;
    Adam opt = Adam::make(net, 0.1);

    Gradients g = Gradients::zeros_like(net);
    g.weights[0](0, 0) = 2.0 * net.weights[0](0, 0);
    g.biases[0].setZero();
    apply_update(net, g, opt);

    // hand recurrence: m = 0.2, v = 0.004, m_hat = 2, v_hat = 4,
    // w = 1 - 0.1 * 2 / (2 + 1e-8)
    double expect = 1.0 - 0.1 * 2.0 / (2.0 + 1e-8);
    CHECK(net.weights[0](0, 0) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(std::abs(net.weights[0](0, 0)) < 1.0);

    // keep stepping with the true gradient; it should approach 0
    for (int t = 0; t < 300; ++t) {
        g.weights[0](0, 0) = 2.0 * net.weights[0](0, 0);
        apply_update(net, g, opt);
    }
    CHECK(std::abs(net.weights[0](0, 0)) < 0.05);
}

TEST_CASE("identical inputs give identical updates") {
    Mlp a = random_net({4, 16, 3}, {{Activation::Identity, 3}}, 13);
    Mlp b = a;
    Adam oa = Adam::make(a, 1e-2), ob = Adam::make(b, 1e-2);
    RngStream rng(14, "grads");
    Gradients g = Gradients::zeros_like(a);
    for (auto& w : g.weights)
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.normal();
    apply_update(a, g, oa);
    apply_update(b, g, ob);
    CHECK(nets_identical(a, b));
}

TEST_CASE("non-finite gradients are rejected") {
    Mlp net = random_net({2, 4, 1}, {{Activation::Identity, 1}}, 15);
    Gradients g = Gradients::zeros_like(net);
    g.weights[0](0, 0) = std::nan("");
    Adam opt = Adam::make(net, 1e-2);
    CHECK_THROWS_AS(apply_update(net, g, opt), NonFiniteGradient);
}

TEST_CASE("gradient clipping caps the global norm") {
    Mlp net = random_net({2, 4, 1}, {{Activation::Identity, 1}}, 16);
    Gradients g = Gradients::zeros_like(net);
    g.weights[0].setConstant(3.0);
    g.weights[1].setConstant(-2.0);
    double before = g.global_norm();
    REQUIRE(before > 0.5);
    g.clip_global_norm(0.5);
    CHECK(g.global_norm() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("soft update with tau 1 copies and small tau blends") {
    Mlp online = random_net({2, 6, 2}, {{Activation::Tanh, 2}}, 17);
    Mlp target = random_net({2, 6, 2}, {{Activation::Tanh, 2}}, 18);

    Mlp t1 = target;
    soft_update(t1, online, 1.0);
    CHECK(nets_identical(t1, online));

    // scalar view: target 0, online 1, tau 0.01 -> 0.01
    Mlp z = online;
    for (auto& w : z.weights) w.setZero();
    for (auto& b : z.biases) b.setZero();
    Mlp one = online;
    for (auto& w : one.weights) w.setOnes();
    for (auto& b : one.biases) b.setOnes();
    soft_update(z, one, 0.01);
    CHECK(z.weights[0](0, 0) == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("repeated soft updates close the gap geometrically") {
    Mlp online = random_net({2, 6, 2}, {{Activation::Tanh, 2}}, 19);
    Mlp target = random_net({2, 6, 2}, {{Activation::Tanh, 2}}, 20);
    const double tau = 0.1;
    double gap0 = 0.0;
    for (std::size_t l = 0; l < online.weights.size(); ++l)
        gap0 = std::max(gap0, (target.weights[l] - online.weights[l]).cwiseAbs().maxCoeff());

    for (int k = 1; k <= 20; ++k) {
        soft_update(target, online, tau);
        double gap = 0.0;
        for (std::size_t l = 0; l < online.weights.size(); ++l)
            gap = std::max(gap, (target.weights[l] - online.weights[l]).cwiseAbs().maxCoeff());
        // closed form: gap_k = (1 - tau)^k * gap_0
        CHECK(gap == doctest::Approx(std::pow(1.0 - tau, k) * gap0).epsilon(1e-9));
    }
}

TEST_CASE("checkpoint round trip is bit exact") {
    Mlp net = random_net({5, 16, 8, 6}, {{Activation::Tanh, 2}, {Activation::Softmax, 4}}, 21);
    Adam opt = Adam::make(net, 3e-4);
    // push the optimizer into a non-trivial state
    RngStream rng(22, "grads");
    for (int t = 0; t < 3; ++t) {
        Gradients g = Gradients::zeros_like(net);
        for (auto& w : g.weights)
            for (Eigen::Index r = 0; r < w.rows(); ++r)
                for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.normal();
        for (auto& b : g.biases)
            for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = rng.normal();
        apply_update(net, g, opt);
    }

    std::stringstream buf;
    save_mlp(buf, net);
    save_adam(buf, opt);
    Mlp loaded = load_mlp(buf);
    Adam opt_loaded = load_adam(buf, loaded);

    CHECK(nets_identical(loaded, net));
    CHECK(loaded.layer_sizes == net.layer_sizes);
    CHECK(opt_loaded.step_count == opt.step_count);
    CHECK(opt_loaded.lr == opt.lr);
    for (std::size_t l = 0; l < opt.m_w.size(); ++l) {
        CHECK(opt_loaded.m_w[l] == opt.m_w[l]);
        CHECK(opt_loaded.v_w[l] == opt.v_w[l]);
        CHECK(opt_loaded.m_b[l] == opt.m_b[l]);
        CHECK(opt_loaded.v_b[l] == opt.v_b[l]);
    }
}

TEST_CASE("initialization is reproducible and label dependent") {
    RngStream r1(33, "init");
    RngStream r2(33, "init");
    RngStream r3(33, "other");
    Mlp a = Mlp::make({3, 8, 2}, {{Activation::Identity, 2}}, r1);
    Mlp b = Mlp::make({3, 8, 2}, {{Activation::Identity, 2}}, r2);
    Mlp c = Mlp::make({3, 8, 2}, {{Activation::Identity, 2}}, r3);
    CHECK(nets_identical(a, b));
    CHECK_FALSE(nets_identical(a, c));

    // Xavier bound
    double limit = std::sqrt(6.0 / (3 + 8));
    CHECK(a.weights[0].cwiseAbs().maxCoeff() <= limit);
}

TEST_CASE("parameter count follows (fan_in + 1) * fan_out") {
    Mlp net = random_net({5, 16, 8, 6}, {{Activation::Identity, 6}}, 23);
    CHECK(net.parameter_count() == (5 + 1) * 16 + (16 + 1) * 8 + (8 + 1) * 6);
}

TEST_CASE("shape mismatches are rejected") {
    Mlp net = random_net({3, 4, 2}, {{Activation::Identity, 2}}, 24);
    CHECK_THROWS_AS(forward(net, Eigen::VectorXd::Zero(4)), ShapeMismatch);
    RngStream rng(1, "x");
    // block widths do not cover the output layer
    CHECK_THROWS_AS(Mlp::make({3, 4, 2}, {{Activation::Identity, 3}}, rng), ShapeMismatch);
}
