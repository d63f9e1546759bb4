#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <utility>
#include <vector>

#include "vipguard/rng.hpp"

namespace vipguard {

enum class Activation { Identity, Tanh, Softmax };

// The output layer is split into blocks, each with its own activation, so an
// actor can put a bounded force head next to a categorical utterance head.
struct OutputBlock {
    Activation activation = Activation::Identity;
    int width = 0;
};

// Dense feed-forward approximator: ReLU hidden layers, per-block output
// activations, 64-bit throughout.
struct Mlp {
    std::vector<int> layer_sizes;  // input, hidden..., output
    std::vector<Eigen::MatrixXd> weights;  // weights[l] is sizes[l+1] x sizes[l]
    std::vector<Eigen::VectorXd> biases;
    std::vector<OutputBlock> output_blocks;

    // Xavier-style init: every parameter uniform in +-sqrt(6/(fan_in+fan_out)),
    // drawn from the given stream in a fixed order (bit-reproducible).
    static Mlp make(const std::vector<int>& sizes, std::vector<OutputBlock> blocks,
                    RngStream& rng);

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
    long parameter_count() const;
    bool finite() const;
};

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    static Gradients zeros_like(const Mlp& net);
    double global_norm() const;
    void clip_global_norm(double max_norm);
};

Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& input);

// Exact reverse-mode gradients of <output, output_grad> with respect to the
// parameters and the input.
std::pair<Gradients, Eigen::VectorXd> backward(const Mlp& net, const Eigen::VectorXd& input,
                                               const Eigen::VectorXd& output_grad);

// Batched path (one column per sample) used by the learner; gradients are
// summed over columns, so pass output_grads scaled by 1/batch for means.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> activations;  // a_0 = input, ..., a_{L-1}
    std::vector<Eigen::MatrixXd> preacts;      // z_l per layer
    Eigen::MatrixXd output;
};

Eigen::MatrixXd forward_batch(const Mlp& net, const Eigen::MatrixXd& inputs,
                              ForwardCache* cache = nullptr);
Gradients backward_batch(const Mlp& net, const ForwardCache& cache,
                         const Eigen::MatrixXd& output_grads,
                         Eigen::MatrixXd* input_grads = nullptr);

// Adam with bias correction; apply_update takes a descent step, callers flip
// the gradient sign for ascent.
struct Adam {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step_count = 0;
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;

    static Adam make(const Mlp& net, double lr);
};

void apply_update(Mlp& net, const Gradients& grads, Adam& opt);

// target <- tau * online + (1 - tau) * target, elementwise.
void soft_update(Mlp& target, const Mlp& online, double tau);

// Versioned text dump, hexfloat parameters; round trips bit-exactly.
void save_mlp(std::ostream& out, const Mlp& net);
Mlp load_mlp(std::istream& in);
void save_adam(std::ostream& out, const Adam& opt);
Adam load_adam(std::istream& in, const Mlp& net);

}  // namespace vipguard
