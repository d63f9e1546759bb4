#include "vipguard/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

#include "vipguard/errors.hpp"

namespace vipguard {

namespace {

void check_blocks(const std::vector<int>& sizes, const std::vector<OutputBlock>& blocks) {
    if (sizes.size() < 2) throw ShapeMismatch("need at least input and output sizes");
    int total = 0;
    for (const auto& b : blocks) {
        if (b.width <= 0) throw ShapeMismatch("output block width must be > 0");
        total += b.width;
    }
    if (total != sizes.back()) throw ShapeMismatch("output blocks must cover the output layer");
}

void apply_output_blocks(const std::vector<OutputBlock>& blocks, Eigen::MatrixXd& z) {
    int row = 0;
    for (const auto& blk : blocks) {
        auto seg = z.middleRows(row, blk.width);
        switch (blk.activation) {
            case Activation::Identity: break;
            case Activation::Tanh:
                seg = seg.array().tanh();
                break;
            case Activation::Softmax:
                for (Eigen::Index c = 0; c < seg.cols(); ++c) {
                    auto col = seg.col(c);
                    col.array() -= col.maxCoeff();
                    col = col.array().exp();
                    col /= col.sum();
                }
                break;
        }
        row += blk.width;
    }
}

// dz given the block output y and incoming gradient g
void output_blocks_backward(const std::vector<OutputBlock>& blocks, const Eigen::MatrixXd& y,
                            const Eigen::MatrixXd& g, Eigen::MatrixXd& dz) {
    dz.resize(y.rows(), y.cols());
    int row = 0;
    for (const auto& blk : blocks) {
        auto ys = y.middleRows(row, blk.width);
        auto gs = g.middleRows(row, blk.width);
        auto ds = dz.middleRows(row, blk.width);
        switch (blk.activation) {
            case Activation::Identity:
                ds = gs;
                break;
            case Activation::Tanh:
                ds = gs.array() * (1.0 - ys.array().square());
                break;
            case Activation::Softmax:
                for (Eigen::Index c = 0; c < ys.cols(); ++c) {
                    double dot = gs.col(c).dot(ys.col(c));
                    ds.col(c) = ys.col(c).array() * (gs.col(c).array() - dot);
                }
                break;
        }
        row += blk.width;
    }
}

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Tanh: return "tanh";
        case Activation::Softmax: return "softmax";
    }
    return "?";
}

Activation activation_from_name(const std::string& s) {
    if (s == "identity") return Activation::Identity;
    if (s == "tanh") return Activation::Tanh;
    if (s == "softmax") return Activation::Softmax;
    throw IoError("unknown activation '" + s + "'");
}

std::string hex_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_double(const std::string& tok) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str()) throw IoError("bad number '" + tok + "'");
    return v;
}

void write_values(std::ostream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << ' ' << hex_double(m(r, c));
    out << '\n';
}

void read_values(std::istream& in, Eigen::MatrixXd& m) {
    std::string tok;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (!(in >> tok)) throw IoError("truncated parameter dump");
            m(r, c) = parse_double(tok);
        }
}

void write_values(std::ostream& out, const Eigen::VectorXd& v) {
    for (Eigen::Index r = 0; r < v.size(); ++r) out << ' ' << hex_double(v(r));
    out << '\n';
}

void read_values(std::istream& in, Eigen::VectorXd& v) {
    std::string tok;
    for (Eigen::Index r = 0; r < v.size(); ++r) {
        if (!(in >> tok)) throw IoError("truncated parameter dump");
        v(r) = parse_double(tok);
    }
}

void expect_tag(std::istream& in, const std::string& want) {
    std::string tok;
    if (!(in >> tok) || tok != want) throw IoError("expected '" + want + "'");
}

}  // namespace

Mlp Mlp::make(const std::vector<int>& sizes, std::vector<OutputBlock> blocks, RngStream& rng) {
    check_blocks(sizes, blocks);
    Mlp net;
    net.layer_sizes = sizes;
    net.output_blocks = std::move(blocks);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        int fan_in = sizes[l];
        int fan_out = sizes[l + 1];
        double limit = std::sqrt(6.0 / (fan_in + fan_out));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-limit, limit);
        Eigen::VectorXd b(fan_out);
        for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = rng.uniform(-limit, limit);
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

long Mlp::parameter_count() const {
    long n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l)
        n += weights[l].size() + biases[l].size();
    return n;
}

bool Mlp::finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l)
        if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    return true;
}

Gradients Gradients::zeros_like(const Mlp& net) {
    Gradients g;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        g.weights.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
        g.biases.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    }
    return g;
}

double Gradients::global_norm() const {
    double sq = 0.0;
    for (std::size_t l = 0; l < weights.size(); ++l)
        sq += weights[l].squaredNorm() + biases[l].squaredNorm();
    return std::sqrt(sq);
}

void Gradients::clip_global_norm(double max_norm) {
    double n = global_norm();
    if (n <= max_norm || n == 0.0) return;
    double scale = max_norm / n;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] *= scale;
        biases[l] *= scale;
    }
}

Eigen::MatrixXd forward_batch(const Mlp& net, const Eigen::MatrixXd& inputs,
                              ForwardCache* cache) {
    if (inputs.rows() != net.input_size()) throw ShapeMismatch("forward input rows");
    const std::size_t layers = net.weights.size();
    if (cache) {
        cache->activations.assign(layers, {});
        cache->preacts.assign(layers, {});
    }

    Eigen::MatrixXd a = inputs;
    for (std::size_t l = 0; l < layers; ++l) {
        if (cache) cache->activations[l] = a;
        Eigen::MatrixXd z = (net.weights[l] * a).colwise() + net.biases[l];
        if (l + 1 < layers) {
            if (cache) cache->preacts[l] = z;
            a = z.array().max(0.0);
        } else {
            if (cache) cache->preacts[l] = z;
            apply_output_blocks(net.output_blocks, z);
            a = std::move(z);
        }
    }
    if (cache) cache->output = a;
    return a;
}

Gradients backward_batch(const Mlp& net, const ForwardCache& cache,
                         const Eigen::MatrixXd& output_grads, Eigen::MatrixXd* input_grads) {
    const std::size_t layers = net.weights.size();
    if (output_grads.rows() != net.output_size()) throw ShapeMismatch("output grad rows");
    if (cache.activations.size() != layers) throw ShapeMismatch("stale forward cache");

    Gradients grads;
    grads.weights.resize(layers);
    grads.biases.resize(layers);

    Eigen::MatrixXd dz;
    output_blocks_backward(net.output_blocks, cache.output, output_grads, dz);

    for (std::size_t l = layers; l-- > 0;) {
        grads.weights[l].noalias() = dz * cache.activations[l].transpose();
        grads.biases[l] = dz.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd da = net.weights[l].transpose() * dz;
            dz = da.array() * (cache.preacts[l - 1].array() > 0.0).cast<double>();
        } else if (input_grads) {
            input_grads->noalias() = net.weights[0].transpose() * dz;
        }
    }
    return grads;
}

Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& input) {
    return forward_batch(net, input);
}

std::pair<Gradients, Eigen::VectorXd> backward(const Mlp& net, const Eigen::VectorXd& input,
                                               const Eigen::VectorXd& output_grad) {
    ForwardCache cache;
    forward_batch(net, input, &cache);
    Eigen::MatrixXd input_grads;
    Gradients grads = backward_batch(net, cache, output_grad, &input_grads);
    return {std::move(grads), Eigen::VectorXd(input_grads.col(0))};
}

Adam Adam::make(const Mlp& net, double lr) {
    Adam opt;
    opt.lr = lr;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        opt.m_w.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
        opt.v_w.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
        opt.m_b.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
        opt.v_b.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    }
    return opt;
}

void apply_update(Mlp& net, const Gradients& grads, Adam& opt) {
    if (grads.weights.size() != net.weights.size()) throw ShapeMismatch("gradient layer count");
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        if (grads.weights[l].rows() != net.weights[l].rows() ||
            grads.weights[l].cols() != net.weights[l].cols() ||
            grads.biases[l].size() != net.biases[l].size())
            throw ShapeMismatch("gradient layer " + std::to_string(l));
        if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite())
            throw NonFiniteGradient("layer " + std::to_string(l));
    }

    opt.step_count += 1;
    double corr1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step_count));
    double corr2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step_count));
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        opt.m_w[l] = opt.beta1 * opt.m_w[l] + (1.0 - opt.beta1) * grads.weights[l];
        opt.v_w[l] = opt.beta2 * opt.v_w[l].array() +
                     (1.0 - opt.beta2) * grads.weights[l].array().square();
        net.weights[l].array() -= opt.lr * (opt.m_w[l].array() / corr1) /
                                  ((opt.v_w[l].array() / corr2).sqrt() + opt.eps);

        opt.m_b[l] = opt.beta1 * opt.m_b[l] + (1.0 - opt.beta1) * grads.biases[l];
        opt.v_b[l] = opt.beta2 * opt.v_b[l].array() +
                     (1.0 - opt.beta2) * grads.biases[l].array().square();
        net.biases[l].array() -= opt.lr * (opt.m_b[l].array() / corr1) /
                                 ((opt.v_b[l].array() / corr2).sqrt() + opt.eps);
    }
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
    if (target.layer_sizes != online.layer_sizes) throw ShapeMismatch("soft update layer sizes");
    for (std::size_t l = 0; l < target.weights.size(); ++l) {
        target.weights[l] = tau * online.weights[l] + (1.0 - tau) * target.weights[l];
        target.biases[l] = tau * online.biases[l] + (1.0 - tau) * target.biases[l];
    }
}

void save_mlp(std::ostream& out, const Mlp& net) {
    out << "mlp 1\nsizes " << net.layer_sizes.size();
    for (int s : net.layer_sizes) out << ' ' << s;
    out << "\nblocks " << net.output_blocks.size();
    for (const auto& b : net.output_blocks)
        out << ' ' << activation_name(b.activation) << ' ' << b.width;
    out << '\n';
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        out << "layer " << l << '\n';
        write_values(out, net.weights[l]);
        write_values(out, net.biases[l]);
    }
    out << "end\n";
}

Mlp load_mlp(std::istream& in) {
    expect_tag(in, "mlp");
    int version = 0;
    in >> version;
    if (version != 1) throw IoError("unsupported mlp version");

    Mlp net;
    expect_tag(in, "sizes");
    std::size_t n = 0;
    in >> n;
    net.layer_sizes.resize(n);
    for (auto& s : net.layer_sizes) in >> s;

    expect_tag(in, "blocks");
    std::size_t nb = 0;
    in >> nb;
    for (std::size_t i = 0; i < nb; ++i) {
        std::string name;
        OutputBlock b;
        in >> name >> b.width;
        b.activation = activation_from_name(name);
        net.output_blocks.push_back(b);
    }
    if (!in) throw IoError("bad mlp header");
    check_blocks(net.layer_sizes, net.output_blocks);

    for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
        expect_tag(in, "layer");
        std::size_t idx = 0;
        in >> idx;
        if (idx != l) throw IoError("layer index mismatch");
        Eigen::MatrixXd w(net.layer_sizes[l + 1], net.layer_sizes[l]);
        Eigen::VectorXd b(net.layer_sizes[l + 1]);
        read_values(in, w);
        read_values(in, b);
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    expect_tag(in, "end");
    return net;
}

void save_adam(std::ostream& out, const Adam& opt) {
    out << "adam 1\n"
        << hex_double(opt.lr) << ' ' << hex_double(opt.beta1) << ' ' << hex_double(opt.beta2)
        << ' ' << hex_double(opt.eps) << ' ' << opt.step_count << '\n';
    for (std::size_t l = 0; l < opt.m_w.size(); ++l) {
        write_values(out, opt.m_w[l]);
        write_values(out, opt.v_w[l]);
        write_values(out, opt.m_b[l]);
        write_values(out, opt.v_b[l]);
    }
    out << "end\n";
}

Adam load_adam(std::istream& in, const Mlp& net) {
    expect_tag(in, "adam");
    int version = 0;
    in >> version;
    if (version != 1) throw IoError("unsupported adam version");

    Adam opt = Adam::make(net, 1e-3);
    std::string tok;
    in >> tok;
    opt.lr = parse_double(tok);
    in >> tok;
    opt.beta1 = parse_double(tok);
    in >> tok;
    opt.beta2 = parse_double(tok);
    in >> tok;
    opt.eps = parse_double(tok);
    in >> opt.step_count;
    for (std::size_t l = 0; l < opt.m_w.size(); ++l) {
        read_values(in, opt.m_w[l]);
        read_values(in, opt.v_w[l]);
        read_values(in, opt.m_b[l]);
        read_values(in, opt.v_b[l]);
    }
    expect_tag(in, "end");
    return opt;
}

}  // namespace vipguard
