#ifndef AISEL_NN_OPTIMIZER_HPP
#define AISEL_NN_OPTIMIZER_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "aisel/error.hpp"
#include "aisel/nn/network.hpp"

namespace aisel::nn {

enum class OptimizerKind { sgd, adam };

inline std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

inline std::optional<OptimizerKind> optimizer_from_string(std::string_view s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adam") return OptimizerKind::adam;
    return std::nullopt;
}

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t steps = 0;
    /// Adam moments; allocated on the first adam step.
    Gradients first;
    Gradients second;

    static OptimizerState make(OptimizerKind kind, double learning_rate) {
        if (!(learning_rate > 0.0)) {
            throw ArgumentError("learning rate must be positive");
        }
        OptimizerState s;
        s.kind = kind;
        s.learning_rate = learning_rate;
        return s;
    }
};

namespace detail {

inline void check_gradient_shapes(const Network& net, const Gradients& g) {
    if (g.layers.size() != net.layers.size()) {
        throw ShapeError("gradient layer count does not match network");
    }
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& l = net.layers[i];
        const auto& d = g.layers[i];
        if (d.d_weights.rows() != l.weights.rows() || d.d_weights.cols() != l.weights.cols() ||
            d.d_bias.size() != l.bias.size()) {
            throw ShapeError("gradient shape mismatch at layer " + std::to_string(i));
        }
    }
}

} // namespace detail

/// Descends along `grads`: p <- p - lr * g for sgd, bias-corrected Adam otherwise.
inline void step(Network& net, const Gradients& grads, OptimizerState& opt) {
    detail::check_gradient_shapes(net, grads);
    ++opt.steps;
    if (opt.kind == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            net.layers[i].weights -= opt.learning_rate * grads.layers[i].d_weights;
            net.layers[i].bias -= opt.learning_rate * grads.layers[i].d_bias;
        }
    } else {
        if (opt.first.layers.size() != net.layers.size()) {
            opt.first = Gradients::zeros_like(net);
            opt.second = Gradients::zeros_like(net);
        }
        const double t = static_cast<double>(opt.steps);
        const double c1 = 1.0 - std::pow(opt.beta1, t);
        const double c2 = 1.0 - std::pow(opt.beta2, t);
        auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
            m = opt.beta1 * m + (1.0 - opt.beta1) * g;
            v = opt.beta2 * v + (1.0 - opt.beta2) * g.cwiseProduct(g);
            param.array() -= opt.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + opt.epsilon);
        };
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            update(net.layers[i].weights, opt.first.layers[i].d_weights, opt.second.layers[i].d_weights,
                   grads.layers[i].d_weights);
            update(net.layers[i].bias, opt.first.layers[i].d_bias, opt.second.layers[i].d_bias,
                   grads.layers[i].d_bias);
        }
    }
    ++net.generation;
    if (!net.parameters_finite()) {
        throw NumericError("optimizer step produced non-finite parameters");
    }
}

/// Projects every weight and bias onto [-beta, beta].
inline void clip_params(Network& net, double beta) {
    if (!(beta > 0.0)) {
        throw ArgumentError("clip bound must be positive");
    }
    for (auto& l : net.layers) {
        l.weights = l.weights.cwiseMax(-beta).cwiseMin(beta);
        l.bias = l.bias.cwiseMax(-beta).cwiseMin(beta);
    }
    ++net.generation;
}

} // namespace aisel::nn

#endif
