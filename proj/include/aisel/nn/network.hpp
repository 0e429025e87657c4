#ifndef AISEL_NN_NETWORK_HPP
#define AISEL_NN_NETWORK_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aisel/error.hpp"
#include "aisel/nn/matrix.hpp"
#include "aisel/random.hpp"

namespace aisel::nn {

/// Tag values are part of the checkpoint format; do not renumber.
enum class Activation : std::uint8_t {
    identity = 0,
    relu = 1,
    leaky_relu = 2,
    tanh = 3,
    sigmoid = 4,
    softmax = 5,
};

inline constexpr double kLeakySlope = 0.2;

inline std::string_view to_string(Activation a) {
    switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax: return "softmax";
    }
    return "unknown";
}

inline std::optional<Activation> activation_from_tag(std::uint8_t tag) {
    if (tag > static_cast<std::uint8_t>(Activation::softmax)) {
        return std::nullopt;
    }
    return static_cast<Activation>(tag);
}

struct LayerSpec {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    Activation activation = Activation::identity;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// One dense layer, y = act(x W + b) with x a row. `weights` is in_dim x out_dim.
struct Layer {
    LayerSpec spec;
    Matrix weights;
    RowVector bias;
};

/// Sequential stack of dense layers.
///
/// `generation` is bumped by every in-place parameter update so that
/// forward caches taken before an update are rejected by backward().
struct Network {
    std::vector<Layer> layers;
    std::uint64_t generation = 0;

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().spec.in_dim; }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().spec.out_dim; }

    std::vector<LayerSpec> specs() const {
        std::vector<LayerSpec> out;
        out.reserve(layers.size());
        for (const auto& l : layers) {
            out.push_back(l.spec);
        }
        return out;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) {
            n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
        }
        return n;
    }

    /// Flat view over all parameters: layer by layer, weights (row-major) then biases.
    double& parameter(std::size_t index) {
        for (auto& l : layers) {
            const auto nw = static_cast<std::size_t>(l.weights.size());
            if (index < nw) {
                return l.weights.data()[index];
            }
            index -= nw;
            const auto nb = static_cast<std::size_t>(l.bias.size());
            if (index < nb) {
                return l.bias.data()[index];
            }
            index -= nb;
        }
        throw ArgumentError("parameter index out of range");
    }

    double parameter(std::size_t index) const { return const_cast<Network*>(this)->parameter(index); }

    double max_abs_parameter() const {
        double m = 0.0;
        for (const auto& l : layers) {
            if (l.weights.size() > 0) m = std::max(m, l.weights.cwiseAbs().maxCoeff());
            if (l.bias.size() > 0) m = std::max(m, l.bias.cwiseAbs().maxCoeff());
        }
        return m;
    }

    bool parameters_finite() const {
        for (const auto& l : layers) {
            if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
        }
        return true;
    }

    friend bool operator==(const Network& a, const Network& b) {
        if (a.layers.size() != b.layers.size()) return false;
        for (std::size_t i = 0; i < a.layers.size(); ++i) {
            const auto& x = a.layers[i];
            const auto& y = b.layers[i];
            if (x.spec.in_dim != y.spec.in_dim || x.spec.out_dim != y.spec.out_dim ||
                x.spec.activation != y.spec.activation || x.weights != y.weights || x.bias != y.bias) {
                return false;
            }
        }
        return true;
    }
};

inline void validate_specs(const std::vector<LayerSpec>& specs) {
    if (specs.empty()) {
        throw ShapeError("network needs at least one layer");
    }
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (specs[i].in_dim == 0 || specs[i].out_dim == 0) {
            throw ShapeError("layer " + std::to_string(i) + " has a zero dimension");
        }
        if (specs[i].activation == Activation::softmax && i + 1 != specs.size()) {
            throw ArgumentError("softmax is only allowed on the final layer");
        }
        if (i > 0 && specs[i - 1].out_dim != specs[i].in_dim) {
            throw ShapeError("layer " + std::to_string(i - 1) + " out_dim " + std::to_string(specs[i - 1].out_dim) +
                             " does not chain into in_dim " + std::to_string(specs[i].in_dim));
        }
    }
}

/// Builds a network with fan-in scaled uniform weights and zero biases.
/// relu/leaky_relu layers get variance 2/fan_in, everything else 1/fan_in.
inline Network init_network(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
    validate_specs(specs);
    Engine rng(seed);
    Network net;
    net.layers.reserve(specs.size());
    for (const auto& s : specs) {
        const bool rectifier = s.activation == Activation::relu || s.activation == Activation::leaky_relu;
        const double variance = (rectifier ? 2.0 : 1.0) / static_cast<double>(s.in_dim);
        const double limit = std::sqrt(3.0 * variance);
        Layer layer{s, Matrix(s.in_dim, s.out_dim), RowVector::Zero(s.out_dim)};
        for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
            layer.weights.data()[i] = uniform(rng, -limit, limit);
        }
        net.layers.push_back(std::move(layer));
    }
    return net;
}

/// Same shapes as `specs`, every parameter exactly zero.
inline Network zero_network(const std::vector<LayerSpec>& specs) {
    validate_specs(specs);
    Network net;
    for (const auto& s : specs) {
        net.layers.push_back(Layer{s, Matrix::Zero(s.in_dim, s.out_dim), RowVector::Zero(s.out_dim)});
    }
    return net;
}

/// Per-layer activations of one forward pass. activations[0] is the input
/// batch, activations[i + 1] the output of layer i.
struct ForwardCache {
    std::vector<Matrix> activations;
    std::uint64_t generation = 0;
    std::vector<LayerSpec> specs;

    const Matrix& output() const { return activations.back(); }
};

struct LayerGradient {
    Matrix d_weights;
    RowVector d_bias;
};

struct Gradients {
    std::vector<LayerGradient> layers;
    /// Gradient with respect to the forward input batch.
    Matrix input;

    static Gradients zeros_like(const Network& net) {
        Gradients g;
        for (const auto& l : net.layers) {
            g.layers.push_back({Matrix::Zero(l.weights.rows(), l.weights.cols()), RowVector::Zero(l.bias.size())});
        }
        return g;
    }

    Gradients& operator*=(double s) {
        for (auto& l : layers) {
            l.d_weights *= s;
            l.d_bias *= s;
        }
        input *= s;
        return *this;
    }

    bool finite() const {
        for (const auto& l : layers) {
            if (!l.d_weights.allFinite() || !l.d_bias.allFinite()) return false;
        }
        return input.allFinite();
    }

    double parameter(std::size_t index) const {
        for (const auto& l : layers) {
            const auto nw = static_cast<std::size_t>(l.d_weights.size());
            if (index < nw) return l.d_weights.data()[index];
            index -= nw;
            const auto nb = static_cast<std::size_t>(l.d_bias.size());
            if (index < nb) return l.d_bias.data()[index];
            index -= nb;
        }
        throw ArgumentError("gradient index out of range");
    }
};

namespace detail {

inline void apply_activation(Activation a, Matrix& z) {
    switch (a) {
    case Activation::identity:
        break;
    case Activation::relu:
        z = z.cwiseMax(0.0);
        break;
    case Activation::leaky_relu:
        z = z.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
        break;
    case Activation::tanh:
        z = z.array().tanh().matrix();
        break;
    case Activation::sigmoid:
        z = z.unaryExpr([](double v) {
            if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
            const double e = std::exp(v);
            return e / (1.0 + e);
        });
        break;
    case Activation::softmax:
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            auto row = z.row(r);
            const double mx = row.maxCoeff();
            row = (row.array() - mx).exp().matrix();
            row /= row.sum();
        }
        break;
    }
}

/// Maps dL/dy to dL/dz for y = act(z), using only the stored output y.
inline Matrix activation_backward(Activation a, const Matrix& y, const Matrix& grad) {
    switch (a) {
    case Activation::identity:
        return grad;
    case Activation::relu:
        return (y.array() > 0.0).select(grad, 0.0);
    case Activation::leaky_relu:
        return (y.array() > 0.0).select(grad, kLeakySlope * grad);
    case Activation::tanh:
        return grad.cwiseProduct((1.0 - y.array().square()).matrix());
    case Activation::sigmoid:
        return grad.cwiseProduct((y.array() * (1.0 - y.array())).matrix());
    case Activation::softmax: {
        Matrix out(grad.rows(), grad.cols());
        for (Eigen::Index r = 0; r < grad.rows(); ++r) {
            const double dot = grad.row(r).dot(y.row(r));
            out.row(r) = y.row(r).cwiseProduct((grad.row(r).array() - dot).matrix());
        }
        return out;
    }
    }
    return grad;
}

} // namespace detail

inline ForwardCache forward(const Network& net, const Matrix& batch) {
    if (net.layers.empty()) {
        throw ShapeError("forward on an empty network");
    }
    if (static_cast<std::size_t>(batch.cols()) != net.input_dim()) {
        throw ShapeError("forward input has " + std::to_string(batch.cols()) + " columns, network expects " +
                         std::to_string(net.input_dim()));
    }
    ForwardCache cache;
    cache.generation = net.generation;
    cache.specs = net.specs();
    cache.activations.reserve(net.layers.size() + 1);
    cache.activations.push_back(batch);
    for (const auto& layer : net.layers) {
        Matrix z = cache.activations.back() * layer.weights;
        z.rowwise() += layer.bias;
        detail::apply_activation(layer.spec.activation, z);
        cache.activations.push_back(std::move(z));
    }
    require_finite(cache.output(), "forward output");
    return cache;
}

/// Convenience wrapper returning only the network output.
inline Matrix predict(const Network& net, const Matrix& batch) {
    return std::move(forward(net, batch).activations.back());
}

namespace detail {

inline void check_cache(const Network& net, const ForwardCache& cache) {
    if (cache.generation != net.generation || cache.activations.size() != net.layers.size() + 1) {
        throw ArgumentError("stale or mismatched forward cache");
    }
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& a = cache.specs[i];
        const auto& b = net.layers[i].spec;
        if (a.in_dim != b.in_dim || a.out_dim != b.out_dim || a.activation != b.activation) {
            throw ArgumentError("forward cache was taken from a different architecture");
        }
    }
}

inline Gradients backward_from(const Network& net, const ForwardCache& cache, Matrix delta, std::size_t top) {
    Gradients g;
    g.layers.resize(net.layers.size());
    for (std::size_t li = top + 1; li-- > 0;) {
        const auto& layer = net.layers[li];
        if (li != top) {
            delta = activation_backward(layer.spec.activation, cache.activations[li + 1], delta);
        }
        const Matrix& in = cache.activations[li];
        g.layers[li].d_weights = in.transpose() * delta;
        g.layers[li].d_bias = delta.colwise().sum();
        delta = delta * layer.weights.transpose();
    }
    g.input = std::move(delta);
    if (!g.finite()) {
        throw NumericError("non-finite gradient in backward");
    }
    return g;
}

} // namespace detail

/// Reverse-mode gradients of <output_grad, forward(net, x)> with respect to
/// every parameter and to the input batch.
inline Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& output_grad) {
    detail::check_cache(net, cache);
    if (output_grad.rows() != cache.output().rows() || output_grad.cols() != cache.output().cols()) {
        throw ShapeError("output gradient does not match forward output");
    }
    const std::size_t top = net.layers.size() - 1;
    Matrix delta = detail::activation_backward(net.layers[top].spec.activation, cache.output(), output_grad);
    return detail::backward_from(net, cache, std::move(delta), top);
}

/// Like backward(), but `logit_grad` is already the gradient with respect to
/// the final layer's pre-activation (the softmax + cross-entropy shortcut).
inline Gradients backward_from_logits(const Network& net, const ForwardCache& cache, const Matrix& logit_grad) {
    detail::check_cache(net, cache);
    if (logit_grad.rows() != cache.output().rows() || logit_grad.cols() != cache.output().cols()) {
        throw ShapeError("logit gradient does not match forward output");
    }
    return detail::backward_from(net, cache, logit_grad, net.layers.size() - 1);
}

} // namespace aisel::nn

#endif
