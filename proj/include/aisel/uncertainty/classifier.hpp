#ifndef AISEL_UNCERTAINTY_CLASSIFIER_HPP
#define AISEL_UNCERTAINTY_CLASSIFIER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "aisel/error.hpp"
#include "aisel/json_util.hpp"
#include "aisel/nn/loss.hpp"
#include "aisel/nn/network.hpp"
#include "aisel/nn/optimizer.hpp"
#include "aisel/pipeline/dataset.hpp"
#include "aisel/random.hpp"

namespace aisel::uncertainty {

using pipeline::Dataset;

/// Training schedule of the native and improved classifiers. The learning
/// rate starts at `learning_rate` and is multiplied by `decay_factor` every
/// `decay_every` epochs.
struct ClassifierConfig {
    std::size_t epochs = 80;
    double learning_rate = 1e-4;
    std::size_t decay_every = 20;
    double decay_factor = 0.5;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
    std::vector<std::size_t> hidden{128, 32};

    void validate() const {
        if (epochs < 1) throw ArgumentError("classifier epochs must be >= 1");
        if (!(learning_rate > 0.0)) throw ArgumentError("classifier learning rate must be > 0");
        if (batch_size < 1) throw ArgumentError("classifier batch size must be >= 1");
        if (decay_every < 1) throw ArgumentError("decay_every must be >= 1");
        if (!(decay_factor > 0.0)) throw ArgumentError("decay_factor must be > 0");
    }
};

/// Dense softmax classifier over flattened images.
struct Classifier {
    nn::Network net;
    int classes = 2;
    /// Classes with no training example; training proceeds without them.
    std::vector<int> absent_classes;
};

inline std::vector<nn::LayerSpec> classifier_specs(std::size_t pixels, int classes, const ClassifierConfig& cfg) {
    std::vector<nn::LayerSpec> specs;
    std::size_t prev = pixels;
    for (auto h : cfg.hidden) {
        specs.push_back({prev, h, nn::Activation::relu});
        prev = h;
    }
    specs.push_back({prev, static_cast<std::size_t>(classes), nn::Activation::softmax});
    return specs;
}

inline Classifier classifier_from_network(nn::Network net) {
    if (net.layers.empty() || net.layers.back().spec.activation != nn::Activation::softmax) {
        throw FormatError("classifier network must end in a softmax layer");
    }
    Classifier c;
    c.classes = static_cast<int>(net.output_dim());
    c.net = std::move(net);
    return c;
}

/// Class probabilities, one row per image.
inline Matrix predict_proba(const Classifier& clf, const ImageSet& images) {
    if (images.pixel_count() != clf.net.input_dim()) {
        throw ShapeError("classifier expects " + std::to_string(clf.net.input_dim()) + " pixels, got " +
                         std::to_string(images.pixel_count()));
    }
    if (images.empty()) return Matrix(0, clf.classes);
    return nn::predict(clf.net, images.pixels);
}

/// Argmax with ties broken toward the lower class index.
inline int argmax_row(const Matrix& probs, Eigen::Index row) {
    int best = 0;
    for (Eigen::Index k = 1; k < probs.cols(); ++k) {
        if (probs(row, k) > probs(row, best)) best = static_cast<int>(k);
    }
    return best;
}

inline std::vector<int> predict_labels(const Classifier& clf, const ImageSet& images) {
    const Matrix p = predict_proba(clf, images);
    std::vector<int> out(static_cast<std::size_t>(p.rows()));
    for (Eigen::Index i = 0; i < p.rows(); ++i) out[static_cast<std::size_t>(i)] = argmax_row(p, i);
    return out;
}

/// Minibatch cross-entropy training with step-decayed learning rate.
inline Classifier train_classifier(const Dataset& data, const ClassifierConfig& cfg) {
    cfg.validate();
    data.validate();
    if (data.empty()) throw ArgumentError("train_classifier on an empty dataset");
    Classifier clf;
    clf.classes = data.classes;
    for (int c = 0; c < data.classes; ++c) {
        if (data.count_label(c) == 0) clf.absent_classes.push_back(c);
    }
    clf.net = nn::init_network(classifier_specs(data.images.pixel_count(), data.classes, cfg), derive_seed(cfg.seed, 11));
    Engine rng(derive_seed(cfg.seed, 12));
    auto opt = nn::OptimizerState::make(cfg.optimizer, cfg.learning_rate);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto cols = data.images.pixels.cols();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        opt.learning_rate = cfg.learning_rate * std::pow(cfg.decay_factor, static_cast<double>(epoch / cfg.decay_every));
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t len = std::min(cfg.batch_size, order.size() - start);
            Matrix x(static_cast<Eigen::Index>(len), cols);
            std::vector<int> y(len);
            for (std::size_t i = 0; i < len; ++i) {
                x.row(static_cast<Eigen::Index>(i)) = data.images.pixels.row(static_cast<Eigen::Index>(order[start + i]));
                y[i] = data.labels[order[start + i]];
            }
            const auto cache = nn::forward(clf.net, x);
            const auto loss = nn::loss_cross_entropy(cache.output(), y);
            if (!std::isfinite(loss.value)) {
                throw NumericError("classifier loss became non-finite at epoch " + std::to_string(epoch));
            }
            nn::step(clf.net, nn::backward_from_logits(clf.net, cache, loss.grad), opt);
        }
    }
    return clf;
}

inline Json to_json(const ClassifierConfig& c) {
    return Json{{"epochs", c.epochs},
                {"learning_rate", c.learning_rate},
                {"decay_every", c.decay_every},
                {"decay_factor", c.decay_factor},
                {"batch_size", c.batch_size},
                {"seed", c.seed},
                {"optimizer", nn::to_string(c.optimizer)},
                {"hidden", c.hidden}};
}

inline ClassifierConfig classifier_config_from_json(const Json& j, const std::string& path,
                                                    const ClassifierConfig& defaults = {}) {
    StrictObject o(j, path);
    ClassifierConfig c;
    c.epochs = o.get("epochs", defaults.epochs);
    c.learning_rate = o.get("learning_rate", defaults.learning_rate);
    c.decay_every = o.get("decay_every", defaults.decay_every);
    c.decay_factor = o.get("decay_factor", defaults.decay_factor);
    c.batch_size = o.get("batch_size", defaults.batch_size);
    c.seed = o.get("seed", defaults.seed);
    const auto opt = o.get<std::string>("optimizer", std::string(nn::to_string(defaults.optimizer)));
    const auto kind = nn::optimizer_from_string(opt);
    if (!kind) throw ConfigError(o.qualified("optimizer") + ": unknown optimizer '" + opt + "'");
    c.optimizer = *kind;
    c.hidden = o.get("hidden", defaults.hidden);
    o.finish();
    try {
        c.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return c;
}

} // namespace aisel::uncertainty

#endif
