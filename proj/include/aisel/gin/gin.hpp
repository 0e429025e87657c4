#ifndef AISEL_GIN_GIN_HPP
#define AISEL_GIN_GIN_HPP

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
#include "aisel/random.hpp"
#include "aisel/types.hpp"

namespace aisel::gin {

using nn::Activation;
using nn::LayerSpec;
using nn::Network;

/// Hyperparameters of GIN training. One epoch is one pass of the outer loop:
/// a generator update plus `critic_steps` critic updates.
struct TrainConfig {
    /// Generator step size.
    double learning_rate = 1e-3;
    /// Critic step size.
    double critic_learning_rate = 1e-2;
    double clip = 0.01;
    std::size_t critic_steps = 5;
    std::size_t batch_size = 64;
    std::size_t epochs = 2000;
    std::uint64_t seed = 0;
    nn::OptimizerKind generator_optimizer = nn::OptimizerKind::adam;
    nn::OptimizerKind critic_optimizer = nn::OptimizerKind::sgd;
    /// Swap to the usual critic-then-generator order inside an epoch.
    bool critic_first = false;

    std::size_t encoder_epochs = 2000;
    double encoder_learning_rate = 1e-3;
    nn::OptimizerKind encoder_optimizer = nn::OptimizerKind::adam;

    std::vector<std::size_t> generator_hidden{64, 128};
    std::vector<std::size_t> critic_hidden{128, 64};
    std::vector<std::size_t> encoder_hidden{128, 64};

    void validate() const {
        if (!(learning_rate > 0.0) || !(critic_learning_rate > 0.0) || !(encoder_learning_rate > 0.0)) throw ArgumentError("learning rates must be > 0");
        if (!(clip > 0.0)) throw ArgumentError("clip bound must be > 0");
        if (critic_steps < 1) throw ArgumentError("critic_steps must be >= 1");
        if (epochs < 1) throw ArgumentError("epochs must be >= 1");
        if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
    }
};

struct LossTraces {
    /// Per epoch: L_G of the generator update.
    std::vector<double> generator;
    /// Per epoch: L_D of the last critic update.
    std::vector<double> critic;
    /// Per epoch: mean D(real) - mean D(fake) over the last critic batch.
    std::vector<double> critic_gap;
    /// Per encoder epoch: batch MSE before the update.
    std::vector<double> encoder;
};

struct GinModel {
    Network generator;
    Network discriminator;
    Network encoder;
    std::size_t r = 0;
    std::size_t width = 0;
    std::size_t height = 0;
    TrainConfig config;
    LossTraces traces;

    std::size_t pixel_count() const { return width * height; }
};

inline std::vector<LayerSpec> chain(std::size_t in, const std::vector<std::size_t>& hidden, Activation hidden_act,
                                    std::size_t out, Activation out_act) {
    std::vector<LayerSpec> specs;
    std::size_t prev = in;
    for (auto h : hidden) {
        specs.push_back({prev, h, hidden_act});
        prev = h;
    }
    specs.push_back({prev, out, out_act});
    return specs;
}

inline std::vector<LayerSpec> generator_specs(std::size_t r, std::size_t pixels, const TrainConfig& cfg) {
    return chain(r, cfg.generator_hidden, Activation::relu, pixels, Activation::tanh);
}

inline std::vector<LayerSpec> critic_specs(std::size_t pixels, const TrainConfig& cfg) {
    return chain(pixels, cfg.critic_hidden, Activation::relu, 1, Activation::identity);
}

inline std::vector<LayerSpec> encoder_specs(std::size_t pixels, std::size_t r, const TrainConfig& cfg) {
    return chain(pixels, cfg.encoder_hidden, Activation::leaky_relu, r, Activation::tanh);
}

/// Freshly initialized (untrained) model with the configured architecture.
inline GinModel init_model(std::size_t r, std::size_t width, std::size_t height, const TrainConfig& cfg) {
    if (r == 0 || width == 0 || height == 0) throw ArgumentError("GIN dimensions must be positive");
    GinModel m;
    m.r = r;
    m.width = width;
    m.height = height;
    m.config = cfg;
    m.generator = nn::init_network(generator_specs(r, width * height, cfg), derive_seed(cfg.seed, 1));
    m.discriminator = nn::init_network(critic_specs(width * height, cfg), derive_seed(cfg.seed, 2));
    m.encoder = nn::init_network(encoder_specs(width * height, r, cfg), derive_seed(cfg.seed, 3));
    return m;
}

inline Matrix uniform_matrix(Engine& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -1.0, 1.0);
    return m;
}

/// i.i.d. uniform draws on [-1, 1]^r.
inline FeatureSet sample_uniform_features(std::size_t count, std::size_t r, std::uint64_t seed) {
    if (count < 1) throw ArgumentError("feature count must be >= 1");
    Engine rng(seed);
    return FeatureSet(uniform_matrix(rng, count, r));
}

/// Generator network output (tanh range) mapped to pixel range [0, 1].
inline Matrix tanh_to_pixels(const Matrix& t) { return (0.5 * (t.array() + 1.0)).matrix(); }

inline ImageSet generate(const GinModel& model, const FeatureSet& features) {
    if (features.dim() != model.r) {
        throw ShapeError("feature dimension " + std::to_string(features.dim()) + " != r = " + std::to_string(model.r));
    }
    if (features.empty()) return ImageSet::empty(model.width, model.height);
    return ImageSet(model.width, model.height, tanh_to_pixels(nn::predict(model.generator, features.coords)));
}

inline FeatureSet encode(const GinModel& model, const ImageSet& images) {
    if (images.width != model.width || images.height != model.height) {
        throw ShapeError("encode: image dims do not match the model");
    }
    if (images.empty()) return FeatureSet::empty(model.r);
    return FeatureSet(nn::predict(model.encoder, images.pixels));
}

/// Mean over images of the per-image summed squared error of G(E(X)) against X.
inline double reconstruction_mse(const GinModel& model, const ImageSet& images) {
    if (images.empty()) throw ArgumentError("reconstruction_mse on an empty image set");
    const ImageSet back = generate(model, encode(model, images));
    return (back.pixels - images.pixels).squaredNorm() / static_cast<double>(images.size());
}

/// E||E(G(u)) - u||^2 over the given latent points.
inline double encoder_mse(const GinModel& model, const FeatureSet& features) {
    const FeatureSet back = encode(model, generate(model, features));
    return (back.coords - features.coords).squaredNorm() / static_cast<double>(features.size());
}

/// Mean critic score on `probe_count` real images (drawn with replacement)
/// minus mean score on as many generated images. A diagnostic surrogate for
/// the Wasserstein-1 distance, not a certified estimate.
inline double critic_gap(const GinModel& model, const ImageSet& images, std::size_t probe_count,
                         std::uint64_t seed = 0) {
    if (probe_count < 1) throw ArgumentError("probe_count must be >= 1");
    if (images.empty()) throw ArgumentError("critic_gap on an empty image set");
    Engine rng(seed);
    std::vector<std::size_t> idx(probe_count);
    for (auto& i : idx) i = uniform_index(rng, images.size());
    const Matrix real = nn::predict(model.discriminator, images.select(idx).pixels);
    const FeatureSet f(uniform_matrix(rng, probe_count, model.r));
    const Matrix fake = nn::predict(model.discriminator, generate(model, f).pixels);
    return real.mean() - fake.mean();
}

namespace detail {

inline std::vector<std::size_t> sample_batch(Engine& rng, std::size_t n, std::size_t m) {
    // Partial Fisher-Yates: m distinct indices when m <= n.
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::vector<std::size_t> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + uniform_index(rng, n - i);
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

inline void require_finite_loss(double v, const char* what, std::size_t epoch) {
    if (!std::isfinite(v)) {
        throw NumericError(std::string(what) + " became non-finite at epoch " + std::to_string(epoch));
    }
}

} // namespace detail

/// Generator step: descend L_G = -sum_i D(G(f_i)) on a fresh uniform batch.
inline double generator_update(GinModel& model, nn::OptimizerState& opt, Engine& rng) {
    const std::size_t m = model.config.batch_size;
    const Matrix f = uniform_matrix(rng, m, model.r);
    const auto g_cache = nn::forward(model.generator, f);
    const Matrix fake = tanh_to_pixels(g_cache.output());
    const auto d_cache = nn::forward(model.discriminator, fake);
    const double loss = -d_cache.output().sum();
    const auto d_grads = nn::backward(model.discriminator, d_cache, Matrix::Constant(m, 1, -1.0));
    const auto g_grads = nn::backward(model.generator, g_cache, 0.5 * d_grads.input);
    nn::step(model.generator, g_grads, opt);
    return loss;
}

struct CriticStepResult {
    double loss = 0.0;
    double gap = 0.0;
};

/// Critic step: ascend L_D = sum D(X_i) - sum D(G(f_i)), then clip to [-clip, clip].
inline CriticStepResult critic_update(GinModel& model, const ImageSet& images, nn::OptimizerState& opt, Engine& rng) {
    const std::size_t m = model.config.batch_size;
    const auto idx = detail::sample_batch(rng, images.size(), m);
    const Matrix f = uniform_matrix(rng, m, model.r);
    const Matrix fake = tanh_to_pixels(nn::predict(model.generator, f));
    Matrix both(2 * m, images.pixel_count());
    for (std::size_t i = 0; i < m; ++i) {
        both.row(static_cast<Eigen::Index>(i)) = images.pixels.row(static_cast<Eigen::Index>(idx[i]));
    }
    both.bottomRows(static_cast<Eigen::Index>(m)) = fake;
    const auto cache = nn::forward(model.discriminator, both);
    const auto& out = cache.output();
    const double real_sum = out.topRows(static_cast<Eigen::Index>(m)).sum();
    const double fake_sum = out.bottomRows(static_cast<Eigen::Index>(m)).sum();
    // Gradient ascent on L_D is descent on -L_D.
    Matrix grad(2 * m, 1);
    grad.topRows(static_cast<Eigen::Index>(m)).setConstant(-1.0);
    grad.bottomRows(static_cast<Eigen::Index>(m)).setConstant(1.0);
    nn::step(model.discriminator, nn::backward(model.discriminator, cache, grad), opt);
    nn::clip_params(model.discriminator, model.config.clip);
    return {real_sum - fake_sum, (real_sum - fake_sum) / static_cast<double>(m)};
}

/// Encoder step on freshly generated pairs (G(f), f) with MSE loss.
inline double encoder_update(GinModel& model, nn::OptimizerState& opt, Engine& rng) {
    const Matrix f = uniform_matrix(rng, model.config.batch_size, model.r);
    const Matrix x = tanh_to_pixels(nn::predict(model.generator, f));
    const auto cache = nn::forward(model.encoder, x);
    const auto loss = nn::loss_mse(cache.output(), f);
    nn::step(model.encoder, nn::backward(model.encoder, cache, loss.grad), opt);
    return loss.value;
}

/// Two-stage GIN training: adversarial generator/critic stage, then the
/// encoder is fitted to the frozen generator on generated pairs only.
inline GinModel train_gin(const ImageSet& images, const TrainConfig& cfg, std::size_t r) {
    cfg.validate();
    if (images.empty()) throw ArgumentError("train_gin on an empty corpus");
    if (images.size() < 2 * cfg.batch_size) {
        throw ArgumentError("train_gin needs at least 2 * batch_size = " + std::to_string(2 * cfg.batch_size) +
                            " images, got " + std::to_string(images.size()));
    }
    if (!images.in_range()) throw ArgumentError("training images must have pixels in [0, 1]");

    GinModel model = init_model(r, images.width, images.height, cfg);
    Engine rng(derive_seed(cfg.seed, 4));
    auto g_opt = nn::OptimizerState::make(cfg.generator_optimizer, cfg.learning_rate);
    auto d_opt = nn::OptimizerState::make(cfg.critic_optimizer, cfg.critic_learning_rate);
    auto e_opt = nn::OptimizerState::make(cfg.encoder_optimizer, cfg.encoder_learning_rate);

    auto& tr = model.traces;
    tr.generator.reserve(cfg.epochs);
    tr.critic.reserve(cfg.epochs);
    tr.critic_gap.reserve(cfg.epochs);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        CriticStepResult last{};
        auto critic_phase = [&] {
            for (std::size_t t = 0; t < cfg.critic_steps; ++t) {
                last = critic_update(model, images, d_opt, rng);
                if (model.discriminator.max_abs_parameter() > cfg.clip) {
                    throw NumericError("critic parameter escaped the clip bound");
                }
            }
        };
        double g_loss = 0.0;
        if (cfg.critic_first) {
            critic_phase();
            g_loss = generator_update(model, g_opt, rng);
        } else {
            g_loss = generator_update(model, g_opt, rng);
            critic_phase();
        }
        detail::require_finite_loss(g_loss, "generator loss", epoch);
        detail::require_finite_loss(last.loss, "critic loss", epoch);
        tr.generator.push_back(g_loss);
        tr.critic.push_back(last.loss);
        tr.critic_gap.push_back(last.gap);
    }

    tr.encoder.reserve(cfg.encoder_epochs);
    for (std::size_t epoch = 0; epoch < cfg.encoder_epochs; ++epoch) {
        const double l = encoder_update(model, e_opt, rng);
        detail::require_finite_loss(l, "encoder loss", epoch);
        tr.encoder.push_back(l);
    }
    return model;
}

// ---- JSON ----

inline Json to_json(const TrainConfig& c) {
    return Json{{"learning_rate", c.learning_rate},
                {"critic_learning_rate", c.critic_learning_rate},
                {"clip", c.clip},
                {"critic_steps", c.critic_steps},
                {"batch_size", c.batch_size},
                {"epochs", c.epochs},
                {"seed", c.seed},
                {"generator_optimizer", nn::to_string(c.generator_optimizer)},
                {"critic_optimizer", nn::to_string(c.critic_optimizer)},
                {"critic_first", c.critic_first},
                {"encoder_epochs", c.encoder_epochs},
                {"encoder_learning_rate", c.encoder_learning_rate},
                {"encoder_optimizer", nn::to_string(c.encoder_optimizer)},
                {"generator_hidden", c.generator_hidden},
                {"critic_hidden", c.critic_hidden},
                {"encoder_hidden", c.encoder_hidden}};
}

inline nn::OptimizerKind parse_optimizer(StrictObject& o, const std::string& key, nn::OptimizerKind fallback) {
    const auto s = o.get<std::string>(key, std::string(nn::to_string(fallback)));
    const auto k = nn::optimizer_from_string(s);
    if (!k) throw ConfigError(o.qualified(key) + ": unknown optimizer '" + s + "'");
    return *k;
}

inline TrainConfig train_config_from_json(const Json& j, const std::string& path, const TrainConfig& defaults = {}) {
    StrictObject o(j, path);
    TrainConfig c;
    c.learning_rate = o.get("learning_rate", defaults.learning_rate);
    c.critic_learning_rate = o.get("critic_learning_rate", defaults.critic_learning_rate);
    c.clip = o.get("clip", defaults.clip);
    c.critic_steps = o.get("critic_steps", defaults.critic_steps);
    c.batch_size = o.get("batch_size", defaults.batch_size);
    c.epochs = o.get("epochs", defaults.epochs);
    c.seed = o.get("seed", defaults.seed);
    c.generator_optimizer = parse_optimizer(o, "generator_optimizer", defaults.generator_optimizer);
    c.critic_optimizer = parse_optimizer(o, "critic_optimizer", defaults.critic_optimizer);
    c.critic_first = o.get("critic_first", defaults.critic_first);
    c.encoder_epochs = o.get("encoder_epochs", defaults.encoder_epochs);
    c.encoder_learning_rate = o.get("encoder_learning_rate", defaults.encoder_learning_rate);
    c.encoder_optimizer = parse_optimizer(o, "encoder_optimizer", defaults.encoder_optimizer);
    c.generator_hidden = o.get("generator_hidden", defaults.generator_hidden);
    c.critic_hidden = o.get("critic_hidden", defaults.critic_hidden);
    c.encoder_hidden = o.get("encoder_hidden", defaults.encoder_hidden);
    o.finish();
    try {
        c.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return c;
}

inline Json to_json(const LossTraces& t) {
    return Json{{"generator", t.generator}, {"critic", t.critic}, {"critic_gap", t.critic_gap}, {"encoder", t.encoder}};
}

} // namespace aisel::gin

#endif
