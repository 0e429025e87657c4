#ifndef AISEL_UNCERTAINTY_POOL_HPP
#define AISEL_UNCERTAINTY_POOL_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "aisel/error.hpp"
#include "aisel/gin/gin.hpp"
#include "aisel/types.hpp"
#include "aisel/uncertainty/classifier.hpp"
#include "aisel/uncertainty/entropy.hpp"

namespace aisel::uncertainty {

inline constexpr std::size_t kMinPoolSize = 100;

/// Weighted Monte-Carlo discretization of the uncertainty measure over the
/// latent box: uniform atoms, each weighted by the classifier's predictive
/// entropy at the generated image.
struct UncertaintyPool {
    FeatureSet features;
    std::vector<double> entropies;
    std::vector<double> weights;
    std::vector<int> predicted;
    bool balanced = false;
    /// Every entropy was zero and the weights fell back to uniform.
    bool uniform_fallback = false;

    std::size_t size() const { return weights.size(); }
    std::size_t dim() const { return features.dim(); }
};

struct Evaluation {
    std::vector<double> entropies;
    std::vector<int> predicted;
};

/// h(f) = entropy(C(G(f))) and argmax class for every row of `features`.
inline Evaluation evaluate_uncertainty(const gin::GinModel& gin, const Classifier& clf, const FeatureSet& features) {
    Evaluation ev;
    if (features.empty()) return ev;
    const Matrix probs = predict_proba(clf, gin::generate(gin, features));
    const double cap = std::log(static_cast<double>(probs.cols()));
    ev.entropies.resize(static_cast<std::size_t>(probs.rows()));
    ev.predicted.resize(static_cast<std::size_t>(probs.rows()));
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        const RowVector row = probs.row(i);
        ev.entropies[static_cast<std::size_t>(i)] =
            std::clamp(entropy(std::span<const double>(row.data(), static_cast<std::size_t>(row.size()))), 0.0, cap);
        ev.predicted[static_cast<std::size_t>(i)] = argmax_row(probs, i);
    }
    return ev;
}

/// Normalizes entropies into pool weights. Balanced weights divide each
/// entropy by the entropy mass of its predicted class so every class with
/// non-zero mass carries the same total weight.
inline void assign_weights(UncertaintyPool& pool) {
    const std::size_t n = pool.entropies.size();
    pool.weights.assign(n, 0.0);
    pool.uniform_fallback = false;
    double total = 0.0;
    for (double h : pool.entropies) total += h;
    if (!(total > 0.0)) {
        pool.weights.assign(n, 1.0 / static_cast<double>(n));
        pool.uniform_fallback = true;
        return;
    }
    if (!pool.balanced) {
        for (std::size_t j = 0; j < n; ++j) pool.weights[j] = pool.entropies[j] / total;
        return;
    }
    std::map<int, double> class_mass;
    for (std::size_t j = 0; j < n; ++j) class_mass[pool.predicted[j]] += pool.entropies[j];
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double s = class_mass[pool.predicted[j]];
        pool.weights[j] = s > 0.0 ? pool.entropies[j] / s : 0.0;
        sum += pool.weights[j];
    }
    for (auto& w : pool.weights) w /= sum;
}

/// Pool over explicit atoms (used for tests and grid-based pools).
inline UncertaintyPool make_pool(FeatureSet features, std::vector<double> entropies, std::vector<int> predicted,
                                 bool balanced) {
    if (entropies.size() != features.size() || predicted.size() != features.size()) {
        throw ShapeError("pool atoms, entropies and predictions differ in length");
    }
    if (features.empty()) throw ArgumentError("pool needs at least one atom");
    for (double h : entropies) {
        if (!(h >= 0.0)) throw ArgumentError("pool entropies must be non-negative");
    }
    UncertaintyPool pool;
    pool.features = std::move(features);
    pool.entropies = std::move(entropies);
    pool.predicted = std::move(predicted);
    pool.balanced = balanced;
    assign_weights(pool);
    return pool;
}

inline UncertaintyPool build_pool(const gin::GinModel& gin, const Classifier& clf, std::size_t count,
                                  std::uint64_t seed, bool balanced) {
    if (count < kMinPoolSize) {
        throw ArgumentError("pool size must be >= " + std::to_string(kMinPoolSize) + ", got " + std::to_string(count));
    }
    FeatureSet features = gin::sample_uniform_features(count, gin.r, seed);
    auto ev = evaluate_uncertainty(gin, clf, features);
    return make_pool(std::move(features), std::move(ev.entropies), std::move(ev.predicted), balanced);
}

/// CSV with header f1,...,fr,entropy,weight,pred_class.
inline void write_pool_csv(std::ostream& os, const UncertaintyPool& pool) {
    for (std::size_t k = 0; k < pool.dim(); ++k) os << 'f' << (k + 1) << ',';
    os << "entropy,weight,pred_class\n";
    os.precision(17);
    for (std::size_t j = 0; j < pool.size(); ++j) {
        for (std::size_t k = 0; k < pool.dim(); ++k) {
            os << pool.features.coords(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) << ',';
        }
        os << pool.entropies[j] << ',' << pool.weights[j] << ',' << pool.predicted[j] << '\n';
    }
}

// ---- regular grids ----

inline constexpr std::size_t kMaxGridPoints = 10'000'000;

/// Regular grid on [-1, 1] per axis, in lexicographic order (first axis
/// slowest). When `axes` names two coordinates the grid is the 2D cross
/// section through those axes with every other coordinate fixed at 0.
inline FeatureSet grid_points(std::size_t r, std::size_t grid_size, std::vector<std::size_t> axes = {}) {
    if (grid_size < 2) throw ArgumentError("grid size must be >= 2");
    if (axes.empty()) {
        for (std::size_t k = 0; k < r; ++k) axes.push_back(k);
    }
    for (auto a : axes) {
        if (a >= r) throw ArgumentError("grid axis " + std::to_string(a) + " outside r = " + std::to_string(r));
    }
    double total = std::pow(static_cast<double>(grid_size), static_cast<double>(axes.size()));
    if (total > static_cast<double>(kMaxGridPoints)) {
        throw ArgumentError("grid of " + std::to_string(total) + " points is too large");
    }
    const auto n = static_cast<std::size_t>(total);
    const double step = 2.0 / static_cast<double>(grid_size - 1);
    Matrix pts = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(r));
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t rem = i;
        for (std::size_t k = axes.size(); k-- > 0;) {
            const std::size_t idx = rem % grid_size;
            rem /= grid_size;
            pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(axes[k])) =
                -1.0 + step * static_cast<double>(idx);
        }
    }
    return FeatureSet(std::move(pts));
}

/// Entropy surface evaluated on a regular grid.
struct EntropyGrid {
    std::size_t grid_size = 0;
    std::vector<std::size_t> axes;
    FeatureSet points;
    std::vector<double> entropies;
    std::vector<int> predicted;
};

inline EntropyGrid evaluate_grid(const gin::GinModel& gin, const Classifier& clf, std::size_t grid_size,
                                 std::vector<std::size_t> axes = {}) {
    EntropyGrid g;
    g.grid_size = grid_size;
    if (axes.empty()) {
        for (std::size_t k = 0; k < gin.r; ++k) axes.push_back(k);
    }
    g.axes = axes;
    g.points = grid_points(gin.r, grid_size, axes);
    auto ev = evaluate_uncertainty(gin, clf, g.points);
    g.entropies = std::move(ev.entropies);
    g.predicted = std::move(ev.predicted);
    return g;
}

/// CSV over the grid's axes: f<a>,f<b>,...,entropy,pred_class.
inline void write_grid_csv(std::ostream& os, const EntropyGrid& g) {
    for (auto a : g.axes) os << 'f' << (a + 1) << ',';
    os << "entropy,pred_class\n";
    os.precision(17);
    for (std::size_t i = 0; i < g.points.size(); ++i) {
        for (auto a : g.axes) {
            os << g.points.coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) << ',';
        }
        os << g.entropies[i] << ',' << g.predicted[i] << '\n';
    }
}

} // namespace aisel::uncertainty

#endif
