#ifndef AISEL_SAMPLER_BASELINES_HPP
#define AISEL_SAMPLER_BASELINES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "aisel/error.hpp"
#include "aisel/random.hpp"
#include "aisel/sampler/design.hpp"
#include "aisel/uncertainty/pool.hpp"

namespace aisel::sampler {

/// Upper bound on the number of candidate designs brute_force_design visits.
inline constexpr double kMaxBruteForceDesigns = 1e8;

/// m i.i.d. uniform points in [-1, 1]^r.
inline SampleDesign random_design(std::size_t m, std::size_t r, std::uint64_t seed) {
    SampleDesign d;
    d.method = Method::random;
    d.fixed = FeatureSet::empty(r);
    Engine rng(seed);
    Matrix p(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(r));
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = uniform(rng, -1.0, 1.0);
    d.movable = FeatureSet(std::move(p));
    return d;
}

/// The m highest-entropy grid cells; ties keep lexicographic grid order.
inline SampleDesign grid_topk_design(const uncertainty::EntropyGrid& grid, std::size_t m) {
    const std::size_t cells = grid.points.size();
    if (m > cells) {
        throw ArgumentError("grid_topk_design: m = " + std::to_string(m) + " exceeds " + std::to_string(cells) +
                            " grid cells");
    }
    std::vector<std::size_t> idx(cells);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return grid.entropies[a] > grid.entropies[b]; });
    idx.resize(m);
    SampleDesign d;
    d.method = Method::grid_topk;
    d.fixed = FeatureSet::empty(grid.points.dim());
    d.movable = grid.points.select_rows(idx);
    return d;
}

/// Exhaustive minimizer of sp_objective over designs whose m points all lie on
/// the regular grid {-1, -1 + step, ..., 1}^r. Ties resolve to the
/// lexicographically first design (point 1 varies slowest).
inline SampleDesign brute_force_design(const UncertaintyPool& pool, const FeatureSet& fixed, std::size_t m,
                                       double grid_step) {
    if (m == 0) throw ArgumentError("brute_force_design needs m >= 1");
    if (!(grid_step > 0.0) || grid_step > 2.0) throw ArgumentError("grid step must be in (0, 2]");
    const std::size_t r = pool.dim();
    const auto per_axis = static_cast<std::size_t>(std::llround(2.0 / grid_step)) + 1;
    const double candidates = std::pow(static_cast<double>(per_axis), static_cast<double>(r * m));
    if (candidates > kMaxBruteForceDesigns) {
        throw ArgumentError("brute force search over " + std::to_string(candidates) + " designs exceeds the limit");
    }
    const FeatureSet grid = uncertainty::grid_points(r, per_axis);
    const std::size_t g = grid.size();
    const FeatureSet anchors = fixed.empty() ? FeatureSet::empty(r) : fixed;
    const double scale = 1.0 / (2.0 * static_cast<double>(m + anchors.size()));

    // Per-cell attraction and anchor repulsion, then pairwise cell distances.
    std::vector<double> attract(g), anchor(g);
    for (std::size_t c = 0; c < g; ++c) {
        const double* p = detail::row_ptr(grid.coords, c);
        attract[c] = detail::expected_distance(p, pool);
        double s = 0.0;
        for (std::size_t k = 0; k < anchors.size(); ++k) s += detail::distance(p, detail::row_ptr(anchors.coords, k), r);
        anchor[c] = s;
    }
    const double anchor_const = anchors.empty() ? 0.0 : detail::self_sum(anchors.coords);
    auto cell_distance = [&](std::size_t a, std::size_t b) {
        return detail::distance(detail::row_ptr(grid.coords, a), detail::row_ptr(grid.coords, b), r);
    };

    std::vector<std::size_t> choice(m, 0), best(m, 0);
    double best_value = std::numeric_limits<double>::infinity();
    while (true) {
        double value = 0.0;
        double pair = anchor_const;
        for (std::size_t i = 0; i < m; ++i) {
            value += attract[choice[i]];
            pair += 2.0 * anchor[choice[i]];
            for (std::size_t k = i + 1; k < m; ++k) pair += 2.0 * cell_distance(choice[i], choice[k]);
        }
        value -= scale * pair;
        if (value < best_value) {
            best_value = value;
            best = choice;
        }
        std::size_t pos = m;
        while (pos > 0) {
            --pos;
            if (++choice[pos] < g) break;
            choice[pos] = 0;
            if (pos == 0) {
                pos = m + 1;
                break;
            }
        }
        if (pos == m + 1) break;
    }
    SampleDesign d;
    d.method = Method::brute_force;
    d.fixed = anchors;
    d.movable = grid.select_rows(best);
    d.objective_trace.push_back(sp_objective(d, pool));
    return d;
}

} // namespace aisel::sampler

#endif
