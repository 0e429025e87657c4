#ifndef AISEL_SAMPLER_CCP_HPP
#define AISEL_SAMPLER_CCP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aisel/error.hpp"
#include "aisel/json_util.hpp"
#include "aisel/random.hpp"
#include "aisel/sampler/design.hpp"

namespace aisel::sampler {

enum class CcpInit {
    /// m pool atoms drawn without replacement, proportionally to weight.
    weighted_pool,
    /// m i.i.d. uniform points in the box.
    uniform,
};

inline std::string_view to_string(CcpInit i) { return i == CcpInit::weighted_pool ? "weighted_pool" : "uniform"; }

struct CcpConfig {
    std::size_t max_sweeps = 200;
    /// Stop once the absolute objective change of a sweep drops below this.
    double tolerance = 1e-8;
    /// Lower bound on distances used as divisors.
    double distance_floor = 1e-10;
    CcpInit init = CcpInit::weighted_pool;

    void validate() const {
        if (!(tolerance > 0.0)) throw ArgumentError("CCP tolerance must be > 0");
        if (!(distance_floor > 0.0)) throw ArgumentError("CCP distance floor must be > 0");
    }
};

/// Slack allowed when checking that a sweep did not increase the objective.
inline constexpr double kMonotoneSlack = 1e-9;

/// Weighted sampling without replacement (exponential keys log(u)/w, largest
/// first; zero-weight atoms come last in index order).
inline std::vector<std::size_t> weighted_sample_without_replacement(const std::vector<double>& weights, std::size_t m,
                                                                    std::uint64_t seed) {
    if (m > weights.size()) {
        throw ArgumentError("cannot draw " + std::to_string(m) + " distinct atoms from a pool of " +
                            std::to_string(weights.size()));
    }
    Engine rng(seed);
    std::vector<double> keys(weights.size());
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const double u = uniform(rng, 0.0, 1.0);
        keys[j] = weights[j] > 0.0 ? std::log(std::max(u, 1e-300)) / weights[j] : -std::numeric_limits<double>::infinity();
    }
    std::vector<std::size_t> idx(weights.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; });
    idx.resize(m);
    return idx;
}

inline FeatureSet initial_points(const UncertaintyPool& pool, std::size_t m, const CcpConfig& cfg, std::uint64_t seed) {
    if (cfg.init == CcpInit::uniform) {
        Engine rng(seed);
        Matrix p(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(pool.dim()));
        for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = uniform(rng, -1.0, 1.0);
        return FeatureSet(std::move(p));
    }
    const auto idx = weighted_sample_without_replacement(pool.weights, m, seed);
    Matrix p(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(pool.dim()));
    for (std::size_t i = 0; i < m; ++i) {
        p.row(static_cast<Eigen::Index>(i)) = pool.features.coords.row(static_cast<Eigen::Index>(idx[i]));
    }
    return FeatureSet(std::move(p));
}

/// Convex-concave procedure on the anchored support-point objective.
///
/// Each sweep visits the movable points in index order (Gauss-Seidel). For
/// point i the attraction term is majorized by a quadratic at the current
/// iterate and the repulsion term linearized, giving the closed form
///
///   f_i <- clamp( ( sum_j w_j y_j / d_ij + 1/(m+n) sum_{k != i} (f_i - f_k) / ||f_i - f_k|| ) / q_i )
///   q_i  = sum_j w_j / d_ij,   d_ij = max(||f_i - y_j||, floor)
///
/// where k runs over the other movable points (latest positions) and all
/// anchors. The surrogate is isotropic, so clamping to the box is its exact
/// constrained minimizer and every update is non-increasing in the objective.
/// A point lying on an atom takes the Vardi-Zhang step instead, kept only
/// when it does not raise the objective.
inline SampleDesign ccp_optimize_from(const UncertaintyPool& pool, const FeatureSet& fixed, FeatureSet start,
                                      const CcpConfig& cfg) {
    cfg.validate();
    const std::size_t m = start.size();
    if (m == 0) throw ArgumentError("ccp_optimize needs m >= 1");
    if (pool.size() == 0) throw ArgumentError("ccp_optimize needs a non-empty pool");
    const std::size_t r = pool.dim();
    if (start.dim() != r || (!fixed.empty() && fixed.dim() != r)) {
        throw ShapeError("ccp_optimize: dimension mismatch between pool, anchors and start points");
    }
    SampleDesign design;
    design.method = Method::aisel;
    design.fixed = fixed.empty() ? FeatureSet::empty(r) : fixed;
    design.movable = std::move(start);
    design.movable.coords = design.movable.coords.cwiseMax(-1.0).cwiseMin(1.0);

    Matrix pts = all_points(design);
    const std::size_t total = static_cast<std::size_t>(pts.rows());
    const double inv_total = 1.0 / static_cast<double>(total);
    const double floor = cfg.distance_floor;
    const Matrix& atoms = pool.features.coords;

    auto objective = [&] {
        design.movable.coords = pts.topRows(static_cast<Eigen::Index>(m));
        return sp_objective(design, pool);
    };

    std::vector<double> num(r), rep(r), cand(r);
    // Terms of the objective that involve point i only.
    auto point_objective = [&](const double* f, std::size_t i) {
        double v = detail::expected_distance(f, pool);
        for (std::size_t k2 = 0; k2 < total; ++k2) {
            if (k2 != i) v -= inv_total * detail::distance(f, detail::row_ptr(pts, k2), r);
        }
        return v;
    };
    double prev = objective();
    design.objective_trace.push_back(prev);
    for (std::size_t sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        for (std::size_t i = 0; i < m; ++i) {
            double* fi = pts.data() + i * r;
            double q = 0.0;
            // Weight of atoms the point currently sits on.
            double on_atom = 0.0;
            std::fill(num.begin(), num.end(), 0.0);
            std::fill(rep.begin(), rep.end(), 0.0);
            for (std::size_t j = 0; j < pool.size(); ++j) {
                const double* y = detail::row_ptr(atoms, j);
                const double d = detail::distance(fi, y, r);
                if (d < floor) {
                    on_atom += pool.weights[j];
                    continue;
                }
                const double c = pool.weights[j] / d;
                q += c;
                for (std::size_t k = 0; k < r; ++k) num[k] += c * y[k];
            }
            for (std::size_t k2 = 0; k2 < total; ++k2) {
                if (k2 == i) continue;
                const double* fk = detail::row_ptr(pts, k2);
                const double inv = 1.0 / std::max(detail::distance(fi, fk, r), floor);
                for (std::size_t k = 0; k < r; ++k) rep[k] += (fi[k] - fk[k]) * inv;
            }
            if (!(q > 0.0)) continue;
            if (on_atom == 0.0) {
                for (std::size_t k = 0; k < r; ++k) fi[k] = std::clamp((num[k] + inv_total * rep[k]) / q, -1.0, 1.0);
                continue;
            }
            // Vardi-Zhang step: the point sits on an atom, where the
            // quadratic majorizer is undefined. Leave only if the pull of
            // everything else beats the atom's own weight.
            double pull = 0.0;
            for (std::size_t k = 0; k < r; ++k) {
                const double g = num[k] - q * fi[k] + inv_total * rep[k];
                pull += g * g;
            }
            pull = std::sqrt(pull);
            if (pull <= on_atom) continue;
            const double beta = on_atom / pull;
            for (std::size_t k = 0; k < r; ++k) {
                const double t = (num[k] + inv_total * rep[k]) / q;
                cand[k] = std::clamp((1.0 - beta) * t + beta * fi[k], -1.0, 1.0);
            }
            if (point_objective(cand.data(), i) <= point_objective(fi, i)) std::copy(cand.begin(), cand.end(), fi);
        }
        const double cur = objective();
        if (!std::isfinite(cur)) throw NumericError("CCP objective became non-finite");
        if (cur > prev + kMonotoneSlack) {
            throw NumericError("CCP sweep " + std::to_string(sweep) + " increased the objective from " +
                               std::to_string(prev) + " to " + std::to_string(cur));
        }
        design.objective_trace.push_back(cur);
        const bool converged = std::abs(prev - cur) < cfg.tolerance;
        prev = cur;
        if (converged) break;
    }
    design.movable.coords = pts.topRows(static_cast<Eigen::Index>(m));
    return design;
}

/// Selects m virtual features by CCP, starting from the configured initializer.
inline SampleDesign ccp_optimize(const UncertaintyPool& pool, const FeatureSet& fixed, std::size_t m,
                                 const CcpConfig& cfg, std::uint64_t seed) {
    if (m == 0) throw ArgumentError("ccp_optimize needs m >= 1");
    return ccp_optimize_from(pool, fixed, initial_points(pool, m, cfg, seed), cfg);
}

inline Json to_json(const CcpConfig& c) {
    return Json{{"max_sweeps", c.max_sweeps},
                {"tolerance", c.tolerance},
                {"distance_floor", c.distance_floor},
                {"init", to_string(c.init)}};
}

inline CcpConfig ccp_config_from_json(const Json& j, const std::string& path) {
    StrictObject o(j, path);
    CcpConfig c;
    c.max_sweeps = o.get("max_sweeps", c.max_sweeps);
    c.tolerance = o.get("tolerance", c.tolerance);
    c.distance_floor = o.get("distance_floor", c.distance_floor);
    const auto init = o.get<std::string>("init", std::string(to_string(c.init)));
    if (init == "weighted_pool") {
        c.init = CcpInit::weighted_pool;
    } else if (init == "uniform") {
        c.init = CcpInit::uniform;
    } else {
        throw ConfigError(o.qualified("init") + ": unknown init '" + init + "'");
    }
    o.finish();
    try {
        c.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return c;
}

} // namespace aisel::sampler

#endif
