#ifndef AISEL_SAMPLER_DESIGN_HPP
#define AISEL_SAMPLER_DESIGN_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "aisel/error.hpp"
#include "aisel/types.hpp"
#include "aisel/uncertainty/pool.hpp"

namespace aisel::sampler {

using uncertainty::UncertaintyPool;

enum class Method { aisel, random, grid_topk, brute_force, none };

inline std::string_view to_string(Method m) {
    switch (m) {
    case Method::aisel: return "aisel";
    case Method::random: return "random";
    case Method::grid_topk: return "grid_topk";
    case Method::brute_force: return "brute_force";
    case Method::none: return "none";
    }
    return "?";
}

inline std::optional<Method> method_from_string(std::string_view s) {
    for (auto m : {Method::aisel, Method::random, Method::grid_topk, Method::brute_force, Method::none}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

/// Selected virtual features plus the fixed anchors (encoded actual images)
/// they were placed against.
struct SampleDesign {
    FeatureSet movable;
    FeatureSet fixed;
    /// Objective at initialization followed by one value per CCP sweep.
    std::vector<double> objective_trace;
    Method method = Method::aisel;

    std::size_t m() const { return movable.size(); }
    std::size_t n() const { return fixed.size(); }
};

namespace detail {

inline double distance(const double* a, const double* b, std::size_t r) {
    double s = 0.0;
    for (std::size_t k = 0; k < r; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

inline const double* row_ptr(const Matrix& m, std::size_t i) { return m.data() + i * static_cast<std::size_t>(m.cols()); }

/// Sum of ||a_i - b_j|| over all ordered pairs.
inline double cross_sum(const Matrix& a, const Matrix& b) {
    const auto r = static_cast<std::size_t>(a.cols());
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double* pa = row_ptr(a, static_cast<std::size_t>(i));
        for (Eigen::Index j = 0; j < b.rows(); ++j) s += distance(pa, row_ptr(b, static_cast<std::size_t>(j)), r);
    }
    return s;
}

/// Sum of ||a_i - a_j|| over all ordered pairs (each unordered pair twice).
inline double self_sum(const Matrix& a) {
    const auto r = static_cast<std::size_t>(a.cols());
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double* pa = row_ptr(a, static_cast<std::size_t>(i));
        for (Eigen::Index j = i + 1; j < a.rows(); ++j) s += distance(pa, row_ptr(a, static_cast<std::size_t>(j)), r);
    }
    return 2.0 * s;
}

/// sum_j w_j ||f - y_j||
inline double expected_distance(const double* f, const UncertaintyPool& pool) {
    const std::size_t r = pool.dim();
    double s = 0.0;
    for (std::size_t j = 0; j < pool.size(); ++j) {
        s += pool.weights[j] * distance(f, row_ptr(pool.features.coords, j), r);
    }
    return s;
}

} // namespace detail

/// Energy distance between the empirical measures of two point sets:
/// 2 E||a - b|| - E||a - a'|| - E||b - b'|| (V-statistic form).
inline double energy_distance(const FeatureSet& a, const FeatureSet& b) {
    if (a.empty() || b.empty()) throw ArgumentError("energy_distance needs two non-empty point sets");
    if (a.dim() != b.dim()) throw ShapeError("energy_distance: point dimensions differ");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    return 2.0 * detail::cross_sum(a.coords, b.coords) / (na * nb) - detail::self_sum(a.coords) / (na * na) -
           detail::self_sum(b.coords) / (nb * nb);
}

/// Stacks movable points on top of fixed anchors.
inline Matrix all_points(const SampleDesign& d) {
    const auto r = std::max(d.movable.dim(), d.fixed.dim());
    Matrix p(static_cast<Eigen::Index>(d.m() + d.n()), static_cast<Eigen::Index>(r));
    if (d.m() > 0) p.topRows(static_cast<Eigen::Index>(d.m())) = d.movable.coords;
    if (d.n() > 0) p.bottomRows(static_cast<Eigen::Index>(d.n())) = d.fixed.coords;
    return p;
}

/// Support-point objective with fixed anchors:
///   sum_{i<=m} sum_j w_j ||f_i - y_j||  -  1/(2(m+n)) sum_{i,j<=m+n} ||f_i - f_j||.
/// Anchor-anchor pairs are included.
inline double sp_objective(const SampleDesign& design, const UncertaintyPool& pool) {
    const std::size_t m = design.m();
    const std::size_t total = m + design.n();
    if (m > 0 && design.movable.dim() != pool.dim()) throw ShapeError("design and pool dimensions differ");
    double attract = 0.0;
    for (std::size_t i = 0; i < m; ++i) attract += detail::expected_distance(detail::row_ptr(design.movable.coords, i), pool);
    if (total == 0) return attract;
    return attract - detail::self_sum(all_points(design)) / (2.0 * static_cast<double>(total));
}

/// For every movable point, the distance to its nearest neighbour among the
/// other movable points and the fixed anchors.
inline std::vector<double> separation_distances(const SampleDesign& d) {
    const Matrix p = all_points(d);
    const auto r = static_cast<std::size_t>(p.cols());
    std::vector<double> out;
    for (std::size_t i = 0; i < d.m(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < static_cast<std::size_t>(p.rows()); ++k) {
            if (k == i) continue;
            best = std::min(best, detail::distance(detail::row_ptr(p, i), detail::row_ptr(p, k), r));
        }
        out.push_back(best);
    }
    return out;
}

/// Draws `count` pool atoms with replacement, proportionally to their weights.
inline FeatureSet resample_pool(const UncertaintyPool& pool, std::size_t count, std::uint64_t seed) {
    Engine rng(seed);
    std::discrete_distribution<std::size_t> pick(pool.weights.begin(), pool.weights.end());
    Matrix out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pool.dim()));
    for (std::size_t i = 0; i < count; ++i) {
        out.row(static_cast<Eigen::Index>(i)) = pool.features.coords.row(static_cast<Eigen::Index>(pick(rng)));
    }
    return FeatureSet(std::move(out));
}

/// CSV with header f1,...,fr,kind; movable rows are "virtual", anchors "actual".
inline void write_design_csv(std::ostream& os, const SampleDesign& d, std::size_t r) {
    for (std::size_t k = 0; k < r; ++k) os << 'f' << (k + 1) << ',';
    os << "kind\n";
    os.precision(17);
    auto rows = [&](const FeatureSet& s, const char* kind) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            for (std::size_t k = 0; k < r; ++k) {
                os << s.coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) << ',';
            }
            os << kind << '\n';
        }
    };
    rows(d.movable, "virtual");
    rows(d.fixed, "actual");
}

/// Inverse of write_design_csv. Row order within each kind is preserved; the
/// method and objective trace are not part of the CSV.
inline SampleDesign read_design_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw FormatError("design CSV is empty");
    std::size_t r = 0;
    {
        std::stringstream header(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(header, cell, ',')) cells.push_back(cell);
        if (cells.empty() || cells.back() != "kind") throw FormatError("design CSV header must end in 'kind'");
        r = cells.size() - 1;
        for (std::size_t k = 0; k < r; ++k) {
            if (cells[k] != "f" + std::to_string(k + 1)) throw FormatError("design CSV header column " + cells[k]);
        }
    }
    if (r == 0) throw FormatError("design CSV has no feature columns");
    std::vector<double> movable, fixed;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::vector<double> vals;
        for (std::size_t k = 0; k < r; ++k) {
            if (!std::getline(row, cell, ',')) throw FormatError("design CSV line " + std::to_string(line_no) + " is short");
            try {
                std::size_t used = 0;
                vals.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw FormatError("design CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
            }
        }
        if (!std::getline(row, cell) || (cell != "virtual" && cell != "actual")) {
            throw FormatError("design CSV line " + std::to_string(line_no) + ": kind must be virtual or actual");
        }
        auto& dst = cell == "virtual" ? movable : fixed;
        dst.insert(dst.end(), vals.begin(), vals.end());
    }
    auto to_set = [r](const std::vector<double>& v) {
        Matrix m(static_cast<Eigen::Index>(v.size() / r), static_cast<Eigen::Index>(r));
        std::copy(v.begin(), v.end(), m.data());
        return FeatureSet(std::move(m));
    };
    SampleDesign d;
    d.movable = to_set(movable);
    d.fixed = to_set(fixed);
    return d;
}

} // namespace aisel::sampler

#endif
