#ifndef AISEL_PIPELINE_BLOBS_HPP
#define AISEL_PIPELINE_BLOBS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "aisel/pipeline/dataset.hpp"
#include "aisel/random.hpp"

// Synthetic "calcified valve" images: a dark smooth background, a faint
// elliptical ring, and 1-3 bright Gaussian spots on or near the ring. The
// ground-truth class is whether the count of bright pixels (> 0.7) exceeds a
// fixed threshold.

namespace aisel::pipeline {

inline constexpr double kBrightLevel = 0.7;
inline constexpr double kDefaultMassThreshold = 5.0;

struct BlobSpot {
    double x = 0.0;
    double y = 0.0;
    double amplitude = 0.0;
    double sigma = 1.0;
};

struct BlobScene {
    double base = 0.05;
    double grad_x = 0.0;
    double grad_y = 0.0;
    double ring_cx = 0.0;
    double ring_cy = 0.0;
    double ring_a = 5.0;
    double ring_b = 5.0;
    double ring_level = 0.35;
    std::vector<BlobSpot> spots;
};

inline RowVector render_blob_scene(const BlobScene& s, std::size_t w, std::size_t h) {
    RowVector px(static_cast<Eigen::Index>(w * h));
    for (std::size_t yi = 0; yi < h; ++yi) {
        for (std::size_t xi = 0; xi < w; ++xi) {
            const double x = static_cast<double>(xi) + 0.5;
            const double y = static_cast<double>(yi) + 0.5;
            double v = s.base + s.grad_x * x / static_cast<double>(w) + s.grad_y * y / static_cast<double>(h);
            const double dx = (x - s.ring_cx) / s.ring_a;
            const double dy = (y - s.ring_cy) / s.ring_b;
            const double d = std::sqrt(dx * dx + dy * dy) - 1.0;
            v += s.ring_level * std::exp(-d * d / (2.0 * 0.12 * 0.12));
            for (const auto& b : s.spots) {
                const double ex = x - b.x;
                const double ey = y - b.y;
                v += b.amplitude * std::exp(-(ex * ex + ey * ey) / (2.0 * b.sigma * b.sigma));
            }
            px(static_cast<Eigen::Index>(yi * w + xi)) = std::clamp(v, 0.0, 1.0);
        }
    }
    return px;
}

inline BlobScene random_blob_scene(Engine& rng, std::size_t w, std::size_t h) {
    const double W = static_cast<double>(w);
    const double H = static_cast<double>(h);
    BlobScene s;
    s.base = uniform(rng, 0.03, 0.08);
    s.grad_x = uniform(rng, -0.03, 0.03);
    s.grad_y = uniform(rng, -0.03, 0.03);
    s.ring_cx = W / 2.0 + uniform(rng, -0.03, 0.03) * W;
    s.ring_cy = H / 2.0 + uniform(rng, -0.03, 0.03) * H;
    s.ring_a = uniform(rng, 0.29, 0.33) * W;
    s.ring_b = uniform(rng, 0.29, 0.33) * H;
    s.ring_level = uniform(rng, 0.25, 0.35);
    // At most one spot per third of the ring.
    std::vector<std::size_t> sites{0, 1, 2};
    std::shuffle(sites.begin(), sites.end(), rng);
    const std::size_t spots = 1 + uniform_index(rng, 3);
    for (std::size_t k = 0; k < spots; ++k) {
        const double angle = (90.0 + 120.0 * static_cast<double>(sites[k]) + uniform(rng, -60.0, 60.0)) *
                             std::numbers::pi / 180.0;
        const double rad = uniform(rng, 0.9, 1.1);
        BlobSpot b;
        b.x = s.ring_cx + rad * s.ring_a * std::cos(angle);
        b.y = s.ring_cy - rad * s.ring_b * std::sin(angle);
        b.amplitude = uniform(rng, 0.3, 0.95);
        b.sigma = uniform(rng, 0.7, 1.5) * W / 16.0;
        s.spots.push_back(b);
    }
    return s;
}

/// Number of pixels strictly brighter than the bright level.
template <typename Row>
std::size_t bright_mass(const Row& px) {
    std::size_t n = 0;
    for (Eigen::Index i = 0; i < px.size(); ++i) {
        if (px(i) > kBrightLevel) ++n;
    }
    return n;
}

inline int mass_label(std::size_t mass, double threshold) { return static_cast<double>(mass) > threshold ? 1 : 0; }

/// Balanced two-class synthetic corpus. Scenes whose class already holds
/// ceil(count / 2) examples are rejected.
inline Dataset synth_blob_dataset(std::size_t count, std::size_t width, std::size_t height, std::uint64_t seed,
                                  double threshold = kDefaultMassThreshold) {
    if (count < 2) throw ArgumentError("synth_blob_dataset needs count >= 2");
    if (width < 4 || height < 4) throw ArgumentError("synthetic images must be at least 4x4");
    Engine rng(seed);
    const std::size_t cap = (count + 1) / 2;
    std::size_t per_class[2] = {0, 0};
    Matrix px(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(width * height));
    std::vector<int> labels;
    labels.reserve(count);
    std::size_t attempts = 0;
    while (labels.size() < count) {
        if (++attempts > 1000 * count + 100000) throw Error("synth_blob_dataset: rejection sampling stalled");
        const RowVector img = render_blob_scene(random_blob_scene(rng, width, height), width, height);
        const int y = mass_label(bright_mass(img), threshold);
        if (per_class[y] >= cap) continue;
        ++per_class[y];
        px.row(static_cast<Eigen::Index>(labels.size())) = img;
        labels.push_back(y);
    }
    Dataset d = make_dataset(ImageSet(width, height, std::move(px)), std::move(labels), 2, Provenance::actual);
    d.mass_threshold = threshold;
    return d;
}

} // namespace aisel::pipeline

#endif
