#ifndef AISEL_PIPELINE_DATASET_HPP
#define AISEL_PIPELINE_DATASET_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "aisel/error.hpp"
#include "aisel/random.hpp"
#include "aisel/types.hpp"

namespace aisel::pipeline {

enum class Provenance : std::uint8_t { actual, virtual_ };

inline std::string_view to_string(Provenance p) { return p == Provenance::actual ? "actual" : "virtual"; }

/// Labeled images. Labels are class indices in [0, classes).
struct Dataset {
    ImageSet images;
    std::vector<int> labels;
    int classes = 2;
    std::vector<Provenance> provenance;
    /// Bright-pixel count threshold of the synthetic generator, when known.
    std::optional<double> mass_threshold;

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }

    void validate() const {
        if (images.size() != labels.size() || provenance.size() != labels.size()) {
            throw ShapeError("dataset has " + std::to_string(images.size()) + " images, " +
                             std::to_string(labels.size()) + " labels, " + std::to_string(provenance.size()) +
                             " provenance tags");
        }
        for (int y : labels) {
            if (y < 0 || y >= classes) {
                throw ArgumentError("label " + std::to_string(y) + " outside [0, " + std::to_string(classes) + ")");
            }
        }
    }

    std::size_t count(Provenance p) const { return static_cast<std::size_t>(std::count(provenance.begin(), provenance.end(), p)); }

    std::size_t count_label(int y) const { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), y)); }

    Dataset subset(const std::vector<std::size_t>& indices) const {
        Dataset d;
        d.images = images.select(indices);
        d.classes = classes;
        d.mass_threshold = mass_threshold;
        for (auto i : indices) {
            d.labels.push_back(labels.at(i));
            d.provenance.push_back(provenance.at(i));
        }
        return d;
    }
};

inline Dataset make_dataset(ImageSet images, std::vector<int> labels, int classes, Provenance p) {
    Dataset d;
    d.provenance.assign(labels.size(), p);
    d.images = std::move(images);
    d.labels = std::move(labels);
    d.classes = classes;
    d.validate();
    return d;
}

/// Concatenates actual and virtual examples, keeping provenance tags.
inline Dataset fuse(const Dataset& actual, const Dataset& virtual_set) {
    if (actual.classes != virtual_set.classes) {
        throw ArgumentError("fuse: class count " + std::to_string(actual.classes) + " vs " +
                            std::to_string(virtual_set.classes));
    }
    if (virtual_set.empty()) return actual;
    require_same_dims(actual.images, virtual_set.images, "fuse");
    Dataset out = actual;
    Matrix px(actual.images.pixels.rows() + virtual_set.images.pixels.rows(), actual.images.pixels.cols());
    px << actual.images.pixels, virtual_set.images.pixels;
    out.images = ImageSet(actual.images.width, actual.images.height, std::move(px));
    out.labels.insert(out.labels.end(), virtual_set.labels.begin(), virtual_set.labels.end());
    out.provenance.insert(out.provenance.end(), virtual_set.provenance.begin(), virtual_set.provenance.end());
    return out;
}

// ---- augmentation ----

enum class Augmentation { rot90, rot180, rot270, hflip };

inline std::string_view to_string(Augmentation a) {
    switch (a) {
    case Augmentation::rot90: return "rot90";
    case Augmentation::rot180: return "rot180";
    case Augmentation::rot270: return "rot270";
    case Augmentation::hflip: return "hflip";
    }
    return "?";
}

inline std::optional<Augmentation> augmentation_from_string(std::string_view s) {
    if (s == "rot90") return Augmentation::rot90;
    if (s == "rot180") return Augmentation::rot180;
    if (s == "rot270") return Augmentation::rot270;
    if (s == "hflip") return Augmentation::hflip;
    return std::nullopt;
}

/// Pixel permutation of one image. Rotations are counter-clockwise.
inline RowVector transform_image(const RowVector& px, std::size_t w, std::size_t h, Augmentation op) {
    RowVector out(px.size());
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            std::size_t nx = x, ny = y;
            switch (op) {
            case Augmentation::rot90: nx = y; ny = w - 1 - x; break;
            case Augmentation::rot180: nx = w - 1 - x; ny = h - 1 - y; break;
            case Augmentation::rot270: nx = h - 1 - y; ny = x; break;
            case Augmentation::hflip: nx = w - 1 - x; ny = y; break;
            }
            out(static_cast<Eigen::Index>(ny * w + nx)) = px(static_cast<Eigen::Index>(y * w + x));
        }
    }
    return out;
}

/// Originals followed by one transformed copy per op (in op order); labels
/// and provenance are copied. Only permutes pixels, never rescales them.
inline Dataset augment(const Dataset& data, const std::vector<Augmentation>& ops) {
    const auto w = data.images.width;
    const auto h = data.images.height;
    for (auto op : ops) {
        if (op != Augmentation::hflip && w != h) {
            throw ArgumentError("rotation augmentation needs square images");
        }
    }
    const std::size_t n = data.size();
    Dataset out;
    out.classes = data.classes;
    out.mass_threshold = data.mass_threshold;
    Matrix px(static_cast<Eigen::Index>(n * (1 + ops.size())), data.images.pixels.cols());
    px.topRows(static_cast<Eigen::Index>(n)) = data.images.pixels;
    out.labels = data.labels;
    out.provenance = data.provenance;
    for (std::size_t k = 0; k < ops.size(); ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            px.row(static_cast<Eigen::Index>((k + 1) * n + i)) =
                transform_image(data.images.pixels.row(static_cast<Eigen::Index>(i)), w, h, ops[k]);
        }
        out.labels.insert(out.labels.end(), data.labels.begin(), data.labels.end());
        out.provenance.insert(out.provenance.end(), data.provenance.begin(), data.provenance.end());
    }
    out.images = ImageSet(w, h, std::move(px));
    return out;
}

/// Applies augment() once per stage; the size multiplies by (1 + |stage|) each time.
inline Dataset augment_stages(const Dataset& data, const std::vector<std::vector<Augmentation>>& stages) {
    Dataset out = data;
    for (const auto& s : stages) out = augment(out, s);
    return out;
}

// ---- splits ----

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Stratified k-fold partition. Each class is shuffled and dealt round-robin
/// with a cursor shared across classes, so fold sizes differ by at most one
/// and per-fold class counts differ by at most one from the global ratio.
inline std::vector<Split> kfold_split(const std::vector<int>& labels, std::size_t folds, std::uint64_t seed) {
    if (folds < 1) throw ArgumentError("folds must be >= 1");
    if (folds > labels.size()) {
        throw ArgumentError("folds (" + std::to_string(folds) + ") exceed example count (" +
                            std::to_string(labels.size()) + ")");
    }
    std::set<int> classes(labels.begin(), labels.end());
    Engine rng(seed);
    std::vector<std::vector<std::size_t>> fold_members(folds);
    std::size_t cursor = 0;
    for (int c : classes) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == c) members.push_back(i);
        }
        std::shuffle(members.begin(), members.end(), rng);
        for (auto i : members) {
            fold_members[cursor % folds].push_back(i);
            ++cursor;
        }
    }
    std::vector<Split> out(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        auto test = fold_members[f];
        std::sort(test.begin(), test.end());
        std::vector<std::size_t> train;
        for (std::size_t g = 0; g < folds; ++g) {
            if (g != f) train.insert(train.end(), fold_members[g].begin(), fold_members[g].end());
        }
        std::sort(train.begin(), train.end());
        out[f] = {std::move(train), std::move(test)};
    }
    return out;
}

/// Single stratified train/test split holding out `test_count` examples.
inline Split holdout_split(const std::vector<int>& labels, std::size_t test_count, std::uint64_t seed) {
    if (test_count >= labels.size()) throw ArgumentError("holdout leaves no training examples");
    if (test_count == 0) {
        Split s;
        for (std::size_t i = 0; i < labels.size(); ++i) s.train.push_back(i);
        return s;
    }
    // Interleave classes after a per-class shuffle, then take the first test_count.
    std::set<int> classes(labels.begin(), labels.end());
    Engine rng(seed);
    std::vector<std::vector<std::size_t>> per_class;
    for (int c : classes) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == c) members.push_back(i);
        }
        std::shuffle(members.begin(), members.end(), rng);
        per_class.push_back(std::move(members));
    }
    // Proportional allocation by largest remainder.
    std::vector<std::size_t> quota(per_class.size());
    std::vector<std::pair<double, std::size_t>> rema;
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < per_class.size(); ++k) {
        const double exact = static_cast<double>(test_count) * static_cast<double>(per_class[k].size()) /
                             static_cast<double>(labels.size());
        quota[k] = static_cast<std::size_t>(exact);
        assigned += quota[k];
        rema.push_back({exact - static_cast<double>(quota[k]), k});
    }
    std::stable_sort(rema.begin(), rema.end(), [](auto a, auto b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < test_count; ++i, ++assigned) quota[rema[i % rema.size()].second]++;
    Split s;
    for (std::size_t k = 0; k < per_class.size(); ++k) {
        for (std::size_t i = 0; i < per_class[k].size(); ++i) {
            (i < quota[k] ? s.test : s.train).push_back(per_class[k][i]);
        }
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

} // namespace aisel::pipeline

#endif
