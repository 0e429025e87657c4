#ifndef AISEL_TYPES_HPP
#define AISEL_TYPES_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "aisel/error.hpp"
#include "aisel/nn/matrix.hpp"

namespace aisel {

using nn::Matrix;
using nn::RowVector;

/// A batch of grayscale images of identical size, one flattened (row-major)
/// image per matrix row. Pixels live in [0, 1].
struct ImageSet {
    std::size_t width = 0;
    std::size_t height = 0;
    Matrix pixels;

    ImageSet() = default;
    ImageSet(std::size_t w, std::size_t h, Matrix p) : width(w), height(h), pixels(std::move(p)) {
        if (static_cast<std::size_t>(pixels.cols()) != w * h) {
            throw ShapeError("image rows have " + std::to_string(pixels.cols()) + " pixels, expected " +
                             std::to_string(w * h));
        }
    }

    static ImageSet empty(std::size_t w, std::size_t h) { return ImageSet(w, h, Matrix(0, w * h)); }

    std::size_t size() const { return static_cast<std::size_t>(pixels.rows()); }
    std::size_t pixel_count() const { return width * height; }
    bool empty() const { return pixels.rows() == 0; }

    double at(std::size_t image, std::size_t x, std::size_t y) const {
        return pixels(static_cast<Eigen::Index>(image), static_cast<Eigen::Index>(y * width + x));
    }

    bool in_range() const {
        return pixels.size() == 0 || (pixels.allFinite() && pixels.minCoeff() >= 0.0 && pixels.maxCoeff() <= 1.0);
    }

    ImageSet select(const std::vector<std::size_t>& indices) const {
        Matrix out(indices.size(), pixels.cols());
        for (std::size_t i = 0; i < indices.size(); ++i) {
            out.row(static_cast<Eigen::Index>(i)) = pixels.row(static_cast<Eigen::Index>(indices[i]));
        }
        return ImageSet(width, height, std::move(out));
    }
};

/// Points of the latent box [-1, 1]^r, one per row.
struct FeatureSet {
    Matrix coords;

    FeatureSet() = default;
    explicit FeatureSet(Matrix c) : coords(std::move(c)) {}

    static FeatureSet empty(std::size_t r) { return FeatureSet(Matrix(0, r)); }

    std::size_t size() const { return static_cast<std::size_t>(coords.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(coords.cols()); }
    bool empty() const { return coords.rows() == 0; }

    bool in_box() const {
        return coords.size() == 0 || (coords.allFinite() && coords.minCoeff() >= -1.0 && coords.maxCoeff() <= 1.0);
    }

    FeatureSet select_rows(const std::vector<std::size_t>& indices) const {
        Matrix out(static_cast<Eigen::Index>(indices.size()), coords.cols());
        for (std::size_t i = 0; i < indices.size(); ++i) {
            out.row(static_cast<Eigen::Index>(i)) = coords.row(static_cast<Eigen::Index>(indices[i]));
        }
        return FeatureSet(std::move(out));
    }
};

inline void require_same_dims(const ImageSet& a, const ImageSet& b, const std::string& where) {
    if (a.width != b.width || a.height != b.height) {
        throw ShapeError(where + ": image dims " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                         " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
    }
}

} // namespace aisel

#endif
