#ifndef AISEL_PIPELINE_IDX_HPP
#define AISEL_PIPELINE_IDX_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "aisel/error.hpp"
#include "aisel/pipeline/dataset.hpp"
#include "aisel/types.hpp"

// MNIST-style IDX files: big-endian u32 magic and dimensions, then unsigned
// bytes.

namespace aisel::pipeline {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

namespace detail {

inline std::uint32_t read_be32(std::istream& is, const char* what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError(std::string("IDX truncated in ") + what);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

inline void write_be32(std::ostream& os, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::ifstream open_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open '" + path.string() + "'");
    return is;
}

} // namespace detail

/// Reads an IDX image file; bytes are scaled to [0, 1] by /255. A non-zero
/// `limit` keeps only the first `limit` images.
inline ImageSet read_idx_images(std::istream& is, std::size_t limit = 0) {
    const auto magic = detail::read_be32(is, "header");
    if (magic != kIdxImageMagic) throw FormatError("IDX image magic is not 0x00000803");
    const std::size_t count = detail::read_be32(is, "header");
    const std::size_t rows = detail::read_be32(is, "header");
    const std::size_t cols = detail::read_be32(is, "header");
    if (rows == 0 || cols == 0) throw FormatError("IDX images have a zero dimension");
    const std::size_t keep = limit == 0 ? count : std::min(limit, count);
    Matrix px(static_cast<Eigen::Index>(keep), static_cast<Eigen::Index>(rows * cols));
    std::vector<unsigned char> buf(rows * cols);
    for (std::size_t i = 0; i < keep; ++i) {
        if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
            throw FormatError("IDX image data truncated at image " + std::to_string(i));
        }
        for (std::size_t k = 0; k < buf.size(); ++k) {
            px(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = static_cast<double>(buf[k]) / 255.0;
        }
    }
    return ImageSet(cols, rows, std::move(px));
}

inline std::vector<int> read_idx_labels(std::istream& is, std::size_t limit = 0) {
    const auto magic = detail::read_be32(is, "header");
    if (magic != kIdxLabelMagic) throw FormatError("IDX label magic is not 0x00000801");
    const std::size_t count = detail::read_be32(is, "header");
    const std::size_t keep = limit == 0 ? count : std::min(limit, count);
    std::vector<unsigned char> buf(keep);
    if (keep > 0 && !is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(keep))) {
        throw FormatError("IDX label data truncated");
    }
    return std::vector<int>(buf.begin(), buf.end());
}

inline ImageSet read_idx_images(const std::filesystem::path& path, std::size_t limit = 0) {
    auto is = detail::open_binary(path);
    return read_idx_images(is, limit);
}

inline std::vector<int> read_idx_labels(const std::filesystem::path& path, std::size_t limit = 0) {
    auto is = detail::open_binary(path);
    return read_idx_labels(is, limit);
}

/// Writes images quantized to bytes (round(255 p)).
inline void write_idx_images(std::ostream& os, const ImageSet& images) {
    detail::write_be32(os, kIdxImageMagic);
    detail::write_be32(os, static_cast<std::uint32_t>(images.size()));
    detail::write_be32(os, static_cast<std::uint32_t>(images.height));
    detail::write_be32(os, static_cast<std::uint32_t>(images.width));
    for (Eigen::Index i = 0; i < images.pixels.size(); ++i) {
        const double p = std::clamp(images.pixels.data()[i], 0.0, 1.0);
        os.put(static_cast<char>(static_cast<unsigned char>(std::lround(p * 255.0))));
    }
}

inline void write_idx_labels(std::ostream& os, const std::vector<int>& labels) {
    detail::write_be32(os, kIdxLabelMagic);
    detail::write_be32(os, static_cast<std::uint32_t>(labels.size()));
    for (int y : labels) {
        if (y < 0 || y > 255) throw ArgumentError("IDX labels must fit in a byte");
        os.put(static_cast<char>(static_cast<unsigned char>(y)));
    }
}

/// Loads an image/label file pair. `classes` = 0 infers K as max label + 1.
inline Dataset load_idx_dataset(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                                int classes = 0, std::size_t limit = 0) {
    ImageSet images = read_idx_images(images_path, limit);
    std::vector<int> labels = read_idx_labels(labels_path, limit);
    if (labels.size() != images.size()) {
        throw FormatError("IDX image count " + std::to_string(images.size()) + " differs from label count " +
                          std::to_string(labels.size()));
    }
    if (classes == 0) {
        for (int y : labels) classes = std::max(classes, y + 1);
    }
    return make_dataset(std::move(images), std::move(labels), classes, Provenance::actual);
}

} // namespace aisel::pipeline

#endif
