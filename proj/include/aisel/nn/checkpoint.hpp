#ifndef AISEL_NN_CHECKPOINT_HPP
#define AISEL_NN_CHECKPOINT_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "aisel/error.hpp"
#include "aisel/nn/network.hpp"

// Binary layout, all integers and reals little-endian:
//   "AISL" | version u32 | layer count u32 |
//   per layer: in_dim u32, out_dim u32, activation u8,
//              in_dim*out_dim weights (row-major, in x out), out_dim biases as f64.

namespace aisel::nn {

inline constexpr std::array<char, 4> kCheckpointMagic{'A', 'I', 'S', 'L'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
    os.write(b, 4);
}

inline void put_f64(std::ostream& os, double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
    os.write(b, 8);
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError("truncated checkpoint");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline double get_f64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw FormatError("truncated checkpoint");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
}

} // namespace detail

inline void write_checkpoint(std::ostream& os, const Network& net) {
    os.write(kCheckpointMagic.data(), 4);
    detail::put_u32(os, kCheckpointVersion);
    detail::put_u32(os, static_cast<std::uint32_t>(net.layers.size()));
    for (const auto& l : net.layers) {
        detail::put_u32(os, static_cast<std::uint32_t>(l.spec.in_dim));
        detail::put_u32(os, static_cast<std::uint32_t>(l.spec.out_dim));
        os.put(static_cast<char>(l.spec.activation));
        for (Eigen::Index i = 0; i < l.weights.size(); ++i) detail::put_f64(os, l.weights.data()[i]);
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) detail::put_f64(os, l.bias.data()[i]);
    }
    if (!os) throw FormatError("failed writing checkpoint");
}

inline Network read_checkpoint(std::istream& is) {
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), 4) || magic != kCheckpointMagic) {
        throw FormatError("bad checkpoint magic");
    }
    const auto version = detail::get_u32(is);
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto count = detail::get_u32(is);
    std::vector<LayerSpec> specs;
    Network net;
    for (std::uint32_t k = 0; k < count; ++k) {
        LayerSpec s;
        s.in_dim = detail::get_u32(is);
        s.out_dim = detail::get_u32(is);
        const int tag = is.get();
        if (tag == std::char_traits<char>::eof()) throw FormatError("truncated checkpoint");
        const auto act = activation_from_tag(static_cast<std::uint8_t>(tag));
        if (!act) throw FormatError("unknown activation tag " + std::to_string(tag));
        s.activation = *act;
        specs.push_back(s);
        validate_specs(specs);
        Layer l{s, Matrix(s.in_dim, s.out_dim), RowVector(s.out_dim)};
        for (Eigen::Index i = 0; i < l.weights.size(); ++i) l.weights.data()[i] = detail::get_f64(is);
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias.data()[i] = detail::get_f64(is);
        net.layers.push_back(std::move(l));
    }
    if (count == 0) throw FormatError("checkpoint has no layers");
    return net;
}

inline void save_checkpoint(const std::filesystem::path& path, const Network& net) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path.string() + " for writing");
    write_checkpoint(os, net);
}

inline Network load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open checkpoint " + path.string());
    return read_checkpoint(is);
}

} // namespace aisel::nn

#endif
