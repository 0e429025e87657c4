#ifndef AISEL_TESTS_FIXTURES_HPP
#define AISEL_TESTS_FIXTURES_HPP

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "aisel/aisel.hpp"

namespace aisel::check {

/// The blob corpus used by most model-level tests: 400 images, 16x16.
inline const pipeline::Dataset& blob_corpus() {
    static const pipeline::Dataset d = pipeline::synth_blob_dataset(400, 16, 16, 1);
    return d;
}

/// GIN trained with the default configuration on blob_corpus().
inline const gin::GinModel& trained_gin() {
    static const gin::GinModel g = [] {
        gin::TrainConfig cfg;
        cfg.seed = 1;
        return gin::train_gin(blob_corpus().images, cfg, 2);
    }();
    return g;
}

inline const uncertainty::Classifier& trained_classifier() {
    static const uncertainty::Classifier c = [] {
        uncertainty::ClassifierConfig cfg;
        cfg.seed = 1;
        return uncertainty::train_classifier(blob_corpus(), cfg);
    }();
    return c;
}

/// Softmax network whose output is exactly one-hot on `cls` for any input.
inline uncertainty::Classifier constant_classifier(std::size_t pixels, int classes, int cls) {
    auto net = nn::zero_network({{pixels, static_cast<std::size_t>(classes), nn::Activation::softmax}});
    net.layers[0].bias(cls) = 1000.0;
    return uncertainty::classifier_from_network(std::move(net));
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::string tmpl = (std::filesystem::temp_directory_path() / ("aisel-" + tag + "-XXXXXX")).string();
        if (!mkdtemp(tmpl.data())) throw Error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    os << text;
}

inline std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

} // namespace aisel::check

#endif
