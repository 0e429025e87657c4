#ifndef AISEL_GIN_PERSIST_HPP
#define AISEL_GIN_PERSIST_HPP

#include <filesystem>
#include <fstream>
#include <string>

#include "aisel/error.hpp"
#include "aisel/gin/gin.hpp"
#include "aisel/json_util.hpp"
#include "aisel/nn/checkpoint.hpp"

// A GIN on disk: generator.ckpt, discriminator.ckpt, encoder.ckpt and a
// gin.json sidecar {r, n1, n2, config, loss_traces} with n1 rows, n2 columns.

namespace aisel::gin {

inline void save_gin(const std::filesystem::path& dir, const GinModel& model) {
    std::filesystem::create_directories(dir);
    nn::save_checkpoint(dir / "generator.ckpt", model.generator);
    nn::save_checkpoint(dir / "discriminator.ckpt", model.discriminator);
    nn::save_checkpoint(dir / "encoder.ckpt", model.encoder);
    const Json side{{"r", model.r},
                    {"n1", model.height},
                    {"n2", model.width},
                    {"config", to_json(model.config)},
                    {"loss_traces", to_json(model.traces)}};
    std::ofstream os(dir / "gin.json");
    if (!os) throw Error("cannot write '" + (dir / "gin.json").string() + "'");
    os << side.dump(1) << '\n';
}

inline LossTraces loss_traces_from_json(const Json& j, const std::string& path) {
    StrictObject o(j, path);
    LossTraces t;
    t.generator = o.get("generator", t.generator);
    t.critic = o.get("critic", t.critic);
    t.critic_gap = o.get("critic_gap", t.critic_gap);
    t.encoder = o.get("encoder", t.encoder);
    o.finish();
    return t;
}

inline GinModel load_gin(const std::filesystem::path& dir) {
    const auto side_path = dir / "gin.json";
    std::ifstream is(side_path);
    if (!is) throw Error("no GIN at '" + dir.string() + "' (missing gin.json)");
    Json side;
    try {
        side = Json::parse(is);
    } catch (const Json::parse_error& e) {
        throw FormatError(side_path.string() + ": " + e.what());
    }
    GinModel m;
    try {
        StrictObject o(side, "gin.json");
        m.r = o.get<std::size_t>("r", 0);
        m.height = o.get<std::size_t>("n1", 0);
        m.width = o.get<std::size_t>("n2", 0);
        m.config = train_config_from_json(o.child("config"), "gin.json.config");
        m.traces = loss_traces_from_json(o.child("loss_traces"), "gin.json.loss_traces");
        o.finish();
    } catch (const ConfigError& e) {
        throw FormatError(e.what());
    }
    if (m.r == 0 || m.width == 0 || m.height == 0) throw FormatError("gin.json has zero dimensions");
    m.generator = nn::load_checkpoint(dir / "generator.ckpt");
    m.discriminator = nn::load_checkpoint(dir / "discriminator.ckpt");
    m.encoder = nn::load_checkpoint(dir / "encoder.ckpt");
    const auto px = m.pixel_count();
    if (m.generator.specs() != generator_specs(m.r, px, m.config) ||
        m.discriminator.specs() != critic_specs(px, m.config) || m.encoder.specs() != encoder_specs(px, m.r, m.config)) {
        throw FormatError("GIN checkpoints at '" + dir.string() + "' do not match gin.json");
    }
    return m;
}

} // namespace aisel::gin

#endif
