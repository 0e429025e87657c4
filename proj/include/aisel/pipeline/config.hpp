#ifndef AISEL_PIPELINE_CONFIG_HPP
#define AISEL_PIPELINE_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "aisel/error.hpp"
#include "aisel/gin/gin.hpp"
#include "aisel/json_util.hpp"
#include "aisel/pipeline/blobs.hpp"
#include "aisel/pipeline/dataset.hpp"
#include "aisel/pipeline/oracle.hpp"
#include "aisel/sampler/ccp.hpp"
#include "aisel/sampler/design.hpp"
#include "aisel/uncertainty/classifier.hpp"
#include "aisel/uncertainty/pool.hpp"

namespace aisel::pipeline {

enum class DataSource { synthetic_blobs, idx };

inline std::string_view to_string(DataSource s) { return s == DataSource::synthetic_blobs ? "synthetic_blobs" : "idx"; }

struct DataConfig {
    DataSource source = DataSource::synthetic_blobs;
    /// Synthetic corpus size (train + test).
    std::size_t count = 1400;
    double mass_threshold = kDefaultMassThreshold;
    std::string images;
    std::string labels;
    /// 0 infers K from the labels.
    int classes = 0;
    /// Keep only the first `limit` IDX records; 0 keeps all.
    std::size_t limit = 0;
};

struct AugmentationConfig {
    /// Applied in order to the actual training split; each stage multiplies
    /// the size by 1 + |stage|.
    std::vector<std::vector<Augmentation>> stages;
    /// Also augment the oracle-labeled virtual images.
    bool include_virtual = false;
};

struct GridConfig {
    std::size_t size = 101;
    /// Feature axes spanned by the exported 2D grid (r > 2 gives a
    /// cross-section with the other coordinates at 0).
    std::vector<std::size_t> axes{0, 1};
};

/// Every free parameter of one experiment. Per-model seeds are not
/// configurable: they derive from `seed` and the fold index.
struct ExperimentConfig {
    std::string run_id = "run";
    std::uint64_t seed = 0;
    std::size_t r = 2;
    std::size_t width = 16;
    std::size_t height = 16;
    /// Training examples for folds = 1 (the rest is the test split); must be
    /// 0 for folds > 1, where each fold trains on the other folds.
    std::size_t n_train = 400;
    std::size_t m_virtual = 400;
    std::size_t pool_size = 4096;
    bool balanced = false;
    sampler::Method method = sampler::Method::aisel;
    std::size_t folds = 1;
    /// Encoded training images act as fixed repelling points for aisel.
    bool anchors = true;
    DataConfig data;
    AugmentationConfig augmentation;
    GridConfig grid;
    gin::TrainConfig gin;
    uncertainty::ClassifierConfig native;
    uncertainty::ClassifierConfig improved;
    sampler::CcpConfig ccp;
    OracleSpec oracle;

    /// Virtual examples actually produced (method none produces none).
    std::size_t virtual_count() const { return method == sampler::Method::none ? 0 : m_virtual; }

    void validate() const {
        if (run_id.empty() || run_id.find('/') != std::string::npos || run_id == "." || run_id == "..") {
            throw ConfigError("run_id must be a plain directory name");
        }
        if (r < 1) throw ConfigError("r must be >= 1");
        if (width < 1 || height < 1) throw ConfigError("width and height must be >= 1");
        if (folds < 1) throw ConfigError("folds must be >= 1");
        if (folds == 1 && n_train < 1) throw ConfigError("n_train must be >= 1 when folds = 1");
        if (folds > 1 && n_train != 0) throw ConfigError("n_train must be 0 when folds > 1 (folds define the split)");
        if (pool_size < uncertainty::kMinPoolSize) {
            throw ConfigError("pool_size must be >= " + std::to_string(uncertainty::kMinPoolSize));
        }
        if (method == sampler::Method::brute_force) throw ConfigError("method brute_force is a test oracle, not a pipeline method");
        if (method == sampler::Method::aisel && ccp.init == sampler::CcpInit::weighted_pool && m_virtual > pool_size) {
            throw ConfigError("m_virtual exceeds pool_size (weighted_pool init draws without replacement)");
        }
        if (grid.size < 2) throw ConfigError("grid.size must be >= 2");
        if (grid.axes.size() != std::min<std::size_t>(r, 2)) throw ConfigError("grid.axes must name min(r, 2) axes");
        for (auto a : grid.axes) {
            if (a >= r) throw ConfigError("grid axis " + std::to_string(a) + " outside [0, r)");
        }
        if (grid.axes.size() == 2 && grid.axes[0] == grid.axes[1]) throw ConfigError("grid axes must differ");
        if (method == sampler::Method::grid_topk) {
            double cells = 1.0;
            for (std::size_t k = 0; k < r; ++k) cells *= static_cast<double>(grid.size);
            if (cells > static_cast<double>(uncertainty::kMaxGridPoints)) {
                throw ConfigError("grid_topk needs grid.size^r <= " + std::to_string(uncertainty::kMaxGridPoints));
            }
            if (static_cast<double>(m_virtual) > cells) throw ConfigError("m_virtual exceeds the grid_topk cell count");
        }
        if (data.source == DataSource::synthetic_blobs) {
            if (data.count < 2) throw ConfigError("data.count must be >= 2");
            if (!data.images.empty() || !data.labels.empty()) {
                throw ConfigError("data.images/data.labels are only valid for source idx");
            }
            if (folds == 1 && n_train >= data.count) throw ConfigError("n_train must be below data.count");
        } else if (data.images.empty() || data.labels.empty()) {
            throw ConfigError("source idx needs data.images and data.labels");
        }
        for (const auto& stage : augmentation.stages) {
            for (auto op : stage) {
                if (op != Augmentation::hflip && width != height) {
                    throw ConfigError("rotation augmentation needs square images");
                }
            }
        }
        oracle.validate();
    }
};

namespace detail {

inline Json strip_seed(Json j) {
    j.erase("seed");
    return j;
}

inline void reject_seed(const Json& j, const std::string& path) {
    if (j.is_object() && j.contains("seed")) {
        throw ConfigError(path + ".seed: per-model seeds derive from the top-level seed");
    }
}

} // namespace detail

inline Json to_json(const ExperimentConfig& c) {
    Json stages = Json::array();
    for (const auto& s : c.augmentation.stages) {
        Json ops = Json::array();
        for (auto op : s) ops.push_back(to_string(op));
        stages.push_back(ops);
    }
    return Json{{"run_id", c.run_id},
                {"seed", c.seed},
                {"r", c.r},
                {"width", c.width},
                {"height", c.height},
                {"n_train", c.n_train},
                {"m_virtual", c.m_virtual},
                {"pool_size", c.pool_size},
                {"balanced", c.balanced},
                {"method", sampler::to_string(c.method)},
                {"folds", c.folds},
                {"anchors", c.anchors},
                {"data",
                 {{"source", to_string(c.data.source)},
                  {"count", c.data.count},
                  {"mass_threshold", c.data.mass_threshold},
                  {"images", c.data.images},
                  {"labels", c.data.labels},
                  {"classes", c.data.classes},
                  {"limit", c.data.limit}}},
                {"augmentation", {{"stages", stages}, {"include_virtual", c.augmentation.include_virtual}}},
                {"grid", {{"size", c.grid.size}, {"axes", c.grid.axes}}},
                {"gin", detail::strip_seed(gin::to_json(c.gin))},
                {"native", detail::strip_seed(uncertainty::to_json(c.native))},
                {"improved", detail::strip_seed(uncertainty::to_json(c.improved))},
                {"ccp", sampler::to_json(c.ccp)},
                {"oracle", to_json(c.oracle)}};
}

/// Strict parse: unknown keys anywhere are rejected, omitted keys take
/// defaults. `improved` defaults to the parsed `native` settings.
inline ExperimentConfig experiment_config_from_json(const Json& j) {
    StrictObject o(j, "");
    ExperimentConfig c;
    c.run_id = o.get("run_id", c.run_id);
    c.seed = o.get("seed", c.seed);
    c.r = o.get("r", c.r);
    c.width = o.get("width", c.width);
    c.height = o.get("height", c.height);
    c.n_train = o.get("n_train", c.n_train);
    c.m_virtual = o.get("m_virtual", c.m_virtual);
    c.pool_size = o.get("pool_size", c.pool_size);
    c.balanced = o.get("balanced", c.balanced);
    const auto method = o.get<std::string>("method", std::string(sampler::to_string(c.method)));
    const auto m = sampler::method_from_string(method);
    if (!m) throw ConfigError("method: unknown method '" + method + "'");
    c.method = *m;
    c.folds = o.get("folds", c.folds);
    c.anchors = o.get("anchors", c.anchors);

    {
        StrictObject d(o.child("data"), "data");
        const auto src = d.get<std::string>("source", std::string(to_string(c.data.source)));
        if (src == "synthetic_blobs") {
            c.data.source = DataSource::synthetic_blobs;
        } else if (src == "idx") {
            c.data.source = DataSource::idx;
        } else {
            throw ConfigError("data.source: unknown source '" + src + "'");
        }
        c.data.count = d.get("count", c.data.count);
        c.data.mass_threshold = d.get("mass_threshold", c.data.mass_threshold);
        c.data.images = d.get("images", c.data.images);
        c.data.labels = d.get("labels", c.data.labels);
        c.data.classes = d.get("classes", c.data.classes);
        c.data.limit = d.get("limit", c.data.limit);
        d.finish();
    }
    {
        StrictObject a(o.child("augmentation"), "augmentation");
        const auto stages = a.get<std::vector<std::vector<std::string>>>("stages", {});
        for (const auto& s : stages) {
            std::vector<Augmentation> ops;
            for (const auto& name : s) {
                const auto op = augmentation_from_string(name);
                if (!op) throw ConfigError("augmentation.stages: unknown op '" + name + "'");
                ops.push_back(*op);
            }
            c.augmentation.stages.push_back(std::move(ops));
        }
        c.augmentation.include_virtual = a.get("include_virtual", c.augmentation.include_virtual);
        a.finish();
    }
    {
        StrictObject g(o.child("grid"), "grid");
        c.grid.size = g.get("size", c.grid.size);
        c.grid.axes = g.get("axes", c.grid.axes);
        g.finish();
    }
    const Json gin_j = o.child("gin");
    const Json native_j = o.child("native");
    const Json improved_j = o.child("improved");
    detail::reject_seed(gin_j, "gin");
    detail::reject_seed(native_j, "native");
    detail::reject_seed(improved_j, "improved");
    c.gin = gin::train_config_from_json(gin_j, "gin");
    c.native = uncertainty::classifier_config_from_json(native_j, "native");
    c.improved = uncertainty::classifier_config_from_json(improved_j, "improved", c.native);
    c.ccp = sampler::ccp_config_from_json(o.child("ccp"), "ccp");
    c.oracle = oracle_spec_from_json(o.child("oracle"), "oracle");
    o.finish();
    if (!j.contains("grid") || !j["grid"].contains("axes")) {
        // Default axes follow r.
        c.grid.axes = c.r >= 2 ? std::vector<std::size_t>{0, 1} : std::vector<std::size_t>{0};
    }
    c.validate();
    return c;
}

/// Sets one dotted-path key, e.g. "gin.epochs=100". The value is parsed as
/// JSON when possible and taken as a string otherwise.
inline void apply_override(Json& j, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
    }
    const std::string key(assignment.substr(0, eq));
    const std::string text(assignment.substr(eq + 1));
    Json value;
    try {
        value = Json::parse(text);
    } catch (const Json::parse_error&) {
        value = text;
    }
    Json* node = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("override key '" + key + "' has an empty segment");
        if (!node->is_object()) throw ConfigError("override '" + key + "' descends into a non-object");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        Json& next = (*node)[part];
        if (next.is_null()) next = Json::object();
        node = &next;
        start = dot + 1;
    }
}

/// Reads a config file. An ExperimentReport is accepted too, in which case
/// its embedded config is used.
inline Json read_config_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config '" + path.string() + "'");
    Json j;
    try {
        j = Json::parse(is);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(path.string() + ": top level must be an object");
    if (j.contains("report_version") && j.contains("config")) return j["config"];
    return j;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                               const std::vector<std::string>& overrides = {}) {
    Json j = path.empty() ? Json::object() : read_config_json(path);
    for (const auto& o : overrides) apply_override(j, o);
    return experiment_config_from_json(j);
}

} // namespace aisel::pipeline

#endif
