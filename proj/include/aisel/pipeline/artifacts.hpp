#ifndef AISEL_PIPELINE_ARTIFACTS_HPP
#define AISEL_PIPELINE_ARTIFACTS_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aisel/error.hpp"
#include "aisel/gin/persist.hpp"
#include "aisel/nn/checkpoint.hpp"
#include "aisel/pipeline/config.hpp"
#include "aisel/pipeline/run.hpp"

// Stage-by-stage execution against a run directory
//   <out>/<run_id>/{config.resolved.json, checkpoints/, designs/, grids/, metrics.csv, report.json}
// Every stage reloads what earlier stages wrote, so a chained run and a
// sequence of single-stage invocations produce identical files.

namespace aisel::pipeline {

namespace fs = std::filesystem;

class RunDirectory {
public:
    RunDirectory(const fs::path& out, const ExperimentConfig& cfg) : root_(out / cfg.run_id) {}

    const fs::path& root() const { return root_; }
    fs::path config() const { return root_ / "config.resolved.json"; }
    fs::path metrics() const { return root_ / "metrics.csv"; }
    fs::path report() const { return root_ / "report.json"; }
    fs::path error() const { return root_ / "error.json"; }

    fs::path fold_checkpoints(std::size_t fold) const { return root_ / "checkpoints" / fold_name(fold); }
    fs::path native(std::size_t fold) const { return fold_checkpoints(fold) / "native.ckpt"; }
    fs::path improved(std::size_t fold) const { return fold_checkpoints(fold) / "improved.ckpt"; }
    fs::path gin(std::size_t fold) const { return fold_checkpoints(fold) / "gin"; }

    fs::path design_csv(std::size_t fold) const { return root_ / "designs" / (fold_name(fold) + ".csv"); }
    fs::path design_meta(std::size_t fold) const { return root_ / "designs" / (fold_name(fold) + ".json"); }
    fs::path pool_csv(std::size_t fold) const { return root_ / "designs" / (fold_name(fold) + "_pool.csv"); }
    fs::path labels_csv(std::size_t fold) const { return root_ / "designs" / (fold_name(fold) + "_labels.csv"); }

    fs::path grid_csv(std::size_t fold) const { return root_ / "grids" / (fold_name(fold) + "_entropy.csv"); }
    fs::path overlay_csv(std::size_t fold) const { return root_ / "grids" / (fold_name(fold) + "_design.csv"); }

    static std::string fold_name(std::size_t fold) { return "fold" + std::to_string(fold + 1); }

private:
    fs::path root_;
};

namespace detail {

inline std::ofstream open_out(const fs::path& p) {
    fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error("cannot write '" + p.string() + "'");
    return os;
}

inline std::ifstream open_in(const fs::path& p, const char* stage_hint) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw Error("missing '" + p.string() + "' (run " + stage_hint + " first)");
    return is;
}

inline void write_json(const fs::path& p, const Json& j) {
    auto os = open_out(p);
    os << j.dump(1) << '\n';
}

inline Json read_json(const fs::path& p, const char* stage_hint) {
    auto is = open_in(p, stage_hint);
    try {
        return Json::parse(is);
    } catch (const Json::parse_error& e) {
        throw FormatError(p.string() + ": " + e.what());
    }
}

inline Classifier load_classifier(const fs::path& p, const char* stage_hint) {
    if (!fs::exists(p)) throw Error("missing '" + p.string() + "' (run " + stage_hint + " first)");
    return uncertainty::classifier_from_network(nn::load_checkpoint(p));
}

inline gin::GinModel load_gin_checked(const fs::path& p) {
    if (!fs::exists(p / "gin.json")) throw Error("missing GIN at '" + p.string() + "' (run train-gin first)");
    return gin::load_gin(p);
}

inline void write_labels(const fs::path& p, const std::vector<int>& labels) {
    auto os = open_out(p);
    os << "label\n";
    for (int y : labels) os << y << '\n';
}

inline std::vector<int> read_labels(const fs::path& p) {
    auto is = open_in(p, "label");
    std::string line;
    if (!std::getline(is, line) || line != "label") throw FormatError(p.string() + ": header must be 'label'");
    std::vector<int> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(line, &used));
            if (used != line.size()) throw std::invalid_argument(line);
        } catch (const std::exception&) {
            throw FormatError(p.string() + ": bad label '" + line + "'");
        }
    }
    return out;
}

inline sampler::SampleDesign load_design(const RunDirectory& run, std::size_t fold) {
    auto is = open_in(run.design_csv(fold), "sample");
    auto d = sampler::read_design_csv(is);
    const Json meta = read_json(run.design_meta(fold), "sample");
    const auto method = sampler::method_from_string(meta.at("method").get<std::string>());
    if (!method) throw FormatError(run.design_meta(fold).string() + ": unknown method");
    d.method = *method;
    d.objective_trace = meta.at("objective_trace").get<std::vector<double>>();
    return d;
}

/// Shared per-stage context: the data and its fold splits.
struct StageContext {
    Dataset data;
    std::vector<Split> splits;

    Dataset train(std::size_t f) const { return data.subset(splits[f].train); }
    Dataset test(std::size_t f) const { return data.subset(splits[f].test); }
};

inline StageContext prepare(const ExperimentConfig& cfg) {
    StageContext c;
    c.data = load_data(cfg);
    c.splits = make_splits(cfg, c.data);
    return c;
}

} // namespace detail

inline void write_resolved_config(const RunDirectory& run, const ExperimentConfig& cfg) {
    detail::write_json(run.config(), to_json(cfg));
}

inline void stage_train_native(const ExperimentConfig& cfg, const RunDirectory& run) {
    const auto ctx = detail::prepare(cfg);
    for (std::size_t f = 0; f < ctx.splits.size(); ++f) {
        const auto clf = train_native_stage(cfg, f, ctx.train(f));
        fs::create_directories(run.fold_checkpoints(f));
        nn::save_checkpoint(run.native(f), clf.net);
    }
}

inline void stage_train_gin(const ExperimentConfig& cfg, const RunDirectory& run) {
    const auto ctx = detail::prepare(cfg);
    for (std::size_t f = 0; f < ctx.splits.size(); ++f) gin::save_gin(run.gin(f), train_gin_stage(cfg, f, ctx.train(f)));
}

inline void stage_sample(const ExperimentConfig& cfg, const RunDirectory& run) {
    const auto ctx = detail::prepare(cfg);
    for (std::size_t f = 0; f < ctx.splits.size(); ++f) {
        const auto native = detail::load_classifier(run.native(f), "train-native");
        const auto gin = detail::load_gin_checked(run.gin(f));
        const auto out = sample_stage(cfg, f, gin, native, ctx.train(f));
        {
            auto os = detail::open_out(run.design_csv(f));
            sampler::write_design_csv(os, out.design, cfg.r);
        }
        Json meta = design_json(out.design);
        if (out.pool) {
            auto os = detail::open_out(run.pool_csv(f));
            uncertainty::write_pool_csv(os, *out.pool);
            double h = 0.0;
            for (double e : out.pool->entropies) h += e;
            meta["pool_uniform_fallback"] = out.pool->uniform_fallback;
            meta["pool_mean_entropy"] = h / static_cast<double>(out.pool->size());
        }
        detail::write_json(run.design_meta(f), meta);
    }
}

inline void stage_label(const ExperimentConfig& cfg, const RunDirectory& run) {
    const auto ctx = detail::prepare(cfg);
    for (std::size_t f = 0; f < ctx.splits.size(); ++f) {
        const auto gin = detail::load_gin_checked(run.gin(f));
        const auto design = detail::load_design(run, f);
        const auto v = label_stage(cfg, gin, design, ctx.data.classes, ctx.data.mass_threshold);
        detail::write_labels(run.labels_csv(f), v.labels);
    }
}

inline void stage_retrain(const ExperimentConfig& cfg, const RunDirectory& run) {
    const auto ctx = detail::prepare(cfg);
    for (std::size_t f = 0; f < ctx.splits.size(); ++f) {
        const auto gin = detail::load_gin_checked(run.gin(f));
        const auto design = detail::load_design(run, f);
        const auto v = virtual_dataset(gin, design, detail::read_labels(run.labels_csv(f)), ctx.data.classes);
        const auto clf = retrain_stage(cfg, f, ctx.train(f), v);
        fs::create_directories(run.fold_checkpoints(f));
        nn::save_checkpoint(run.improved(f), clf.net);
    }
}

/// Metrics for both classifiers of every fold; writes metrics.csv and report.json.
inline ExperimentReport stage_eval(const ExperimentConfig& cfg, const RunDirectory& run) {
    const auto ctx = detail::prepare(cfg);
    ExperimentReport rep;
    rep.config = cfg;
    for (std::size_t f = 0; f < ctx.splits.size(); ++f) {
        FoldResult r;
        r.fold = f;
        r.seed = fold_seeds(cfg.seed, f).base;
        r.train_indices = ctx.splits[f].train;
        r.test_indices = ctx.splits[f].test;
        const Dataset train = ctx.train(f);
        const Dataset test = ctx.test(f);
        const auto native = detail::load_classifier(run.native(f), "train-native");
        const auto improved = detail::load_classifier(run.improved(f), "retrain");
        r.native = uncertainty::eval_metrics(native, test);
        r.improved = uncertainty::eval_metrics(improved, test);
        r.gin_traces = gin::load_gin(run.gin(f)).traces;
        r.design = detail::load_design(run, f);
        const Json meta = detail::read_json(run.design_meta(f), "sample");
        r.pool_uniform_fallback = meta.value("pool_uniform_fallback", false);
        if (meta.contains("pool_mean_entropy")) r.pool_mean_entropy = meta["pool_mean_entropy"].get<double>();
        r.virtual_labels = detail::read_labels(run.labels_csv(f));
        r.native_train_size = classifier_data(cfg, train).size();
        r.improved_train_size = r.native_train_size + r.virtual_labels.size() * virtual_multiplier(cfg);
        rep.folds.push_back(std::move(r));
    }
    {
        auto os = detail::open_out(run.metrics());
        write_metrics_csv(os, rep);
    }
    detail::write_json(run.report(), to_json(rep));
    return rep;
}

/// Entropy grid over the configured axes plus the design points projected
/// onto them, per fold.
inline void stage_export_grid(const ExperimentConfig& cfg, const RunDirectory& run) {
    const auto ctx = detail::prepare(cfg);
    for (std::size_t f = 0; f < ctx.splits.size(); ++f) {
        const auto native = detail::load_classifier(run.native(f), "train-native");
        const auto gin = detail::load_gin_checked(run.gin(f));
        const auto grid = uncertainty::evaluate_grid(gin, native, cfg.grid.size, cfg.grid.axes);
        {
            auto os = detail::open_out(run.grid_csv(f));
            uncertainty::write_grid_csv(os, grid);
        }
        const auto design = detail::load_design(run, f);
        auto os = detail::open_out(run.overlay_csv(f));
        for (auto a : cfg.grid.axes) os << 'f' << (a + 1) << ',';
        os << "kind\n";
        os.precision(17);
        auto rows = [&](const FeatureSet& s, const char* kind) {
            for (std::size_t i = 0; i < s.size(); ++i) {
                for (auto a : cfg.grid.axes) {
                    os << s.coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) << ',';
                }
                os << kind << '\n';
            }
        };
        rows(design.movable, "virtual");
        rows(design.fixed, "actual");
    }
}

inline ExperimentReport stage_run_all(const ExperimentConfig& cfg, const RunDirectory& run) {
    stage_train_native(cfg, run);
    stage_train_gin(cfg, run);
    stage_sample(cfg, run);
    stage_label(cfg, run);
    stage_retrain(cfg, run);
    return stage_eval(cfg, run);
}

} // namespace aisel::pipeline

#endif
