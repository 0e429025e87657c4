#ifndef AISEL_PIPELINE_RUN_HPP
#define AISEL_PIPELINE_RUN_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "aisel/error.hpp"
#include "aisel/gin/gin.hpp"
#include "aisel/pipeline/blobs.hpp"
#include "aisel/pipeline/config.hpp"
#include "aisel/pipeline/dataset.hpp"
#include "aisel/pipeline/idx.hpp"
#include "aisel/pipeline/oracle.hpp"
#include "aisel/random.hpp"
#include "aisel/sampler/baselines.hpp"
#include "aisel/sampler/ccp.hpp"
#include "aisel/sampler/design.hpp"
#include "aisel/uncertainty/classifier.hpp"
#include "aisel/uncertainty/metrics.hpp"
#include "aisel/uncertainty/pool.hpp"

// Per fold: native classifier, GIN, pool + anchors, feature
// selection, virtual images, oracle labels, improved classifier, metrics.

namespace aisel::pipeline {

using uncertainty::Classifier;
using uncertainty::Metrics;

inline constexpr int kReportVersion = 1;

/// Seeds of one fold. The fold base is seed + fold index; each stage draws
/// its own stream from it.
struct FoldSeeds {
    std::uint64_t base = 0;
    std::uint64_t classifier = 0;
    std::uint64_t gin = 0;
    std::uint64_t pool = 0;
    std::uint64_t design = 0;
};

inline FoldSeeds fold_seeds(std::uint64_t seed, std::size_t fold) {
    FoldSeeds s;
    s.base = seed + fold;
    s.classifier = derive_seed(s.base, 101);
    s.gin = derive_seed(s.base, 102);
    s.pool = derive_seed(s.base, 103);
    s.design = derive_seed(s.base, 104);
    return s;
}

inline Dataset load_data(const ExperimentConfig& cfg) {
    if (cfg.data.source == DataSource::synthetic_blobs) {
        return synth_blob_dataset(cfg.data.count, cfg.width, cfg.height, derive_seed(cfg.seed, 100),
                                  cfg.data.mass_threshold);
    }
    Dataset d = load_idx_dataset(cfg.data.images, cfg.data.labels, cfg.data.classes, cfg.data.limit);
    if (d.images.width != cfg.width || d.images.height != cfg.height) {
        throw ConfigError("IDX images are " + std::to_string(d.images.width) + "x" + std::to_string(d.images.height) +
                          " but the config says " + std::to_string(cfg.width) + "x" + std::to_string(cfg.height));
    }
    return d;
}

/// Fold partitions: a stratified holdout of n_train training examples when
/// folds = 1, stratified k-fold otherwise.
inline std::vector<Split> make_splits(const ExperimentConfig& cfg, const Dataset& data) {
    const auto seed = derive_seed(cfg.seed, 99);
    if (cfg.folds == 1) {
        if (cfg.n_train >= data.size()) {
            throw ConfigError("n_train = " + std::to_string(cfg.n_train) + " leaves no test examples out of " +
                              std::to_string(data.size()));
        }
        return {holdout_split(data.labels, data.size() - cfg.n_train, seed)};
    }
    return kfold_split(data.labels, cfg.folds, seed);
}

// ---- stages ----

inline uncertainty::ClassifierConfig with_seed(uncertainty::ClassifierConfig c, std::uint64_t seed) {
    c.seed = seed;
    return c;
}

/// Classifier training data: the actual split after augmentation.
inline Dataset classifier_data(const ExperimentConfig& cfg, const Dataset& train) {
    return augment_stages(train, cfg.augmentation.stages);
}

inline Classifier train_native_stage(const ExperimentConfig& cfg, std::size_t fold, const Dataset& train) {
    return uncertainty::train_classifier(classifier_data(cfg, train),
                                         with_seed(cfg.native, fold_seeds(cfg.seed, fold).classifier));
}

/// The GIN sees the un-augmented actual training images only.
inline gin::GinModel train_gin_stage(const ExperimentConfig& cfg, std::size_t fold, const Dataset& train) {
    gin::TrainConfig g = cfg.gin;
    g.seed = fold_seeds(cfg.seed, fold).gin;
    return gin::train_gin(train.images, g, cfg.r);
}

struct SampleOutcome {
    sampler::SampleDesign design;
    /// Set for method aisel.
    std::optional<uncertainty::UncertaintyPool> pool;
};

inline SampleOutcome sample_stage(const ExperimentConfig& cfg, std::size_t fold, const gin::GinModel& gin,
                                  const Classifier& native, const Dataset& train) {
    if (gin.r != cfg.r) throw ArgumentError("GIN latent dimension differs from config r");
    const auto seeds = fold_seeds(cfg.seed, fold);
    const std::size_t m = cfg.virtual_count();
    SampleOutcome out;
    if (m == 0) {
        // Nothing selected: the design is empty and carries no anchors.
        out.design.method = cfg.method;
        out.design.movable = FeatureSet::empty(cfg.r);
        out.design.fixed = FeatureSet::empty(cfg.r);
        return out;
    }
    switch (cfg.method) {
    case sampler::Method::aisel: {
        out.pool = uncertainty::build_pool(gin, native, cfg.pool_size, seeds.pool, cfg.balanced);
        const FeatureSet anchors = cfg.anchors ? gin::encode(gin, train.images) : FeatureSet::empty(cfg.r);
        out.design = sampler::ccp_optimize(*out.pool, anchors, m, cfg.ccp, seeds.design);
        break;
    }
    case sampler::Method::random:
        out.design = sampler::random_design(m, cfg.r, seeds.design);
        break;
    case sampler::Method::grid_topk: {
        const auto grid = uncertainty::evaluate_grid(gin, native, cfg.grid.size);
        out.design = sampler::grid_topk_design(grid, m);
        break;
    }
    case sampler::Method::none:
        break;
    case sampler::Method::brute_force:
        throw ConfigError("method brute_force is not a pipeline method");
    }
    return out;
}

/// Virtual images G(f') for the selected features, labeled by the oracle only.
inline Dataset label_stage(const ExperimentConfig& cfg, const gin::GinModel& gin, const sampler::SampleDesign& design,
                           int classes, std::optional<double> dataset_threshold) {
    ImageSet images = design.movable.empty() ? ImageSet::empty(gin.width, gin.height)
                                             : gin::generate(gin, design.movable);
    auto labels = oracle_label(cfg.oracle, images, classes, dataset_threshold);
    Dataset v = make_dataset(std::move(images), std::move(labels), classes, Provenance::virtual_);
    v.mass_threshold = dataset_threshold;
    return v;
}

/// Rebuilds the virtual dataset from stored labels (no oracle call).
inline Dataset virtual_dataset(const gin::GinModel& gin, const sampler::SampleDesign& design, std::vector<int> labels,
                               int classes) {
    if (labels.size() != design.m()) throw FormatError("virtual label count differs from design size");
    ImageSet images = design.movable.empty() ? ImageSet::empty(gin.width, gin.height)
                                             : gin::generate(gin, design.movable);
    return make_dataset(std::move(images), std::move(labels), classes, Provenance::virtual_);
}

/// Copies of each virtual example in the improved training set.
inline std::size_t virtual_multiplier(const ExperimentConfig& cfg) {
    if (!cfg.augmentation.include_virtual) return 1;
    std::size_t mult = 1;
    for (const auto& s : cfg.augmentation.stages) mult *= 1 + s.size();
    return mult;
}

/// The improved classifier shares the native seed, so an empty virtual set
/// reproduces the native model exactly.
inline Classifier retrain_stage(const ExperimentConfig& cfg, std::size_t fold, const Dataset& train,
                                const Dataset& virtual_set) {
    const Dataset v = cfg.augmentation.include_virtual ? augment_stages(virtual_set, cfg.augmentation.stages) : virtual_set;
    return uncertainty::train_classifier(fuse(classifier_data(cfg, train), v),
                                         with_seed(cfg.improved, fold_seeds(cfg.seed, fold).classifier));
}

// ---- report ----

struct FoldResult {
    std::size_t fold = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    /// Classifier training examples after augmentation, actual only.
    std::size_t native_train_size = 0;
    std::size_t improved_train_size = 0;
    Metrics native;
    Metrics improved;
    sampler::SampleDesign design;
    std::vector<int> virtual_labels;
    gin::LossTraces gin_traces;
    bool pool_uniform_fallback = false;
    double pool_mean_entropy = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<FoldResult> folds;

    double mean_accuracy(bool improved) const {
        double s = 0.0;
        for (const auto& f : folds) s += improved ? f.improved.accuracy : f.native.accuracy;
        return folds.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(folds.size());
    }
};

/// Runs one complete fold in memory.
inline FoldResult run_fold(const ExperimentConfig& cfg, const Dataset& data, const Split& split, std::size_t fold) {
    FoldResult r;
    r.fold = fold;
    r.seed = fold_seeds(cfg.seed, fold).base;
    r.train_indices = split.train;
    r.test_indices = split.test;
    const Dataset train = data.subset(split.train);
    const Dataset test = data.subset(split.test);

    const Classifier native = train_native_stage(cfg, fold, train);
    const gin::GinModel gin = train_gin_stage(cfg, fold, train);
    r.gin_traces = gin.traces;
    auto sampled = sample_stage(cfg, fold, gin, native, train);
    if (sampled.pool) {
        r.pool_uniform_fallback = sampled.pool->uniform_fallback;
        double h = 0.0;
        for (double e : sampled.pool->entropies) h += e;
        r.pool_mean_entropy = h / static_cast<double>(sampled.pool->size());
    }
    r.design = std::move(sampled.design);
    const Dataset virtual_set = label_stage(cfg, gin, r.design, data.classes, data.mass_threshold);
    r.virtual_labels = virtual_set.labels;
    const Classifier improved = retrain_stage(cfg, fold, train, virtual_set);

    r.native_train_size = classifier_data(cfg, train).size();
    r.improved_train_size = r.native_train_size + virtual_set.size() * virtual_multiplier(cfg);
    r.native = uncertainty::eval_metrics(native, test);
    r.improved = uncertainty::eval_metrics(improved, test);
    return r;
}

/// The full loop over every fold of `data`.
inline ExperimentReport run_aisel(const ExperimentConfig& cfg, const Dataset& data) {
    cfg.validate();
    data.validate();
    if (data.empty()) throw ArgumentError("run_aisel on an empty dataset");
    ExperimentReport rep;
    rep.config = cfg;
    const auto splits = make_splits(cfg, data);
    for (std::size_t f = 0; f < splits.size(); ++f) rep.folds.push_back(run_fold(cfg, data, splits[f], f));
    return rep;
}

inline ExperimentReport run_aisel(const ExperimentConfig& cfg) { return run_aisel(cfg, load_data(cfg)); }

// ---- serialization ----

/// Shortest round-trip decimal; "nan" for NaN.
inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline Json metrics_json(const Metrics& m) {
    auto opt = [](double v) { return std::isnan(v) ? Json(nullptr) : Json(v); };
    return Json{{"accuracy", m.accuracy},
                {"sensitivity", opt(m.sensitivity)},
                {"specificity", opt(m.specificity)},
                {"confusion", m.confusion}};
}

/// Mean of each metric over folds (NaN-valued folds are skipped).
inline Metrics mean_metrics(const std::vector<const Metrics*>& ms) {
    Metrics out;
    auto mean = [&](auto get) {
        double s = 0.0;
        std::size_t n = 0;
        for (const auto* m : ms) {
            const double v = get(*m);
            if (!std::isnan(v)) {
                s += v;
                ++n;
            }
        }
        return n == 0 ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(n);
    };
    out.accuracy = mean([](const Metrics& m) { return m.accuracy; });
    out.sensitivity = mean([](const Metrics& m) { return m.sensitivity; });
    out.specificity = mean([](const Metrics& m) { return m.specificity; });
    return out;
}

/// metrics.csv: one native and one improved row per fold (folds numbered
/// from 1), then the fold means.
inline void write_metrics_csv(std::ostream& os, const ExperimentReport& rep) {
    os << "fold,model,accuracy,sensitivity,specificity\n";
    auto row = [&](const std::string& fold, const char* model, const Metrics& m) {
        os << fold << ',' << model << ',' << format_real(m.accuracy) << ',' << format_real(m.sensitivity) << ','
           << format_real(m.specificity) << '\n';
    };
    std::vector<const Metrics*> nat, imp;
    for (const auto& f : rep.folds) {
        row(std::to_string(f.fold + 1), "native", f.native);
        row(std::to_string(f.fold + 1), "improved", f.improved);
        nat.push_back(&f.native);
        imp.push_back(&f.improved);
    }
    row("mean", "native", mean_metrics(nat));
    row("mean", "improved", mean_metrics(imp));
}

inline Json design_json(const sampler::SampleDesign& d) {
    return Json{{"method", sampler::to_string(d.method)},
                {"m", d.m()},
                {"n", d.n()},
                {"objective_trace", d.objective_trace}};
}

inline Json to_json(const ExperimentReport& rep) {
    Json folds = Json::array();
    std::vector<const Metrics*> nat, imp;
    for (const auto& f : rep.folds) {
        Json counts = Json::object();
        for (int y : f.virtual_labels) counts[std::to_string(y)] = counts.value(std::to_string(y), 0) + 1;
        Json fj{{"fold", f.fold + 1},
                {"seed", f.seed},
                {"train_indices", f.train_indices},
                {"test_indices", f.test_indices},
                {"native_train_size", f.native_train_size},
                {"improved_train_size", f.improved_train_size},
                {"virtual_count", f.virtual_labels.size()},
                {"virtual_label_counts", counts},
                {"native", metrics_json(f.native)},
                {"improved", metrics_json(f.improved)},
                {"design", design_json(f.design)},
                {"pool_uniform_fallback", f.pool_uniform_fallback},
                {"pool_mean_entropy", std::isnan(f.pool_mean_entropy) ? Json(nullptr) : Json(f.pool_mean_entropy)},
                {"gin_loss_traces", gin::to_json(f.gin_traces)}};
        folds.push_back(std::move(fj));
        nat.push_back(&f.native);
        imp.push_back(&f.improved);
    }
    return Json{{"report_version", kReportVersion},
                {"config", to_json(rep.config)},
                {"folds", folds},
                {"mean", {{"native", metrics_json(mean_metrics(nat))}, {"improved", metrics_json(mean_metrics(imp))}}}};
}

} // namespace aisel::pipeline

#endif
