// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.
// Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aisel/aisel.hpp"
#include "../support/fd.hpp"
#include "../support/fixtures.hpp"

using namespace aisel;
using namespace aisel::pipeline;
using uncertainty::UncertaintyPool;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

gin::TrainConfig gin_config(std::uint64_t seed) {
    gin::TrainConfig c;
    c.seed = seed;
    return c;
}

uncertainty::ClassifierConfig classifier_config(std::uint64_t seed) {
    uncertainty::ClassifierConfig c;
    c.seed = seed;
    return c;
}

// Trained GINs on 400 blobs, shared between criteria 2, 3, 6 and 7.
struct SeedWorld {
    Dataset data;
    gin::GinModel untrained;
    gin::GinModel trained;
};

const SeedWorld& world(std::uint64_t seed) {
    static std::map<std::uint64_t, SeedWorld> cache;
    auto it = cache.find(seed);
    if (it != cache.end()) return it->second;
    SeedWorld w;
    w.data = synth_blob_dataset(400, 16, 16, seed);
    w.untrained = gin::init_model(2, 16, 16, gin_config(seed));
    w.trained = gin::train_gin(w.data.images, gin_config(seed), 2);
    return cache.emplace(seed, std::move(w)).first->second;
}

// Fixed (GIN, native) pair and its uncertainty pool for criteria 6 and 7.
struct Fixed {
    const SeedWorld* w;
    uncertainty::Classifier native;
    UncertaintyPool pool;
};

const Fixed& fixed_pair() {
    static const Fixed f = [] {
        Fixed x{&world(1), {}, {}};
        x.native = uncertainty::train_classifier(x.w->data, classifier_config(1));
        x.pool = uncertainty::build_pool(x.w->trained, x.native, 4096, 1, false);
        return x;
    }();
    return f;
}

UncertaintyPool random_pool(std::size_t n, std::size_t r, std::uint64_t seed) {
    Engine rng(seed);
    auto f = gin::sample_uniform_features(n, r, seed);
    std::vector<double> h(n);
    for (auto& v : h) v = uniform(rng, 0.05, 1.0);
    return uncertainty::make_pool(std::move(f), std::move(h), std::vector<int>(n, 0), false);
}

// ---- criteria ----

void gradient_oracle(Outcome& o) {
    gin::TrainConfig g;
    uncertainty::ClassifierConfig c;
    struct Arch {
        const char* name;
        std::vector<nn::LayerSpec> specs;
        double lo, hi;
        check::FdLoss loss;
    };
    const std::vector<Arch> archs{
        {"generator r=2", gin::generator_specs(2, 256, g), -1.0, 1.0, check::FdLoss::projection},
        {"generator r=1", gin::generator_specs(1, 256, g), -1.0, 1.0, check::FdLoss::projection},
        {"critic", gin::critic_specs(256, g), 0.0, 1.0, check::FdLoss::projection},
        {"encoder r=2", gin::encoder_specs(256, 2, g), 0.0, 1.0, check::FdLoss::projection},
        {"encoder r=1", gin::encoder_specs(256, 1, g), 0.0, 1.0, check::FdLoss::projection},
        {"classifier", uncertainty::classifier_specs(256, 2, c), 0.0, 1.0, check::FdLoss::cross_entropy},
    };
    double worst = 0.0;
    std::size_t checked = 0, skipped = 0;
    for (const auto& a : archs) {
        double arch_worst = 0.0;
        for (std::uint64_t draw = 0; draw < 20; ++draw) {
            const auto p = check::random_problem(a.specs, 3, a.lo, a.hi, 1000 + draw, a.loss);
            const auto rep = check::check_gradients(p, 200, draw);
            arch_worst = std::max(arch_worst, rep.max_rel_error);
            checked += rep.checked;
            skipped += rep.skipped;
        }
        o.require(arch_worst < 1e-4, std::string(a.name) + " rel error " + std::to_string(arch_worst));
        worst = std::max(worst, arch_worst);
    }
    o.detail << "max rel error " << worst << " over " << archs.size() << " architectures x 20 draws (" << checked
             << " coordinates, " << skipped << " kink-straddling skipped)";
}

void clip_invariant(Outcome& o) {
    const auto& g = world(1).trained;
    double lo = 0.0, hi = 0.0;
    bool finite = true;
    for (const auto& l : g.discriminator.layers) {
        lo = std::min({lo, l.weights.minCoeff(), l.bias.minCoeff()});
        hi = std::max({hi, l.weights.maxCoeff(), l.bias.maxCoeff()});
        finite = finite && l.weights.allFinite() && l.bias.allFinite();
    }
    o.require(finite, "non-finite critic parameter");
    o.require(lo >= -0.01 && hi <= 0.01, "critic parameter outside [-0.01, 0.01]");
    o.detail << "critic parameters in [" << lo << ", " << hi << "] after " << g.traces.generator.size() << " epochs";
}

void encoder_inversion(Outcome& o) {
    int enc_ok = 0, rec_ok = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto& w = world(seed);
        const auto held = gin::sample_uniform_features(256, 2, derive_seed(seed, 900));
        const double e0 = gin::encoder_mse(w.untrained, held);
        const double e1 = gin::encoder_mse(w.trained, held);
        const double r0 = gin::reconstruction_mse(w.untrained, w.data.images);
        const double r1 = gin::reconstruction_mse(w.trained, w.data.images);
        enc_ok += e1 <= 0.5 * e0;
        rec_ok += r1 < r0;
        o.detail << " seed " << seed << ": enc " << e1 << "/" << e0 << " recon " << r1 << "/" << r0 << ";";
    }
    o.require(enc_ok >= 4, "encoder ratio held on " + std::to_string(enc_ok) + "/5 seeds");
    o.require(rec_ok >= 4, "reconstruction improved on " + std::to_string(rec_ok) + "/5 seeds");
    o.detail << " encoder " << enc_ok << "/5, reconstruction " << rec_ok << "/5";
}

void ccp_monotone(Outcome& o) {
    std::size_t instances = 0, sweeps = 0;
    double worst_rise = -1.0;
    for (std::size_t m : {10u, 50u}) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto pool = random_pool(500, 2, 100 * m + seed);
            const FeatureSet anchors = seed % 2 ? gin::sample_uniform_features(40, 2, seed + 7) : FeatureSet{};
            const auto d = sampler::ccp_optimize(pool, anchors, m, {}, seed);
            for (std::size_t t = 1; t < d.objective_trace.size(); ++t) {
                worst_rise = std::max(worst_rise, d.objective_trace[t] - d.objective_trace[t - 1]);
            }
            sweeps += d.objective_trace.size();
            ++instances;
        }
    }
    o.require(worst_rise <= 1e-9, "objective rose by " + std::to_string(worst_rise));
    o.detail << instances << " instances, " << sweeps << " trace entries, largest step change " << worst_rise;
}

void brute_force_equivalence(Outcome& o) {
    Matrix line(201, 1);
    for (Eigen::Index i = 0; i < 201; ++i) line(i, 0) = -1.0 + 0.01 * static_cast<double>(i);
    double worst_gap = -1e300, worst_loc = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Engine rng(seed + 300);
        std::vector<double> h(201);
        for (auto& v : h) v = uniform(rng, 0.05, 1.0);
        const auto pool = uncertainty::make_pool(FeatureSet(line), h, std::vector<int>(201, 0), false);
        for (std::size_t m : {1u, 2u}) {
            const auto oracle = sampler::brute_force_design(pool, {}, m, 0.01);
            const auto d = sampler::ccp_optimize(pool, {}, m, {}, seed);
            worst_gap = std::max(worst_gap, d.objective_trace.back() - oracle.objective_trace.back());
            std::vector<double> got, want;
            for (std::size_t i = 0; i < m; ++i) {
                got.push_back(d.movable.coords(static_cast<Eigen::Index>(i), 0));
                want.push_back(oracle.movable.coords(static_cast<Eigen::Index>(i), 0));
            }
            std::sort(got.begin(), got.end());
            std::sort(want.begin(), want.end());
            for (std::size_t i = 0; i < m; ++i) worst_loc = std::max(worst_loc, std::abs(got[i] - want[i]));
        }
    }
    o.require(worst_gap <= 1e-2, "objective gap " + std::to_string(worst_gap));
    o.require(worst_loc <= 0.05, "location error " + std::to_string(worst_loc));
    o.detail << "5 seeds x m in {1, 2}: worst objective gap " << worst_gap << ", worst location error " << worst_loc;
}

void energy_trend(Outcome& o) {
    const auto& f = fixed_pair();
    double prev = -1.0;
    for (std::size_t m : {10u, 25u, 50u, 100u}) {
        std::vector<double> first5;
        int wins = 0;
        for (std::uint64_t s = 1; s <= 10; ++s) {
            const auto ref = sampler::resample_pool(f.pool, 4096, s + 500);
            const auto a = sampler::ccp_optimize(f.pool, {}, m, {}, s);
            const auto r = sampler::random_design(m, 2, s);
            const double ea = sampler::energy_distance(a.movable, ref);
            const double er = sampler::energy_distance(r.movable, ref);
            wins += ea <= er;
            if (s <= 5) first5.push_back(ea);
        }
        const double med = median(first5);
        if (prev >= 0.0) o.require(med <= 1.1 * prev, "median rose at m=" + std::to_string(m));
        o.require(wins >= 9, "m=" + std::to_string(m) + " beat random on " + std::to_string(wins) + "/10");
        o.detail << " m=" << m << ": median " << med << ", wins " << wins << "/10;";
        prev = med;
    }
}

void separation(Outcome& o) {
    const auto& f = fixed_pair();
    const auto anchors = gin::encode(f.w->trained, f.w->data.images);
    int wins = 0;
    double sa = 0.0, sr = 0.0;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        const auto a = sampler::ccp_optimize(f.pool, anchors, 400, {}, s);
        auto r = sampler::random_design(400, 2, s);
        r.fixed = anchors;
        const double ma = median(sampler::separation_distances(a));
        const double mr = median(sampler::separation_distances(r));
        wins += ma > mr;
        sa += ma;
        sr += mr;
    }
    o.require(wins == 10, "aisel separation larger on " + std::to_string(wins) + "/10 seeds");
    o.detail << "aisel larger on " << wins << "/10 seeds, mean medians " << sa / 10 << " vs " << sr / 10;
}

void end_to_end(Outcome& o) {
    double gain = 0.0, mean_a = 0.0, mean_r = 0.0;
    int ahead = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ExperimentConfig c;
        c.seed = seed;
        c.data.count = 1400;
        c.n_train = 400;
        c.m_virtual = 400;
        c.method = sampler::Method::aisel;
        const auto a = run_aisel(c).folds[0];
        c.method = sampler::Method::random;
        const auto r = run_aisel(c).folds[0];
        gain += a.improved.accuracy - a.native.accuracy;
        mean_a += a.improved.accuracy;
        mean_r += r.improved.accuracy;
        ahead += a.improved.accuracy >= r.improved.accuracy;
        o.detail << " seed " << seed << ": native " << a.native.accuracy << " aisel " << a.improved.accuracy
                 << " random " << r.improved.accuracy << ";";
    }
    gain /= 5.0;
    o.require(gain >= 0.03, "mean gain " + std::to_string(100 * gain) + " points");
    o.require(ahead >= 4, "aisel >= random on " + std::to_string(ahead) + "/5 seeds");
    o.detail << " mean gain " << 100.0 * gain << " points, aisel >= random on " << ahead << "/5 (means "
             << mean_a / 5 << " vs " << mean_r / 5 << ")";
}

void fold_accounting(Outcome& o) {
    ExperimentConfig c;
    c.data.count = 168;
    c.folds = 4;
    c.n_train = 0;
    c.augmentation.stages = {{Augmentation::hflip},
                             {Augmentation::rot90, Augmentation::rot180, Augmentation::rot270, Augmentation::hflip}};
    c.validate();
    const auto data = load_data(c);
    const auto splits = make_splits(c, data);
    std::set<std::size_t> tested;
    o.require(splits.size() == 4, "fold count");
    for (const auto& s : splits) {
        const auto n = classifier_data(c, data.subset(s.train)).size();
        o.require(s.test.size() == 42, "test fold of " + std::to_string(s.test.size()));
        o.require(n == 1260, "train size " + std::to_string(n));
        tested.insert(s.test.begin(), s.test.end());
        o.detail << " test " << s.test.size() << " train " << n << ";";
    }
    o.require(tested.size() == 168, "test folds do not partition the data");
}

void entropy_exactness(Outcome& o) {
    const std::vector<double> onehot{0, 0, 1, 0};
    const std::vector<double> flat(10, 0.1);
    const double h0 = uncertainty::entropy(onehot);
    const double h10 = uncertainty::entropy(flat);
    o.require(h0 == 0.0, "one-hot entropy " + std::to_string(h0));
    o.require(std::abs(h10 - std::log(10.0)) <= 1e-12, "uniform entropy off");

    // Balanced weights on a trained pair and on a three-class synthetic pool.
    const auto& f = fixed_pair();
    auto pools = std::vector<UncertaintyPool>{uncertainty::build_pool(f.w->trained, f.native, 4096, 2, true)};
    {
        Engine rng(11);
        const std::size_t n = 600;
        std::vector<double> h(n);
        std::vector<int> cls(n);
        for (std::size_t i = 0; i < n; ++i) {
            cls[i] = i < 400 ? 0 : (i < 550 ? 1 : 2);
            h[i] = uniform(rng, 0.0, 1.0);
        }
        pools.push_back(uncertainty::make_pool(gin::sample_uniform_features(n, 2, 3), h, cls, true));
    }
    double spread = 0.0;
    for (const auto& p : pools) {
        std::map<int, double> mass;
        for (std::size_t j = 0; j < p.size(); ++j) mass[p.predicted[j]] += p.weights[j];
        double lo = 1e300, hi = -1e300;
        for (const auto& [k, v] : mass) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        spread = std::max(spread, hi - lo);
        o.detail << " pool with " << mass.size() << " classes;";
    }
    o.require(spread <= 1e-9, "class mass spread " + std::to_string(spread));
    o.detail << " H(one-hot)=" << h0 << " |H(uniform10)-ln10|=" << std::abs(h10 - std::log(10.0))
             << " class mass spread " << spread;
}

void replay(Outcome& o) {
    std::vector<ExperimentConfig> configs(2);
    for (auto& c : configs) {
        c.data.count = 240;
        c.n_train = 160;
        c.m_virtual = 40;
        c.pool_size = 512;
        c.gin.epochs = 150;
        c.gin.encoder_epochs = 150;
        c.native.epochs = 10;
        c.improved = c.native;
    }
    configs[0].run_id = "holdout_aisel";
    configs[1].run_id = "kfold_random";
    configs[1].method = sampler::Method::random;
    configs[1].folds = 3;
    configs[1].n_train = 0;
    configs[1].augmentation.stages = {{Augmentation::hflip}};
    for (auto& c : configs) {
        c.validate();
        check::TempDir first("accept"), second("accept");
        stage_run_all(c, RunDirectory(first.path(), c));
        const auto report = first / c.run_id / "report.json";
        const auto again = load_experiment_config(report);
        stage_run_all(again, RunDirectory(second.path(), again));
        const auto a = check::read_file(first / c.run_id / "metrics.csv");
        const auto b = check::read_file(second / c.run_id / "metrics.csv");
        o.require(!a.empty() && a == b, c.run_id + " metrics differ");
        o.detail << " " << c.run_id << ": " << check::count_lines(a) << " lines " << (a == b ? "identical" : "DIFFER")
                 << ";";
    }
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
        {"gradient oracle", gradient_oracle},
        {"clip invariant", clip_invariant},
        {"encoder inversion", encoder_inversion},
        {"ccp monotonicity", ccp_monotone},
        {"brute-force equivalence", brute_force_equivalence},
        {"energy distance trend", energy_trend},
        {"separation dominance", separation},
        {"end-to-end improvement", end_to_end},
        {"fold accounting", fold_accounting},
        {"entropy exactness", entropy_exactness},
        {"replay", replay},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k + 1);
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[k].second(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::string detail = o.detail.str();
        detail.erase(0, detail.find_first_not_of(' '));
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << std::setw(2) << id << " " << criteria[k].first
                  << " (" << std::fixed << std::setprecision(1) << secs << " s): " << detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
