#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aisel/aisel.hpp"

namespace {

namespace fs = std::filesystem;
using aisel::Json;
using aisel::pipeline::ExperimentConfig;
using aisel::pipeline::RunDirectory;

struct Options {
    std::string config;
    std::vector<std::string> overrides;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
};

using Stage = std::function<void(const ExperimentConfig&, const RunDirectory&)>;

const std::vector<std::pair<std::string, std::string>> kCommands = {
    {"train-gin", "train the generator, critic and encoder"},
    {"train-native", "train the classifier on actual data"},
    {"sample", "select virtual features"},
    {"label", "label the virtual images with the oracle"},
    {"retrain", "train the improved classifier on actual plus virtual data"},
    {"run-all", "every stage in order, then eval"},
    {"eval", "score both classifiers and write metrics.csv and report.json"},
    {"export-grid", "entropy grid and design overlay CSVs"},
};

Stage stage_for(const std::string& name) {
    namespace p = aisel::pipeline;
    if (name == "train-gin") return p::stage_train_gin;
    if (name == "train-native") return p::stage_train_native;
    if (name == "sample") return p::stage_sample;
    if (name == "label") return p::stage_label;
    if (name == "retrain") return p::stage_retrain;
    if (name == "run-all") return [](const auto& c, const auto& r) { p::stage_run_all(c, r); };
    if (name == "eval") return [](const auto& c, const auto& r) { p::stage_eval(c, r); };
    return p::stage_export_grid;
}

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const aisel::ShapeError*>(&e)) return "shape_error";
    if (dynamic_cast<const aisel::ArgumentError*>(&e)) return "argument_error";
    if (dynamic_cast<const aisel::NumericError*>(&e)) return "numeric_error";
    if (dynamic_cast<const aisel::FormatError*>(&e)) return "format_error";
    if (dynamic_cast<const aisel::OracleError*>(&e)) return "oracle_error";
    if (dynamic_cast<const aisel::Error*>(&e)) return "error";
    return "internal_error";
}

void write_error(const RunDirectory& run, const std::string& command, const std::exception& e) {
    try {
        fs::create_directories(run.root());
        std::ofstream os(run.error());
        os << Json{{"error", error_kind(e)}, {"message", e.what()}, {"command", command}}.dump(1) << '\n';
    } catch (...) {
        std::cerr << "aisel: could not write " << run.error() << '\n';
    }
}

int execute(const std::string& command, const Options& opt) {
    ExperimentConfig cfg;
    try {
        auto overrides = opt.overrides;
        if (opt.seed) overrides.push_back("seed=" + std::to_string(*opt.seed));
        cfg = aisel::pipeline::load_experiment_config(opt.config, overrides);
    } catch (const aisel::ConfigError& e) {
        std::cerr << "aisel: " << e.what() << '\n';
        return 2;
    }
    const RunDirectory run(opt.out, cfg);
    try {
        fs::remove(run.error());
        aisel::pipeline::write_resolved_config(run, cfg);
        stage_for(command)(cfg, run);
    } catch (const aisel::ConfigError& e) {
        std::cerr << "aisel: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "aisel " << command << ": " << e.what() << '\n';
        write_error(run, command, e);
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active image synthesis: GIN training, uncertainty-driven sampling, oracle labeling, retraining"};
    app.require_subcommand(1);
    Options opt;
    std::map<CLI::App*, std::string> names;
    for (const auto& [name, help] : kCommands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config, "experiment config JSON (or a report.json to replay)");
        sub->add_option("--set", opt.overrides, "dotted-path override key=value, repeatable")->take_all();
        sub->add_option("--out", opt.out, "output directory")->capture_default_str();
        sub->add_option("--seed", opt.seed, "top-level seed");
        names[sub] = name;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    for (const auto& [sub, name] : names) {
        if (sub->parsed()) return execute(name, opt);
    }
    return 2;
}
