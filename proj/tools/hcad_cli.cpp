// hcad: command-line entry point for every pipeline stage.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hcad/core/error.hpp"
#include "hcad/pipeline/config.hpp"
#include "hcad/pipeline/fixture.hpp"
#include "hcad/pipeline/stages.hpp"

namespace {

using hcad::pipeline::PipelineConfig;

struct GlobalFlags {
    std::string config;
    std::optional<long long> seed;
    std::optional<int> jobs;
    bool dry_run = false;
    std::vector<std::string> sets;
};

/// Stage-specific flags, each mapped onto a config key.
struct StageFlags {
    std::map<std::string, std::string> values;
    bool no_preprocess = false;

    void add(CLI::App* cmd, const std::string& flag, const std::string& key, const std::string& help) {
        cmd->add_option_function<std::string>(
            flag, [this, key](const std::string& v) { values[key] = v; }, help);
    }
};

void add_suppress_flags(CLI::App* cmd, StageFlags& f) {
    f.add(cmd, "--margin", "suppress.margin", "Pixels added to each side of a person box");
    f.add(cmd, "--kernel-size", "suppress.kernel_size", "Odd Gaussian kernel size");
    f.add(cmd, "--sigma", "suppress.sigma", "Gaussian sigma (0 derives it from the kernel size)");
}

void add_sample_flags(CLI::App* cmd, StageFlags& f) {
    f.add(cmd, "--clip-length", "sample.clip_length", "Frames per clip");
    f.add(cmd, "--height", "sample.height", "Resized frame height");
    f.add(cmd, "--width", "sample.width", "Resized frame width");
    cmd->add_flag("--no-preprocess", f.no_preprocess, "Keep raw 0..255 intensities");
}

void add_extract_flags(CLI::App* cmd, StageFlags& f) {
    f.add(cmd, "--adapter", "extract.adapter", "Backbone adapter: mock, mean-intensity or onnx-export");
    f.add(cmd, "--cache-dir", "cache_root", "Feature cache directory");
}

void add_evaluate_flags(CLI::App* cmd, StageFlags& f) {
    f.add(cmd, "--checkpoint", "evaluate.checkpoint", "Checkpoint to evaluate");
    f.add(cmd, "--test-manifest", "evaluate.test_manifest", "Manifest of the test videos");
    f.add(cmd, "--out", "evaluate.out", "Output directory for predictions and the report");
}

PipelineConfig build_config(const GlobalFlags& g, const StageFlags& f) {
    PipelineConfig cfg;
    if (!g.config.empty()) hcad::pipeline::apply_config_file(cfg, g.config);
    hcad::pipeline::apply_env_overrides(cfg);
    for (const auto& s : g.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw hcad::Error(hcad::ErrorKind::Config, "--set expects key=value, got " + s);
        hcad::pipeline::set_config_value(cfg, hcad::text::trim(s.substr(0, eq)), hcad::text::trim(s.substr(eq + 1)));
    }
    for (const auto& [k, v] : f.values) hcad::pipeline::set_config_value(cfg, k, v);
    if (f.no_preprocess) hcad::pipeline::set_config_value(cfg, "sample.preprocess", "false");
    if (g.seed) hcad::pipeline::set_config_value(cfg, "seed", std::to_string(*g.seed));
    if (g.jobs) hcad::pipeline::set_config_value(cfg, "jobs", std::to_string(*g.jobs));
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Human-centric video anomaly classification pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags g;
    app.add_option("--config", g.config, "key = value configuration file");
    app.add_option("--seed", g.seed, "Base random seed");
    app.add_option("--jobs", g.jobs, "Worker threads for per-video and per-sample work");
    app.add_flag("--dry-run", g.dry_run, "Print the execution plan without writing anything");
    app.add_option("--set", g.sets, "Override a config key (key=value); repeatable");

    StageFlags flags;
    std::map<std::string, CLI::App*> stage_cmds;
    const std::map<std::string, std::string> help = {
        {"track", "Link raw person detections into identity tracks"},
        {"suppress", "Blur everything outside expanded person boxes"},
        {"sample", "Sample, resize and normalise fixed-length clips"},
        {"extract", "Compute per-frame backbone features into the cache"},
        {"split", "Stratified train/validation/test split"},
        {"train", "Train the sequence classifier"},
        {"trials", "Repeat split+train+test with independent seeds"},
        {"evaluate", "Evaluate a checkpoint on a test manifest"},
        {"report", "Render the markdown report and plots"},
        {"pipeline", "Run every stage in order"},
    };
    for (const auto& name : hcad::pipeline::pipeline_order()) stage_cmds[name] = app.add_subcommand(name, help.at(name));
    stage_cmds["pipeline"] = app.add_subcommand("pipeline", help.at("pipeline"));

    add_suppress_flags(stage_cmds["suppress"], flags);
    add_sample_flags(stage_cmds["sample"], flags);
    add_extract_flags(stage_cmds["extract"], flags);
    add_evaluate_flags(stage_cmds["evaluate"], flags);
    stage_cmds["trials"]->add_option_function<std::string>(
        "--trials", [&](const std::string& v) { flags.values["trials.count"] = v; }, "Number of trials");
    auto* pipe = stage_cmds["pipeline"];
    add_suppress_flags(pipe, flags);
    add_sample_flags(pipe, flags);
    add_extract_flags(pipe, flags);

    auto* fixture = app.add_subcommand("make-fixture", "Write the synthetic five-class corpus and its config");
    std::string fixture_dir = "hcad_fixture";
    hcad::pipeline::FixtureOptions fixture_opt;
    fixture->add_option("dir", fixture_dir, "Destination directory");
    fixture->add_option("--videos-per-class", fixture_opt.videos_per_class, "Videos per class");

    auto* show = app.add_subcommand("config", "Print the effective configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (fixture->parsed()) {
            if (g.seed) fixture_opt.seed = static_cast<std::uint64_t>(*g.seed);
            if (g.dry_run) {
                std::cout << "would write fixture to " << fixture_dir << "\n";
                return 0;
            }
            const auto paths = hcad::pipeline::make_fixture(fixture_dir, fixture_opt);
            std::cout << "fixture written; run: hcad --config " << paths.config.string() << " pipeline\n";
            return 0;
        }
        const auto cfg = build_config(g, flags);
        if (show->parsed()) {
            std::cout << hcad::pipeline::serialize_config(cfg);
            return 0;
        }
        hcad::pipeline::Runner runner(cfg, {g.dry_run, &std::cout});
        if (g.dry_run) std::cout << "plan (dry run, nothing is written):\n";
        if (pipe->parsed()) {
            runner.run_pipeline();
        } else {
            for (const auto& [name, cmd] : stage_cmds) {
                if (cmd->parsed()) runner.run(name);
            }
        }
        return 0;
    } catch (const hcad::Error& e) {
        std::cerr << "hcad: error: " << e.what() << "\n";
        return hcad::exit_code_for(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "hcad: error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "hcad: error: " << e.what() << "\n";
        return 1;
    }
}
