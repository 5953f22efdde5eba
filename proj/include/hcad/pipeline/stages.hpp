#pragma once

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hcad/clip/sampler.hpp"
#include "hcad/core/binary_io.hpp"
#include "hcad/core/error.hpp"
#include "hcad/core/manifest.hpp"
#include "hcad/core/netpbm.hpp"
#include "hcad/core/parallel.hpp"
#include "hcad/core/text.hpp"
#include "hcad/core/track_log.hpp"
#include "hcad/eval/confusion.hpp"
#include "hcad/eval/curves.hpp"
#include "hcad/eval/report.hpp"
#include "hcad/features/backbone.hpp"
#include "hcad/features/feature_cache.hpp"
#include "hcad/model/checkpoint.hpp"
#include "hcad/pipeline/config.hpp"
#include "hcad/pipeline/hash.hpp"
#include "hcad/suppress/suppressor.hpp"
#include "hcad/tracking/byte_tracker.hpp"
#include "hcad/train/split.hpp"
#include "hcad/train/trainer.hpp"
#include "hcad/train/trials.hpp"

namespace hcad::pipeline {

inline const std::vector<std::string>& pipeline_order() {
    static const std::vector<std::string> stages = {"track", "suppress", "sample",   "extract", "split",
                                                    "train", "trials",   "evaluate", "report"};
    return stages;
}

/// Stages whose outputs a stage reads.
inline std::vector<std::string> upstream_of(const std::string& stage) {
    static const std::map<std::string, std::vector<std::string>> deps = {
        {"track", {}},           {"suppress", {"track"}}, {"sample", {"suppress"}},
        {"extract", {"sample"}}, {"split", {"extract"}},  {"train", {"split"}},
        {"trials", {"extract"}}, {"evaluate", {"train"}}, {"report", {"evaluate"}},
    };
    auto it = deps.find(stage);
    if (it == deps.end()) throw Error(ErrorKind::Config, "unknown stage: " + stage);
    return it->second;
}

/// What a completed stage consumed and produced; written to <output_root>/stages/<stage>.txt.
struct StageRecord {
    std::string stage;
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<std::pair<std::string, std::string>> inputs;   // path, sha256
    std::vector<std::pair<std::string, std::string>> outputs;  // path, sha256

    std::string serialize() const {
        std::string out = "stage " + stage + "\n";
        for (const auto& [k, v] : params) out += "param " + k + " " + v + "\n";
        for (const auto& [p, h] : inputs) out += "input " + h + " " + p + "\n";
        for (const auto& [p, h] : outputs) out += "output " + h + " " + p + "\n";
        return out;
    }

    static StageRecord parse(const std::string& text, const std::string& ctx) {
        StageRecord r;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto sp = line.find(' ');
            if (sp == std::string::npos) throw Error(ErrorKind::Format, ctx + ": malformed stage record");
            const auto kind = line.substr(0, sp);
            const auto rest = line.substr(sp + 1);
            if (kind == "stage") {
                r.stage = rest;
                continue;
            }
            const auto sp2 = rest.find(' ');
            const auto a = sp2 == std::string::npos ? rest : rest.substr(0, sp2);
            const auto b = sp2 == std::string::npos ? std::string() : rest.substr(sp2 + 1);
            if (kind == "param") r.params.emplace_back(a, b);
            else if (kind == "input") r.inputs.emplace_back(b, a);
            else if (kind == "output") r.outputs.emplace_back(b, a);
            else throw Error(ErrorKind::Format, ctx + ": unknown stage record line '" + kind + "'");
        }
        return r;
    }
};

enum class StageStatus { Ran, UpToDate, Planned };

struct StageOutcome {
    std::string stage;
    StageStatus status = StageStatus::Ran;
    std::size_t files_written = 0;
};

struct RunOptions {
    bool dry_run = false;
    std::ostream* log = &std::cout;
};

namespace detail {

inline std::vector<std::pair<std::string, std::string>> params_with_prefix(const PipelineConfig& c,
                                                                           const std::vector<std::string>& keys) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, v] : config_items(c)) {
        for (const auto& want : keys) {
            if (k == want || (want.back() == '.' && k.rfind(want, 0) == 0)) {
                out.emplace_back(k, v);
                break;
            }
        }
    }
    return out;
}

inline std::string prediction_header(const std::vector<std::string>& labels) {
    std::string h = "video_id,true_label,predicted_label";
    for (const auto& l : labels) h += ",p_" + l;
    return h + "\n";
}

}  // namespace detail

/// Parsed evaluate output.
struct Predictions {
    std::vector<std::string> labels;
    std::vector<std::string> video_ids;
    std::vector<int> y_true;
    std::vector<int> y_pred;
    std::vector<std::vector<double>> scores;
};

inline Predictions parse_predictions(const std::string& text, const std::string& ctx) {
    Predictions p;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::Format, ctx + ": empty predictions file");
    auto head = text::split(line, ',');
    if (head.size() < 4 || head[0] != "video_id") throw Error(ErrorKind::Format, ctx + ": bad predictions header");
    for (std::size_t i = 3; i < head.size(); ++i) p.labels.push_back(head[i].substr(2));
    const ClassSet classes(p.labels);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = text::split(line, ',');
        if (f.size() != head.size()) throw Error(ErrorKind::Format, ctx + ": wrong field count");
        p.video_ids.push_back(f[0]);
        p.y_true.push_back(static_cast<int>(classes.index_of(f[1])));
        p.y_pred.push_back(static_cast<int>(classes.index_of(f[2])));
        std::vector<double> s;
        for (std::size_t i = 3; i < f.size(); ++i) s.push_back(text::parse_double(f[i], ctx));
        p.scores.push_back(std::move(s));
    }
    return p;
}

inline train::TrainHistory parse_history(const std::string& text, const std::string& ctx) {
    train::TrainHistory h;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = text::split(line, ',');
        if (f.size() != 6) throw Error(ErrorKind::Format, ctx + ": wrong field count");
        train::EpochRecord r;
        r.epoch = static_cast<int>(text::parse_int(f[0], ctx));
        r.train_loss = text::parse_double(f[1], ctx);
        r.train_accuracy = text::parse_double(f[2], ctx);
        r.val_loss = text::parse_double(f[3], ctx);
        r.val_accuracy = text::parse_double(f[4], ctx);
        r.learning_rate = text::parse_double(f[5], ctx);
        if (r.val_loss < h.best_val_loss) {
            h.best_val_loss = r.val_loss;
            h.best_epoch = r.epoch;
        }
        h.epochs.push_back(r);
    }
    return h;
}

inline train::TrialSummary parse_trials(const std::string& text, const std::string& ctx) {
    std::vector<train::TrialResult> trials;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = text::split(line, ',');
        if (f.size() != 6) throw Error(ErrorKind::Format, ctx + ": wrong field count");
        trials.push_back({static_cast<std::uint64_t>(std::stoull(f[1])), text::parse_double(f[2], ctx),
                          text::parse_double(f[3], ctx), static_cast<int>(text::parse_int(f[4], ctx)),
                          static_cast<int>(text::parse_int(f[5], ctx))});
    }
    return train::summarize_trials(std::move(trials));
}

/// Runs named stages against one configuration. Stages exchange data only
/// through files under the output root.
class Runner {
public:
    Runner(PipelineConfig cfg, RunOptions opt = {}) : cfg_(std::move(cfg)), opt_(opt) { cfg_.validate(); }

    StageOutcome run(const std::string& stage) { return run_stage(stage, {}); }

    std::vector<StageOutcome> run_pipeline() {
        std::vector<StageOutcome> out;
        std::set<std::string> pending;
        for (const auto& s : pipeline_order()) {
            out.push_back(run_stage(s, pending));
            if (out.back().status == StageStatus::Planned) pending.insert(s);
        }
        return out;
    }

    const PipelineConfig& config() const { return cfg_; }

    fs::path record_path(const std::string& stage) const { return cfg_.stages_dir() / (stage + ".txt"); }

    std::optional<StageRecord> load_record(const std::string& stage) const {
        const auto p = record_path(stage);
        if (!fs::exists(p)) return std::nullopt;
        return StageRecord::parse(io::read_file(p), p.string());
    }

private:
    struct Plan {
        std::vector<std::pair<std::string, std::string>> params;
        std::vector<fs::path> inputs;
        std::string summary;
        std::function<std::vector<fs::path>()> execute;
    };

    std::ostream& log() { return *opt_.log; }

    StageOutcome run_stage(const std::string& stage, const std::set<std::string>& pending) {
        bool after_pending = false;
        for (const auto& up : required_upstream(stage)) {
            if (pending.count(up)) {
                after_pending = true;
            } else if (!fs::exists(record_path(up))) {
                throw Error(ErrorKind::MissingDependency, "stage '" + stage + "' needs the outputs of stage '" + up +
                                                              "'; run `hcad " + up + "` first");
            }
        }
        if (after_pending) {
            log() << "[" << stage << "] would run after upstream stages\n";
            return {stage, StageStatus::Planned, 0};
        }

        auto plan = make_plan(stage);
        StageRecord rec;
        rec.stage = stage;
        rec.params = plan.params;
        for (const auto& p : plan.inputs) {
            if (!fs::exists(p)) throw Error(ErrorKind::MissingDependency, "stage '" + stage + "': missing input " + p.string());
            rec.inputs.emplace_back(p.generic_string(), sha256_file(p));
        }

        if (up_to_date(rec)) {
            log() << "[" << stage << "] up to date\n";
            return {stage, StageStatus::UpToDate, 0};
        }
        if (opt_.dry_run) {
            log() << "[" << stage << "] would run: " << plan.summary << " (" << rec.inputs.size() << " input files)\n";
            return {stage, StageStatus::Planned, 0};
        }

        auto outputs = plan.execute();
        std::sort(outputs.begin(), outputs.end());
        for (const auto& p : outputs) rec.outputs.emplace_back(p.generic_string(), sha256_file(p));
        io::write_file_atomic(record_path(stage), rec.serialize());
        log() << "[" << stage << "] done: " << outputs.size() << " files written\n";
        return {stage, StageStatus::Ran, outputs.size()};
    }

    bool up_to_date(const StageRecord& fresh) const {
        const auto old = load_record(fresh.stage);
        if (!old || old->params != fresh.params || old->inputs != fresh.inputs || old->outputs.empty()) return false;
        for (const auto& [p, h] : old->outputs) {
            if (!fs::exists(p) || sha256_file(p) != h) return false;
        }
        return true;
    }

    std::vector<std::string> required_upstream(const std::string& stage) const {
        if (stage == "evaluate") {
            std::vector<std::string> ups;
            if (!cfg_.eval_checkpoint) ups.push_back("train");
            if (!cfg_.eval_test_manifest) ups.push_back("split");
            return ups;
        }
        return upstream_of(stage);
    }

    DatasetManifest manifest() const { return load_manifest(cfg_.manifest, cfg_.class_set()); }

    fs::path frame_dir(const ManifestEntry& e) const {
        return resolve_path(cfg_.manifest.parent_path(), e.frame_dir);
    }

    /// The dataset manifest with absolute frame dirs and cache feature paths.
    DatasetManifest resolved_manifest() const {
        auto m = manifest();
        for (auto& e : m.entries) {
            e.frame_dir = fs::absolute(frame_dir(e)).lexically_normal().generic_string();
            e.feature_path = fs::absolute(features::feature_path(cfg_.cache_dir(), e.video_id)).lexically_normal().generic_string();
        }
        return m;
    }

    static std::vector<fs::path> frames_in(const fs::path& dir) { return netpbm::list_frames(dir); }

    train::TrainConfig train_config(int input_dim, int num_classes) const {
        auto tc = cfg_.train;
        tc.model = cfg_.model_config(input_dim, num_classes);
        tc.seed = cfg_.seed;
        tc.jobs = cfg_.jobs;
        return tc;
    }

    Plan make_plan(const std::string& stage) {
        if (stage == "track") return plan_track();
        if (stage == "suppress") return plan_suppress();
        if (stage == "sample") return plan_sample();
        if (stage == "extract") return plan_extract();
        if (stage == "split") return plan_split();
        if (stage == "train") return plan_train();
        if (stage == "trials") return plan_trials();
        if (stage == "evaluate") return plan_evaluate();
        if (stage == "report") return plan_report();
        throw Error(ErrorKind::Config, "unknown stage: " + stage);
    }

    Plan plan_track() {
        Plan p;
        p.params = detail::params_with_prefix(cfg_, {"classes", "track."});
        const auto m = manifest();
        p.inputs.push_back(cfg_.manifest);
        for (const auto& e : m.entries) {
            const auto det = cfg_.detections_root / (e.video_id + ".txt");
            if (!fs::exists(det)) {
                throw Error(ErrorKind::MissingDependency, "no detections for video " + e.video_id + ": " + det.string());
            }
            p.inputs.push_back(det);
            p.params.emplace_back("frames:" + e.video_id, std::to_string(frames_in(frame_dir(e)).size()));
        }
        p.summary = "track " + std::to_string(m.entries.size()) + " videos into " + cfg_.tracks_dir().string();
        p.execute = [this, m] {
            std::vector<fs::path> out(m.entries.size());
            parallel_for(m.entries.size(), cfg_.jobs, [&](std::size_t i) {
                const auto& e = m.entries[i];
                const auto n = static_cast<std::int64_t>(frames_in(frame_dir(e)).size());
                const auto raw = read_track_log(cfg_.detections_root / (e.video_id + ".txt"));
                const auto report = validate_track_log(raw, n);
                if (!report.valid()) {
                    throw Error(ErrorKind::Validation, "detections for video " + e.video_id + ": " +
                                                           std::to_string(report.issues.size()) +
                                                           " issues, first: " + report.issues.front().message);
                }
                const auto log = tracking::track_video(detections_by_frame(raw, n), cfg_.association);
                out[i] = cfg_.tracks_dir() / (e.video_id + ".txt");
                write_track_log(out[i], log);
            });
            return out;
        };
        return p;
    }

    Plan plan_suppress() {
        Plan p;
        p.params = detail::params_with_prefix(cfg_, {"suppress."});
        const auto m = manifest();
        for (const auto& e : m.entries) {
            p.inputs.push_back(cfg_.tracks_dir() / (e.video_id + ".txt"));
            for (const auto& f : frames_in(frame_dir(e))) p.inputs.push_back(f);
        }
        p.summary = "blur backgrounds of " + std::to_string(m.entries.size()) + " videos into " +
                    cfg_.suppressed_dir().string();
        p.execute = [this, m] {
            std::vector<std::vector<fs::path>> per(m.entries.size());
            parallel_for(m.entries.size(), cfg_.jobs, [&](std::size_t i) {
                const auto& e = m.entries[i];
                std::vector<Image8> frames;
                for (const auto& f : frames_in(frame_dir(e))) frames.push_back(netpbm::read(f));
                const auto log = read_track_log(cfg_.tracks_dir() / (e.video_id + ".txt"));
                const auto out = suppress::suppress_video(frames, log, cfg_.suppression);
                const auto dir = cfg_.suppressed_dir() / e.video_id;
                for (std::size_t f = 0; f < out.size(); ++f) {
                    per[i].push_back(dir / netpbm::frame_name(f, out[f].channels()));
                    netpbm::write(per[i].back(), out[f]);
                }
            });
            std::vector<fs::path> all;
            for (auto& v : per) all.insert(all.end(), v.begin(), v.end());
            return all;
        };
        return p;
    }

    Plan plan_sample() {
        Plan p;
        p.params = detail::params_with_prefix(cfg_, {"sample."});
        const auto m = manifest();
        for (const auto& e : m.entries) {
            for (const auto& f : frames_in(cfg_.suppressed_dir() / e.video_id)) p.inputs.push_back(f);
        }
        p.summary = "sample " + std::to_string(cfg_.sampler.clip_length) + "-frame clips into " + cfg_.clips_dir().string();
        p.execute = [this, m] {
            std::vector<fs::path> out(m.entries.size());
            parallel_for(m.entries.size(), cfg_.jobs, [&](std::size_t i) {
                const auto& e = m.entries[i];
                std::vector<Image8> frames;
                for (const auto& f : frames_in(cfg_.suppressed_dir() / e.video_id)) frames.push_back(netpbm::read(f));
                out[i] = cfg_.clips_dir() / (e.video_id + ".clip");
                clip::store_clip(out[i], clip::assemble_clip(frames, cfg_.sampler));
            });
            return out;
        };
        return p;
    }

    Plan plan_extract() {
        Plan p;
        p.params = detail::params_with_prefix(cfg_, {"extract."});
        features::make_adapter(cfg_.adapter, static_cast<std::size_t>(cfg_.feature_dim), cfg_.adapter_seed);
        const auto m = manifest();
        for (const auto& e : m.entries) p.inputs.push_back(cfg_.clips_dir() / (e.video_id + ".clip"));
        p.summary = "extract " + cfg_.adapter + " features (D=" + std::to_string(cfg_.feature_dim) + ") into " +
                    cfg_.cache_dir().string();
        p.execute = [this, m] {
            std::vector<fs::path> out(m.entries.size());
            parallel_for(m.entries.size(), cfg_.jobs, [&](std::size_t i) {
                const auto& e = m.entries[i];
                auto adapter =
                    features::make_adapter(cfg_.adapter, static_cast<std::size_t>(cfg_.feature_dim), cfg_.adapter_seed);
                const auto clip = clip::load_clip(cfg_.clips_dir() / (e.video_id + ".clip"));
                out[i] = features::feature_path(cfg_.cache_dir(), e.video_id);
                features::store_features(features::extract_features(clip, *adapter, e.video_id, e.class_label), out[i]);
            });
            return out;
        };
        return p;
    }

    Plan plan_split() {
        Plan p;
        p.params = detail::params_with_prefix(cfg_, {"classes", "seed", "split.", "cache_root", "output_root"});
        p.inputs.push_back(cfg_.manifest);
        p.summary = "stratified train/val/test split into " + cfg_.splits_dir().string();
        p.execute = [this] {
            const auto m = resolved_manifest();
            auto [train_full, test] = train::stratified_split(m, {cfg_.test_fraction, cfg_.seed, cfg_.stratify});
            auto [train_m, val_m] =
                train::stratified_split(train_full, {cfg_.validation_fraction, mix_seed(cfg_.seed, 77), cfg_.stratify});
            const auto dir = cfg_.splits_dir();
            save_manifest(dir / "train.csv", train_m);
            save_manifest(dir / "val.csv", val_m);
            save_manifest(dir / "test.csv", test);
            return std::vector<fs::path>{dir / "train.csv", dir / "val.csv", dir / "test.csv"};
        };
        return p;
    }

    void add_feature_inputs(Plan& p, const DatasetManifest& m) const {
        train::FeatureStore store(cfg_.cache_dir());
        for (const auto& e : m.entries) p.inputs.push_back(store.path_for(e));
    }

    Plan plan_train() {
        Plan p;
        p.params = detail::params_with_prefix(cfg_, {"seed", "model.", "train."});
        const auto classes = cfg_.class_set();
        const auto train_csv = cfg_.splits_dir() / "train.csv", val_csv = cfg_.splits_dir() / "val.csv";
        const auto train_m = load_manifest(train_csv, classes), val_m = load_manifest(val_csv, classes);
        p.inputs = {train_csv, val_csv};
        add_feature_inputs(p, train_m);
        add_feature_inputs(p, val_m);
        p.summary = "train " + cfg_.preset + " on " + std::to_string(train_m.entries.size()) + " videos (" +
                    std::to_string(val_m.entries.size()) + " validation) into " + cfg_.model_dir().string();
        p.execute = [this, train_m, val_m] {
            train::FeatureStore store(cfg_.cache_dir(), static_cast<std::size_t>(cfg_.feature_dim));
            const auto tc = train_config(cfg_.feature_dim, static_cast<int>(train_m.classes.size()));
            train::TrainHistory hist;
            const auto ckpt = cfg_.model_dir() / "best.seqc";
            train::train(train_m, val_m, store, tc, ckpt, &hist);
            io::write_file_atomic(cfg_.model_dir() / "history.csv", hist.to_csv());
            return std::vector<fs::path>{ckpt, cfg_.model_dir() / "history.csv"};
        };
        return p;
    }

    Plan plan_trials() {
        Plan p;
        p.params = detail::params_with_prefix(cfg_, {"classes", "seed", "split.", "model.", "train.", "trials."});
        const auto m = resolved_manifest();
        p.inputs.push_back(cfg_.manifest);
        add_feature_inputs(p, m);
        p.summary = std::to_string(cfg_.trials) + " independent trials into " + cfg_.trials_dir().string();
        p.execute = [this, m] {
            train::FeatureStore store(cfg_.cache_dir(), static_cast<std::size_t>(cfg_.feature_dim));
            train::TrialConfig tc{train_config(cfg_.feature_dim, static_cast<int>(m.classes.size())), cfg_.test_fraction,
                                  cfg_.validation_fraction};
            const auto summary = train::run_trials(m, store, tc, train::trial_seeds(cfg_.seed, cfg_.trials));
            const auto dir = cfg_.trials_dir();
            io::write_file_atomic(dir / "trials.csv", summary.to_csv());
            io::write_file_atomic(dir / "summary.md", "# Trials\n\n" + summary.to_text());
            return std::vector<fs::path>{dir / "summary.md", dir / "trials.csv"};
        };
        return p;
    }

    Plan plan_evaluate() {
        Plan p;
        p.params = detail::params_with_prefix(cfg_, {"evaluate."});
        const auto ckpt_path = cfg_.checkpoint_path();
        const auto test_path = cfg_.test_manifest_path();
        for (const auto& f : {ckpt_path, test_path}) {
            if (!fs::exists(f)) throw Error(ErrorKind::MissingDependency, "evaluate: missing " + f.string());
        }
        const auto ck = model::load_checkpoint(ckpt_path);
        const ClassSet classes = ck.class_labels.empty() ? cfg_.class_set() : ClassSet(ck.class_labels);
        const auto test = load_manifest(test_path, classes);
        p.inputs = {ckpt_path, test_path};
        add_feature_inputs(p, test);
        p.summary = "evaluate " + ckpt_path.string() + " on " + std::to_string(test.entries.size()) + " videos into " +
                    cfg_.eval_dir().string();
        p.execute = [this, ck, classes, test] {
            train::FeatureStore store(cfg_.cache_dir(), static_cast<std::size_t>(ck.params.config.input_dim));
            const auto set = train::labeled_set(test, store);
            const auto ev = train::evaluate_model(ck.params, set, cfg_.jobs);
            const auto& labels = classes.labels();
            std::string csv = detail::prediction_header(labels);
            std::vector<std::vector<double>> scores;
            for (std::size_t i = 0; i < set.size(); ++i) {
                csv += test.entries[i].video_id + "," + labels[static_cast<std::size_t>(set.labels[i])] + "," +
                       labels[static_cast<std::size_t>(ev.predictions[i])];
                std::vector<double> s(ev.probabilities[i].data(), ev.probabilities[i].data() + ev.probabilities[i].size());
                for (double v : s) csv += "," + text::exact(v);
                csv += "\n";
                scores.push_back(std::move(s));
            }
            const auto dir = cfg_.eval_dir();
            io::write_file_atomic(dir / "predictions.csv", csv);
            auto in = eval::report_inputs(
                eval::confusion_matrix(set.labels, ev.predictions, static_cast<int>(labels.size()), labels),
                eval::one_vs_rest_curves(scores, set.labels, labels));
            in.title = "Test-set evaluation";
            auto files = eval::render_report(in, dir);
            files.push_back(dir / "predictions.csv");
            return files;
        };
        return p;
    }

    Plan plan_report() {
        Plan p;
        const auto preds = cfg_.eval_dir() / "predictions.csv";
        const auto hist = cfg_.model_dir() / "history.csv";
        const auto trials = cfg_.trials_dir() / "trials.csv";
        p.inputs.push_back(preds);
        for (const auto& f : {hist, trials}) {
            if (fs::exists(f)) p.inputs.push_back(f);
        }
        p.summary = "render report into " + cfg_.report_dir().string();
        p.execute = [this, preds, hist, trials] {
            const auto pr = parse_predictions(io::read_file(preds), preds.string());
            auto in = eval::report_inputs(
                eval::confusion_matrix(pr.y_true, pr.y_pred, static_cast<int>(pr.labels.size()), pr.labels),
                eval::one_vs_rest_curves(pr.scores, pr.y_true, pr.labels));
            in.title = "Anomaly classification report";
            if (fs::exists(hist)) in.history = parse_history(io::read_file(hist), hist.string());
            if (fs::exists(trials)) in.trials = parse_trials(io::read_file(trials), trials.string());
            return eval::render_report(in, cfg_.report_dir());
        };
        return p;
    }

    PipelineConfig cfg_;
    RunOptions opt_;
};

}  // namespace hcad::pipeline
